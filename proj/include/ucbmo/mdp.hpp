#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ucbmo/rng.hpp"

namespace ucbmo {

// Finite-horizon tabular MDP with step-dependent dynamics and deterministic
// rewards in [0, 1]. All indices in code and in the JSON file format are
// 0-based; the conventional 1-based names map as x1 -> state 0, a1 -> action
// 0, step h=1 -> step 0.

inline constexpr double kProbTolerance = 1e-9;

struct MdpSpec {
    int num_states = 0;   // S
    int num_actions = 0;  // A
    int horizon = 0;      // H, steps per episode

    std::vector<double> transitions;   // P[h][x][a][y], flattened, size H*S*A*S
    std::vector<double> rewards;       // r[h][x][a], flattened, size H*S*A
    std::vector<double> initial_dist;  // rho[x], size S

    double p(int h, int x, int a, int y) const {
        return transitions[((static_cast<std::size_t>(h) * num_states + x) * num_actions + a) *
                               num_states +
                           y];
    }
    double& p(int h, int x, int a, int y) {
        return transitions[((static_cast<std::size_t>(h) * num_states + x) * num_actions + a) *
                               num_states +
                           y];
    }
    double r(int h, int x, int a) const {
        return rewards[(static_cast<std::size_t>(h) * num_states + x) * num_actions + a];
    }
    double& r(int h, int x, int a) {
        return rewards[(static_cast<std::size_t>(h) * num_states + x) * num_actions + a];
    }

    std::span<const double> transition_row(int h, int x, int a) const {
        const std::size_t off =
            ((static_cast<std::size_t>(h) * num_states + x) * num_actions + a) * num_states;
        return {transitions.data() + off, static_cast<std::size_t>(num_states)};
    }

    bool in_range(int h, int x, int a) const {
        return h >= 0 && h < horizon && x >= 0 && x < num_states && a >= 0 && a < num_actions;
    }
};

struct Violation {
    std::string message;
    // Coordinates of the offending entry; -1 where not applicable.
    int h = -1;
    int x = -1;
    int a = -1;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }

    std::string to_string() const {
        if (ok()) return "ok";
        std::ostringstream out;
        for (const Violation& v : violations) {
            out << v.message;
            if (v.h >= 0) out << " at (h=" << v.h << ", x=" << v.x << ", a=" << v.a << ")";
            out << '\n';
        }
        return out.str();
    }
};

/// Checks every structural and numeric invariant of a spec: declared sizes
/// match table shapes, transition rows are stochastic within kProbTolerance
/// with entries in [0, 1], rewards lie in [0, 1], and the initial
/// distribution sums to 1. Specs are never renormalized; a row off by more
/// than the tolerance is reported, not repaired.
inline ValidationReport validate_mdp(const MdpSpec& spec) {
    ValidationReport report;
    auto add = [&](std::string msg, int h = -1, int x = -1, int a = -1) {
        report.violations.push_back({std::move(msg), h, x, a});
    };

    if (spec.num_states <= 0) add("num_states must be positive");
    if (spec.num_actions <= 0) add("num_actions must be positive");
    if (spec.horizon <= 0) add("horizon must be positive");
    if (!report.ok()) return report;

    const std::size_t S = spec.num_states, A = spec.num_actions, H = spec.horizon;
    if (spec.transitions.size() != H * S * A * S) {
        add("transition table shape does not match declared dimensions");
        return report;
    }
    if (spec.rewards.size() != H * S * A) {
        add("reward table shape does not match declared dimensions");
        return report;
    }
    if (spec.initial_dist.size() != S) {
        add("initial distribution length does not match num_states");
        return report;
    }

    for (int h = 0; h < spec.horizon; ++h) {
        for (int x = 0; x < spec.num_states; ++x) {
            for (int a = 0; a < spec.num_actions; ++a) {
                double row_sum = 0.0;
                bool entry_ok = true;
                for (int y = 0; y < spec.num_states; ++y) {
                    const double pr = spec.p(h, x, a, y);
                    if (pr < 0.0 || pr > 1.0 || pr != pr) entry_ok = false;
                    row_sum += pr;
                }
                if (!entry_ok) add("transition probability out of [0,1]", h, x, a);
                if (std::abs(row_sum - 1.0) > kProbTolerance)
                    add("row not stochastic (sum = " + std::to_string(row_sum) + ")", h, x, a);
                const double rew = spec.r(h, x, a);
                if (!(rew >= 0.0 && rew <= 1.0)) add("reward out of [0,1]", h, x, a);
            }
        }
    }

    double dist_sum = 0.0;
    for (int x = 0; x < spec.num_states; ++x) {
        const double pr = spec.initial_dist[x];
        if (pr < 0.0 || pr > 1.0 || pr != pr)
            add("initial probability out of [0,1]", -1, x, -1);
        dist_sum += pr;
    }
    if (std::abs(dist_sum - 1.0) > kProbTolerance)
        add("initial distribution not stochastic (sum = " + std::to_string(dist_sum) + ")");

    return report;
}

/// Inverse-CDF draw from a probability vector, consuming exactly one uniform.
inline int sample_categorical(std::span<const double> probs, RngStream& rng) {
    const double u = rng.next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    // u fell into the <= kProbTolerance slack of an almost-1 row; return the
    // last index carrying mass.
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0.0) return static_cast<int>(i);
    throw std::logic_error("sample_categorical: zero-mass distribution");
}

inline int sample_initial_state(const MdpSpec& spec, RngStream& rng) {
    return sample_categorical(spec.initial_dist, rng);
}

struct StepOutcome {
    int next_state;
    double reward;
};

/// One environment step. The reward is the table entry r[h][x][a] exactly and
/// never depends on the sampled successor. The successor is sampled even at
/// the last step of an episode.
inline StepOutcome step(const MdpSpec& spec, int x, int a, int h, RngStream& rng) {
    if (!spec.in_range(h, x, a))
        throw std::out_of_range("step: index out of range (h=" + std::to_string(h) +
                                ", x=" + std::to_string(x) + ", a=" + std::to_string(a) + ")");
    const double reward = spec.r(h, x, a);
    const int next = sample_categorical(spec.transition_row(h, x, a), rng);
    return {next, reward};
}

// ---------------------------------------------------------------------------
// JSON file format. Fields: num_states, num_actions, horizon,
// transitions (H x S x A x S nested arrays), rewards (H x S x A),
// initial_dist (S). Indices are 0-based.

inline nlohmann::json mdp_to_json(const MdpSpec& spec) {
    nlohmann::json trans = nlohmann::json::array();
    for (int h = 0; h < spec.horizon; ++h) {
        nlohmann::json per_state = nlohmann::json::array();
        for (int x = 0; x < spec.num_states; ++x) {
            nlohmann::json per_action = nlohmann::json::array();
            for (int a = 0; a < spec.num_actions; ++a) {
                nlohmann::json row = nlohmann::json::array();
                for (int y = 0; y < spec.num_states; ++y) row.push_back(spec.p(h, x, a, y));
                per_action.push_back(std::move(row));
            }
            per_state.push_back(std::move(per_action));
        }
        trans.push_back(std::move(per_state));
    }
    nlohmann::json rew = nlohmann::json::array();
    for (int h = 0; h < spec.horizon; ++h) {
        nlohmann::json per_state = nlohmann::json::array();
        for (int x = 0; x < spec.num_states; ++x) {
            nlohmann::json row = nlohmann::json::array();
            for (int a = 0; a < spec.num_actions; ++a) row.push_back(spec.r(h, x, a));
            per_state.push_back(std::move(row));
        }
        rew.push_back(std::move(per_state));
    }
    return nlohmann::json{{"num_states", spec.num_states},
                          {"num_actions", spec.num_actions},
                          {"horizon", spec.horizon},
                          {"transitions", std::move(trans)},
                          {"rewards", std::move(rew)},
                          {"initial_dist", spec.initial_dist}};
}

inline MdpSpec mdp_from_json(const nlohmann::json& j) {
    MdpSpec spec;
    spec.num_states = j.at("num_states").get<int>();
    spec.num_actions = j.at("num_actions").get<int>();
    spec.horizon = j.at("horizon").get<int>();
    if (spec.num_states <= 0 || spec.num_actions <= 0 || spec.horizon <= 0)
        throw std::runtime_error("mdp_from_json: dimensions must be positive");

    const auto& trans = j.at("transitions");
    const auto& rew = j.at("rewards");
    const auto& dist = j.at("initial_dist");
    const std::size_t S = spec.num_states, A = spec.num_actions, H = spec.horizon;
    spec.transitions.resize(H * S * A * S);
    spec.rewards.resize(H * S * A);

    if (trans.size() != H || rew.size() != H || dist.size() != S)
        throw std::runtime_error("mdp_from_json: table shape does not match dimensions");
    for (std::size_t h = 0; h < H; ++h) {
        if (trans[h].size() != S || rew[h].size() != S)
            throw std::runtime_error("mdp_from_json: table shape does not match dimensions");
        for (std::size_t x = 0; x < S; ++x) {
            if (trans[h][x].size() != A || rew[h][x].size() != A)
                throw std::runtime_error("mdp_from_json: table shape does not match dimensions");
            for (std::size_t a = 0; a < A; ++a) {
                if (trans[h][x][a].size() != S)
                    throw std::runtime_error("mdp_from_json: transition row length mismatch");
                for (std::size_t y = 0; y < S; ++y)
                    spec.p(h, x, a, y) = trans[h][x][a][y].get<double>();
                spec.r(h, x, a) = rew[h][x][a].get<double>();
            }
        }
    }
    spec.initial_dist = dist.get<std::vector<double>>();
    return spec;
}

inline MdpSpec load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open MDP file: " + path);
    nlohmann::json j;
    in >> j;
    return mdp_from_json(j);
}

inline void save_mdp(const MdpSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write MDP file: " + path);
    out << mdp_to_json(spec).dump(2) << '\n';
}

}  // namespace ucbmo
