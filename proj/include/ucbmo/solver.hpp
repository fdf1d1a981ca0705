#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ucbmo/mdp.hpp"

namespace ucbmo {

/// State/action value tables indexed by (step, state, action) and
/// (step, state). The value table carries an explicit extra row at step H,
/// identically zero, so the terminal boundary condition is stored data
/// rather than an implicit convention.
struct ValueTables {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> q;  // size H*S*A
    std::vector<double> v;  // size (H+1)*S, row H all zero

    static ValueTables zeros(int S, int A, int H) {
        ValueTables t;
        t.num_states = S;
        t.num_actions = A;
        t.horizon = H;
        t.q.assign(static_cast<std::size_t>(H) * S * A, 0.0);
        t.v.assign(static_cast<std::size_t>(H + 1) * S, 0.0);
        return t;
    }

    double q_at(int h, int x, int a) const {
        return q[(static_cast<std::size_t>(h) * num_states + x) * num_actions + a];
    }
    double& q_at(int h, int x, int a) {
        return q[(static_cast<std::size_t>(h) * num_states + x) * num_actions + a];
    }
    /// h may be `horizon`, addressing the zero boundary row.
    double v_at(int h, int x) const {
        return v[static_cast<std::size_t>(h) * num_states + x];
    }
    double& v_at(int h, int x) {
        return v[static_cast<std::size_t>(h) * num_states + x];
    }
};

/// One action per (step, state).
struct DeterministicPolicy {
    int num_states = 0;
    int horizon = 0;
    std::vector<int> actions;  // size H*S

    static DeterministicPolicy filled(int S, int H, int action) {
        DeterministicPolicy p;
        p.num_states = S;
        p.horizon = H;
        p.actions.assign(static_cast<std::size_t>(H) * S, action);
        return p;
    }

    int at(int h, int x) const { return actions[static_cast<std::size_t>(h) * num_states + x]; }
    int& at(int h, int x) { return actions[static_cast<std::size_t>(h) * num_states + x]; }
};

namespace detail {

// Backward-induction policy evaluation into caller-owned buffers
// (q: H*S*A, v: (H+1)*S with row H pre-zeroed). Shared by evaluate_policy and
// the brute-force enumeration, which calls it once per candidate policy.
inline void evaluate_policy_into(const MdpSpec& spec, const int* actions, double* q, double* v) {
    const int S = spec.num_states, A = spec.num_actions, H = spec.horizon;
    for (int h = H - 1; h >= 0; --h) {
        const double* v_next = v + static_cast<std::size_t>(h + 1) * S;
        double* v_here = v + static_cast<std::size_t>(h) * S;
        double* q_here = q + static_cast<std::size_t>(h) * S * A;
        for (int x = 0; x < S; ++x) {
            for (int a = 0; a < A; ++a) {
                const double* row = spec.transitions.data() +
                                    ((static_cast<std::size_t>(h) * S + x) * A + a) * S;
                double expect = 0.0;
                for (int y = 0; y < S; ++y) expect += row[y] * v_next[y];
                q_here[static_cast<std::size_t>(x) * A + a] = spec.r(h, x, a) + expect;
            }
            const int pick = actions[static_cast<std::size_t>(h) * S + x];
            v_here[x] = q_here[static_cast<std::size_t>(x) * A + pick];
        }
    }
}

}  // namespace detail

/**
 * Exact optimal values by backward induction from the last step: Q at step h
 * is the immediate reward plus the transition-weighted optimal value at step
 * h+1, and V is the per-state maximum of Q over actions.
 */
inline ValueTables solve_optimal(const MdpSpec& spec) {
    const int S = spec.num_states, A = spec.num_actions, H = spec.horizon;
    ValueTables tables = ValueTables::zeros(S, A, H);
    for (int h = H - 1; h >= 0; --h) {
        for (int x = 0; x < S; ++x) {
            double best = -1.0;
            for (int a = 0; a < A; ++a) {
                const auto row = spec.transition_row(h, x, a);
                double expect = 0.0;
                for (int y = 0; y < S; ++y) expect += row[y] * tables.v_at(h + 1, y);
                const double qv = spec.r(h, x, a) + expect;
                tables.q_at(h, x, a) = qv;
                if (a == 0 || qv > best) best = qv;
            }
            tables.v_at(h, x) = best;
        }
    }
    return tables;
}

/**
 * Exact value of a fixed deterministic policy, same recursion with V picking
 * the policy's action instead of the maximum.
 */
inline ValueTables evaluate_policy(const MdpSpec& spec, const DeterministicPolicy& policy) {
    if (policy.num_states != spec.num_states || policy.horizon != spec.horizon)
        throw std::invalid_argument("evaluate_policy: policy shape does not match spec");
    for (int entry : policy.actions)
        if (entry < 0 || entry >= spec.num_actions)
            throw std::invalid_argument("evaluate_policy: action index out of range");
    ValueTables tables = ValueTables::zeros(spec.num_states, spec.num_actions, spec.horizon);
    detail::evaluate_policy_into(spec, policy.actions.data(), tables.q.data(), tables.v.data());
    return tables;
}

/// Greedy policy from a Q table. Ties break toward the smallest action
/// index, matching the learners' deterministic rule.
inline DeterministicPolicy greedy_policy(const ValueTables& tables) {
    DeterministicPolicy policy = DeterministicPolicy::filled(tables.num_states, tables.horizon, 0);
    for (int h = 0; h < tables.horizon; ++h) {
        for (int x = 0; x < tables.num_states; ++x) {
            int best = 0;
            for (int a = 1; a < tables.num_actions; ++a)
                if (tables.q_at(h, x, a) > tables.q_at(h, x, best)) best = a;
            policy.at(h, x) = best;
        }
    }
    return policy;
}

/**
 * Independent oracle for solve_optimal: enumerates every deterministic
 * step-dependent policy (A^(S*H) of them), evaluates each exactly, and keeps
 * the pointwise maximum of Q and V. An optimal deterministic policy always
 * exists for finite instances, so the pointwise maxima equal Q* and V*.
 *
 * Refuses instances whose policy count exceeds `policy_cap`.
 */
inline ValueTables brute_force_optimal(const MdpSpec& spec,
                                       std::uint64_t policy_cap = 1'000'000) {
    const int S = spec.num_states, A = spec.num_actions, H = spec.horizon;
    const int entries = S * H;
    std::uint64_t count = 1;
    for (int i = 0; i < entries; ++i) {
        count *= static_cast<std::uint64_t>(A);
        if (count > policy_cap)
            throw std::invalid_argument(
                "brute_force_optimal: policy count " + std::to_string(A) + "^" +
                std::to_string(entries) + " exceeds cap " + std::to_string(policy_cap));
    }

    ValueTables best = ValueTables::zeros(S, A, H);
    ValueTables work = ValueTables::zeros(S, A, H);
    std::vector<int> assignment(entries, 0);
    bool first = true;
    while (true) {
        detail::evaluate_policy_into(spec, assignment.data(), work.q.data(), work.v.data());
        if (first) {
            best.q = work.q;
            best.v = work.v;
            first = false;
        } else {
            for (std::size_t i = 0; i < best.q.size(); ++i)
                if (work.q[i] > best.q[i]) best.q[i] = work.q[i];
            for (std::size_t i = 0; i < best.v.size(); ++i)
                if (work.v[i] > best.v[i]) best.v[i] = work.v[i];
        }
        // Odometer increment over the policy assignment.
        int pos = 0;
        while (pos < entries && ++assignment[pos] == A) assignment[pos++] = 0;
        if (pos == entries) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// JSON layout shared by solver output and learner Q-table dumps.

inline nlohmann::json tables_to_json(const ValueTables& t) {
    nlohmann::json q = nlohmann::json::array();
    for (int h = 0; h < t.horizon; ++h) {
        nlohmann::json per_state = nlohmann::json::array();
        for (int x = 0; x < t.num_states; ++x) {
            nlohmann::json row = nlohmann::json::array();
            for (int a = 0; a < t.num_actions; ++a) row.push_back(t.q_at(h, x, a));
            per_state.push_back(std::move(row));
        }
        q.push_back(std::move(per_state));
    }
    nlohmann::json v = nlohmann::json::array();
    for (int h = 0; h <= t.horizon; ++h) {
        nlohmann::json row = nlohmann::json::array();
        for (int x = 0; x < t.num_states; ++x) row.push_back(t.v_at(h, x));
        v.push_back(std::move(row));
    }
    return nlohmann::json{{"num_states", t.num_states},
                          {"num_actions", t.num_actions},
                          {"horizon", t.horizon},
                          {"q", std::move(q)},
                          {"v", std::move(v)}};
}

inline ValueTables tables_from_json(const nlohmann::json& j) {
    const int S = j.at("num_states").get<int>();
    const int A = j.at("num_actions").get<int>();
    const int H = j.at("horizon").get<int>();
    if (S <= 0 || A <= 0 || H <= 0)
        throw std::runtime_error("tables_from_json: dimensions must be positive");
    ValueTables t = ValueTables::zeros(S, A, H);
    const auto& q = j.at("q");
    const auto& v = j.at("v");
    if (q.size() != static_cast<std::size_t>(H) || v.size() != static_cast<std::size_t>(H) + 1)
        throw std::runtime_error("tables_from_json: table shape does not match dimensions");
    for (int h = 0; h < H; ++h)
        for (int x = 0; x < S; ++x)
            for (int a = 0; a < A; ++a) t.q_at(h, x, a) = q[h].at(x).at(a).get<double>();
    for (int h = 0; h <= H; ++h)
        for (int x = 0; x < S; ++x) t.v_at(h, x) = v[h].at(x).get<double>();
    return t;
}

inline void save_tables(const ValueTables& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write value-table file: " + path);
    out << tables_to_json(t).dump(2) << '\n';
}

inline ValueTables load_tables(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open value-table file: " + path);
    nlohmann::json j;
    in >> j;
    return tables_from_json(j);
}

}  // namespace ucbmo
