#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ucbmo/rng.hpp"
#include "ucbmo/solver.hpp"

namespace ucbmo {

// Three episodic learners behind one interface:
//
//   UcbH        - Q-learning with a Hoeffding-style upper-confidence bonus.
//                 Q starts at H everywhere, every visited triple is updated,
//                 and V is maintained as min{H, max_a Q}.
//   MaxOpt      - same update rule, but Q starts at the exact optimal table
//                 everywhere except one designated (state, action) pair at
//                 the first step, which starts at H; only that entry is ever
//                 updated, and the value bootstrap uses the cached exact V.
//   MaxOptNoA2  - the MaxOpt initialization with the update restriction
//                 removed: every triple keeps a visit counter and is updated
//                 like UcbH.
//
// The log term inside the bonus is ln(S*A*T/p) for UcbH (T = planned
// episodes * horizon) and ln(K/p) for both MaxOpt variants. Natural log
// throughout; a different base would only rescale the bonus constant c.

enum class Variant { UcbH, MaxOpt, MaxOptNoA2 };

inline std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::UcbH: return "UCBH";
        case Variant::MaxOpt: return "MAXOPT";
        case Variant::MaxOptNoA2: return "MAXOPT_NO_A2";
    }
    throw std::logic_error("variant_name: unknown variant");
}

inline std::optional<Variant> variant_from_name(std::string_view name) {
    if (name == "UCBH") return Variant::UcbH;
    if (name == "MAXOPT") return Variant::MaxOpt;
    if (name == "MAXOPT_NO_A2") return Variant::MaxOptNoA2;
    return std::nullopt;
}

enum class TieRule { SmallestIndex, SeededRandom };

/// Designated first-step (state, action) pair whose Q entry is the one
/// non-optimal value under the MaxOpt initialization.
struct SpecialTriple {
    int state = 0;
    int action = 0;
};

struct Transition {
    int state;
    int action;
    int step;
    double reward;
    int next_state;
};

/// Learning rate for the t-th visit: (H+1)/(H+t). This specific decay keeps
/// the effective weight on early visits from growing exponentially in H.
inline double learning_rate(long long t, int horizon) {
    if (t < 1) throw std::invalid_argument("learning_rate: t must be >= 1");
    return static_cast<double>(horizon + 1) / static_cast<double>(horizon + t);
}

/// Confidence bonus c * sqrt(H^3 * iota / t) for the t-th visit.
inline double exploration_bonus(long long t, int horizon, double c, double iota) {
    if (t < 1) throw std::invalid_argument("exploration_bonus: t must be >= 1");
    const double h3 = static_cast<double>(horizon) * horizon * horizon;
    return c * std::sqrt(h3 * iota / static_cast<double>(t));
}

/**
 * Weights obtained by unrolling the recursive Q update t times: entry 0 is
 * the residual weight on the initial value, prod_{j=1..t}(1 - alpha_j), and
 * entry i (1 <= i <= t) is the weight on the i-th visit's target,
 * alpha_i * prod_{j=i+1..t}(1 - alpha_j). For t = 0 returns {1}. For t >= 1
 * entry 0 is exactly 0 (alpha_1 = 1) and entries 1..t sum to 1.
 */
inline std::vector<double> learning_rate_weights(long long t, int horizon) {
    if (t < 0) throw std::invalid_argument("learning_rate_weights: t must be >= 0");
    std::vector<double> w(static_cast<std::size_t>(t) + 1);
    double suffix = 1.0;  // prod_{j=i+1..t} (1 - alpha_j), built from the back
    for (long long i = t; i >= 1; --i) {
        const double a = learning_rate(i, horizon);
        w[static_cast<std::size_t>(i)] = a * suffix;
        suffix *= 1.0 - a;
    }
    w[0] = suffix;
    return w;
}

/// Margin 2 * sum_i w_i * b_i of the high-probability optimism bound
/// (initial-weight * H + margin upper-bounds the estimate's excess over the
/// optimal value). Diagnostic only; never feeds back into learning.
inline double optimism_margin(long long t, int horizon, double c, double iota) {
    if (t < 1) throw std::invalid_argument("optimism_margin: t must be >= 1");
    const std::vector<double> w = learning_rate_weights(t, horizon);
    double sum = 0.0;
    for (long long i = 1; i <= t; ++i)
        sum += w[static_cast<std::size_t>(i)] * exploration_bonus(i, horizon, c, iota);
    return 2.0 * sum;
}

class Learner {
  public:
    /**
     * Builds a learner. MaxOpt variants require the exact optimal tables and
     * the designated (state, action) pair; UcbH must not receive them.
     * `episodes` is the planned budget K, fixed here because the UcbH log
     * term depends on T = K*H. `iota_override` substitutes the bonus log
     * term, for experiments that want the baseline on ln(K/p).
     */
    static Learner create(Variant variant, int num_states, int num_actions, int horizon,
                          long long episodes, double p, double c,
                          const ValueTables* q_star = nullptr,
                          std::optional<SpecialTriple> special = std::nullopt,
                          TieRule tie_rule = TieRule::SmallestIndex,
                          std::optional<double> iota_override = std::nullopt) {
        if (num_states <= 0 || num_actions <= 0 || horizon <= 0)
            throw std::invalid_argument("Learner: dimensions must be positive");
        if (episodes < 1) throw std::invalid_argument("Learner: episodes must be >= 1");
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("Learner: p must be in (0, 1)");
        if (c < 0.0) throw std::invalid_argument("Learner: c must be >= 0");

        const bool is_max_opt = variant != Variant::UcbH;
        if (is_max_opt && (q_star == nullptr || !special))
            throw std::invalid_argument(
                "Learner: MaxOpt variants require optimal tables and a special pair");
        if (is_max_opt &&
            (q_star->num_states != num_states || q_star->num_actions != num_actions ||
             q_star->horizon != horizon))
            throw std::invalid_argument("Learner: optimal tables shape mismatch");
        if (is_max_opt && (special->state < 0 || special->state >= num_states ||
                           special->action < 0 || special->action >= num_actions))
            throw std::invalid_argument("Learner: special pair out of range");

        Learner l;
        l.variant_ = variant;
        l.num_states_ = num_states;
        l.num_actions_ = num_actions;
        l.horizon_ = horizon;
        l.episodes_ = episodes;
        l.p_ = p;
        l.c_ = c;
        l.tie_rule_ = tie_rule;

        const double h = static_cast<double>(horizon);
        if (variant == Variant::UcbH) {
            const double t_total = static_cast<double>(episodes) * h;
            l.iota_ = std::log(static_cast<double>(num_states) * num_actions * t_total / p);
        } else {
            l.iota_ = std::log(static_cast<double>(episodes) / p);
        }
        if (iota_override) l.iota_ = *iota_override;

        const std::size_t qn = static_cast<std::size_t>(horizon) * num_states * num_actions;
        const std::size_t vn = static_cast<std::size_t>(horizon + 1) * num_states;
        if (variant == Variant::UcbH) {
            l.q_.assign(qn, h);
            l.v_.assign(vn, h);
            std::fill(l.v_.begin() + static_cast<std::size_t>(horizon) * num_states, l.v_.end(),
                      0.0);
            l.visits_.assign(qn, 0);
        } else {
            l.special_ = *special;
            l.q_ = q_star->q;
            l.q_[l.q_index(0, special->state, special->action)] = h;
            if (variant == Variant::MaxOpt) {
                // Frozen exact values; only the step-2+ rows are ever read.
                l.v_ = q_star->v;
                l.special_visits_ = 0;
            } else {
                // Derive V = min{H, max_a Q} from the initialized Q table.
                l.v_.assign(vn, 0.0);
                for (int hh = 0; hh < horizon; ++hh)
                    for (int x = 0; x < num_states; ++x)
                        l.v_[l.v_index(hh, x)] = std::min(h, l.max_q(hh, x));
                l.visits_.assign(qn, 0);
            }
        }
        return l;
    }

    Variant variant() const { return variant_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int horizon() const { return horizon_; }
    long long episodes() const { return episodes_; }
    double bonus_constant() const { return c_; }
    double failure_probability() const { return p_; }
    double iota() const { return iota_; }
    TieRule tie_rule() const { return tie_rule_; }
    SpecialTriple special() const { return special_; }

    double q(int h, int x, int a) const { return q_[q_index(h, x, a)]; }
    double v(int h, int x) const { return v_[v_index(h, x)]; }
    const std::vector<double>& q_table() const { return q_; }

    long long visits(int h, int x, int a) const {
        if (variant_ == Variant::MaxOpt)
            return (h == 0 && x == special_.state && a == special_.action) ? special_visits_ : 0;
        return visits_[q_index(h, x, a)];
    }
    long long special_visits() const { return visits(0, special_.state, special_.action); }
    double special_q() const { return q(0, special_.state, special_.action); }

    /// Action maximizing the current Q row. Ties break toward the smallest
    /// index, or uniformly via `tie_rng` under the SeededRandom rule.
    int select_action(int x, int h, RngStream* tie_rng = nullptr) const {
        const double* row = &q_[q_index(h, x, 0)];
        if (tie_rule_ == TieRule::SmallestIndex || tie_rng == nullptr) {
            int best = 0;
            for (int a = 1; a < num_actions_; ++a)
                if (row[a] > row[best]) best = a;
            return best;
        }
        double best = row[0];
        for (int a = 1; a < num_actions_; ++a) best = std::max(best, row[a]);
        int ties = 0;
        for (int a = 0; a < num_actions_; ++a)
            if (row[a] == best) ++ties;
        int pick = tie_rng->next_below(ties);
        for (int a = 0; a < num_actions_; ++a) {
            if (row[a] == best && pick-- == 0) return a;
        }
        throw std::logic_error("select_action: tie scan exhausted");
    }

    /**
     * Applies one observed transition. For MaxOpt, transitions anywhere but
     * the designated first-step pair are no-ops by contract. For the other
     * variants every transition bumps its visit counter and rewrites its Q
     * entry toward reward + V(next) + bonus, followed by the capped V
     * refresh at the visited (step, state).
     */
    void observe(const Transition& tr) {
        if (tr.step < 0 || tr.step >= horizon_ || tr.state < 0 || tr.state >= num_states_ ||
            tr.action < 0 || tr.action >= num_actions_ || tr.next_state < 0 ||
            tr.next_state >= num_states_)
            throw std::out_of_range("observe: transition index out of range");

        if (variant_ == Variant::MaxOpt) {
            if (tr.step != 0 || tr.state != special_.state || tr.action != special_.action)
                return;
            const long long t = ++special_visits_;
            const double a = learning_rate(t, horizon_);
            const double b = exploration_bonus(t, horizon_, c_, iota_);
            double& entry = q_[q_index(0, special_.state, special_.action)];
            entry = (1.0 - a) * entry + a * (tr.reward + v(1, tr.next_state) + b);
            return;
        }

        const std::size_t qi = q_index(tr.step, tr.state, tr.action);
        const long long t = ++visits_[qi];
        const double a = learning_rate(t, horizon_);
        const double b = exploration_bonus(t, horizon_, c_, iota_);
        q_[qi] = (1.0 - a) * q_[qi] + a * (tr.reward + v(tr.step + 1, tr.next_state) + b);
        v_[v_index(tr.step, tr.state)] =
            std::min(static_cast<double>(horizon_), max_q(tr.step, tr.state));
    }

    /// Greedy snapshot of the current Q table, smallest-index ties. Because
    /// each Q row is only rewritten after its own step within an episode,
    /// this snapshot taken at episode start predicts the episode's live
    /// action choices exactly under the smallest-index rule.
    DeterministicPolicy greedy() const {
        DeterministicPolicy policy = DeterministicPolicy::filled(num_states_, horizon_, 0);
        for (int h = 0; h < horizon_; ++h) {
            for (int x = 0; x < num_states_; ++x) {
                const double* row = &q_[q_index(h, x, 0)];
                int best = 0;
                for (int a = 1; a < num_actions_; ++a)
                    if (row[a] > row[best]) best = a;
                policy.at(h, x) = best;
            }
        }
        return policy;
    }

    /// Current Q estimates in the solver's table layout (V rows as
    /// maintained; MaxOpt keeps the frozen exact V).
    ValueTables tables() const {
        ValueTables t = ValueTables::zeros(num_states_, num_actions_, horizon_);
        t.q = q_;
        t.v = v_;
        return t;
    }

  private:
    Learner() = default;

    std::size_t q_index(int h, int x, int a) const {
        return (static_cast<std::size_t>(h) * num_states_ + x) * num_actions_ + a;
    }
    std::size_t v_index(int h, int x) const {
        return static_cast<std::size_t>(h) * num_states_ + x;
    }
    double max_q(int h, int x) const {
        const double* row = &q_[q_index(h, x, 0)];
        double best = row[0];
        for (int a = 1; a < num_actions_; ++a) best = std::max(best, row[a]);
        return best;
    }

    Variant variant_ = Variant::UcbH;
    int num_states_ = 0;
    int num_actions_ = 0;
    int horizon_ = 0;
    long long episodes_ = 0;
    double p_ = 0.0;
    double c_ = 0.0;
    double iota_ = 0.0;
    TieRule tie_rule_ = TieRule::SmallestIndex;
    SpecialTriple special_;

    std::vector<double> q_;           // H*S*A
    std::vector<double> v_;           // (H+1)*S, row H kept zero
    std::vector<long long> visits_;   // H*S*A; unused by MaxOpt
    long long special_visits_ = 0;    // MaxOpt's single counter
};

}  // namespace ucbmo
