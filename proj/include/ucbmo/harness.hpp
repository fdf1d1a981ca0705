#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ucbmo/csv.hpp"
#include "ucbmo/envs.hpp"
#include "ucbmo/learner.hpp"
#include "ucbmo/mdp.hpp"
#include "ucbmo/rng.hpp"
#include "ucbmo/solver.hpp"

namespace ucbmo {

// Experiment orchestration: K-episode runs per (variant, run index), exact
// per-episode regret against the optimal value, aggregation across runs,
// and conversion to the CSV row schemas.

struct ExperimentConfig {
    std::string env;                // recipe string or spec file path
    std::vector<Variant> variants;  // compared in this order
    long long episodes = 0;         // K
    int num_runs = 0;
    double p = 0.0;
    double c = 0.0;
    std::uint64_t base_seed = 0;
    std::optional<std::vector<double>> initial_dist_override;
    TieRule tie_rule = TieRule::SmallestIndex;
    SpecialTriple special;               // first-step pair for the MaxOpt variants
    bool ucbh_use_iota_prime = false;    // baseline bonus on ln(K/p) instead of ln(SAT/p)
};

/// Special-pair state observed at the start of an episode, before any step:
/// visit count so far and the current Q entry.
struct SpecialSnapshot {
    long long visits = 0;
    double q = 0.0;
};

struct RunResult {
    int run_index = 0;
    std::uint64_t stream_id = 0;
    std::vector<double> per_episode_regret;   // length K
    std::vector<double> cumulative_regret;    // length K, running sum
    std::vector<SpecialSnapshot> special_trace;  // length K
    std::vector<double> final_q;              // learner's Q table after episode K
};

struct AggregateResult {
    std::string variant;
    std::vector<double> mean_per;
    std::vector<double> ci_half_width;      // 95% normal-approximation, per episode
    std::vector<double> mean_cum_regret;
    double total_regret_mean = 0.0;         // mean over runs of cumulative regret at K
    double total_regret_ci_half_width = 0.0;
};

struct ExperimentResult {
    MdpSpec spec;          // environment after any initial-distribution override
    ValueTables optimal;
    ExperimentConfig config;
    std::vector<std::vector<RunResult>> runs;  // [variant index][run index]
};

/// Stream id for run `run_index` of a variant: the variant-name hash XOR the
/// run index, so adding a variant never perturbs another variant's draws.
inline std::uint64_t run_stream_id(Variant variant, int run_index) {
    return fnv1a64(variant_name(variant)) ^ static_cast<std::uint64_t>(run_index);
}

// --- config I/O ---

inline TieRule tie_rule_from_name(const std::string& name) {
    if (name == "smallest_index") return TieRule::SmallestIndex;
    if (name == "seeded_random") return TieRule::SeededRandom;
    throw std::invalid_argument("config: unknown tie_rule '" + name +
                                "' (expected smallest_index or seeded_random)");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    static const char* known[] = {"env",  "variants",  "K",
                                  "num_runs", "p", "c", "base_seed",
                                  "initial_dist_override", "tie_rule", "special",
                                  "ucbh_use_iota_prime"};
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&key](const char* k) { return key == k; }) == std::end(known))
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    for (const char* key : {"env", "variants", "K", "num_runs", "p", "c", "base_seed"}) {
        if (!j.contains(key))
            throw std::invalid_argument("config: missing required key '" + std::string(key) +
                                        "'");
    }

    ExperimentConfig config;
    config.env = j.at("env").get<std::string>();
    for (const auto& name : j.at("variants")) {
        const auto variant = variant_from_name(name.get<std::string>());
        if (!variant)
            throw std::invalid_argument("config: unknown variant '" + name.get<std::string>() +
                                        "'");
        if (std::find(config.variants.begin(), config.variants.end(), *variant) !=
            config.variants.end())
            throw std::invalid_argument("config: duplicate variant '" +
                                        std::string(variant_name(*variant)) + "'");
        config.variants.push_back(*variant);
    }
    if (config.variants.empty())
        throw std::invalid_argument("config: variants must be non-empty");
    config.episodes = j.at("K").get<long long>();
    config.num_runs = j.at("num_runs").get<int>();
    config.p = j.at("p").get<double>();
    config.c = j.at("c").get<double>();
    config.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("initial_dist_override"))
        config.initial_dist_override =
            j.at("initial_dist_override").get<std::vector<double>>();
    if (j.contains("tie_rule"))
        config.tie_rule = tie_rule_from_name(j.at("tie_rule").get<std::string>());
    if (j.contains("special")) {
        config.special.state = j.at("special").at("state").get<int>();
        config.special.action = j.at("special").at("action").get<int>();
    }
    if (j.contains("ucbh_use_iota_prime"))
        config.ucbh_use_iota_prime = j.at("ucbh_use_iota_prime").get<bool>();

    if (config.episodes < 1) throw std::invalid_argument("config: K must be >= 1");
    if (config.num_runs < 1) throw std::invalid_argument("config: num_runs must be >= 1");
    if (!(config.p > 0.0 && config.p < 1.0))
        throw std::invalid_argument("config: p must be in (0, 1)");
    if (config.c < 0.0) throw std::invalid_argument("config: c must be >= 0");
    return config;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

// --- execution ---

/// One K-episode run. Per episode: snapshot the greedy policy, draw the
/// initial state, score the snapshot exactly against the optimal value at
/// that state, then roll the episode out with live action selection and a
/// learner update after every step. The snapshot's value matches the
/// episode's live behavior because Q rows are only rewritten after their
/// own step.
inline RunResult run_single(const MdpSpec& spec, const ValueTables& optimal, Variant variant,
                            const ExperimentConfig& config, int run_index) {
    const std::uint64_t sid = run_stream_id(variant, run_index);
    RngStream init_rng(config.base_seed, substream_id(sid, StreamPurpose::InitState));
    RngStream trans_rng(config.base_seed, substream_id(sid, StreamPurpose::Transitions));
    RngStream tie_rng(config.base_seed, substream_id(sid, StreamPurpose::TieBreak));

    const bool is_max_opt = variant != Variant::UcbH;
    std::optional<double> iota_override;
    if (variant == Variant::UcbH && config.ucbh_use_iota_prime)
        iota_override = std::log(static_cast<double>(config.episodes) / config.p);
    Learner learner = Learner::create(
        variant, spec.num_states, spec.num_actions, spec.horizon, config.episodes, config.p,
        config.c, is_max_opt ? &optimal : nullptr,
        is_max_opt ? std::optional<SpecialTriple>(config.special) : std::nullopt,
        config.tie_rule, iota_override);

    RunResult result;
    result.run_index = run_index;
    result.stream_id = sid;
    result.per_episode_regret.reserve(static_cast<std::size_t>(config.episodes));
    result.cumulative_regret.reserve(static_cast<std::size_t>(config.episodes));
    result.special_trace.reserve(static_cast<std::size_t>(config.episodes));

    double cum = 0.0;
    for (long long k = 0; k < config.episodes; ++k) {
        result.special_trace.push_back(
            {learner.visits(0, config.special.state, config.special.action),
             learner.q(0, config.special.state, config.special.action)});

        const DeterministicPolicy policy = learner.greedy();
        const ValueTables policy_values = evaluate_policy(spec, policy);
        const int x0 = sample_initial_state(spec, init_rng);
        const double per = optimal.v_at(0, x0) - policy_values.v_at(0, x0);
        result.per_episode_regret.push_back(per);
        cum += per;
        result.cumulative_regret.push_back(cum);

        int x = x0;
        for (int h = 0; h < spec.horizon; ++h) {
            const int a = learner.select_action(x, h, &tie_rng);
            const StepOutcome outcome = step(spec, x, a, h, trans_rng);
            learner.observe({x, a, h, outcome.reward, outcome.next_state});
            x = outcome.next_state;
        }
    }
    result.final_q = learner.q_table();
    return result;
}

inline ExperimentResult run_experiment(const ExperimentConfig& config, int jobs = 1) {
    ExperimentResult result;
    result.config = config;
    result.spec = resolve_env(config.env);
    if (config.initial_dist_override) {
        if (static_cast<int>(config.initial_dist_override->size()) != result.spec.num_states)
            throw std::invalid_argument(
                "config: initial_dist_override length does not match the environment");
        result.spec.initial_dist = *config.initial_dist_override;
        const ValidationReport report = validate_mdp(result.spec);
        if (!report.ok())
            throw std::invalid_argument("config: initial_dist_override is invalid:\n" +
                                        report.to_string());
    }
    const bool has_max_opt =
        std::any_of(config.variants.begin(), config.variants.end(),
                    [](Variant v) { return v != Variant::UcbH; });
    if (has_max_opt && (config.special.state >= result.spec.num_states ||
                        config.special.action >= result.spec.num_actions ||
                        config.special.state < 0 || config.special.action < 0))
        throw std::invalid_argument("config: special pair out of range for the environment");
    result.optimal = solve_optimal(result.spec);

    const std::size_t num_variants = config.variants.size();
    result.runs.assign(num_variants, {});
    for (auto& per_variant : result.runs)
        per_variant.resize(static_cast<std::size_t>(config.num_runs));

    const std::size_t total = num_variants * static_cast<std::size_t>(config.num_runs);
    const auto work = [&](std::size_t flat) {
        const std::size_t vi = flat / static_cast<std::size_t>(config.num_runs);
        const int run_index = static_cast<int>(flat % static_cast<std::size_t>(config.num_runs));
        result.runs[vi][static_cast<std::size_t>(run_index)] =
            run_single(result.spec, result.optimal, config.variants[vi], config, run_index);
    };

    const std::size_t workers = std::min<std::size_t>(
        total, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t flat = 0; flat < total; ++flat) work(flat);
        return result;
    }

    // Runs share only the immutable spec and optimal tables; each writes its
    // own preallocated slot, so output order never depends on scheduling.
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t flat = next.fetch_add(1);
                if (flat >= total) return;
                try {
                    work(flat);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return result;
}

// --- aggregation & summaries ---

/// Mean and 95% half-width (1.96 * sample std / sqrt(n), std with the n-1
/// divisor; 0 for a single run) per episode, plus total-regret statistics.
inline AggregateResult aggregate(const std::vector<RunResult>& runs, std::string variant) {
    if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
    const std::size_t k_total = runs[0].per_episode_regret.size();
    for (const RunResult& run : runs)
        if (run.per_episode_regret.size() != k_total)
            throw std::invalid_argument("aggregate: runs have mismatched episode counts");

    const double n = static_cast<double>(runs.size());
    auto mean_ci = [&](auto getter) {
        double mean = 0.0;
        for (const RunResult& run : runs) mean += getter(run);
        mean /= n;
        double half = 0.0;
        if (runs.size() > 1) {
            double ss = 0.0;
            for (const RunResult& run : runs) {
                const double d = getter(run) - mean;
                ss += d * d;
            }
            half = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        }
        return std::pair<double, double>(mean, half);
    };

    AggregateResult agg;
    agg.variant = std::move(variant);
    agg.mean_per.resize(k_total);
    agg.ci_half_width.resize(k_total);
    agg.mean_cum_regret.resize(k_total);
    for (std::size_t k = 0; k < k_total; ++k) {
        const auto [mean, half] =
            mean_ci([k](const RunResult& run) { return run.per_episode_regret[k]; });
        agg.mean_per[k] = mean;
        agg.ci_half_width[k] = half;
        double cum = 0.0;
        for (const RunResult& run : runs) cum += run.cumulative_regret[k];
        agg.mean_cum_regret[k] = cum / n;
    }
    const auto [total_mean, total_half] =
        mean_ci([](const RunResult& run) { return run.cumulative_regret.back(); });
    agg.total_regret_mean = total_mean;
    agg.total_regret_ci_half_width = total_half;
    return agg;
}

inline std::vector<AggregateResult> aggregate_all(const ExperimentResult& result) {
    std::vector<AggregateResult> out;
    out.reserve(result.runs.size());
    for (std::size_t vi = 0; vi < result.runs.size(); ++vi)
        out.push_back(aggregate(result.runs[vi],
                                std::string(variant_name(result.config.variants[vi]))));
    return out;
}

inline std::vector<RawRow> raw_rows(const ExperimentResult& result) {
    std::vector<RawRow> rows;
    for (std::size_t vi = 0; vi < result.runs.size(); ++vi) {
        const std::string name(variant_name(result.config.variants[vi]));
        for (const RunResult& run : result.runs[vi]) {
            for (std::size_t k = 0; k < run.per_episode_regret.size(); ++k) {
                rows.push_back({name, run.run_index, static_cast<long long>(k) + 1,
                                run.per_episode_regret[k], run.cumulative_regret[k]});
            }
        }
    }
    return rows;
}

inline std::vector<AggregateRow> aggregate_rows(const std::vector<AggregateResult>& aggregates) {
    std::vector<AggregateRow> rows;
    for (const AggregateResult& agg : aggregates) {
        for (std::size_t k = 0; k < agg.mean_per.size(); ++k) {
            rows.push_back({agg.variant, static_cast<long long>(k) + 1, agg.mean_per[k],
                            agg.ci_half_width[k], agg.mean_cum_regret[k]});
        }
    }
    return rows;
}

/// Per-variant curves as carried by the aggregate CSV schema.
struct VariantSeries {
    std::string variant;
    std::vector<double> mean_per;
    std::vector<double> ci_half_width;
    std::vector<double> mean_cum_regret;
};

/// Groups aggregate rows by variant in first-appearance order; episodes must
/// be contiguous from 1 within each variant.
inline std::vector<VariantSeries> series_from_rows(const std::vector<AggregateRow>& rows) {
    std::vector<VariantSeries> series;
    for (const AggregateRow& row : rows) {
        auto it = std::find_if(series.begin(), series.end(),
                               [&row](const VariantSeries& s) { return s.variant == row.variant; });
        if (it == series.end()) {
            series.push_back({row.variant, {}, {}, {}});
            it = series.end() - 1;
        }
        if (row.episode != static_cast<long long>(it->mean_per.size()) + 1)
            throw std::invalid_argument("aggregate rows: episodes for variant '" + row.variant +
                                        "' are not contiguous from 1");
        it->mean_per.push_back(row.mean_per);
        it->ci_half_width.push_back(row.ci_half_width);
        it->mean_cum_regret.push_back(row.mean_cum_regret);
    }
    return series;
}

inline std::vector<VariantSeries> series_from_aggregates(
    const std::vector<AggregateResult>& aggregates) {
    std::vector<VariantSeries> series;
    series.reserve(aggregates.size());
    for (const AggregateResult& agg : aggregates)
        series.push_back({agg.variant, agg.mean_per, agg.ci_half_width, agg.mean_cum_regret});
    return series;
}

struct VariantSummary {
    std::string variant;
    double total_regret_mean = 0.0;
    // First episode index (1-based) from which mean PER stays strictly below
    // the threshold through episode K; K+1 means it never settles below.
    long long converged_episode = 0;
};

struct RegretSummary {
    double threshold = 0.0;
    std::vector<VariantSummary> by_variant;   // input order
    std::vector<std::string> ordering;        // ascending mean total regret
};

inline RegretSummary regret_summary(const std::vector<VariantSeries>& series,
                                    double threshold = 0.05) {
    if (series.empty()) throw std::invalid_argument("regret_summary: no variants");
    const std::size_t k_total = series[0].mean_per.size();
    for (const VariantSeries& s : series) {
        if (s.mean_per.empty())
            throw std::invalid_argument("regret_summary: variant '" + s.variant +
                                        "' has no episodes");
        if (s.mean_per.size() != k_total)
            throw std::invalid_argument("regret_summary: variants have mismatched K");
    }

    RegretSummary summary;
    summary.threshold = threshold;
    for (const VariantSeries& s : series) {
        VariantSummary vs;
        vs.variant = s.variant;
        vs.total_regret_mean = s.mean_cum_regret.back();
        std::size_t first_below = s.mean_per.size();  // index past the last bad episode
        while (first_below > 0 && s.mean_per[first_below - 1] < threshold) --first_below;
        vs.converged_episode = static_cast<long long>(first_below) + 1;
        summary.by_variant.push_back(std::move(vs));
    }
    std::vector<const VariantSummary*> order;
    order.reserve(summary.by_variant.size());
    for (const VariantSummary& vs : summary.by_variant) order.push_back(&vs);
    std::stable_sort(order.begin(), order.end(),
                     [](const VariantSummary* a, const VariantSummary* b) {
                         return a->total_regret_mean < b->total_regret_mean;
                     });
    for (const VariantSummary* vs : order) summary.ordering.push_back(vs->variant);
    return summary;
}

inline std::string format_summary(const RegretSummary& summary, long long episodes) {
    std::ostringstream out;
    out << "variant  total_regret_mean  converged_episode (mean PER < "
        << format_double(summary.threshold) << ")\n";
    for (const VariantSummary& vs : summary.by_variant) {
        out << vs.variant << "  " << format_double(vs.total_regret_mean) << "  ";
        if (vs.converged_episode > episodes)
            out << "never";
        else
            out << vs.converged_episode;
        out << '\n';
    }
    if (summary.by_variant.size() > 1) {
        out << "ordering by mean total regret: ";
        for (std::size_t i = 0; i < summary.ordering.size(); ++i) {
            if (i > 0) out << " < ";
            out << summary.ordering[i];
        }
        out << '\n';
    }
    return std::move(out).str();
}

}  // namespace ucbmo
