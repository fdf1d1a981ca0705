#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ucbmo/csv.hpp"
#include "ucbmo/envs.hpp"
#include "ucbmo/harness.hpp"
#include "ucbmo/mdp.hpp"
#include "ucbmo/solver.hpp"
#include "ucbmo/svg.hpp"

namespace ucbmo {

// Command-line front end. Subcommands: solve, run, compare, gen-env, plot.
// Exit codes: 0 success, 2 user/input error, 3 internal invariant violation.
// Unknown flags and subcommands are hard errors. Printed indices are
// 1-based (x1 is the first state, V[1] the first step) to match the usual
// notation; files stay 0-based.

namespace detail {

inline std::string row_text(const double* values, int n) {
    std::string out = "(";
    for (int i = 0; i < n; ++i) {
        if (i > 0) out += ", ";
        out += format_double(values[i]);
    }
    out += ")";
    return out;
}

inline void cmd_solve(const std::string& env, const std::string& out_path,
                      std::ostream& out) {
    const MdpSpec spec = resolve_env(env);
    const ValueTables tables = solve_optimal(spec);
    for (int h = 0; h < spec.horizon; ++h)
        out << "V[" << h + 1 << "] = "
            << row_text(tables.v.data() + static_cast<std::size_t>(h) * spec.num_states,
                        spec.num_states)
            << '\n';
    for (int h = 0; h < spec.horizon; ++h)
        for (int x = 0; x < spec.num_states; ++x)
            out << "Q[" << h + 1 << "][x" << x + 1 << "] = "
                << row_text(tables.q.data() +
                                (static_cast<std::size_t>(h) * spec.num_states + x) *
                                    spec.num_actions,
                            spec.num_actions)
                << '\n';
    if (!out_path.empty()) {
        save_tables(tables, out_path);
        out << "wrote " << out_path << '\n';
    }
}

inline void cmd_run(const std::string& config_path, long long episodes_override,
                    int runs_override, std::string raw_path, std::string agg_path, int jobs,
                    std::ostream& out) {
    ExperimentConfig config = load_config(config_path);
    if (episodes_override > 0) config.episodes = episodes_override;
    if (runs_override > 0) config.num_runs = runs_override;

    const std::string stem = std::filesystem::path(config_path).stem().string();
    if (raw_path.empty()) raw_path = stem + "_raw.csv";
    if (agg_path.empty()) agg_path = stem + "_agg.csv";

    const ExperimentResult result = run_experiment(config, jobs);
    const std::vector<AggregateResult> aggregates = aggregate_all(result);
    save_raw_csv(raw_path, raw_rows(result));
    save_aggregate_csv(agg_path, aggregate_rows(aggregates));
    out << "wrote " << raw_path << '\n' << "wrote " << agg_path << '\n';
    out << format_summary(regret_summary(series_from_aggregates(aggregates)),
                          config.episodes);
}

inline void cmd_compare(const std::vector<std::string>& csv_paths, double threshold,
                        std::ostream& out) {
    std::vector<VariantSeries> series;
    for (const std::string& path : csv_paths) {
        for (VariantSeries& s : series_from_rows(load_aggregate_csv(path))) {
            for (const VariantSeries& existing : series)
                if (existing.variant == s.variant)
                    throw std::invalid_argument("compare: variant '" + s.variant +
                                                "' appears in more than one csv");
            series.push_back(std::move(s));
        }
    }
    if (series.empty()) throw std::invalid_argument("compare: no data rows in input");
    long long episodes = static_cast<long long>(series[0].mean_per.size());
    out << format_summary(regret_summary(series, threshold), episodes);
}

inline void cmd_gen_env(const std::string& recipe_text, const std::string& out_path,
                        std::ostream& out) {
    const MdpSpec spec = make_env(parse_recipe(recipe_text));
    const ValidationReport report = validate_mdp(spec);
    if (!report.ok())
        throw std::logic_error("generated environment failed validation:\n" +
                               report.to_string());
    save_mdp(spec, out_path);
    out << "wrote " << out_path << '\n';
}

inline void cmd_plot(const std::string& csv_path, const std::string& out_path, int smooth,
                     std::ostream& out) {
    const std::vector<VariantSeries> series = series_from_rows(load_aggregate_csv(csv_path));
    PlotOptions options;
    options.smooth_window = smooth;
    detail::write_text_file(out_path, render_per_plot(series, options));
    out << "wrote " << out_path << '\n';
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"Tabular episodic Q-learning toolkit: exact solving, "
                 "UCB-bonus learners, regret experiments"};
    app.require_subcommand(1);

    std::string solve_env, solve_out;
    CLI::App* solve = app.add_subcommand("solve", "Solve an environment exactly");
    solve->add_option("--env", solve_env, "Environment recipe or spec file")->required();
    solve->add_option("--out", solve_out, "Write Q/V tables as JSON");

    std::string run_config, run_raw, run_agg;
    long long run_episodes = 0;
    int run_runs = 0, run_jobs = 1;
    CLI::App* run = app.add_subcommand("run", "Run a configured experiment");
    run->add_option("--config", run_config, "Experiment config JSON")->required();
    run->add_option("--K", run_episodes, "Override episode count")
        ->check(CLI::PositiveNumber);
    run->add_option("--runs", run_runs, "Override run count")->check(CLI::PositiveNumber);
    run->add_option("--raw-out", run_raw, "Raw CSV path (default <config>_raw.csv)");
    run->add_option("--agg-out", run_agg, "Aggregate CSV path (default <config>_agg.csv)");
    run->add_option("--jobs", run_jobs, "Parallel runs")->check(CLI::PositiveNumber);

    std::vector<std::string> compare_csvs;
    double compare_threshold = 0.05;
    CLI::App* compare = app.add_subcommand("compare", "Summarize aggregate CSVs");
    compare->add_option("--csv", compare_csvs, "Aggregate CSV paths")
        ->required()
        ->expected(1, -1);
    compare->add_option("--threshold", compare_threshold,
                        "Mean-PER convergence threshold");

    std::string gen_env, gen_out;
    CLI::App* gen = app.add_subcommand("gen-env", "Generate an environment spec file");
    gen->add_option("--env", gen_env, "Environment recipe")->required();
    gen->add_option("--out", gen_out, "Output JSON path")->required();

    std::string plot_csv, plot_out;
    int plot_smooth = 0;
    CLI::App* plot = app.add_subcommand("plot", "Render an aggregate CSV as SVG");
    plot->add_option("--csv", plot_csv, "Aggregate CSV path")->required();
    plot->add_option("--out", plot_out, "Output SVG path")->required();
    plot->add_option("--smooth", plot_smooth, "Trailing moving-average window")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
        if (solve->parsed()) detail::cmd_solve(solve_env, solve_out, out);
        if (run->parsed())
            detail::cmd_run(run_config, run_episodes, run_runs, run_raw, run_agg, run_jobs,
                            out);
        if (compare->parsed()) detail::cmd_compare(compare_csvs, compare_threshold, out);
        if (gen->parsed()) detail::cmd_gen_env(gen_env, gen_out, out);
        if (plot->parsed()) detail::cmd_plot(plot_csv, plot_out, plot_smooth, out);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace ucbmo
