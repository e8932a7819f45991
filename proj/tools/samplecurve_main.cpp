// samplecurve: minimum development-sample-size estimation for prediction
// models by simulated learning curves.
//
// Subcommands:
//   solve  full pipeline: tune generator, search the learning curve, confirm
//   curve  evaluate the performance distribution on a fixed n grid
//   tune   tune the generator only and print it as JSON
//   epv    events-per-variable baseline from the configured generator
//
// Exit codes: 0 success, 2 configuration error, 3 no metric reachable,
// 4 internal error.

#include "samplecurve/samplecurve.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
    bool no_plot = false;
};

void add_common_options(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "run configuration JSON")
        ->required();
    cmd->add_option("--seed", opts.seed, "override the config master seed");
    cmd->add_option("--threads", opts.threads, "cap replicate parallelism (0 = all cores)");
    cmd->add_option("--out", opts.out_dir, "override the output directory");
    cmd->add_flag("--no-plot", opts.no_plot, "skip SVG plot output");
}

samplecurve::RunConfig load_config(const CliOptions& opts) {
    samplecurve::RunConfig cfg = samplecurve::load_run_config(opts.config_path);
    if (opts.seed.has_value()) cfg.solver.master_seed = *opts.seed;
    if (opts.threads.has_value()) cfg.solver.threads = *opts.threads;
    if (opts.out_dir.has_value()) cfg.output.directory = *opts.out_dir;
    if (opts.no_plot) cfg.output.plot_svg = false;
    cfg.solver.validate();
    return cfg;
}

int run_solve(const CliOptions& opts) {
    const samplecurve::RunConfig cfg = load_config(opts);
    const samplecurve::SampleSizeResult result =
        samplecurve::solve_sample_size(cfg.solver);

    const std::filesystem::path out_dir(cfg.output.directory);
    if (cfg.output.result_json) {
        samplecurve::atomic_write_file(
            out_dir / "result.json",
            samplecurve::result_to_json(result, cfg).dump(2) + "\n");
    }
    for (const auto& mr : result.metrics) {
        if (cfg.output.curve_csv) {
            samplecurve::atomic_write_file(out_dir / ("curve_" + mr.metric + ".csv"),
                                           samplecurve::metric_curve_to_csv(mr));
        }
        if (cfg.output.plot_svg) {
            samplecurve::atomic_write_file(out_dir / ("plot_" + mr.metric + ".svg"),
                                           samplecurve::metric_curve_to_svg(mr));
        }
    }
    std::cout << samplecurve::result_to_text(result);
    return result.combined_n.has_value() ? 0 : 3;
}

int run_curve(const CliOptions& opts) {
    const samplecurve::RunConfig cfg = load_config(opts);
    if (cfg.curve_grid.empty()) {
        throw samplecurve::ConfigError("curve subcommand needs a curve_grid array");
    }
    const samplecurve::SolverConfig& s = cfg.solver;
    const samplecurve::TunedGenerator gen =
        samplecurve::tune_scale(s.generator, s.tuning_mc_size, s.master_seed);
    const auto strategy = samplecurve::make_strategy(s.strategy_tag, s.l2_penalty);

    samplecurve::SimulateOptions sim;
    sim.quantile_q = s.criterion.quantile_q();
    sim.threads = s.threads;
    sim.fresh_validation = s.fresh_validation;
    sim.bootstrap_b = s.bootstrap_b;

    const int R = cfg.curve_replicates > 0 ? cfg.curve_replicates : s.r_search;
    std::vector<samplecurve::PerformanceSummary> summaries;
    for (std::int64_t n : cfg.curve_grid) {
        summaries.push_back(samplecurve::run_at_n(gen, *strategy, s.metrics, n, R,
                                                  s.validation_size, s.master_seed, sim));
    }
    const std::string csv = samplecurve::summaries_to_csv(summaries);
    samplecurve::atomic_write_file(
        std::filesystem::path(cfg.output.directory) / "curve_eval.csv", csv);
    std::cout << csv;
    return 0;
}

int run_tune(const CliOptions& opts) {
    const samplecurve::RunConfig cfg = load_config(opts);
    const samplecurve::TunedGenerator gen = samplecurve::tune_scale(
        cfg.solver.generator, cfg.solver.tuning_mc_size, cfg.solver.master_seed);
    std::cout << samplecurve::tuned_generator_to_json(gen).dump(2) << "\n";
    return 0;
}

int run_epv(const CliOptions& opts) {
    const samplecurve::RunConfig cfg = load_config(opts);
    if (cfg.solver.generator.outcome_type != samplecurve::OutcomeType::binary) {
        throw samplecurve::ConfigError("epv baseline requires a binary generator");
    }
    const samplecurve::EpvInput input{cfg.solver.generator.p(),
                                      cfg.solver.generator.target_prevalence, 10.0};
    std::cout << samplecurve::epv_sample_size(input) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation-based sample size estimation for prediction models"};
    app.require_subcommand(1);

    CliOptions opts;
    CLI::App* solve = app.add_subcommand("solve", "solve the minimum sample size");
    CLI::App* curve = app.add_subcommand("curve", "evaluate the curve on a fixed n grid");
    CLI::App* tune = app.add_subcommand("tune", "tune the generator and print it");
    CLI::App* epv = app.add_subcommand("epv", "events-per-variable baseline");
    for (CLI::App* cmd : {solve, curve, tune, epv}) add_common_options(cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed()) return run_solve(opts);
        if (curve->parsed()) return run_curve(opts);
        if (tune->parsed()) return run_tune(opts);
        if (epv->parsed()) return run_epv(opts);
        return 2;
    } catch (const samplecurve::ConfigError& e) {
        samplecurve::log_error(e.what());
        return 2;
    } catch (const samplecurve::InvalidSpec& e) {
        samplecurve::log_error(e.what());
        return 2;
    } catch (const samplecurve::Error& e) {
        samplecurve::log_error(e.what());
        return 4;
    } catch (const std::exception& e) {
        samplecurve::log_error(e.what());
        return 4;
    }
}
