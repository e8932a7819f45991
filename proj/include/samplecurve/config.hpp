#pragma once

// Run configuration: one JSON file fully determines a run.

#include "samplecurve/datagen.hpp"
#include "samplecurve/errors.hpp"
#include "samplecurve/metrics.hpp"
#include "samplecurve/search.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace samplecurve {

using Json = nlohmann::ordered_json;

struct OutputOptions {
    std::string directory = "samplecurve_out";
    bool curve_csv = true;
    bool result_json = true;
    bool plot_svg = true;
};

struct RunConfig {
    SolverConfig solver;
    OutputOptions output;
    std::vector<std::int64_t> curve_grid; // curve subcommand evaluation points
    int curve_replicates = 0;             // 0 -> solver.r_search
};

namespace detail {

template <typename T>
T json_get(const Json& j, const std::string& key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

template <typename T>
T json_require(const Json& j, const std::string& key) {
    if (!j.contains(key)) {
        throw ConfigError("config field '" + key + "' is required");
    }
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

} // namespace detail

inline GeneratorSpec generator_spec_from_json(const Json& j) {
    GeneratorSpec spec;
    const std::string outcome = detail::json_get<std::string>(j, "outcome_type", "binary");
    if (outcome == "binary") {
        spec.outcome_type = OutcomeType::binary;
    } else if (outcome == "continuous") {
        spec.outcome_type = OutcomeType::continuous;
    } else {
        throw ConfigError("generator.outcome_type must be binary or continuous");
    }
    spec.n_true = detail::json_require<int>(j, "n_true");
    spec.n_noise = detail::json_get<int>(j, "n_noise", 0);
    spec.predictor_correlation = detail::json_get<double>(j, "predictor_correlation", 0.0);
    if (j.contains("coefficient_pattern")) {
        const Json& p = j.at("coefficient_pattern");
        const std::string type = detail::json_get<std::string>(p, "type", "equal");
        if (type == "equal") {
            spec.coefficient_pattern = CoefficientPattern::equal;
        } else if (type == "geometric_decay") {
            spec.coefficient_pattern = CoefficientPattern::geometric_decay;
            spec.pattern_ratio = detail::json_require<double>(p, "ratio");
        } else {
            throw ConfigError("coefficient_pattern.type must be equal or geometric_decay");
        }
    }
    if (spec.outcome_type == OutcomeType::binary) {
        spec.target_prevalence = detail::json_require<double>(j, "target_prevalence");
    }
    spec.target_performance = detail::json_require<double>(j, "target_performance");
    return spec;
}

inline Json generator_spec_to_json(const GeneratorSpec& spec) {
    Json j;
    j["outcome_type"] = spec.outcome_type == OutcomeType::binary ? "binary" : "continuous";
    j["n_true"] = spec.n_true;
    j["n_noise"] = spec.n_noise;
    j["predictor_correlation"] = spec.predictor_correlation;
    Json p;
    p["type"] = spec.coefficient_pattern == CoefficientPattern::equal ? "equal"
                                                                      : "geometric_decay";
    if (spec.coefficient_pattern == CoefficientPattern::geometric_decay) {
        p["ratio"] = spec.pattern_ratio;
    }
    j["coefficient_pattern"] = p;
    if (spec.outcome_type == OutcomeType::binary) {
        j["target_prevalence"] = spec.target_prevalence;
    }
    j["target_performance"] = spec.target_performance;
    return j;
}

inline MetricSpec metric_spec_from_json(const Json& j) {
    const std::string kind = detail::json_require<std::string>(j, "kind");
    MetricSpec spec;
    if (kind == "auc") {
        spec = make_metric(MetricKind::auc);
    } else if (kind == "calibration_slope") {
        spec = make_metric(MetricKind::calibration_slope);
    } else if (kind == "mape") {
        spec = make_metric(MetricKind::mape);
    } else if (kind == "brier") {
        spec = make_metric(MetricKind::brier);
    } else if (kind == "r_squared") {
        spec = make_metric(MetricKind::r_squared);
    } else {
        throw ConfigError("unknown metric kind: " + kind);
    }
    if (j.contains("orientation")) {
        const std::string o = j.at("orientation").get<std::string>();
        if (o == "maximize") {
            spec.orientation = Orientation::maximize;
        } else if (o == "minimize") {
            spec.orientation = Orientation::minimize;
        } else {
            throw ConfigError("metric orientation must be maximize or minimize");
        }
    }
    const bool has_abs = j.contains("m_star");
    const bool has_dev = j.contains("deviation");
    if (has_abs == has_dev) {
        throw ConfigError("metric " + kind + ": give exactly one of m_star or deviation");
    }
    if (has_abs) {
        spec.target_mode = TargetMode::absolute;
        spec.m_star = j.at("m_star").get<double>();
    } else {
        spec.target_mode = TargetMode::deviation;
        spec.deviation = j.at("deviation").get<double>();
    }
    return spec;
}

inline Json metric_spec_to_json(const MetricSpec& spec) {
    Json j;
    j["kind"] = spec.name;
    j["orientation"] =
        spec.orientation == Orientation::maximize ? "maximize" : "minimize";
    if (spec.target_mode == TargetMode::absolute) {
        j["m_star"] = spec.m_star;
    } else {
        j["deviation"] = spec.deviation;
    }
    return j;
}

inline RunConfig run_config_from_json(const Json& j) {
    RunConfig cfg;
    SolverConfig& s = cfg.solver;
    s.generator = generator_spec_from_json(detail::json_require<Json>(j, "generator"));
    if (j.contains("strategy")) {
        const Json& st = j.at("strategy");
        s.strategy_tag = detail::json_get<std::string>(st, "tag", "logistic");
        s.l2_penalty = detail::json_get<double>(st, "l2_penalty", 0.0);
    }
    if (!j.contains("metrics") || !j.at("metrics").is_array() || j.at("metrics").empty()) {
        throw ConfigError("config needs a non-empty metrics array");
    }
    for (const Json& m : j.at("metrics")) {
        s.metrics.push_back(metric_spec_from_json(m));
    }
    if (j.contains("criterion")) {
        const Json& c = j.at("criterion");
        const std::string type = detail::json_get<std::string>(c, "type", "assurance");
        if (type == "assurance") {
            s.criterion.type = CriterionType::assurance;
            s.criterion.delta = detail::json_get<double>(c, "delta", 0.8);
        } else if (type == "mean") {
            s.criterion.type = CriterionType::mean;
        } else {
            throw ConfigError("criterion.type must be mean or assurance");
        }
    }
    s.n_min = detail::json_get<std::int64_t>(j, "n_min", 0);
    s.n_max = detail::json_get<std::int64_t>(j, "n_max", 200000);
    if (j.contains("replicates")) {
        const Json& r = j.at("replicates");
        s.r_search = detail::json_get<int>(r, "search", 100);
        s.r_confirm = detail::json_get<int>(r, "confirm", 400);
    }
    s.validation_size = detail::json_get<std::int64_t>(j, "validation_size", 50000);
    s.max_iterations = detail::json_get<int>(j, "max_search_iterations", 12);
    s.tolerance = detail::json_get<double>(j, "convergence_tolerance", 0.02);
    s.master_seed = detail::json_get<std::uint64_t>(j, "master_seed", 1);
    s.tuning_mc_size = detail::json_get<std::uint64_t>(j, "tuning_mc_size", 200000);
    s.threads = detail::json_get<int>(j, "threads", 1);
    s.fresh_validation = detail::json_get<bool>(j, "fresh_validation", false);
    s.bootstrap_b = detail::json_get<int>(j, "bootstrap_b", 200);

    if (j.contains("curve_grid")) {
        cfg.curve_grid = j.at("curve_grid").get<std::vector<std::int64_t>>();
    }
    cfg.curve_replicates = detail::json_get<int>(j, "curve_replicates", 0);

    if (j.contains("output")) {
        const Json& o = j.at("output");
        cfg.output.directory =
            detail::json_get<std::string>(o, "directory", cfg.output.directory);
        cfg.output.curve_csv = detail::json_get<bool>(o, "curve_csv", true);
        cfg.output.result_json = detail::json_get<bool>(o, "result_json", true);
        cfg.output.plot_svg = detail::json_get<bool>(o, "plot_svg", true);
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return run_config_from_json(j);
}

inline Json run_config_to_json(const RunConfig& cfg) {
    const SolverConfig& s = cfg.solver;
    Json j;
    j["generator"] = generator_spec_to_json(s.generator);
    j["strategy"] = Json{{"tag", s.strategy_tag}, {"l2_penalty", s.l2_penalty}};
    Json metrics = Json::array();
    for (const auto& m : s.metrics) metrics.push_back(metric_spec_to_json(m));
    j["metrics"] = metrics;
    if (s.criterion.type == CriterionType::assurance) {
        j["criterion"] = Json{{"type", "assurance"}, {"delta", s.criterion.delta}};
    } else {
        j["criterion"] = Json{{"type", "mean"}};
    }
    j["n_min"] = s.n_min;
    j["n_max"] = s.n_max;
    j["replicates"] = Json{{"search", s.r_search}, {"confirm", s.r_confirm}};
    j["validation_size"] = s.validation_size;
    j["max_search_iterations"] = s.max_iterations;
    j["convergence_tolerance"] = s.tolerance;
    j["master_seed"] = s.master_seed;
    j["tuning_mc_size"] = s.tuning_mc_size;
    j["threads"] = s.threads;
    j["fresh_validation"] = s.fresh_validation;
    j["bootstrap_b"] = s.bootstrap_b;
    return j;
}

/// TunedGenerator cache format; reals survive round-trips losslessly.
inline Json tuned_generator_to_json(const TunedGenerator& gen) {
    Json j;
    j["spec"] = generator_spec_to_json(gen.spec);
    j["intercept"] = gen.intercept;
    j["coefficient_scale"] = gen.coefficient_scale;
    j["noise_sd"] = gen.noise_sd;
    j["achieved_prevalence"] = gen.achieved_prevalence;
    j["achieved_prevalence_se"] = gen.achieved_prevalence_se;
    j["achieved_performance"] = gen.achieved_performance;
    j["achieved_performance_se"] = gen.achieved_performance_se;
    j["tuning_sample_size"] = gen.tuning_sample_size;
    return j;
}

inline TunedGenerator tuned_generator_from_json(const Json& j) {
    TunedGenerator gen;
    gen.spec = generator_spec_from_json(detail::json_require<Json>(j, "spec"));
    gen.intercept = detail::json_require<double>(j, "intercept");
    gen.coefficient_scale = detail::json_require<double>(j, "coefficient_scale");
    gen.noise_sd = detail::json_get<double>(j, "noise_sd", 0.0);
    gen.achieved_prevalence = detail::json_get<double>(j, "achieved_prevalence",
                                                       std::numeric_limits<double>::quiet_NaN());
    gen.achieved_prevalence_se = detail::json_get<double>(j, "achieved_prevalence_se",
                                                          std::numeric_limits<double>::quiet_NaN());
    gen.achieved_performance = detail::json_get<double>(j, "achieved_performance",
                                                        std::numeric_limits<double>::quiet_NaN());
    gen.achieved_performance_se = detail::json_get<double>(j, "achieved_performance_se",
                                                           std::numeric_limits<double>::quiet_NaN());
    gen.tuning_sample_size = detail::json_get<std::uint64_t>(j, "tuning_sample_size", 0);
    return gen;
}

} // namespace samplecurve
