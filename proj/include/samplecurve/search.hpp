#pragma once

// End-to-end solver: tune the generator, seed the learning curve on a
// log-spaced grid, then alternate exploitation (evaluate at the current
// crossing estimate of the least-resolved metric) with exploration (evaluate
// at the point of maximum posterior sd inside its crossing interval) until
// the crossing estimates stabilize. Finishes with a confirmation run at the
// combined recommendation.

#include "samplecurve/baselines.hpp"
#include "samplecurve/datagen.hpp"
#include "samplecurve/errors.hpp"
#include "samplecurve/logging.hpp"
#include "samplecurve/metrics.hpp"
#include "samplecurve/models.hpp"
#include "samplecurve/simulate.hpp"
#include "samplecurve/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace samplecurve {

enum class CriterionType { mean, assurance };

struct Criterion {
    CriterionType type = CriterionType::assurance;
    double delta = 0.8;

    /// Assurance quantile level for maximize metrics; delta = 0.8 means the
    /// 20th percentile must clear the threshold.
    double quantile_q() const { return 1.0 - delta; }
};

struct SolverConfig {
    GeneratorSpec generator;
    std::string strategy_tag = "logistic";
    double l2_penalty = 0.0;
    std::vector<MetricSpec> metrics;
    Criterion criterion;
    std::int64_t n_min = 0; // 0 -> max(50, 2 (p + 1))
    std::int64_t n_max = 200000;
    int r_search = 100;
    int r_confirm = 400;
    std::int64_t validation_size = 50000;
    int max_iterations = 12;
    double tolerance = 0.02; // relative change in n_hat
    std::uint64_t master_seed = 1;
    std::uint64_t tuning_mc_size = 200000;
    int threads = 1; // 0 = all cores
    bool fresh_validation = false;
    int bootstrap_b = 200;

    std::int64_t resolved_n_min() const {
        if (n_min > 0) return n_min;
        return std::max<std::int64_t>(50, 2 * (generator.p() + 1));
    }

    void validate() const {
        generator.validate();
        if (metrics.empty()) {
            throw ConfigError("solver: at least one metric required");
        }
        if (criterion.type == CriterionType::assurance &&
            (criterion.delta <= 0.5 || criterion.delta > 0.99)) {
            throw ConfigError("solver: assurance delta outside (0.5, 0.99]");
        }
        if (resolved_n_min() >= n_max) {
            throw ConfigError("solver: need n_min < n_max");
        }
        if (r_search < 20) {
            throw ConfigError("solver: need r_search >= 20");
        }
        if (r_confirm < 2) {
            throw ConfigError("solver: need r_confirm >= 2");
        }
        for (const auto& m : metrics) {
            if (m.target_mode == TargetMode::absolute) {
                if (!std::isfinite(m.m_star)) {
                    throw ConfigError("metric " + m.name + ": absolute target missing");
                }
            } else {
                if (!std::isfinite(m.deviation)) {
                    throw ConfigError("metric " + m.name + ": deviation d missing");
                }
                if (m.kind != MetricKind::auc && m.kind != MetricKind::r_squared &&
                    m.kind != MetricKind::calibration_slope) {
                    throw ConfigError("metric " + m.name +
                                      ": deviation targets need a known ideal "
                                      "(auc, r_squared, or calibration_slope)");
                }
            }
        }
    }
};

enum class MetricSolveStatus { solved, already_satisfied, unreachable, censored };

inline std::string metric_solve_status_name(MetricSolveStatus s) {
    switch (s) {
    case MetricSolveStatus::solved: return "solved";
    case MetricSolveStatus::already_satisfied: return "already_satisfied";
    case MetricSolveStatus::unreachable: return "unreachable";
    case MetricSolveStatus::censored: return "censored";
    }
    return "?";
}

struct ObservationRow {
    std::int64_t n = 0;
    int replicates = 0;
    int failures = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    double stat = std::numeric_limits<double>::quiet_NaN(); // criterion statistic
    double stat_se = std::numeric_limits<double>::quiet_NaN();
    bool stat_valid = false;
    double gp_mean = std::numeric_limits<double>::quiet_NaN();
    double gp_sd = std::numeric_limits<double>::quiet_NaN();
};

struct GpDiagnostics {
    double sigma_f = 0.0;
    double length_scale = 0.0;
    double log_marginal_likelihood = 0.0;
    double jitter = 0.0;
    bool mean_non_monotone = false;
};

struct MetricResult {
    std::string metric;
    Orientation orientation = Orientation::maximize;
    double threshold = std::numeric_limits<double>::quiet_NaN();
    MetricSolveStatus status = MetricSolveStatus::solved;
    std::optional<std::int64_t> n_required; // empty iff unreachable
    std::int64_t ci_low = 0;
    std::int64_t ci_high = 0;
    std::vector<ObservationRow> observations;
    std::optional<GpDiagnostics> gp;
    std::optional<PowerLawFit> power_law;
};

struct ConfirmationCheck {
    std::string metric;
    double threshold = std::numeric_limits<double>::quiet_NaN();
    double stat = std::numeric_limits<double>::quiet_NaN();
    double stat_se = std::numeric_limits<double>::quiet_NaN();
    bool passed = false;
};

struct SampleSizeResult {
    TunedGenerator generator;
    Criterion criterion;
    std::vector<MetricResult> metrics;
    std::optional<std::int64_t> combined_n;
    bool not_confirmed = false;
    bool budget_exhausted = false;
    std::optional<PerformanceSummary> confirmation;
    std::vector<ConfirmationCheck> confirmation_checks;
    std::int64_t total_replicate_fits = 0;
    std::optional<std::int64_t> epv_baseline;
    std::vector<std::int64_t> evaluated_n;
};

namespace detail {

/// Resolve the satisfaction threshold M* for one metric. Deviation targets
/// use the tuned generator's achieved performance as the ideal for the
/// tuning metric and 1 for the calibration slope.
inline double resolve_threshold(const MetricSpec& metric, const TunedGenerator& gen) {
    if (metric.target_mode == TargetMode::absolute) return metric.m_star;
    double ideal = 0.0;
    switch (metric.kind) {
    case MetricKind::auc:
    case MetricKind::r_squared:
        ideal = gen.achieved_performance;
        break;
    case MetricKind::calibration_slope:
        ideal = 1.0;
        break;
    default:
        throw ConfigError("metric " + metric.name + ": no ideal for deviation target");
    }
    return metric.orientation == Orientation::maximize ? ideal - metric.deviation
                                                       : ideal + metric.deviation;
}

inline std::vector<std::int64_t> seed_grid(std::int64_t n_min, std::int64_t n_max,
                                           int points) {
    std::vector<std::int64_t> grid;
    const double lo = std::log(static_cast<double>(n_min));
    const double hi = std::log(static_cast<double>(n_max));
    for (int i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        const auto n = static_cast<std::int64_t>(std::llround(std::exp(lo + t * (hi - lo))));
        grid.push_back(std::clamp(n, n_min, n_max));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

} // namespace detail

/// One-shot reachability probe at n_max: reachable when the criterion
/// statistic plus two of its standard errors clears the threshold. Returns
/// the statistic as the empirical ceiling.
struct ReachabilityResult {
    bool reachable = false;
    double ceiling = std::numeric_limits<double>::quiet_NaN();
};

inline ReachabilityResult
check_reachability(const TunedGenerator& gen, const ModelStrategy& strategy,
                   const MetricSpec& metric, double threshold, std::int64_t n_max,
                   int R, std::uint64_t seed, const Criterion& criterion = {},
                   const SimulateOptions& base_opts = {}) {
    SimulateOptions opts = base_opts;
    opts.quantile_q = criterion.quantile_q();
    const PerformanceSummary summary =
        run_at_n(gen, strategy, {metric}, n_max, R, 50000, seed, opts);
    const MetricSummary& ms = summary.per_metric.front();

    ReachabilityResult result;
    double stat, se;
    if (criterion.type == CriterionType::assurance) {
        if (!ms.quantile_valid) return result; // failure-dominated: unreachable
        stat = ms.quantile;
        se = ms.quantile_se;
    } else {
        if (ms.successes < 2) return result;
        stat = ms.mean;
        se = ms.mean_se;
    }
    result.ceiling = stat;
    result.reachable = metric.orientation == Orientation::maximize
                           ? stat + 2.0 * se >= threshold
                           : stat - 2.0 * se <= threshold;
    return result;
}

/// Full pipeline. Deterministic: identical configs (including master_seed)
/// give identical results for any thread count.
inline SampleSizeResult solve_sample_size(const SolverConfig& config) {
    config.validate();
    const std::int64_t n_min = config.resolved_n_min();
    const std::int64_t n_max = config.n_max;

    SampleSizeResult result;
    result.criterion = config.criterion;

    log_info("tuning generator (mc_size=" + std::to_string(config.tuning_mc_size) + ")");
    result.generator =
        tune_scale(config.generator, config.tuning_mc_size, config.master_seed);
    const TunedGenerator& gen = result.generator;

    std::vector<double> thresholds;
    for (const auto& m : config.metrics) {
        thresholds.push_back(detail::resolve_threshold(m, gen));
    }

    if (gen.spec.outcome_type == OutcomeType::binary) {
        result.epv_baseline = epv_sample_size(
            {gen.spec.p(), gen.spec.target_prevalence, 10.0});
    }

    const auto strategy = make_strategy(config.strategy_tag, config.l2_penalty);
    const Dataset validation = generate(gen, config.validation_size,
                                        config.master_seed, stream_id(StreamDomain::val, 0, 0));

    SimulateOptions opts;
    opts.quantile_q = config.criterion.quantile_q();
    opts.threads = config.threads;
    opts.fresh_validation = config.fresh_validation;
    opts.bootstrap_b = config.bootstrap_b;

    // replicate pool per evaluated n; revisits extend the pool on fresh streams
    std::map<std::int64_t, std::vector<PerformanceSample>> pool;
    auto evaluate = [&](std::int64_t n, int R) {
        auto& records = pool[n];
        SimulateOptions run_opts = opts;
        run_opts.replicate_offset = static_cast<std::int64_t>(records.size());
        log_info("evaluating n=" + std::to_string(n) + " with R=" + std::to_string(R) +
                 (run_opts.replicate_offset > 0
                      ? " (pooled on top of " + std::to_string(run_opts.replicate_offset) + ")"
                      : ""));
        auto fresh = run_replicates(gen, *strategy, config.metrics, n, R, validation,
                                    config.master_seed, run_opts);
        records.insert(records.end(), fresh.begin(), fresh.end());
        result.total_replicate_fits += R;
    };

    // criterion statistic with SE for one metric at one evaluated n
    auto statistic = [&](const MetricSummary& ms) -> std::optional<std::pair<double, double>> {
        if (config.criterion.type == CriterionType::assurance) {
            if (!ms.quantile_valid) return std::nullopt;
            return std::make_pair(ms.quantile, ms.quantile_se);
        }
        if (ms.successes < 5 || !std::isfinite(ms.mean_se)) return std::nullopt;
        return std::make_pair(ms.mean, ms.mean_se);
    };

    for (std::int64_t n : detail::seed_grid(n_min, n_max, 5)) {
        evaluate(n, config.r_search);
    }

    struct MetricState {
        std::optional<LearningCurveModel> model;
        std::optional<Crossing> crossing;
        std::vector<CurveObservation> observations;
    };
    std::vector<MetricState> states(config.metrics.size());

    auto refit_all = [&]() {
        std::map<std::int64_t, PerformanceSummary> summaries;
        for (const auto& [n, records] : pool) {
            summaries.emplace(n, summarize(config.metrics, records, opts.quantile_q,
                                           config.master_seed, config.bootstrap_b));
        }
        for (std::size_t k = 0; k < config.metrics.size(); ++k) {
            MetricState& st = states[k];
            st.observations.clear();
            for (const auto& [n, summary] : summaries) {
                const auto stat = statistic(summary.per_metric[k]);
                if (stat.has_value()) {
                    st.observations.push_back(
                        {static_cast<double>(n), stat->first, stat->second});
                }
            }
            st.model.reset();
            st.crossing.reset();
            if (st.observations.size() >= 2) {
                st.model = gp_fit(st.observations);
                st.crossing = find_crossing(*st.model, thresholds[k],
                                            config.metrics[k].orientation, n_min, n_max);
            }
        }
    };

    refit_all();

    auto n_hat_of = [&](const MetricState& st) -> std::optional<std::int64_t> {
        if (!st.crossing.has_value()) return std::nullopt;
        return st.crossing->n_hat;
    };

    std::vector<std::optional<std::int64_t>> prev_n_hat(config.metrics.size());
    for (std::size_t k = 0; k < states.size(); ++k) prev_n_hat[k] = n_hat_of(states[k]);

    int stable_iterations = 0;
    bool converged = false;
    for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
        // pick the least-resolved solvable metric
        int target_metric = -1;
        std::int64_t widest_ci = -1;
        for (std::size_t k = 0; k < states.size(); ++k) {
            const auto& cr = states[k].crossing;
            if (!cr.has_value() || cr->status != CrossingStatus::found) continue;
            const std::int64_t width = cr->ci_high - cr->ci_low;
            if (width > widest_ci ||
                (width == widest_ci && target_metric >= 0 &&
                 cr->n_hat > states[static_cast<std::size_t>(target_metric)].crossing->n_hat)) {
                widest_ci = width;
                target_metric = static_cast<int>(k);
            }
        }

        bool all_terminal = true;
        for (const auto& st : states) {
            if (!st.crossing.has_value() ||
                st.crossing->status == CrossingStatus::found) {
                all_terminal = false;
                break;
            }
        }
        if (all_terminal) {
            converged = true;
            break;
        }

        std::int64_t next_n;
        if (target_metric < 0) {
            // no metric has a usable curve yet: probe the log midpoint
            next_n = static_cast<std::int64_t>(std::llround(std::exp(
                0.5 * (std::log(static_cast<double>(n_min)) +
                       std::log(static_cast<double>(n_max))))));
        } else {
            const MetricState& st = states[static_cast<std::size_t>(target_metric)];
            const Crossing& cr = *st.crossing;
            if (iteration % 2 == 1) {
                next_n = cr.n_hat; // exploitation
            } else {
                // exploration: max posterior sd inside the crossing interval
                const double lo = std::log(static_cast<double>(std::max<std::int64_t>(cr.ci_low, n_min)));
                const double hi = std::log(static_cast<double>(std::min<std::int64_t>(cr.ci_high, n_max)));
                double best_sd = -1.0;
                double best_x = lo;
                for (int i = 0; i < 200; ++i) {
                    const double x = lo + (hi - lo) * static_cast<double>(i) / 199.0;
                    const double sd = detail::gp_predict_at_x(*st.model, x).sd;
                    if (sd > best_sd) {
                        best_sd = sd;
                        best_x = x;
                    }
                }
                next_n = static_cast<std::int64_t>(std::llround(std::exp(best_x)));
            }
        }
        next_n = std::clamp(next_n, n_min, n_max);
        evaluate(next_n, config.r_search);
        refit_all();

        bool all_stable = true;
        for (std::size_t k = 0; k < states.size(); ++k) {
            const auto& cr = states[k].crossing;
            if (!cr.has_value()) {
                all_stable = false;
            } else if (cr->status == CrossingStatus::found) {
                const auto now = n_hat_of(states[k]);
                if (!prev_n_hat[k].has_value() || !now.has_value()) {
                    all_stable = false;
                } else {
                    const double rel =
                        std::abs(static_cast<double>(*now - *prev_n_hat[k])) /
                        static_cast<double>(*prev_n_hat[k]);
                    if (rel >= config.tolerance) all_stable = false;
                }
            }
            prev_n_hat[k] = n_hat_of(states[k]);
        }
        stable_iterations = all_stable ? stable_iterations + 1 : 0;
        if (stable_iterations >= 2) {
            converged = true;
            break;
        }
    }
    result.budget_exhausted = !converged;

    for (const auto& [n, records] : pool) result.evaluated_n.push_back(n);

    // assemble per-metric results
    std::map<std::int64_t, PerformanceSummary> summaries;
    for (const auto& [n, records] : pool) {
        summaries.emplace(n, summarize(config.metrics, records, opts.quantile_q,
                                       config.master_seed, config.bootstrap_b));
    }
    for (std::size_t k = 0; k < config.metrics.size(); ++k) {
        const MetricState& st = states[k];
        MetricResult mr;
        mr.metric = config.metrics[k].name;
        mr.orientation = config.metrics[k].orientation;
        mr.threshold = thresholds[k];

        for (const auto& [n, summary] : summaries) {
            const MetricSummary& ms = summary.per_metric[k];
            ObservationRow row;
            row.n = n;
            row.replicates = summary.replicates;
            row.failures = ms.failures;
            row.mean = ms.mean;
            row.sd = ms.sd;
            const auto stat = statistic(ms);
            if (stat.has_value()) {
                row.stat = stat->first;
                row.stat_se = stat->second;
                row.stat_valid = true;
            }
            if (st.model.has_value()) {
                const GpPrediction p = gp_predict(*st.model, static_cast<double>(n));
                row.gp_mean = p.mean;
                row.gp_sd = p.sd;
            }
            mr.observations.push_back(row);
        }

        if (st.model.has_value()) {
            GpDiagnostics diag;
            diag.sigma_f = st.model->sigma_f * st.model->scale;
            diag.length_scale = st.model->length_scale;
            diag.log_marginal_likelihood = st.model->log_marginal_likelihood;
            diag.jitter = st.model->jitter;
            diag.mean_non_monotone =
                st.crossing.has_value() && st.crossing->mean_non_monotone;
            mr.gp = diag;
        }
        if (st.observations.size() >= 4) {
            std::vector<CurveObservation> adapted = st.observations;
            if (config.metrics[k].orientation == Orientation::minimize) {
                for (auto& o : adapted) o.y = -o.y;
            }
            mr.power_law = fit_power_law(adapted);
        }

        if (!st.crossing.has_value()) {
            // never enough valid observations to model the curve
            mr.status = MetricSolveStatus::unreachable;
            mr.n_required.reset();
            mr.ci_low = mr.ci_high = n_max;
        } else {
            const Crossing& cr = *st.crossing;
            mr.ci_low = cr.ci_low;
            mr.ci_high = cr.ci_high;
            switch (cr.status) {
            case CrossingStatus::already_satisfied:
                mr.status = MetricSolveStatus::already_satisfied;
                mr.n_required = n_min;
                break;
            case CrossingStatus::unreachable:
                mr.status = MetricSolveStatus::unreachable;
                mr.n_required.reset();
                break;
            case CrossingStatus::found:
                mr.status = cr.censored_high ? MetricSolveStatus::censored
                                             : MetricSolveStatus::solved;
                mr.n_required = cr.n_hat;
                break;
            }
        }
        result.metrics.push_back(std::move(mr));
    }

    std::optional<std::int64_t> combined;
    for (const auto& mr : result.metrics) {
        if (mr.n_required.has_value()) {
            combined = combined.has_value() ? std::max(*combined, *mr.n_required)
                                            : *mr.n_required;
        }
    }
    result.combined_n = combined;

    if (combined.has_value()) {
        log_info("confirming n=" + std::to_string(*combined) + " with R=" +
                 std::to_string(config.r_confirm));
        result.confirmation =
            run_at_n(gen, *strategy, config.metrics, *combined, config.r_confirm,
                     config.validation_size, config.master_seed, opts);
        result.total_replicate_fits += config.r_confirm;
        for (std::size_t k = 0; k < config.metrics.size(); ++k) {
            if (!result.metrics[k].n_required.has_value()) continue;
            const MetricSummary& ms = result.confirmation->per_metric[k];
            ConfirmationCheck check;
            check.metric = config.metrics[k].name;
            check.threshold = thresholds[k];
            const auto stat = statistic(ms);
            if (stat.has_value()) {
                check.stat = stat->first;
                check.stat_se = stat->second;
                check.passed = config.metrics[k].orientation == Orientation::maximize
                                   ? check.stat >= check.threshold - check.stat_se
                                   : check.stat <= check.threshold + check.stat_se;
            }
            if (!check.passed) result.not_confirmed = true;
            result.confirmation_checks.push_back(check);
        }
    }
    return result;
}

} // namespace samplecurve
