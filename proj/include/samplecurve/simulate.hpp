#pragma once

// Distribution of expected model performance at a given development size n:
// repeated development draws, refits, and evaluation on a large independent
// validation sample. Replicates run on disjoint streams and aggregate by
// replicate order, so results do not depend on thread count.

#include "samplecurve/datagen.hpp"
#include "samplecurve/errors.hpp"
#include "samplecurve/metrics.hpp"
#include "samplecurve/models.hpp"
#include "samplecurve/parallel.hpp"
#include "samplecurve/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace samplecurve {

/// One replicate's metric values; an empty optional marks a failed
/// evaluation (non-convergent fit or degenerate metric).
struct PerformanceSample {
    std::int64_t n = 0;
    std::int64_t replicate = 0;
    bool model_converged = false;
    std::vector<std::optional<double>> values; // one entry per configured metric
};

struct MetricSummary {
    std::string metric;
    Orientation orientation = Orientation::maximize;
    int successes = 0;
    int failures = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    double mean_se = std::numeric_limits<double>::quiet_NaN();
    double q = std::numeric_limits<double>::quiet_NaN();
    double quantile = std::numeric_limits<double>::quiet_NaN();
    double quantile_se = std::numeric_limits<double>::quiet_NaN();
    /// True when the quantile and its SE are computable after the failure
    /// adjustment; only then can the point feed the learning-curve surrogate.
    bool quantile_valid = false;
};

struct PerformanceSummary {
    std::int64_t n = 0;
    int replicates = 0;
    std::vector<MetricSummary> per_metric;
};

/// Empirical quantile with the interpolation rule h = (R - 1) q + 1,
/// value = v(floor h) + (h - floor h) (v(ceil h) - v(floor h)) on the
/// ascending sort. The rule is normative so results match across
/// implementations.
inline double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw EmptyInput("empirical_quantile: no values");
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q + 1.0;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h)) - 1;
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - std::floor(h);
    return values[lo] + frac * (values[hi] - values[lo]);
}

/// Bootstrap standard error of the empirical quantile; deterministic given
/// (seed, stream).
inline double quantile_se(const std::vector<double>& values, double q, int B,
                          std::uint64_t seed, std::uint64_t stream = 0) {
    if (values.size() < 5) {
        throw TooFewValues("quantile_se: need at least 5 values");
    }
    if (B < 100) {
        throw InvalidSpec("quantile_se: need B >= 100");
    }
    CounterRng rng(seed, stream);
    std::vector<double> resample(values.size());
    std::vector<double> stats(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        for (double& v : resample) {
            v = values[rng.uniform_index(values.size())];
        }
        stats[static_cast<std::size_t>(b)] = empirical_quantile(resample, q);
    }
    double mean = 0.0;
    for (double s : stats) mean += s;
    mean /= static_cast<double>(B);
    double ss = 0.0;
    for (double s : stats) ss += (s - mean) * (s - mean);
    return std::sqrt(ss / static_cast<double>(B - 1));
}

struct SimulateOptions {
    double quantile_q = 0.2;       // assurance level 0.8 -> 20th percentile
    int threads = 1;               // 0 = all available cores
    bool fresh_validation = false; // redraw validation per replicate
    int bootstrap_b = 200;
    std::int64_t replicate_offset = 0; // continue replicate numbering past prior runs
};

/// Raw replicate loop; exposed so the search layer can pool replicates
/// across repeated visits to the same n (replicate_offset continues the
/// stream numbering, giving fresh draws).
inline std::vector<PerformanceSample>
run_replicates(const TunedGenerator& gen, const ModelStrategy& strategy,
               const std::vector<MetricSpec>& metrics, std::int64_t n, int R,
               const Dataset& validation, std::uint64_t master_seed,
               const SimulateOptions& opts = {}) {
    if (gen.spec.outcome_type == OutcomeType::binary && !opts.fresh_validation) {
        const double events = validation.outcomes.sum();
        if (events == 0.0 || events == static_cast<double>(validation.n())) {
            throw ValidationDegenerate("run_replicates: validation draw has one class");
        }
    }

    std::vector<PerformanceSample> records(static_cast<std::size_t>(R));
    parallel_for(0, R, opts.threads, [&](std::int64_t r) {
        const std::int64_t rep = opts.replicate_offset + r + 1;
        PerformanceSample& rec = records[static_cast<std::size_t>(r)];
        rec.n = n;
        rec.replicate = rep;
        rec.values.assign(metrics.size(), std::nullopt);

        const Dataset dev =
            generate(gen, n, master_seed,
                     stream_id(StreamDomain::dev, static_cast<std::uint64_t>(n),
                               static_cast<std::uint64_t>(rep)));
        FittedModel model;
        try {
            model = strategy.fit(dev);
        } catch (const Error&) {
            rec.model_converged = false;
            return;
        }
        rec.model_converged = model.converged;
        if (!model.converged) return;

        const Dataset* val = &validation;
        Dataset fresh;
        if (opts.fresh_validation) {
            fresh = generate(gen, validation.n(), master_seed,
                             stream_id(StreamDomain::val, static_cast<std::uint64_t>(n),
                                       static_cast<std::uint64_t>(rep)));
            val = &fresh;
        }
        const Vector predicted = strategy.predict_on(model, val->predictors);
        for (std::size_t k = 0; k < metrics.size(); ++k) {
            rec.values[k] =
                evaluate_metric(metrics[k], predicted, val->outcomes, val->true_prob);
        }
    });
    return records;
}

/// Aggregate replicate values into per-metric summaries. Mean and sd run
/// over successful replicates only. The assurance quantile treats failed
/// replicates as worst-possible values: they occupy the bottom ranks
/// (maximize) or top ranks (minimize) of the padded sample, and the rank
/// h = (R - 1) q + 1 is remapped onto the successes. When h lands inside
/// the failure block the quantile is not computable and the point cannot
/// satisfy the threshold.
///
/// `q` is the assurance quantile for maximize metrics (1 - delta); minimize
/// metrics use the mirrored level 1 - q so that, e.g., delta = 0.8 checks
/// the 20th percentile of a maximize metric and the 80th of a minimize one.
inline PerformanceSummary
summarize(const std::vector<MetricSpec>& metrics,
          const std::vector<PerformanceSample>& records, double q,
          std::uint64_t master_seed, int bootstrap_b = 200) {
    PerformanceSummary summary;
    summary.replicates = static_cast<int>(records.size());
    summary.n = records.empty() ? 0 : records.front().n;

    for (std::size_t k = 0; k < metrics.size(); ++k) {
        MetricSummary ms;
        ms.metric = metrics[k].name;
        ms.orientation = metrics[k].orientation;
        std::vector<double> values;
        values.reserve(records.size());
        for (const auto& rec : records) {
            if (rec.values.size() > k && rec.values[k].has_value()) {
                values.push_back(*rec.values[k]);
            }
        }
        const int S = static_cast<int>(values.size());
        const int R = summary.replicates;
        ms.successes = S;
        ms.failures = R - S;

        if (S >= 1) {
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= S;
            ms.mean = mean;
            if (S >= 2) {
                double ss = 0.0;
                for (double v : values) ss += (v - mean) * (v - mean);
                ms.sd = std::sqrt(ss / (S - 1));
                ms.mean_se = ms.sd / std::sqrt(static_cast<double>(S));
            }
        }

        // failure-adjusted quantile
        const bool maximize = metrics[k].orientation == Orientation::maximize;
        const double q_used = maximize ? q : 1.0 - q;
        const double h = (static_cast<double>(R) - 1.0) * q_used + 1.0;
        const int F = ms.failures;
        bool rank_ok = false;
        double q_local = 0.0;
        if (S >= 1) {
            if (maximize) {
                // failures occupy ranks 1..F
                if (h >= static_cast<double>(F) + 1.0) {
                    rank_ok = true;
                    q_local = S > 1 ? (h - F - 1.0) / (S - 1.0) : 0.0;
                }
            } else {
                // failures occupy ranks S+1..R
                if (h <= static_cast<double>(S)) {
                    rank_ok = true;
                    q_local = S > 1 ? (h - 1.0) / (S - 1.0) : 0.0;
                }
            }
        }
        ms.q = q_used;
        if (rank_ok) {
            ms.quantile = empirical_quantile(values, q_local);
            if (S >= 5) {
                ms.quantile_se =
                    quantile_se(values, q_local, bootstrap_b, master_seed,
                                stream_id(StreamDomain::boot,
                                          static_cast<std::uint64_t>(summary.n), k));
                ms.quantile_valid = true;
            }
        }
        summary.per_metric.push_back(std::move(ms));
    }
    return summary;
}

/// Estimate the distribution of performance over development draws at one n:
/// fixed validation draw on its own stream, R replicates on dev streams, and
/// an ordered reduction into the summary.
inline PerformanceSummary
run_at_n(const TunedGenerator& gen, const ModelStrategy& strategy,
         const std::vector<MetricSpec>& metrics, std::int64_t n, int R,
         std::int64_t validation_size, std::uint64_t master_seed,
         const SimulateOptions& opts = {}) {
    if (R < 2) {
        throw InvalidSpec("run_at_n: need R >= 2 replicates");
    }
    if (n < 1) {
        throw InvalidSpec("run_at_n: need n >= 1");
    }
    if (validation_size < 2) {
        throw InvalidSpec("run_at_n: validation_size too small");
    }
    const Dataset validation =
        generate(gen, validation_size, master_seed, stream_id(StreamDomain::val, 0, 0));
    const auto records =
        run_replicates(gen, strategy, metrics, n, R, validation, master_seed, opts);
    return summarize(metrics, records, opts.quantile_q, master_seed, opts.bootstrap_b);
}

} // namespace samplecurve
