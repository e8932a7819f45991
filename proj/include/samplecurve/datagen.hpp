#pragma once

// Parametric data-generating distribution: an equicorrelated standard-normal
// predictor block feeding a logistic (binary) or affine-plus-noise
// (continuous) outcome. The tuning step solves for the intercept and the
// coefficient scale so that large-sample prevalence and performance match
// their targets.

#include "samplecurve/errors.hpp"
#include "samplecurve/ranks.hpp"
#include "samplecurve/rng.hpp"
#include "samplecurve/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace samplecurve {

enum class OutcomeType { binary, continuous };

enum class CoefficientPattern { equal, geometric_decay };

struct GeneratorSpec {
    OutcomeType outcome_type = OutcomeType::binary;
    int n_true = 1;
    int n_noise = 0;
    double predictor_correlation = 0.0;
    CoefficientPattern coefficient_pattern = CoefficientPattern::equal;
    double pattern_ratio = 0.5; // used by geometric_decay only
    double target_prevalence = 0.5;
    double target_performance = 0.75; // AUC for binary, R^2 for continuous

    int p() const { return n_true + n_noise; }

    /// Relative coefficient weights before scaling; noise predictors are
    /// exactly zero.
    std::vector<double> pattern_weights() const {
        std::vector<double> w(static_cast<std::size_t>(p()), 0.0);
        for (int j = 0; j < n_true; ++j) {
            w[static_cast<std::size_t>(j)] =
                coefficient_pattern == CoefficientPattern::equal
                    ? 1.0
                    : std::pow(pattern_ratio, j);
        }
        return w;
    }

    void validate() const {
        if (n_true < 0 || n_noise < 0 || p() < 1) {
            throw InvalidSpec("generator: need n_true + n_noise >= 1");
        }
        if (predictor_correlation < 0.0 || predictor_correlation > 0.95) {
            throw InvalidSpec("generator: predictor_correlation outside [0, 0.95]");
        }
        if (coefficient_pattern == CoefficientPattern::geometric_decay &&
            (pattern_ratio <= 0.0 || pattern_ratio > 1.0)) {
            throw InvalidSpec("generator: geometric decay ratio outside (0, 1]");
        }
        if (outcome_type == OutcomeType::binary) {
            if (target_prevalence <= 0.01 || target_prevalence >= 0.99) {
                throw InvalidSpec("generator: target_prevalence outside (0.01, 0.99)");
            }
            if (target_performance < 0.5 || target_performance > 0.999) {
                throw InvalidSpec("generator: target AUC outside [0.5, 0.999]");
            }
            if (target_performance > 0.5 && n_true < 1) {
                throw InvalidSpec("generator: AUC above chance requires n_true >= 1");
            }
        } else {
            if (target_performance <= 0.0 || target_performance > 0.999) {
                throw InvalidSpec("generator: target R^2 outside (0, 0.999]");
            }
            if (n_true < 1) {
                throw InvalidSpec("generator: continuous outcome requires n_true >= 1");
            }
        }
    }
};

/// sd of w.x for x from the equicorrelated block:
/// var = (1-rho) * sum w^2 + rho * (sum w)^2.
inline double linear_predictor_sd(const GeneratorSpec& spec,
                                  const std::vector<double>& weights) {
    double sum = 0.0, sumsq = 0.0;
    for (double w : weights) {
        sum += w;
        sumsq += w * w;
    }
    const double rho = spec.predictor_correlation;
    const double var = (1.0 - rho) * sumsq + rho * sum * sum;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

struct TunedGenerator {
    GeneratorSpec spec;
    double intercept = 0.0;
    double coefficient_scale = 0.0;
    double noise_sd = 0.0; // continuous outcome only
    double achieved_prevalence = std::numeric_limits<double>::quiet_NaN();
    double achieved_prevalence_se = std::numeric_limits<double>::quiet_NaN();
    double achieved_performance = std::numeric_limits<double>::quiet_NaN();
    double achieved_performance_se = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t tuning_sample_size = 0;

    std::vector<double> scaled_coefficients() const {
        std::vector<double> w = spec.pattern_weights();
        for (double& v : w) v *= coefficient_scale;
        return w;
    }
};

struct Dataset {
    Matrix predictors;  // n x p
    Vector outcomes;    // 0/1 for binary, real for continuous
    Vector true_prob;   // oracle pi(x) for binary, oracle mean for continuous

    Eigen::Index n() const { return predictors.rows(); }
    Eigen::Index p() const { return predictors.cols(); }
};

namespace detail {

// Tuning operates on the scalar linear predictor only: for the
// equicorrelated normal block, w.x is N(0, sd_w^2) and both the mean
// outcome and the AUC of pi(x) depend on x through w.x alone, so the
// p-dimensional draw reduces exactly to a 1-d one.
struct TuningDraws {
    std::vector<double> s; // standardized linear predictor draws, antithetic
    std::vector<double> u; // outcome uniforms
};

inline std::size_t even_size(std::uint64_t mc_size) {
    return static_cast<std::size_t>(mc_size + (mc_size & 1u));
}

inline std::vector<double> antithetic_normals(std::uint64_t master_seed,
                                              std::uint64_t stream,
                                              std::size_t m) {
    CounterRng rng(master_seed, stream);
    std::vector<double> s(m);
    for (std::size_t k = 0; k + 1 < m; k += 2) {
        const double z = rng.normal();
        s[k] = z;
        s[k + 1] = -z;
    }
    return s;
}

inline TuningDraws tuning_draws(std::uint64_t master_seed, std::uint64_t mc_size,
                                std::uint64_t predictor_rep,
                                std::uint64_t outcome_rep) {
    const std::size_t m = even_size(mc_size);
    TuningDraws d;
    d.s = antithetic_normals(master_seed,
                             stream_id(StreamDomain::tune, mc_size, predictor_rep), m);
    CounterRng rng(master_seed, stream_id(StreamDomain::tune, mc_size, outcome_rep));
    d.u.resize(m);
    for (double& v : d.u) v = rng.uniform01();
    return d;
}

inline double solve_intercept(const std::vector<double>& s, double signal_sd,
                              double target_prevalence) {
    auto mean_prob = [&](double beta0) {
        double acc = 0.0;
        for (double si : s) acc += sigmoid(beta0 + signal_sd * si);
        return acc / static_cast<double>(s.size());
    };
    double lo = -20.0, hi = 20.0;
    if (mean_prob(lo) > target_prevalence || mean_prob(hi) < target_prevalence) {
        throw NoBracket("tune_intercept: target prevalence unattainable in [-20, 20]");
    }
    double mid = 0.0;
    for (int it = 0; it < 60; ++it) {
        mid = 0.5 * (lo + hi);
        const double g = mean_prob(mid) - target_prevalence;
        if (std::abs(g) <= 5e-4) return mid;
        (g < 0.0 ? lo : hi) = mid;
    }
    return mid;
}

} // namespace detail

/// Solve for the intercept matching the target prevalence by bisection over
/// [-20, 20]. The Monte Carlo predictor draws are fixed up front and reused
/// across iterations, so the objective is a deterministic monotone function
/// of the intercept. Draws are antithetic, which makes the symmetric case
/// exact.
inline double tune_intercept(const GeneratorSpec& spec,
                             const std::vector<double>& scaled_coefficients,
                             double target_prevalence, std::uint64_t mc_size,
                             std::uint64_t seed) {
    if (spec.outcome_type != OutcomeType::binary) {
        throw InvalidSpec("tune_intercept: binary outcome required");
    }
    if (mc_size < 100000) {
        throw InvalidSpec("tune_intercept: mc_size must be >= 1e5");
    }
    if (target_prevalence <= 0.01 || target_prevalence >= 0.99) {
        throw InvalidSpec("tune_intercept: target_prevalence outside (0.01, 0.99)");
    }
    const double sd = linear_predictor_sd(spec, scaled_coefficients);
    const std::vector<double> s = detail::antithetic_normals(
        seed, stream_id(StreamDomain::tune, mc_size, 0), detail::even_size(mc_size));
    return detail::solve_intercept(s, sd, target_prevalence);
}

/// Tune coefficient scale (binary: outer bisection on AUC with the intercept
/// re-solved at every candidate scale; continuous: analytic noise-sd from the
/// R^2 identity), then re-evaluate prevalence and performance on an
/// independent draw. The achieved_* fields always come from the re-evaluation
/// draw, never from the draws used to tune.
inline TunedGenerator tune_scale(const GeneratorSpec& spec, std::uint64_t mc_size,
                                 std::uint64_t seed) {
    spec.validate();
    if (mc_size < 100000) {
        throw InvalidSpec("tune_scale: mc_size must be >= 1e5");
    }

    TunedGenerator gen;
    gen.spec = spec;
    gen.tuning_sample_size = mc_size;
    const std::vector<double> pattern = spec.pattern_weights();
    const double unit_sd = linear_predictor_sd(spec, pattern);

    if (spec.outcome_type == OutcomeType::continuous) {
        // R^2 = var(eta) / (var(eta) + sigma^2), solved at scale 1.
        gen.coefficient_scale = 1.0;
        const double r2 = spec.target_performance;
        gen.noise_sd = unit_sd * std::sqrt((1.0 - r2) / r2);
        gen.intercept = 0.0;

        const std::size_t m = detail::even_size(mc_size);
        const std::vector<double> s = detail::antithetic_normals(
            seed, stream_id(StreamDomain::tune, mc_size, 2), m);
        CounterRng noise(seed, stream_id(StreamDomain::tune, mc_size, 3));
        double sum_y = 0.0, sum_res = 0.0;
        std::vector<double> y(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double mean_i = unit_sd * s[i];
            y[i] = mean_i + gen.noise_sd * noise.normal();
            sum_y += y[i];
            sum_res += (y[i] - mean_i) * (y[i] - mean_i);
        }
        const double mean_y = sum_y / static_cast<double>(m);
        double ss_tot = 0.0;
        for (double yi : y) ss_tot += (yi - mean_y) * (yi - mean_y);
        gen.achieved_performance = 1.0 - sum_res / ss_tot;
        const double r2hat = gen.achieved_performance;
        gen.achieved_performance_se =
            std::sqrt(4.0 * r2hat * (1.0 - r2hat) * (1.0 - r2hat) /
                      static_cast<double>(m));
        if (std::abs(gen.achieved_performance - r2) > 0.005) {
            throw TuningFailed("tune_scale: re-evaluated R^2 misses target by > 0.005");
        }
        return gen;
    }

    // binary
    const detail::TuningDraws d = detail::tuning_draws(seed, mc_size, 0, 1);
    const std::size_t m = d.s.size();

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return d.s[a] < d.s[b]; });

    // AUC of the oracle score for a candidate scale; the score ranking is
    // the s-ranking, so one sort serves every bisection iteration.
    auto auc_at = [&](double scale, double beta0) {
        const double sd = scale * unit_sd;
        std::size_t n_pos = 0;
        double rank_sum_pos = 0.0;
        double rank = 1.0;
        for (std::size_t idx : order) {
            const bool event = d.u[idx] < sigmoid(beta0 + sd * d.s[idx]);
            if (event) {
                ++n_pos;
                rank_sum_pos += rank;
            }
            rank += 1.0;
        }
        const std::size_t n_neg = m - n_pos;
        if (n_pos == 0 || n_neg == 0) return 0.5;
        const double np = static_cast<double>(n_pos);
        return (rank_sum_pos - np * (np + 1.0) / 2.0) /
               (np * static_cast<double>(n_neg));
    };
    auto intercept_at = [&](double scale) {
        return detail::solve_intercept(d.s, scale * unit_sd,
                                       spec.target_prevalence);
    };

    const double target = spec.target_performance;
    if (target <= 0.5 + 1e-12) {
        gen.coefficient_scale = 0.0;
    } else {
        double lo = 0.0, hi = 50.0;
        const double auc_hi = auc_at(hi, intercept_at(hi));
        if (auc_hi + 0.002 < target) {
            throw TargetUnreachable(
                "tune_scale: target AUC not attainable at coefficient scale 50");
        }
        double mid = hi;
        for (int it = 0; it < 60; ++it) {
            mid = 0.5 * (lo + hi);
            const double a = auc_at(mid, intercept_at(mid));
            if (std::abs(a - target) <= 0.002) break;
            (a < target ? lo : hi) = mid;
        }
        gen.coefficient_scale = mid;
    }
    gen.intercept = intercept_at(gen.coefficient_scale);

    // independent re-evaluation draw
    const detail::TuningDraws fresh = detail::tuning_draws(seed, mc_size, 2, 3);
    const double sd = gen.coefficient_scale * unit_sd;
    std::vector<double> labels(m);
    double events = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        labels[i] = fresh.u[i] < sigmoid(gen.intercept + sd * fresh.s[i]) ? 1.0 : 0.0;
        events += labels[i];
    }
    const double prev = events / static_cast<double>(m);
    gen.achieved_prevalence = prev;
    gen.achieved_prevalence_se = std::sqrt(prev * (1.0 - prev) / static_cast<double>(m));

    if (gen.coefficient_scale == 0.0) {
        // oracle score is constant; the tie-corrected AUC is exactly 1/2
        gen.achieved_performance = 0.5;
        gen.achieved_performance_se = 0.0;
    } else {
        const AucEstimate est = auc_with_se(fresh.s, labels);
        gen.achieved_performance = est.value;
        gen.achieved_performance_se = est.se;
    }

    if (std::abs(gen.achieved_prevalence - spec.target_prevalence) > 0.002) {
        throw TuningFailed("tune_scale: re-evaluated prevalence misses target by > 0.002");
    }
    if (std::abs(gen.achieved_performance - target) > 0.005) {
        throw TuningFailed("tune_scale: re-evaluated AUC misses target by > 0.005");
    }
    return gen;
}

/// Draw a dataset of size n on the given stream. Draw order per row: one
/// shared factor normal, p idiosyncratic normals, then the outcome draw
/// (one uniform for binary, one normal for continuous). Identical
/// (master_seed, stream) pairs reproduce identical datasets.
inline Dataset generate(const TunedGenerator& gen, std::int64_t n,
                        std::uint64_t master_seed, std::uint64_t stream) {
    const GeneratorSpec& spec = gen.spec;
    const int p = spec.p();
    const double rho = spec.predictor_correlation;
    const double a = std::sqrt(rho);
    const double b = std::sqrt(1.0 - rho);
    const std::vector<double> w = gen.scaled_coefficients();

    Dataset data;
    data.predictors.resize(n, p);
    data.outcomes.resize(n);
    data.true_prob.resize(n);

    CounterRng rng(master_seed, stream);
    for (std::int64_t i = 0; i < n; ++i) {
        const double z0 = rng.normal();
        double eta = gen.intercept;
        for (int j = 0; j < p; ++j) {
            const double x = a * z0 + b * rng.normal();
            data.predictors(i, j) = x;
            eta += w[static_cast<std::size_t>(j)] * x;
        }
        if (spec.outcome_type == OutcomeType::binary) {
            const double pi = sigmoid(eta);
            data.true_prob(i) = pi;
            data.outcomes(i) = rng.uniform01() < pi ? 1.0 : 0.0;
        } else {
            data.true_prob(i) = eta;
            data.outcomes(i) = eta + gen.noise_sd * rng.normal();
        }
    }
    return data;
}

} // namespace samplecurve
