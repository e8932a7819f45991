#pragma once

// Learning-curve surrogate: Gaussian-process regression of the per-n summary
// statistic on ln(n) with heteroscedastic noise from the per-point standard
// errors, plus an inverse-power-law parametric fit used for diagnostics and
// a threshold-crossing locator on the GP posterior mean.

#include "samplecurve/errors.hpp"
#include "samplecurve/metrics.hpp"
#include "samplecurve/types.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace samplecurve {

struct CurveObservation {
    double n = 0.0;
    double y = 0.0;  // per-n statistic: assurance quantile or mean
    double se = 0.0; // its standard error
};

struct GpGridCandidate {
    double sigma_f = 0.0;
    double length_scale = 0.0;
    double log_marginal_likelihood = -std::numeric_limits<double>::infinity();
};

struct LearningCurveModel {
    std::vector<CurveObservation> observations;
    double center = 0.0; // output standardization
    double scale = 1.0;
    double sigma_f = 1.0;      // standardized units
    double length_scale = 1.0; // in ln(n)
    double log_marginal_likelihood = -std::numeric_limits<double>::infinity();
    double jitter = 0.0;
    Vector x;     // ln(n)
    Vector alpha; // (K + D)^-1 y_std
    Matrix chol;  // lower Cholesky factor of K + D
    std::vector<GpGridCandidate> grid; // recorded hyperparameter grid
};

namespace detail {

struct GpFactorization {
    Matrix chol;
    Vector alpha;
    double jitter = 0.0;
    double lml = -std::numeric_limits<double>::infinity();
    bool ok = false;
};

inline Matrix se_kernel(const Vector& x, double sigma_f, double ell) {
    const Eigen::Index m = x.size();
    Matrix k(m, m);
    const double s2 = sigma_f * sigma_f;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double d = (x(i) - x(j)) / ell;
            const double v = s2 * std::exp(-0.5 * d * d);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

inline GpFactorization gp_factorize(const Vector& x, const Vector& y_std,
                                    const Vector& noise, double sigma_f,
                                    double ell) {
    static constexpr double kJitters[] = {0.0, 1e-12, 1e-10, 1e-8, 1e-6};
    const Eigen::Index m = x.size();
    Matrix base = se_kernel(x, sigma_f, ell);
    base.diagonal() += noise;

    GpFactorization f;
    for (double jitter : kJitters) {
        Matrix k = base;
        k.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(k);
        if (llt.info() != Eigen::Success) continue;
        f.chol = llt.matrixL();
        f.alpha = llt.solve(y_std);
        f.jitter = jitter;
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) log_det += std::log(f.chol(i, i));
        f.lml = -0.5 * y_std.dot(f.alpha) - log_det -
                0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi);
        if (!std::isfinite(f.lml)) continue;
        f.ok = true;
        return f;
    }
    return f;
}

inline std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out[static_cast<std::size_t>(i)] = std::exp(la + t * (lb - la));
    }
    return out;
}

} // namespace detail

/// Fit the GP: standardize outputs, set the noise diagonal from the
/// per-point SEs (nonzero SEs are floored at 1e-6 of the output variance;
/// exactly-zero SEs stay zero so noiseless data is interpolated), then pick
/// (sigma_f, length_scale) by log marginal likelihood over a 20x20
/// log-spaced grid followed by a 10-step coordinate refinement with halving
/// log-steps.
inline LearningCurveModel gp_fit(const std::vector<CurveObservation>& observations) {
    if (observations.size() < 2) {
        throw TooFewPoints("gp_fit: need at least 2 observations");
    }
    {
        std::vector<double> ns;
        for (const auto& o : observations) ns.push_back(o.n);
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
        if (ns.size() < 2) {
            throw TooFewPoints("gp_fit: need at least 2 distinct n");
        }
    }

    const Eigen::Index m = static_cast<Eigen::Index>(observations.size());
    LearningCurveModel model;
    model.observations = observations;
    model.x.resize(m);
    Vector y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        model.x(i) = std::log(observations[static_cast<std::size_t>(i)].n);
        y(i) = observations[static_cast<std::size_t>(i)].y;
    }

    model.center = y.mean();
    const double var_y = (y.array() - model.center).square().mean();
    model.scale = var_y > 0.0 ? std::sqrt(var_y) : 1.0;
    const Vector y_std = (y.array() - model.center) / model.scale;

    Vector noise(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double se = observations[static_cast<std::size_t>(i)].se;
        if (se == 0.0) {
            noise(i) = 0.0;
        } else {
            const double v = (se / model.scale) * (se / model.scale);
            noise(i) = std::max(v, 1e-6);
        }
    }

    const double x_range = model.x.maxCoeff() - model.x.minCoeff();
    const auto sigma_grid = detail::log_spaced(0.1, 3.0, 20);
    const auto ell_grid = detail::log_spaced(0.05 * x_range, 2.0 * x_range, 20);

    double best_sigma = sigma_grid.front();
    double best_ell = ell_grid.front();
    double best_lml = -std::numeric_limits<double>::infinity();
    bool any_ok = false;
    for (double sf : sigma_grid) {
        for (double ell : ell_grid) {
            const auto f = detail::gp_factorize(model.x, y_std, noise, sf, ell);
            model.grid.push_back({sf, ell, f.ok ? f.lml : -std::numeric_limits<double>::infinity()});
            if (f.ok && f.lml > best_lml) {
                best_lml = f.lml;
                best_sigma = sf;
                best_ell = ell;
                any_ok = true;
            }
        }
    }
    if (!any_ok) {
        throw NotPositiveDefinite("gp_fit: no hyperparameter candidate factorizes");
    }

    // local refinement: try one multiplicative step per coordinate, halving
    // the log-step each round
    double f_sigma = std::pow(3.0 / 0.1, 1.0 / 19.0);
    double f_ell = std::pow(2.0 / 0.05, 1.0 / 19.0);
    for (int step = 0; step < 10; ++step) {
        const double cand[4][2] = {{best_sigma * f_sigma, best_ell},
                                   {best_sigma / f_sigma, best_ell},
                                   {best_sigma, best_ell * f_ell},
                                   {best_sigma, best_ell / f_ell}};
        for (const auto& c : cand) {
            const auto f = detail::gp_factorize(model.x, y_std, noise, c[0], c[1]);
            if (f.ok && f.lml > best_lml) {
                best_lml = f.lml;
                best_sigma = c[0];
                best_ell = c[1];
            }
        }
        f_sigma = std::sqrt(f_sigma);
        f_ell = std::sqrt(f_ell);
    }

    const auto f = detail::gp_factorize(model.x, y_std, noise, best_sigma, best_ell);
    if (!f.ok) {
        throw NotPositiveDefinite("gp_fit: selected hyperparameters fail to factorize");
    }
    model.sigma_f = best_sigma;
    model.length_scale = best_ell;
    model.log_marginal_likelihood = f.lml;
    model.jitter = f.jitter;
    model.alpha = f.alpha;
    model.chol = f.chol;
    return model;
}

struct GpPrediction {
    double mean = 0.0;
    double sd = 0.0; // posterior function uncertainty, no observation noise
};

namespace detail {

inline GpPrediction gp_predict_at_x(const LearningCurveModel& model, double x_star) {
    const Eigen::Index m = model.x.size();
    Vector k_star(m);
    const double s2 = model.sigma_f * model.sigma_f;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double d = (x_star - model.x(i)) / model.length_scale;
        k_star(i) = s2 * std::exp(-0.5 * d * d);
    }
    GpPrediction pred;
    pred.mean = model.center + model.scale * k_star.dot(model.alpha);
    const Vector v = model.chol.triangularView<Eigen::Lower>().solve(k_star);
    const double var = std::max(0.0, s2 - v.squaredNorm());
    pred.sd = model.scale * std::sqrt(var);
    return pred;
}

} // namespace detail

/// Posterior mean and sd at sample size n (destandardized).
inline GpPrediction gp_predict(const LearningCurveModel& model, double n) {
    if (n < 1.0) {
        throw InvalidSpec("gp_predict: need n >= 1");
    }
    return detail::gp_predict_at_x(model, std::log(n));
}

struct PowerLawFit {
    double a = 0.0;     // asymptote
    double b = 0.0;     // amplitude
    double alpha = 0.0; // exponent, > 0
    double sse = 0.0;
};

/// Least-squares fit of y(n) = a - b n^(-alpha): a 50-point log grid on the
/// exponent with the closed-form linear solve for (a, b) at each candidate.
/// Diagnostic only; never the primary solver. Minimize-orientation curves
/// should be passed with y negated.
inline PowerLawFit fit_power_law(const std::vector<CurveObservation>& observations) {
    std::vector<double> ns;
    for (const auto& o : observations) ns.push_back(o.n);
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    if (ns.size() < 4) {
        throw TooFewPoints("fit_power_law: need >= 4 observations with distinct n");
    }

    const Eigen::Index m = static_cast<Eigen::Index>(observations.size());
    Vector y(m);
    for (Eigen::Index i = 0; i < m; ++i) y(i) = observations[static_cast<std::size_t>(i)].y;

    PowerLawFit best;
    best.sse = std::numeric_limits<double>::infinity();
    for (double alpha : detail::log_spaced(0.05, 2.0, 50)) {
        Matrix design(m, 2);
        for (Eigen::Index i = 0; i < m; ++i) {
            design(i, 0) = 1.0;
            design(i, 1) = -std::pow(observations[static_cast<std::size_t>(i)].n, -alpha);
        }
        const Eigen::Vector2d coef =
            design.colPivHouseholderQr().solve(y);
        const double sse = (y - design * coef).squaredNorm();
        if (sse < best.sse) {
            best.a = coef(0);
            best.b = coef(1);
            best.alpha = alpha;
            best.sse = sse;
        }
    }
    return best;
}

enum class CrossingStatus { found, already_satisfied, unreachable };

struct Crossing {
    CrossingStatus status = CrossingStatus::found;
    std::int64_t n_hat = 0;
    std::int64_t ci_low = 0;
    std::int64_t ci_high = 0;
    /// posterior mean never crossed within [n_min, n_max] but reachability
    /// was not excluded; n_hat is censored at n_max
    bool censored_high = false;
    bool mean_non_monotone = false;
};

namespace detail {

/// Smallest n in [n_min, n_max] where mean + band*sd satisfies the
/// threshold, refined by bisection on the posterior to relative precision
/// 1e-3 and rounded up; empty when the banded curve never satisfies.
inline std::optional<std::int64_t>
first_band_crossing(const LearningCurveModel& model, double threshold,
                    Orientation orientation, double band,
                    const std::vector<double>& grid_x,
                    const std::vector<GpPrediction>& grid_pred) {
    auto satisfied = [&](const GpPrediction& p) {
        const double v = p.mean + band * p.sd;
        return orientation == Orientation::maximize ? v >= threshold
                                                    : v <= threshold;
    };
    std::size_t idx = grid_x.size();
    for (std::size_t i = 0; i < grid_x.size(); ++i) {
        if (satisfied(grid_pred[i])) {
            idx = i;
            break;
        }
    }
    if (idx == grid_x.size()) return std::nullopt;
    if (idx == 0) {
        return static_cast<std::int64_t>(std::ceil(std::exp(grid_x.front()) - 1e-9));
    }
    double lo = grid_x[idx - 1], hi = grid_x[idx];
    while (hi - lo > std::log1p(1e-3)) {
        const double mid = 0.5 * (lo + hi);
        (satisfied(gp_predict_at_x(model, mid)) ? hi : lo) = mid;
    }
    return static_cast<std::int64_t>(std::ceil(std::exp(hi) - 1e-9));
}

} // namespace detail

/// Locate the smallest n where the posterior mean satisfies the threshold.
/// The 80% crossing band uses the 1.28 normal quantile: ci_low comes from
/// the optimistic curve (mean + 1.28 sd for maximize), ci_high from the
/// pessimistic one. Unreachable means even mean + 2 sd at n_max misses the
/// threshold; AlreadySatisfied means the mean clears it at n_min.
inline Crossing find_crossing(const LearningCurveModel& model, double threshold,
                              Orientation orientation, std::int64_t n_min,
                              std::int64_t n_max) {
    if (n_min >= n_max || n_min < 1) {
        throw InvalidSpec("find_crossing: need 1 <= n_min < n_max");
    }
    constexpr int kGridPoints = 200;
    std::vector<double> grid_x(kGridPoints);
    std::vector<GpPrediction> pred(kGridPoints);
    const double lo = std::log(static_cast<double>(n_min));
    const double hi = std::log(static_cast<double>(n_max));
    for (int i = 0; i < kGridPoints; ++i) {
        grid_x[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / (kGridPoints - 1);
        pred[static_cast<std::size_t>(i)] =
            detail::gp_predict_at_x(model, grid_x[static_cast<std::size_t>(i)]);
    }

    Crossing crossing;
    const double improve_sign = orientation == Orientation::maximize ? 1.0 : -1.0;
    for (int i = 1; i < kGridPoints; ++i) {
        const double delta = improve_sign * (pred[static_cast<std::size_t>(i)].mean -
                                             pred[static_cast<std::size_t>(i - 1)].mean);
        if (delta < -1e-9 * model.scale) {
            crossing.mean_non_monotone = true;
            break;
        }
    }

    auto mean_satisfied = [&](const GpPrediction& p) {
        return orientation == Orientation::maximize ? p.mean >= threshold
                                                    : p.mean <= threshold;
    };
    if (mean_satisfied(pred.front())) {
        crossing.status = CrossingStatus::already_satisfied;
        crossing.n_hat = crossing.ci_low = crossing.ci_high = n_min;
        return crossing;
    }
    const GpPrediction& tail = pred.back();
    const double reach_limit = tail.mean + improve_sign * 2.0 * tail.sd;
    const bool reachable = orientation == Orientation::maximize
                               ? reach_limit >= threshold
                               : reach_limit <= threshold;
    if (!reachable) {
        crossing.status = CrossingStatus::unreachable;
        crossing.n_hat = crossing.ci_low = crossing.ci_high = n_max;
        return crossing;
    }

    const double band = 1.28;
    const auto at_mean = detail::first_band_crossing(model, threshold, orientation,
                                                     0.0, grid_x, pred);
    const auto optimistic = detail::first_band_crossing(
        model, threshold, orientation, improve_sign * band, grid_x, pred);
    const auto pessimistic = detail::first_band_crossing(
        model, threshold, orientation, -improve_sign * band, grid_x, pred);

    crossing.status = CrossingStatus::found;
    if (at_mean.has_value()) {
        crossing.n_hat = std::min(*at_mean, n_max);
    } else {
        crossing.n_hat = n_max;
        crossing.censored_high = true;
    }
    crossing.ci_low = optimistic.has_value() ? std::min(*optimistic, crossing.n_hat)
                                             : crossing.n_hat;
    crossing.ci_high = pessimistic.has_value() ? std::max(*pessimistic, crossing.n_hat)
                                               : n_max;
    return crossing;
}

} // namespace samplecurve
