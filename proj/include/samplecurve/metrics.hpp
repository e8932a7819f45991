#pragma once

// Performance measures on validation predictions, each with an orientation
// and a threshold-satisfaction rule.

#include "samplecurve/errors.hpp"
#include "samplecurve/models.hpp"
#include "samplecurve/ranks.hpp"
#include "samplecurve/types.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace samplecurve {

enum class MetricKind { auc, calibration_slope, mape, brier, r_squared, user_defined };

enum class Orientation { maximize, minimize };

enum class TargetMode { absolute, deviation };

inline Orientation default_orientation(MetricKind kind) {
    switch (kind) {
    case MetricKind::mape:
    case MetricKind::brier:
        return Orientation::minimize;
    default:
        return Orientation::maximize;
    }
}

inline std::string metric_kind_name(MetricKind kind) {
    switch (kind) {
    case MetricKind::auc: return "auc";
    case MetricKind::calibration_slope: return "calibration_slope";
    case MetricKind::mape: return "mape";
    case MetricKind::brier: return "brier";
    case MetricKind::r_squared: return "r_squared";
    case MetricKind::user_defined: return "user_defined";
    }
    return "?";
}

/// User metrics receive (predicted, outcomes, oracle) and may throw any
/// samplecurve::Error to mark the replicate as failed for this metric.
using MetricFunction = std::function<double(
    const Vector& predicted, const Vector& outcomes, const Vector& oracle)>;

struct MetricSpec {
    MetricKind kind = MetricKind::auc;
    std::string name = "auc"; // metric_kind_name(kind), or the user tag
    Orientation orientation = Orientation::maximize;
    TargetMode target_mode = TargetMode::absolute;
    double m_star = std::numeric_limits<double>::quiet_NaN();
    double deviation = std::numeric_limits<double>::quiet_NaN(); // d, deviation mode
    MetricFunction fn; // user_defined only

    bool satisfied(double value) const {
        return orientation == Orientation::maximize ? value >= m_star
                                                    : value <= m_star;
    }
};

inline MetricSpec make_metric(MetricKind kind) {
    MetricSpec spec;
    spec.kind = kind;
    spec.name = metric_kind_name(kind);
    spec.orientation = default_orientation(kind);
    return spec;
}

inline double auc(const Vector& scores, const Vector& labels) {
    return auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
               std::span<const double>(labels.data(), static_cast<std::size_t>(labels.size())));
}

/// Calibration slope: the coefficient from refitting the outcome on the
/// model's linear predictor (logit of the predicted probability). 1 is
/// ideal; below 1 indicates overfitting.
inline double calibration_slope(const Vector& predicted_probs, const Vector& labels) {
    if (predicted_probs.size() != labels.size()) {
        throw DimensionMismatch("calibration_slope: length mismatch");
    }
    std::size_t n_pos = 0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) n_pos += (labels(i) != 0.0);
    if (n_pos == 0 || n_pos == static_cast<std::size_t>(labels.size())) {
        throw OneClassOnly("calibration_slope: labels contain a single class");
    }

    Vector eta(predicted_probs.size());
    for (Eigen::Index i = 0; i < predicted_probs.size(); ++i) {
        const double p = predicted_probs(i);
        if (p <= 0.0 || p >= 1.0) {
            throw InvalidSpec("calibration_slope: predictions must lie in (0, 1)");
        }
        eta(i) = logit(p);
    }
    const double mean = eta.mean();
    const double var = (eta.array() - mean).square().sum() /
                       static_cast<double>(eta.size());
    if (var < 1e-12) {
        throw DegenerateLinearPredictor("calibration_slope: near-constant linear predictor");
    }

    Dataset refit;
    refit.predictors = eta;
    refit.outcomes = labels;
    refit.true_prob = labels;
    const FittedModel model = fit_logistic(refit, 0.0, 100);
    if (!model.converged) {
        throw NonConverged("calibration_slope: slope refit did not converge");
    }
    return model.coefficients(0);
}

/// Mean absolute prediction error against the oracle probabilities (binary)
/// or oracle means (continuous); only available in simulation, where the
/// oracle is known.
inline double mape(const Vector& predicted, const Vector& oracle) {
    if (predicted.size() != oracle.size()) {
        throw DimensionMismatch("mape: length mismatch");
    }
    if (predicted.size() == 0) {
        throw EmptyInput("mape: empty input");
    }
    return (predicted - oracle).cwiseAbs().mean();
}

inline double brier(const Vector& predicted, const Vector& labels) {
    if (predicted.size() != labels.size()) {
        throw DimensionMismatch("brier: length mismatch");
    }
    if (predicted.size() == 0) {
        throw EmptyInput("brier: empty input");
    }
    return (predicted - labels).squaredNorm() / static_cast<double>(predicted.size());
}

inline double r_squared(const Vector& predicted, const Vector& outcomes) {
    if (predicted.size() != outcomes.size()) {
        throw DimensionMismatch("r_squared: length mismatch");
    }
    const double mean = outcomes.mean();
    const double ss_tot = (outcomes.array() - mean).square().sum();
    if (ss_tot <= 0.0) {
        throw ZeroVariance("r_squared: outcomes have zero variance");
    }
    const double ss_res = (outcomes - predicted).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

/// Evaluate one metric on a replicate; degenerate inputs and non-convergent
/// refits become an empty optional (the simulate layer's failure marker).
inline std::optional<double> evaluate_metric(const MetricSpec& spec,
                                             const Vector& predicted,
                                             const Vector& outcomes,
                                             const Vector& oracle) {
    try {
        switch (spec.kind) {
        case MetricKind::auc: return auc(predicted, outcomes);
        case MetricKind::calibration_slope: return calibration_slope(predicted, outcomes);
        case MetricKind::mape: return mape(predicted, oracle);
        case MetricKind::brier: return brier(predicted, outcomes);
        case MetricKind::r_squared: return r_squared(predicted, outcomes);
        case MetricKind::user_defined: {
            const double v = spec.fn(predicted, outcomes, oracle);
            if (!std::isfinite(v)) return std::nullopt;
            return v;
        }
        }
    } catch (const Error&) {
        return std::nullopt;
    }
    return std::nullopt;
}

} // namespace samplecurve
