#pragma once

// Prediction-model fitting behind a pluggable strategy contract. Built-ins:
// (penalized) logistic regression via iteratively reweighted least squares
// and ordinary least squares via a rank-revealing QR decomposition.

#include "samplecurve/datagen.hpp"
#include "samplecurve/errors.hpp"
#include "samplecurve/types.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>

namespace samplecurve {

enum class ModelFamily { binary, continuous };

struct FittedModel {
    double intercept = 0.0;
    Vector coefficients;
    bool converged = false;
    bool separation = false;
    int iterations = 0;
    std::string strategy_tag;
    double l2_penalty = 0.0;
    ModelFamily family = ModelFamily::binary;
};

namespace detail {

inline double binomial_deviance(const Vector& y, const Vector& mu) {
    double dev = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double m = clamp_probability(mu(i));
        dev += y(i) != 0.0 ? -2.0 * std::log(m) : -2.0 * std::log(1.0 - m);
    }
    return dev;
}

} // namespace detail

/// Penalized maximum likelihood for logistic regression. The L2 penalty
/// (lambda/2 * |coef|^2 added to the negative log-likelihood) applies to the
/// coefficients only, never the intercept. Newton steps are halved whenever
/// they would increase the penalized deviance, which keeps the deviance
/// nonincreasing across iterations. Complete or quasi-complete separation at
/// zero penalty is flagged (converged = false, separation = true) instead of
/// returning runaway coefficients.
inline FittedModel fit_logistic(const Dataset& data, double l2_penalty = 0.0,
                                int max_iterations = 100) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    if (n == 0) {
        throw EmptyData("fit_logistic: empty dataset");
    }
    if (l2_penalty < 0.0) {
        throw InvalidSpec("fit_logistic: negative l2_penalty");
    }
    if (l2_penalty == 0.0) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double first = data.predictors(0, j);
            bool constant = true;
            for (Eigen::Index i = 1; i < n && constant; ++i) {
                constant = data.predictors(i, j) == first;
            }
            if (constant) {
                throw DegenerateDesign("fit_logistic: constant predictor column");
            }
        }
    }

    Matrix design(n, p + 1);
    design.col(0).setOnes();
    if (p > 0) design.rightCols(p) = data.predictors;
    const Vector& y = data.outcomes;

    Vector beta = Vector::Zero(p + 1);
    Vector eta = Vector::Zero(n);
    Vector mu(n), wsqrt(n);

    auto penalized_deviance = [&](const Vector& b, const Vector& mu_at) {
        return detail::binomial_deviance(y, mu_at) +
               l2_penalty * b.tail(p).squaredNorm();
    };

    for (Eigen::Index i = 0; i < n; ++i) mu(i) = 0.5;
    double dev = penalized_deviance(beta, mu);

    FittedModel model;
    model.l2_penalty = l2_penalty;
    model.family = ModelFamily::binary;
    model.strategy_tag = l2_penalty > 0.0 ? "logistic_l2" : "logistic";
    model.coefficients = Vector::Zero(p);

    for (int it = 1; it <= max_iterations; ++it) {
        model.iterations = it;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double m = std::min(std::max(mu(i), 1e-10), 1.0 - 1e-10);
            wsqrt(i) = std::sqrt(m * (1.0 - m));
        }
        Vector grad = design.transpose() * (mu - y);
        grad.tail(p) += 2.0 * l2_penalty * beta.tail(p);

        Matrix weighted = wsqrt.asDiagonal() * design;
        Matrix hess = weighted.transpose() * weighted;
        hess.diagonal().tail(p).array() += 2.0 * l2_penalty;

        const Vector step = hess.ldlt().solve(grad);
        if (!step.allFinite()) {
            model.converged = false;
            break;
        }

        // step halving keeps the penalized deviance monotone
        double scale = 1.0;
        Vector beta_new;
        double dev_new = dev;
        for (int half = 0; half < 30; ++half) {
            beta_new = beta - scale * step;
            eta = design * beta_new;
            for (Eigen::Index i = 0; i < n; ++i) mu(i) = sigmoid(eta(i));
            dev_new = penalized_deviance(beta_new, mu);
            if (std::isfinite(dev_new) && dev_new <= dev + 1e-12) break;
            scale *= 0.5;
        }
        const double max_change = (scale * step).cwiseAbs().maxCoeff();
        const double dev_change = dev - dev_new;
        beta = beta_new;
        dev = dev_new;

        if (l2_penalty == 0.0 && eta.cwiseAbs().maxCoeff() > 30.0 &&
            dev_change > 1e-8) {
            model.separation = true;
            model.converged = false;
            break;
        }
        if (max_change < 1e-8 || std::abs(dev_change) < 1e-10) {
            model.converged = true;
            break;
        }
    }

    model.intercept = beta(0);
    model.coefficients = beta.tail(p);
    return model;
}

/// Ordinary least squares via column-pivoted Householder QR.
inline FittedModel fit_linear(const Dataset& data) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    if (n <= p + 1) {
        throw DegenerateDesign("fit_linear: need n > p + 1");
    }
    Matrix design(n, p + 1);
    design.col(0).setOnes();
    if (p > 0) design.rightCols(p) = data.predictors;

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < p + 1) {
        throw DegenerateDesign("fit_linear: rank-deficient design");
    }
    const Vector beta = qr.solve(data.outcomes);

    FittedModel model;
    model.intercept = beta(0);
    model.coefficients = beta.tail(p);
    model.converged = true;
    model.iterations = 1;
    model.strategy_tag = "linear";
    model.family = ModelFamily::continuous;
    return model;
}

/// Model predictions on new predictors: probabilities clamped to
/// [1e-12, 1 - 1e-12] for binary, the affine map for continuous.
inline Vector predict(const FittedModel& model, const Matrix& predictors) {
    if (predictors.cols() != model.coefficients.size()) {
        throw DimensionMismatch("predict: predictor column count mismatch");
    }
    Vector eta = Vector::Constant(predictors.rows(), model.intercept);
    if (predictors.cols() > 0) eta += predictors * model.coefficients;
    if (model.family == ModelFamily::continuous) return eta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        eta(i) = clamp_probability(sigmoid(eta(i)));
    }
    return eta;
}

/// Fitting-strategy contract. Built-in strategies are deterministic pure
/// functions of the data; user strategies that randomize must take an
/// explicit seed so replicates stay reproducible.
class ModelStrategy {
public:
    virtual ~ModelStrategy() = default;
    virtual FittedModel fit(const Dataset& data) const = 0;
    virtual Vector predict_on(const FittedModel& model, const Matrix& x) const {
        return predict(model, x);
    }
    virtual bool deterministic() const { return true; }
    virtual const std::string& tag() const = 0;
};

class LogisticStrategy final : public ModelStrategy {
public:
    explicit LogisticStrategy(double l2_penalty = 0.0, int max_iterations = 100)
        : l2_penalty_(l2_penalty), max_iterations_(max_iterations),
          tag_(l2_penalty > 0.0 ? "logistic_l2" : "logistic") {}

    FittedModel fit(const Dataset& data) const override {
        return fit_logistic(data, l2_penalty_, max_iterations_);
    }
    const std::string& tag() const override { return tag_; }

private:
    double l2_penalty_;
    int max_iterations_;
    std::string tag_;
};

class LinearStrategy final : public ModelStrategy {
public:
    FittedModel fit(const Dataset& data) const override { return fit_linear(data); }
    const std::string& tag() const override { return tag_; }

private:
    std::string tag_ = "linear";
};

using StrategyFactory =
    std::function<std::shared_ptr<const ModelStrategy>(double l2_penalty)>;

inline std::map<std::string, StrategyFactory>& strategy_registry() {
    static std::map<std::string, StrategyFactory> registry = {
        {"logistic",
         [](double) { return std::make_shared<const LogisticStrategy>(0.0); }},
        {"logistic_l2",
         [](double l2) {
             return std::make_shared<const LogisticStrategy>(l2 > 0.0 ? l2 : 1.0);
         }},
        {"linear", [](double) { return std::make_shared<const LinearStrategy>(); }},
    };
    return registry;
}

inline void register_strategy(const std::string& tag, StrategyFactory factory) {
    strategy_registry()[tag] = std::move(factory);
}

inline std::shared_ptr<const ModelStrategy> make_strategy(const std::string& tag,
                                                          double l2_penalty = 0.0) {
    const auto& registry = strategy_registry();
    const auto it = registry.find(tag);
    if (it == registry.end()) {
        throw ConfigError("unknown strategy tag: " + tag);
    }
    return it->second(l2_penalty);
}

} // namespace samplecurve
