#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace samplecurve {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline double sigmoid(double x) {
    // evaluate on the side that avoids overflow of exp
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline constexpr double kProbabilityClamp = 1e-12;

inline double clamp_probability(double p) {
    if (p < kProbabilityClamp) return kProbabilityClamp;
    if (p > 1.0 - kProbabilityClamp) return 1.0 - kProbabilityClamp;
    return p;
}

} // namespace samplecurve
