#pragma once

// Heuristic comparators reported alongside the simulation result.

#include "samplecurve/errors.hpp"

#include <cmath>
#include <cstdint>

namespace samplecurve {

struct EpvInput {
    int p = 1;               // candidate predictor count
    double prevalence = 0.5; // event fraction
    double epv = 10.0;       // events per variable
};

/// Events-per-variable rule: n = ceil(epv * p / event fraction). Events are
/// the minority class, so prevalence above one half counts 1 - prevalence.
inline std::int64_t epv_sample_size(const EpvInput& input) {
    if (input.p < 1) {
        throw InvalidSpec("epv_sample_size: need p >= 1");
    }
    if (input.epv <= 0.0) {
        throw InvalidSpec("epv_sample_size: need epv > 0");
    }
    if (input.prevalence <= 0.0 || input.prevalence >= 1.0) {
        throw InvalidPrevalence("epv_sample_size: prevalence outside (0, 1)");
    }
    const double event_rate = std::min(input.prevalence, 1.0 - input.prevalence);
    return static_cast<std::int64_t>(
        std::ceil(input.epv * static_cast<double>(input.p) / event_rate));
}

} // namespace samplecurve
