#pragma once

#include <stdexcept>
#include <string>

namespace samplecurve {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SAMPLECURVE_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                               \
    public:                                                                   \
        using Error::Error;                                                   \
    }

// generator tuning
SAMPLECURVE_DEFINE_ERROR(InvalidSpec);
SAMPLECURVE_DEFINE_ERROR(NoBracket);
SAMPLECURVE_DEFINE_ERROR(TargetUnreachable);
SAMPLECURVE_DEFINE_ERROR(TuningFailed);

// model fitting
SAMPLECURVE_DEFINE_ERROR(DegenerateDesign);
SAMPLECURVE_DEFINE_ERROR(EmptyData);
SAMPLECURVE_DEFINE_ERROR(DimensionMismatch);

// metrics
SAMPLECURVE_DEFINE_ERROR(OneClassOnly);
SAMPLECURVE_DEFINE_ERROR(DegenerateLinearPredictor);
SAMPLECURVE_DEFINE_ERROR(NonConverged);
SAMPLECURVE_DEFINE_ERROR(ZeroVariance);

// baselines
SAMPLECURVE_DEFINE_ERROR(InvalidPrevalence);

// simulation
SAMPLECURVE_DEFINE_ERROR(ValidationDegenerate);
SAMPLECURVE_DEFINE_ERROR(EmptyInput);
SAMPLECURVE_DEFINE_ERROR(TooFewValues);

// surrogate
SAMPLECURVE_DEFINE_ERROR(TooFewPoints);
SAMPLECURVE_DEFINE_ERROR(NotPositiveDefinite);

// configuration / CLI
SAMPLECURVE_DEFINE_ERROR(ConfigError);

#undef SAMPLECURVE_DEFINE_ERROR

} // namespace samplecurve
