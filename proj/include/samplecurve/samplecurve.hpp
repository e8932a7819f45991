#pragma once

#include "samplecurve/baselines.hpp"
#include "samplecurve/config.hpp"
#include "samplecurve/datagen.hpp"
#include "samplecurve/errors.hpp"
#include "samplecurve/export.hpp"
#include "samplecurve/metrics.hpp"
#include "samplecurve/models.hpp"
#include "samplecurve/rng.hpp"
#include "samplecurve/search.hpp"
#include "samplecurve/simulate.hpp"
#include "samplecurve/surrogate.hpp"
