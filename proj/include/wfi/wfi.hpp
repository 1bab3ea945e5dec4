#pragma once

// Umbrella header for the monotone weak-feature-impact toolkit.

#include "config.hpp"
#include "convex.hpp"
#include "error.hpp"
#include "estimator.hpp"
#include "experiments.hpp"
#include "hypotheses.hpp"
#include "io.hpp"
#include "limits.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "svg.hpp"
