#pragma once

#include <cmath>

#include "loctime/rng.hpp"

namespace loctime {

/// First exit time of standard Brownian motion started at 0 from [-1, 1].
///
/// Exact sampler: Devroye's alternating-series method on the theta-series
/// density, with a truncated exponential proposal to the right of t = 0.64
/// and a truncated Levy proposal to the left.
double sample_exit_time(RngStream& rng);

double exit_time_pdf(double t);
double exit_time_cdf(double t);

/// E exp(-s tau) = 1 / cosh(sqrt(2 s)).
inline double exit_time_laplace(double s) { return 1.0 / std::cosh(std::sqrt(2.0 * s)); }

/// Sub-probability density at y of Brownian motion started at 0 and killed on
/// leaving (-1, 1), at time s.
double strip_killed_density(double s, double y);

/// Position at time s of Brownian motion started at 0, conditioned to stay in
/// (-1, 1) up to time s. Exact rejection sampler.
double sample_strip_survivor(double s, RngStream& rng);

}  // namespace loctime
