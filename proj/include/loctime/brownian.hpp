#pragma once

#include <cstdint>
#include <vector>

#include "loctime/rng.hpp"

namespace loctime {

/// Brownian motion sampled exactly at its exit times from intervals and at a
/// fixed increasing list of observation times, with no time discretization.
///
/// Exits are simulated by walk-on-spheres: from x inside (a, b) with
/// r = min(x - a, b - x), the path reaches x - r or x + r after r^2 times an
/// exit-time sample, each side with probability 1/2. When an observation time
/// falls before the next sphere exit, the position there is drawn from the
/// killed-in-sphere law and the step restarts from it.
class BrownianMotion {
 public:
  explicit BrownianMotion(std::vector<double> observation_times = {});

  double time() const { return time_; }
  double position() const { return x_; }

  /// Runs until the path leaves (a, b), a < position() < b, and returns the
  /// exit point.
  double exit_interval(double a, double b, RngStream& rng);

  /// Records every remaining observation with free Gaussian increments.
  void finish(RngStream& rng);

  const std::vector<double>& observation_times() const { return obs_times_; }
  /// Values at observation_times()[0 .. observed().size()).
  const std::vector<double>& observed() const { return observed_; }
  bool complete() const { return observed_.size() == obs_times_.size(); }

 private:
  std::vector<double> obs_times_;
  std::vector<double> observed_;
  double time_ = 0.0;
  double x_ = 0.0;
};

/// Law of T - 2 for the offspring variable T: P(-1) = 1/2, P(0) = 1/4,
/// P(m) = 2^-(m+2), m >= 1.
///
/// Partial sums of this law embedded in a Brownian motion by Skorokhod's
/// randomized two-point scheme: with probability 1/4 the increment is 0 and no
/// time passes; otherwise V >= 1 is drawn with P(V = v) = (v + 1) / (3 2^v)
/// and the motion runs until it leaves (x - 1, x + V). E sigma_1 = 2.
class EmbeddedSum {
 public:
  explicit EmbeddedSum(std::vector<double> observation_times = {});

  /// Embeds the next increment and returns it.
  std::int64_t step(RngStream& rng);

  std::int64_t value() const { return value_; }
  std::uint64_t count() const { return count_; }
  /// Embedding time of the current partial sum.
  double sigma() const { return motion_.time(); }

  void finish(RngStream& rng) { motion_.finish(rng); }
  const BrownianMotion& motion() const { return motion_; }

 private:
  BrownianMotion motion_;
  std::int64_t value_ = 0;
  std::uint64_t count_ = 0;
};

}  // namespace loctime
