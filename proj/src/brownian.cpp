#include "loctime/brownian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "loctime/exit_time.hpp"

namespace loctime {

BrownianMotion::BrownianMotion(std::vector<double> observation_times)
    : obs_times_(std::move(observation_times)) {
  if (!std::is_sorted(obs_times_.begin(), obs_times_.end()) ||
      (!obs_times_.empty() && obs_times_.front() < 0.0))
    throw std::invalid_argument("observation times must be nonnegative and sorted");
  observed_.reserve(obs_times_.size());
}

double BrownianMotion::exit_interval(double a, double b, RngStream& rng) {
  if (!(a < x_ && x_ < b)) throw std::invalid_argument("position must lie inside (a, b)");
  for (;;) {
    const double da = x_ - a;
    const double db = b - x_;
    const double r = std::min(da, db);
    const double dt = r * r * sample_exit_time(rng);

    if (observed_.size() < obs_times_.size() && obs_times_[observed_.size()] < time_ + dt) {
      const double t_obs = obs_times_[observed_.size()];
      if (t_obs > time_) {
        x_ += r * sample_strip_survivor((t_obs - time_) / (r * r), rng);
        time_ = t_obs;
      }
      observed_.push_back(x_);
      continue;
    }

    time_ += dt;
    if (rng.bit()) {
      if (db <= da) return x_ = b;
      x_ += r;
    } else {
      if (da <= db) return x_ = a;
      x_ -= r;
    }
  }
}

void BrownianMotion::finish(RngStream& rng) {
  while (!complete()) {
    const double t_obs = obs_times_[observed_.size()];
    if (t_obs > time_) {
      x_ += std::sqrt(t_obs - time_) * rng.normal();
      time_ = t_obs;
    }
    observed_.push_back(x_);
  }
}

EmbeddedSum::EmbeddedSum(std::vector<double> observation_times)
    : motion_(std::move(observation_times)) {}

std::int64_t EmbeddedSum::step(RngStream& rng) {
  ++count_;
  const std::uint64_t bits = rng.next_u64();
  if ((bits & 3U) == 0) return 0;  // probability 1/4, no time passes

  // V + 2 is a sum of two Geometric(1/2) variables on {1, 2, ...}, conditioned
  // to be at least 3.
  std::uint64_t v = 0;
  do {
    v = 0;
    for (int g = 0; g < 2; ++g) {
      std::uint64_t t = 1;
      for (;;) {
        const std::uint64_t w = rng.next_u64();
        if (w != 0) {
          t += static_cast<std::uint64_t>(std::countr_zero(w));
          break;
        }
        t += 64;
      }
      v += t;
    }
  } while (v < 3);
  v -= 2;

  const auto x = static_cast<double>(value_);
  const double hit = motion_.exit_interval(x - 1.0, x + static_cast<double>(v), rng);
  const std::int64_t inc = hit < x ? -1 : static_cast<std::int64_t>(v);
  value_ += inc;
  return inc;
}

}  // namespace loctime
