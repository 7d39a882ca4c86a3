#include "loctime/exit_time.hpp"

#include <numbers>
#include <stdexcept>

namespace loctime {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double split = 0.64;
constexpr double rate = pi * pi / 8.0;
constexpr double series_eps = 1e-17;

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// n-th term of the alternating series; the two forms agree with the density
// and each is monotone in n on its side of the split point.
double devroye_coef(unsigned n, double x) {
  const double h = n + 0.5;
  if (x > split) return pi * h * std::exp(-h * h * pi * pi * x / 2.0);
  return pi * h * std::pow(2.0 / (pi * x), 1.5) * std::exp(-2.0 * h * h / x);
}

double right_proposal(RngStream& rng) { return split + rng.exponential() / rate; }

double left_proposal(RngStream& rng) {
  for (;;) {
    double e = rng.exponential();
    const double e2 = rng.exponential();
    if (e * e <= 2.0 * e2 / split) {
      const double y = 1.0 + split * e;
      return split / (y * y);
    }
  }
}

}  // namespace

double sample_exit_time(RngStream& rng) {
  static const double p = (pi / (2.0 * rate)) * std::exp(-rate * split);
  static const double q = 4.0 * normal_sf(1.0 / std::sqrt(split));
  static const double right_weight = p / (p + q);

  for (;;) {
    const double x = rng.uniform() < right_weight ? right_proposal(rng) : left_proposal(rng);
    double s = devroye_coef(0, x);
    const double y = rng.uniform() * s;
    for (unsigned n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= devroye_coef(n, x);
        if (y <= s) return x;
      } else {
        s += devroye_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

double exit_time_pdf(double t) {
  if (t <= 0.0) return 0.0;
  double sum = 0.0;
  if (t > split) {
    for (unsigned n = 0;; ++n) {
      const double a = devroye_coef(n, t);
      sum += (n % 2 == 0) ? a : -a;
      if (a < series_eps) break;
    }
    return sum;
  }
  // Image series: 2 sum (-1)^n (2n+1) / sqrt(2 pi t^3) exp(-(2n+1)^2 / (2t)).
  for (unsigned n = 0;; ++n) {
    const double m = 2.0 * n + 1.0;
    const double a = 2.0 * m / std::sqrt(2.0 * pi * t * t * t) * std::exp(-m * m / (2.0 * t));
    sum += (n % 2 == 0) ? a : -a;
    if (a < series_eps) break;
  }
  return sum;
}

double exit_time_cdf(double t) {
  if (t <= 0.0) return 0.0;
  double sum = 0.0;
  if (t < 1.0) {
    // 4 sum (-1)^n P(N > (2n+1)/sqrt(t)).
    for (unsigned n = 0;; ++n) {
      const double a = 4.0 * normal_sf((2.0 * n + 1.0) / std::sqrt(t));
      sum += (n % 2 == 0) ? a : -a;
      if (a < series_eps) break;
    }
    return sum;
  }
  for (unsigned n = 0;; ++n) {
    const double m = 2.0 * n + 1.0;
    const double a = 4.0 / (m * pi) * std::exp(-m * m * rate * t);
    sum += (n % 2 == 0) ? a : -a;
    if (a < series_eps) break;
  }
  return 1.0 - sum;
}

double strip_killed_density(double s, double y) {
  if (s <= 0.0) throw std::invalid_argument("strip density needs s > 0");
  if (y <= -1.0 || y >= 1.0) return 0.0;
  double sum = 0.0;
  if (s > 0.5) {
    for (unsigned n = 0;; ++n) {
      const double m = 2.0 * n + 1.0;
      const double damp = std::exp(-m * m * rate * s);
      sum += std::cos(m * pi * y / 2.0) * damp;
      if (damp < series_eps) break;
    }
    return sum;
  }
  const double norm = 1.0 / std::sqrt(2.0 * pi * s);
  sum = norm * std::exp(-y * y / (2.0 * s));
  for (int n = 1;; ++n) {
    const double a = norm * (std::exp(-(y - 2.0 * n) * (y - 2.0 * n) / (2.0 * s)) +
                             std::exp(-(y + 2.0 * n) * (y + 2.0 * n) / (2.0 * s)));
    sum += (n % 2 == 0) ? a : -a;
    if (a < series_eps) break;
  }
  return sum;
}

namespace {

// Killed density over the Gaussian density, in (0, 1].
double image_ratio(double s, double y) {
  double r = 1.0;
  for (int n = 1;; ++n) {
    const double shift = 4.0 * n * n / (2.0 * s);
    const double a = std::exp(-shift + 2.0 * n * y / s) + std::exp(-shift - 2.0 * n * y / s);
    r += (n % 2 == 0) ? a : -a;
    if (a < series_eps) break;
  }
  return r;
}

// cos((2n+1) theta) / cos(theta), stable near theta = pi/2.
double cos_ratio(unsigned n, double theta) {
  double acc = 1.0;
  for (unsigned j = 1; j <= n; ++j) acc += 2.0 * ((j % 2 == 0) ? 1.0 : -1.0) * std::cos(2.0 * j * theta);
  return (n % 2 == 0) ? acc : -acc;
}

}  // namespace

double sample_strip_survivor(double s, RngStream& rng) {
  if (s <= 0.0) throw std::invalid_argument("strip survivor needs s > 0");
  if (s <= 0.5) {
    const double sd = std::sqrt(s);
    for (;;) {
      const double y = sd * rng.normal();
      if (std::abs(y) >= 1.0) continue;
      if (rng.uniform() <= image_ratio(s, y)) return y;
    }
  }
  double bound = 1.0;
  for (unsigned n = 1;; ++n) {
    const double m = 2.0 * n + 1.0;
    const double damp = std::exp(-(m * m - 1.0) * rate * s);
    bound += m * damp;
    if (damp < series_eps) break;
  }
  for (;;) {
    const double y = (2.0 / pi) * std::asin(2.0 * rng.uniform() - 1.0);
    const double theta = pi * y / 2.0;
    double ratio = 1.0;
    for (unsigned n = 1;; ++n) {
      const double m = 2.0 * n + 1.0;
      const double damp = std::exp(-(m * m - 1.0) * rate * s);
      ratio += cos_ratio(n, theta) * damp;
      if (damp < series_eps) break;
    }
    if (rng.uniform() * bound <= ratio) return y;
  }
}

}  // namespace loctime
