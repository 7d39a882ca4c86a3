#include "loctime/audits.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <numbers>
#include <limits>
#include <stdexcept>

#include "loctime/coupling.hpp"
#include "loctime/exit_time.hpp"
#include "loctime/ray_knight.hpp"
#include "loctime/walk.hpp"

namespace loctime {

double rho_tail_exact(std::uint64_t N, std::uint64_t n) {
  if (N == 0) return 0.0;
  if (n == 0) return 1.0;
  // term_0 = C(2n, n) 4^-n, term_{j+1} / term_j = 2 (n - j) / (2n - j).
  double term = return_probability(n);
  double sum = 0.0;
  for (std::uint64_t j = 0; j < N && j <= n; ++j) {
    sum += term;
    term *= 2.0 * static_cast<double>(n - j) / static_cast<double>(2 * n - j);
  }
  return std::min(sum, 1.0);
}

double rho_tail_at_least(std::uint64_t N, double x) {
  if (x <= 0.0) return 1.0;
  const auto n = static_cast<std::uint64_t>(std::ceil(x / 2.0)) - 1;
  return rho_tail_exact(N, n);
}

std::uint64_t sample_rho(std::uint64_t N, RngStream& rng) {
  std::uint64_t sum = 0;
  for (std::uint64_t i = 0; i < N; ++i) {
    const std::uint64_t len = sample_excursion_length(rng);
    sum = len > std::numeric_limits<std::uint64_t>::max() - sum
              ? std::numeric_limits<std::uint64_t>::max()
              : sum + len;
  }
  return sum;
}

namespace {

template <class T, class Pred>
double fraction(std::span<const T> samples, Pred pred) {
  if (samples.empty()) return 0.0;
  return static_cast<double>(std::count_if(samples.begin(), samples.end(), pred)) /
         static_cast<double>(samples.size());
}

bool meets(double exact, double bound) { return exact >= bound * (1.0 - 1e-9); }

}  // namespace

TailAudit audit_rho_tail(std::span<const std::uint64_t> rho_samples, std::uint64_t N,
                         std::span<const double> u_grid) {
  if (N < 1) throw std::invalid_argument("rho audit needs N >= 1");
  TailAudit audit;
  audit.name = "rho_tail";
  audit.sample_size = rho_samples.size();
  const double n2 = static_cast<double>(N) * static_cast<double>(N);
  for (double u : u_grid) {
    if (u < 1.0) throw std::invalid_argument("rho audit needs u >= 1");
    const double x = u * n2;
    const double emp = fraction(rho_samples, [x](std::uint64_t r) { return static_cast<double>(r) >= x; });
    const double bound = 1.0 / std::sqrt(u);
    audit.add(u, emp, bound, meets(rho_tail_at_least(N, x), bound));
  }
  return audit;
}

double binomial_two_sided_tail(std::uint64_t N, double u) {
  const double n = static_cast<double>(N);
  double sum = 0.0;
  for (std::uint64_t v = 0; v <= N; ++v) {
    if (std::abs(2.0 * static_cast<double>(v) - n) < u) continue;
    const double vv = static_cast<double>(v);
    sum += std::exp(std::lgamma(n + 1.0) - std::lgamma(vv + 1.0) - std::lgamma(n - vv + 1.0) -
                    n * std::numbers::ln2);
  }
  return std::min(sum, 1.0);
}

TailAudit audit_binomial_tail(std::span<const std::int64_t> nu_samples, std::uint64_t N,
                              std::span<const double> u_grid) {
  TailAudit audit;
  audit.name = "binomial_tail";
  audit.sample_size = nu_samples.size();
  const auto n = static_cast<std::int64_t>(N);
  for (double u : u_grid) {
    const double emp = fraction(nu_samples, [&](std::int64_t v) {
      return static_cast<double>(std::llabs(2 * v - n)) >= u;
    });
    const double bound = 2.0 * std::exp(-u * u / (2.0 * static_cast<double>(N)));
    audit.add(u, emp, bound, N <= 2000 && meets(binomial_two_sided_tail(N, u), bound));
  }
  return audit;
}

double sample_u_sum_max(std::uint64_t n, RngStream& rng) {
  std::int64_t u = 0;
  std::int64_t m = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    u += static_cast<std::int64_t>(sample_T(rng)) - 2;
    m = std::max(m, std::abs(u));
  }
  return static_cast<double>(m);
}

TailAudit audit_u_sum_max(std::span<const double> max_samples, std::uint64_t n,
                          std::span<const double> z_grid) {
  TailAudit audit;
  audit.name = "u_sum_max";
  audit.sample_size = max_samples.size();
  for (double z : z_grid) {
    const double emp = fraction(max_samples, [z](double m) { return m > z; });
    audit.add(z, emp, 2.0 * std::exp(-z * z / (8.0 * static_cast<double>(n))));
  }
  return audit;
}

std::uint64_t sample_level_max(std::uint64_t N, std::int64_t K, RngStream& rng) {
  if (K < 1) throw std::invalid_argument("need K >= 1");
  CensoredWalk walk(LevelWindow(0, K), false);
  std::vector<std::uint64_t> visits(static_cast<std::size_t>(K) + 1, 0);
  std::uint64_t ups = 0;
  while (ups < N) {
    const std::int64_t s = walk.step(rng);
    if (s >= 1) ++visits[static_cast<std::size_t>(s)];
    if (s == 0 && walk.previous() == 1) ++ups;
  }
  return *std::max_element(visits.begin() + 1, visits.end());
}

TailAudit audit_level_max(std::span<const std::uint64_t> max_samples, std::uint64_t N,
                          std::int64_t K) {
  TailAudit audit;
  audit.name = "level_max";
  audit.sample_size = max_samples.size();
  const double u = 5.0 * static_cast<double>(N);
  const double emp = fraction(max_samples, [u](std::uint64_t m) { return static_cast<double>(m) >= u; });
  audit.add(u, emp, static_cast<double>(K) * std::exp(-static_cast<double>(N) / (4.0 * static_cast<double>(K))));
  return audit;
}

TailAudit audit_exp_partial_sums(std::span<const double> scaled_max, std::uint64_t n,
                                 std::span<const double> u_grid) {
  TailAudit audit;
  audit.name = "exp_partial_sums";
  audit.sample_size = scaled_max.size();
  const double limit = 2.0 * std::sqrt(static_cast<double>(n));
  for (double u : u_grid) {
    if (!(u > 0.0 && u < limit)) throw std::invalid_argument("u outside (0, 2 sqrt n)");
    const double emp = fraction(scaled_max, [u](double m) { return m >= u; });
    audit.add(u, emp, 2.0 * std::exp(-u * u / 8.0));
  }
  return audit;
}

TailAudit audit_exp_max(std::span<const double> max_samples, std::uint64_t n,
                        std::span<const double> c_grid) {
  TailAudit audit;
  audit.name = "exp_max";
  audit.sample_size = max_samples.size();
  const double logn = std::log(static_cast<double>(n));
  for (double c : c_grid) {
    const double emp = fraction(max_samples, [&](double m) { return m >= c * logn; });
    audit.add(c, emp, std::pow(static_cast<double>(n), 1.0 - c));
  }
  return audit;
}

IncrementAudit audit_increment_bounds(std::span<const double> scaled_max,
                                      std::span<const double> x_grid, double c2,
                                      double min_survival) {
  if (scaled_max.size() < 100) throw std::invalid_argument("too few samples for a tail audit");
  std::vector<double> surv(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i)
    surv[i] = fraction(scaled_max, [x = x_grid[i]](double m) { return m >= x; });
  const double floor_p = std::max(min_survival, 20.0 / static_cast<double>(scaled_max.size()));
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (surv[i] <= 0.5 && surv[i] >= floor_p) {
      fx.push_back(x_grid[i] * x_grid[i]);
      fy.push_back(surv[i]);
    }
  }
  if (fx.size() < 3) throw std::invalid_argument("too few samples for the requested x range");
  IncrementAudit out;
  out.fit = fit_log_survival(fx, fy);
  out.c2 = c2;
  out.slope_pass = out.fit.slope - 1.96 * out.fit.std_error <= -c2;
  double c1 = 0.0;
  for (std::size_t i = 0; i < x_grid.size(); ++i)
    c1 = std::max(c1, surv[i] / std::exp(-c2 * x_grid[i] * x_grid[i]));
  out.audit.name = "increment_bound";
  out.audit.sample_size = scaled_max.size();
  for (std::size_t i = 0; i < x_grid.size(); ++i)
    out.audit.add(x_grid[i], surv[i], c1 * std::exp(-c2 * x_grid[i] * x_grid[i]));
  return out;
}

namespace {

// Records the times at which the walk sits at zero, skipping words that
// cannot reach it.
struct ZeroTimes {
  std::vector<std::uint64_t> times;
  std::int64_t pos = 0;
  std::uint64_t t = 0;

  void feed(std::uint64_t word, unsigned nbits) {
    if (std::abs(pos) > static_cast<std::int64_t>(nbits)) {
      const std::uint64_t mask = nbits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << nbits) - 1);
      pos += 2 * static_cast<std::int64_t>(std::popcount(word & mask)) - static_cast<std::int64_t>(nbits);
      t += nbits;
      return;
    }
    for (unsigned b = 0; b < nbits; ++b, word >>= 1) {
      pos += (word & 1U) ? 1 : -1;
      ++t;
      if (pos == 0) times.push_back(t);
    }
  }
};

}  // namespace

double sample_zero_increment_max(std::uint64_t t, std::uint64_t a, RngStream& rng) {
  if (a < 1 || a > t) throw std::invalid_argument("need 1 <= a <= t");
  ZeroTimes sink;
  StepSource source(rng);
  source.advance(t, sink);
  const auto& z = sink.times;
  // Windows (j, j + a] with 0 <= j <= t - a; the best ones start at a zero.
  std::size_t best = 0;
  std::size_t hi = 0;
  for (std::size_t i = 0; i < z.size() && z[i] <= t - a + 1; ++i) {
    hi = std::max(hi, i);
    while (hi < z.size() && z[hi] <= z[i] + a - 1) ++hi;
    best = std::max(best, hi - i);
  }
  const auto last = static_cast<std::size_t>(
      z.end() - std::lower_bound(z.begin(), z.end(), t - a + 1));
  best = std::max(best, last);
  return static_cast<double>(best) / std::sqrt(static_cast<double>(a));
}

double wiener_increment_max(const WienerPath& w, double h) {
  const auto m = static_cast<std::size_t>(std::llround(h / w.grid.dt()));
  if (m < 1 || m > w.grid.steps()) throw std::invalid_argument("window outside the grid");
  const auto& v = w.values;
  std::deque<std::size_t> hi_q, lo_q;
  double best = 0.0;
  // Sweep s from the right so the window [s, s + m] is complete.
  const std::size_t last = v.size() - 1;
  for (std::size_t step = 0; step <= last; ++step) {
    const std::size_t i = last - step;
    while (!hi_q.empty() && v[hi_q.back()] <= v[i]) hi_q.pop_back();
    hi_q.push_back(i);
    while (!lo_q.empty() && v[lo_q.back()] >= v[i]) lo_q.pop_back();
    lo_q.push_back(i);
    while (hi_q.front() > i + m) hi_q.pop_front();
    while (lo_q.front() > i + m) lo_q.pop_front();
    if (i + m <= last) best = std::max({best, v[hi_q.front()] - v[i], v[i] - v[lo_q.front()]});
  }
  return best / std::sqrt(h);
}

double wiener_single_increment_tail(double v) {
  if (v <= 0.0) return 1.0;
  return exit_time_cdf(1.0 / (v * v));
}

}  // namespace loctime
