#include "loctime/ray_knight.hpp"

#include <bit>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

#include <json.hpp>

namespace loctime {

std::uint64_t sample_T(RngStream& rng) {
  std::uint64_t t = 1;
  for (;;) {
    const std::uint64_t word = rng.next_u64();
    if (word != 0) return t + static_cast<std::uint64_t>(std::countr_zero(word));
    t += 64;
  }
}

std::vector<std::uint64_t> extract_T_from_path(const WalkPath& path, std::int64_t k,
                                               std::uint64_t count) {
  if (k < 1) throw std::invalid_argument("T extraction needs k >= 1");
  std::vector<std::uint64_t> out;
  out.reserve(count);
  if (count == 0) return out;
  std::uint64_t visits = 0;
  std::int64_t prev = 0;
  std::uint64_t stop_at = path.length();
  // scan() has no early exit; find the count-th downcrossing first.
  {
    std::uint64_t seen = 0;
    std::int64_t p = 0;
    path.scan(path.length(), [&](std::uint64_t i, std::int64_t s) {
      if (p == k && s == k - 1 && ++seen == count && stop_at == path.length()) stop_at = i;
      p = s;
    });
    if (seen < count)
      throw InsufficientExcursions("path has " + std::to_string(seen) + " downcrossings of level " +
                                   std::to_string(k) + ", need " + std::to_string(count));
  }
  path.scan(stop_at, [&](std::uint64_t, std::int64_t s) {
    if (s == k) ++visits;
    if (prev == k && s == k - 1) {
      out.push_back(visits);
      visits = 0;
    }
    prev = s;
  });
  return out;
}

CenteredSumSeries centered_sums(std::int64_t level, std::span<const std::uint64_t> T) {
  CenteredSumSeries out{level, {}};
  out.values.reserve(T.size());
  std::int64_t u = 0;
  for (auto t : T) {
    u += static_cast<std::int64_t>(t) - 2;
    out.values.push_back(u);
  }
  return out;
}

std::optional<std::uint64_t> rho_plus(const WalkPath& path, std::uint64_t N) {
  if (N == 0) return 0;
  std::uint64_t seen = 0;
  std::optional<std::uint64_t> hit;
  std::int64_t prev = 0;
  path.scan(path.length(), [&](std::uint64_t i, std::int64_t s) {
    if (!hit && s == 0 && prev == 1 && ++seen == N) hit = i;
    prev = s;
  });
  return hit;
}

bool IdentityReport::all_hold() const { return failures() == 0; }

std::uint64_t IdentityReport::failures() const {
  std::uint64_t n = 0;
  for (const auto& c : levels) n += !c.a + !c.b + !c.c;
  return n;
}

namespace {

IdentityCheck check_level(std::int64_t k, std::uint64_t m, std::uint64_t visits, std::uint64_t up,
                          std::uint64_t down, std::span<const std::uint64_t> T) {
  IdentityCheck c;
  c.level = k;
  c.m = m;
  c.visits = visits;
  c.up = up;
  c.down = down;
  if (T.size() < m) return c;  // not enough complete periods: all three fail
  std::uint64_t sum_T = 0;
  for (std::uint64_t i = 0; i < m; ++i) sum_T += T[i];
  c.u_at_m = static_cast<std::int64_t>(sum_T) - 2 * static_cast<std::int64_t>(m);
  c.sum_T_minus_1 = sum_T - m;
  c.a = static_cast<std::int64_t>(visits) == c.u_at_m + 2 * static_cast<std::int64_t>(m);
  c.b = up == c.sum_T_minus_1;
  c.c = down == m;
  return c;
}

}  // namespace

IdentityReport verify_identities(const WalkPath& path, std::uint64_t N, std::int64_t k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  const auto end = rho_plus(path, N);
  if (!end) throw InsufficientExcursions("path has fewer than N upward zero excursions");

  const auto levels = static_cast<std::size_t>(k_max) + 1;
  std::vector<std::uint64_t> visits(levels, 0), up(levels, 0), down(levels, 0), period(levels, 0);
  std::vector<std::vector<std::uint64_t>> T(levels);
  std::int64_t prev = 0;
  path.scan(*end, [&](std::uint64_t, std::int64_t s) {
    if (prev >= 0 && prev <= k_max) {
      const auto p = static_cast<std::size_t>(prev);
      if (s > prev) {
        ++up[p];
      } else {
        ++down[p];
        if (prev >= 1) {
          T[p].push_back(period[p]);
          period[p] = 0;
        }
      }
    }
    if (s >= 0 && s <= k_max) {
      ++visits[static_cast<std::size_t>(s)];
      ++period[static_cast<std::size_t>(s)];
    }
    prev = s;
  });

  IdentityReport report{N, *end, {}};
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const auto i = static_cast<std::size_t>(k);
    report.levels.push_back(check_level(k, up[i - 1], visits[i], up[i], down[i], T[i]));
  }
  return report;
}

IdentityReport verify_identities_reference(const WalkPath& path, std::uint64_t N,
                                           std::int64_t k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  const auto returns = return_times(path, path.length());
  if (returns.rho_plus.size() < N && N > 0)
    throw InsufficientExcursions("path has fewer than N upward zero excursions");
  const std::uint64_t end = N == 0 ? 0 : returns.rho_plus[N - 1];

  IdentityReport report{N, end, {}};
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const auto below = directional_counts(path, k - 1, end);
    const auto here = directional_counts(path, k, end);
    const std::uint64_t visits = local_time(path, k, end);
    std::vector<std::uint64_t> T;
    try {
      T = extract_T_from_path(path, k, below.up);
    } catch (const InsufficientExcursions&) {
    }
    report.levels.push_back(check_level(k, below.up, visits, here.up, here.down, T));
  }
  return report;
}

void write_identities_json(std::ostream& out, std::uint64_t path_seed,
                           std::span<const IdentityReport> reports) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    for (const auto& c : r.levels) {
      for (const auto& [name, holds] : {std::pair{"a", c.a}, {"b", c.b}, {"c", c.c}}) {
        rows.push_back({{"path_seed", path_seed},
                        {"N", r.N},
                        {"k", c.level},
                        {"identity", name},
                        {"holds", holds}});
      }
    }
  }
  out << rows.dump(2) << '\n';
}

GWTrajectory simulate_gw(std::uint64_t N, std::uint64_t K, RngStream& rng) {
  constexpr std::uint64_t direct_limit = 10'000;
  GWTrajectory out;
  out.z.reserve(K + 1);
  out.z.push_back(N);
  for (std::uint64_t k = 1; k <= K; ++k) {
    const std::uint64_t parents = out.z.back();
    std::uint64_t children = 0;
    if (parents <= direct_limit) {
      for (std::uint64_t i = 0; i < parents; ++i) children += sample_T(rng) - 1;
    } else {
      std::negative_binomial_distribution<std::uint64_t> failures(parents, 0.5);
      children = failures(rng);
    }
    out.z.push_back(children);
  }
  return out;
}

FirstExcursionLaw::FirstExcursionLaw(std::int64_t k) : k_(k) {
  if (k < 1) throw std::invalid_argument("first excursion law needs k >= 1");
}

double FirstExcursionLaw::pmf(std::uint64_t m) const {
  const double k = static_cast<double>(k_);
  if (m == 0) return 1.0 - 1.0 / k;
  return std::exp(std::log(1.0 - 1.0 / (2.0 * k)) * static_cast<double>(m - 1)) / (2.0 * k * k);
}

std::optional<Fraction> FirstExcursionLaw::exact_pmf(std::uint64_t m) const {
  if (m == 0) return k_ == 1 ? Fraction{0, 1} : Fraction{k_ - 1, k_};
  // (2k-1)^{m-1} / (2k^2 (2k)^{m-1}); gcd(2k-1, 2k^2) = 1 so it is reduced.
  std::int64_t num = 1;
  std::int64_t den = 0;
  if (__builtin_mul_overflow(2 * k_, k_, &den)) return std::nullopt;
  for (std::uint64_t i = 1; i < m; ++i) {
    if (__builtin_mul_overflow(num, 2 * k_ - 1, &num)) return std::nullopt;
    if (__builtin_mul_overflow(den, 2 * k_, &den)) return std::nullopt;
  }
  return Fraction{num, den};
}

double first_return_visit_tail(std::int64_t k, std::uint64_t j) {
  if (k < 1 || j < 1) throw std::invalid_argument("tail law needs k >= 1, j >= 1");
  const double q = 1.0 / (2.0 * static_cast<double>(k));
  return q * std::pow(1.0 - q, static_cast<double>(j - 1));
}

StepSequence censored_path_to_rho_plus(std::uint64_t N, LevelWindow window, RngStream& rng) {
  CensoredWalk walk(window, true);
  std::uint64_t seen = 0;
  while (seen < N) {
    const std::int64_t s = walk.step(rng);
    if (s == 0 && walk.previous() == 1) ++seen;
  }
  return walk.steps();
}

StepSequence censored_path_with_downcrossings(std::int64_t K, std::uint64_t count,
                                              RngStream& rng) {
  if (K < 1) throw std::invalid_argument("need K >= 1");
  CensoredWalk walk(LevelWindow(0, K), true);
  std::vector<std::uint64_t> seen(static_cast<std::size_t>(K) + 1, 0);
  std::int64_t missing = count == 0 ? 0 : K;
  while (missing > 0) {
    const std::int64_t prev = walk.position();
    const std::int64_t s = walk.step(rng);
    if (s == prev - 1 && prev >= 1 && ++seen[static_cast<std::size_t>(prev)] == count) --missing;
  }
  return walk.steps();
}

}  // namespace loctime
