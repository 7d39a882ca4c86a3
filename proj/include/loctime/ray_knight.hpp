#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "loctime/excursions.hpp"
#include "loctime/rng.hpp"
#include "loctime/walk.hpp"

namespace loctime {

/// T with P(T = j) = 2^-j, j >= 1: one plus the trailing zeros of fair bits.
std::uint64_t sample_T(RngStream& rng);

/// T_i^(k) for i = 1..count: visits to k between successive downcrossings
/// (S_{j-1} = k, S_j = k - 1). Throws InsufficientExcursions when the path
/// has fewer than `count` downcrossings of k.
std::vector<std::uint64_t> extract_T_from_path(const WalkPath& path, std::int64_t k,
                                               std::uint64_t count);

/// U^(k)(j) = T_1 + ... + T_j - 2j for j = 1..J.
struct CenteredSumSeries {
  std::int64_t level = 0;
  std::vector<std::int64_t> values;
};

CenteredSumSeries centered_sums(std::int64_t level, std::span<const std::uint64_t> T);

/// Endpoint of the N-th upward excursion away from zero.
std::optional<std::uint64_t> rho_plus(const WalkPath& path, std::uint64_t N);

/// Ray-Knight identities at one level k, all evaluated at rho_N^+:
///   (a) xi(k)          == U^(k)(m) + 2m
///   (b) xi(k, up)      == sum_{i<=m} (T_i^(k) - 1)
///   (c) xi(k, down)    == m
/// with m = xi(k-1, up).
struct IdentityCheck {
  std::int64_t level = 0;
  std::uint64_t m = 0;
  std::uint64_t visits = 0;
  std::uint64_t up = 0;
  std::uint64_t down = 0;
  std::int64_t u_at_m = 0;
  std::uint64_t sum_T_minus_1 = 0;
  bool a = false;
  bool b = false;
  bool c = false;

  bool all() const { return a && b && c; }
};

struct IdentityReport {
  std::uint64_t N = 0;
  std::uint64_t rho_plus_N = 0;
  std::vector<IdentityCheck> levels;  // k = 1..k_max

  bool all_hold() const;
  std::uint64_t failures() const;
};

/// Single pass over [0, rho_N^+] for all levels at once.
IdentityReport verify_identities(const WalkPath& path, std::uint64_t N, std::int64_t k_max);

/// Same report assembled from return_times, local_time, directional_counts
/// and extract_T_from_path one level at a time. Slow; kept for testing.
IdentityReport verify_identities_reference(const WalkPath& path, std::uint64_t N,
                                           std::int64_t k_max);

/// Rows {path_seed, N, k, identity, holds}, one per identity and level.
void write_identities_json(std::ostream& out, std::uint64_t path_seed,
                           std::span<const IdentityReport> reports);

/// Z_0 = N, Z_k = sum_{i <= Z_{k-1}} (T_i - 1).
struct GWTrajectory {
  std::vector<std::uint64_t> z;
};

/// Exact sampling throughout: a direct draw loop up to 10^4 parents, and a
/// negative binomial (sum of geometric failures) above that.
GWTrajectory simulate_gw(std::uint64_t N, std::uint64_t K, RngStream& rng);

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fraction&) const = default;
};

/// Law of xi(k, rho_1^+): P(0) = 1 - 1/k, P(m) = (1/(2k^2)) (1 - 1/(2k))^{m-1}.
class FirstExcursionLaw {
 public:
  explicit FirstExcursionLaw(std::int64_t k);

  std::int64_t level() const { return k_; }
  double pmf(std::uint64_t m) const;
  /// Reduced fraction while numerator and denominator fit in 64 bits.
  std::optional<Fraction> exact_pmf(std::uint64_t m) const;

 private:
  std::int64_t k_;
};

/// P(xi(k, rho_1) >= j) = (1/(2k)) (1 - 1/(2k))^{j-1}, j >= 1.
double first_return_visit_tail(std::int64_t k, std::uint64_t j);

/// Censored walk (window [lo, hi], lo <= 0 <= hi) run up to its N-th upward
/// return to zero, recorded as steps. Levels inside the window carry the
/// exact law of the full walk at rho_N^+.
StepSequence censored_path_to_rho_plus(std::uint64_t N, LevelWindow window, RngStream& rng);

/// Censored walk run until every level k in 1..K has at least `count`
/// downcrossings; window [0, K].
StepSequence censored_path_with_downcrossings(std::int64_t K, std::uint64_t count,
                                              RngStream& rng);

}  // namespace loctime
