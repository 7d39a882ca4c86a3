#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "loctime/gaussian.hpp"
#include "loctime/rng.hpp"
#include "loctime/stats.hpp"

namespace loctime {

/// P(rho_N > 2n) = 4^-n sum_{j<N} 2^j C(2n - j, n).
double rho_tail_exact(std::uint64_t N, std::uint64_t n);

/// P(rho_N >= x) for real x, via the largest even value below x.
double rho_tail_at_least(std::uint64_t N, double x);

/// rho_N as a sum of N exact excursion lengths.
std::uint64_t sample_rho(std::uint64_t N, RngStream& rng);

/// P(rho_N >= u N^2) <= 1/sqrt(u). Needs u >= 1. Rows where the exact law
/// meets the bound are flagged tight.
TailAudit audit_rho_tail(std::span<const std::uint64_t> rho_samples, std::uint64_t N,
                         std::span<const double> u_grid);

/// Exact P(|2 nu - N| >= u) for nu ~ Binomial(N, 1/2).
double binomial_two_sided_tail(std::uint64_t N, double u);

/// P(|2 nu_N - N| >= u) <= 2 exp(-u^2 / (2N)).
TailAudit audit_binomial_tail(std::span<const std::int64_t> nu_samples, std::uint64_t N,
                              std::span<const double> u_grid);

/// P(max_{i <= n} |U(i)| > z) <= 2 exp(-z^2 / (8n)), from samples of the max.
TailAudit audit_u_sum_max(std::span<const double> max_samples, std::uint64_t n,
                          std::span<const double> z_grid);

/// max_{i <= n} |U(i)| for one fresh series of centered offspring sums.
double sample_u_sum_max(std::uint64_t n, RngStream& rng);

/// P(max_{k <= K} xi(k, rho_N^+) >= 5N) <= K exp(-N / (4K)); a single row.
TailAudit audit_level_max(std::span<const std::uint64_t> max_samples, std::uint64_t N,
                          std::int64_t K);

/// max_{1 <= k <= K} xi(k, rho_N^+) from a walk censored above K.
std::uint64_t sample_level_max(std::uint64_t N, std::int64_t K, RngStream& rng);

/// Exp(1) partial sums: P(max_{j <= n} |sum_{i <= j} (Y_i - 1)| >= u sqrt n)
/// <= 2 exp(-u^2 / 8) on 0 < u < 2 sqrt n, from samples of the scaled max.
TailAudit audit_exp_partial_sums(std::span<const double> scaled_max, std::uint64_t n,
                                 std::span<const double> u_grid);

/// P(max_{i <= n} Y_i >= C log n) <= n^{1 - C}.
TailAudit audit_exp_max(std::span<const double> max_samples, std::uint64_t n,
                        std::span<const double> c_grid);

/// Decay-slope audit of an increment maximum: log survival fitted against
/// x^2 must fall at least as fast as exp(-c2 x^2), allowing 1.96 standard
/// errors.
struct IncrementAudit {
  TailAudit audit;
  SlopeFit fit;
  double c2 = 0.0;
  bool slope_pass = false;
};

IncrementAudit audit_increment_bounds(std::span<const double> scaled_max,
                                      std::span<const double> x_grid, double c2,
                                      double min_survival = 1e-3);

/// max_{0 <= j <= t - a} (xi(0, a + j) - xi(0, j)) / sqrt(a) for one fresh
/// walk of length t.
double sample_zero_increment_max(std::uint64_t t, std::uint64_t a, RngStream& rng);

/// sup_{s <= T - h} sup_{r <= h} |W(s + r) - W(s)| / sqrt(h) on a grid path.
double wiener_increment_max(const WienerPath& w, double h);

/// P(sup_{r <= h} |W(r)| >= v sqrt h), exactly.
double wiener_single_increment_tail(double v);

}  // namespace loctime
