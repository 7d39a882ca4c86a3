#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loctime/excursions.hpp"
#include "loctime/ray_knight.hpp"
#include "loctime/rng.hpp"
#include "loctime/stats.hpp"
#include "loctime/walk.hpp"

namespace loctime {

/// Walk read off a Brownian motion at its successive exits from unit
/// intervals: step i is the exit side, tau[i - 1] the cumulative exit time.
struct EmbeddedWalk {
  StepSequence steps;
  /// Empty when times were not requested.
  std::vector<double> tau;
};

/// One Exp(1) mark per return to zero, in return order.
struct EtaMarks {
  std::vector<double> eta;
};

struct EmbeddedWalkSample {
  EmbeddedWalk walk;
  EtaMarks marks;
};

/// Step signs come from the stream ("signs", 0), exit times from
/// ("exit-times", 0) and marks from ("marks", 0), so marks never share
/// randomness with the signs.
EmbeddedWalkSample embed_walk(std::uint64_t n, RngStream& rng, bool with_times = true);

struct CouplingReport {
  std::string experiment;
  std::vector<double> n_grid;
  /// One value per grid point (median over replications for batch runs).
  std::vector<double> errors;
  std::string normalization = "none";
  std::optional<RateFit> fit;
  std::uint64_t seed = 0;
};

void write_coupling_json(std::ostream& out, const CouplingReport& report);

/// e(n) = |xi(0, n) - (eta_1 + ... + eta_{xi(0, n)})| at each grid time.
CouplingReport coupling_error_eta(const EmbeddedWalk& walk, const EtaMarks& marks,
                                  std::span<const std::uint64_t> n_grid);

/// Same errors without materializing the walk: the zero count is streamed and
/// marks are drawn as returns occur. Per-grid errors for one replication.
std::vector<double> stream_eta_errors(std::span<const std::uint64_t> n_grid, RngStream& rng);

/// Skorokhod embedding of one level's centered sums U(j), j = 1..j_max.
struct LevelEmbedding {
  CenteredSumSeries sums;
  /// sigma_j with U(j) = W(sigma_j).
  std::vector<double> sigma;
  /// W(2j).
  std::vector<double> w_at_2j;
};

/// Levels 1..k_max, each from the child stream ("level", k).
std::vector<LevelEmbedding> embed_U_sums(std::int64_t k_max, std::uint64_t j_max, RngStream& rng);

/// One replication of the sheet coupling along an N grid.
struct SheetCouplingSample {
  std::vector<std::uint64_t> n_grid;
  /// max_{k <= K} |xi(k, rho_N) - xi(0, rho_N) - G(k, N)| per grid point.
  std::vector<double> sup_error;
  /// xi(k, rho_N) - N, indexed [k - 1][grid index].
  std::vector<std::vector<double>> centered;
  /// G(k, N), same layout.
  std::vector<std::vector<double>> g;
  /// Upward excursion counts nu_N.
  std::vector<std::uint64_t> nu;
  /// xi(k, rho^+_M, up) for M = n_grid.back(), k = 1..K.
  std::vector<std::uint64_t> up_at_top;
};

/// Builds the branching construction with every level's centered sums embedded
/// in its own Brownian motion W_k, and the down-excursion counts T* embedded
/// in an independent W*. Requires K^3 <= min(n_grid).
SheetCouplingSample assemble_sheet_coupling(std::span<const std::uint64_t> n_grid, std::int64_t K,
                                            RngStream& rng);

/// Zero excursion summarized for the splice: exact length, and for small ones
/// (length <= floor(threshold)) the visit counts at levels 1..K.
struct ExcursionRecord {
  std::uint64_t length = 0;
  bool small = false;
  std::vector<std::uint32_t> visits;
};

/// Samples the first N_{max_level} excursions of a walk, block by block.
/// Small excursions are walked step by step; a large one is walked up to the
/// block threshold and its remaining length drawn from the exact hitting law.
std::vector<ExcursionRecord> sample_excursion_stream(const BlockSchedule& schedule, std::int64_t K,
                                                     RngStream& rng);

/// Splice errors at N = N_l, l = 1..max_level:
///   rho_gap[l-1]   = max_{i <= N} |rho_i - rho_i^(1)|
///   level_gap[l-1] = max_{i <= N, k <= K} |xi_k over the first i spliced
///                    excursions - the same for walk 1|
struct SpliceErrors {
  std::vector<std::uint64_t> n;
  std::vector<double> rho_gap;
  std::vector<double> level_gap;
};

SpliceErrors splice_errors(std::span<const ExcursionRecord> walk1,
                           std::span<const ExcursionRecord> walk2, const BlockSchedule& schedule);

/// Exact sampler of rho_1, P(rho_1 > 2m) = C(2m, m) 4^-m. Lengths beyond
/// 2^62 are clamped there (probability below 1e-9 per draw).
std::uint64_t sample_excursion_length(RngStream& rng);

/// P(S_2m = 0) = C(2m, m) 4^-m.
double return_probability(std::uint64_t m);

}  // namespace loctime
