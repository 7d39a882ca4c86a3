#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "loctime/walk.hpp"

namespace loctime {

/// Thrown when a path has fewer excursions than an operation needs.
class InsufficientExcursions : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// rho_1 < rho_2 < ... : returns to zero. rho_plus: the returns that close an
/// upward excursion. rho_0 = 0 is implicit and not stored.
struct ReturnTimes {
  std::vector<std::uint64_t> rho;
  std::vector<std::uint64_t> rho_plus;
};

ReturnTimes return_times(const WalkPath& path, std::uint64_t up_to);

enum class Direction { up, down };

struct Excursion {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  Direction sign = Direction::up;

  std::uint64_t length() const { return end - start; }
  bool operator==(const Excursion&) const = default;
};

/// Completed excursions away from `level`, in time order. An incomplete
/// trailing excursion is dropped.
std::vector<Excursion> classify_excursions(const WalkPath& path, std::int64_t level);

/// Directional local time at level k by time n.
///
/// An excursion away from k is counted from its first step: up counts
/// #{0 <= i < n : S_i = k, S_{i+1} = k + 1}, down likewise. An excursion
/// that ends exactly at n is therefore included, and at a time n with
/// S_n != k the two counts add up to xi(k, n) (plus one for k = 0, whose
/// first excursion departs at time 0).
struct DirectionalLocalTime {
  std::int64_t level = 0;
  std::uint64_t time = 0;
  std::uint64_t up = 0;
  std::uint64_t down = 0;
};

DirectionalLocalTime directional_counts(const WalkPath& path, std::int64_t k, std::uint64_t n);

void write_excursions_csv(std::ostream& out, std::span<const Excursion> excursions);

/// Dyadic block layout for the excursion splice: block l holds the zero
/// excursions with indices N_{l-1} + 1 .. N_l, where N_0 = 0 and N_l = 2^l.
/// An excursion of block l is large when its length exceeds r_l^{4/3},
/// r_l = N_l - N_{l-1}.
class BlockSchedule {
 public:
  explicit BlockSchedule(unsigned max_level);

  unsigned max_level() const { return max_level_; }
  /// N_l.
  std::uint64_t boundary(unsigned level) const;
  /// r_l = N_l - N_{l-1}.
  std::uint64_t block_size(unsigned level) const;
  double threshold(unsigned level) const;
  bool is_large(unsigned level, std::uint64_t length) const {
    return static_cast<double>(length) > threshold(level);
  }
  /// N_{max_level}: the number of excursions a splice consumes and produces.
  std::uint64_t total() const { return boundary(max_level_); }

 private:
  unsigned max_level_;
};

struct SpliceChoice {
  unsigned source = 1;  // 1 or 2
  std::uint64_t index = 0;
  bool operator==(const SpliceChoice&) const = default;
};

/// Excursion-level splice plan over two excursion length streams. Large
/// excursions of walk 1 stay in place; its small ones are replaced in order
/// by walk 2's small excursions from the same block while those last.
std::vector<SpliceChoice> splice_plan(std::span<const std::uint64_t> lengths1,
                                      std::span<const std::uint64_t> lengths2,
                                      const BlockSchedule& schedule);

/// Materializes the splice of two walks; the result ends at its
/// N_{max_level}-th return to zero.
StepSequence splice_walks(const WalkPath& walk1, const WalkPath& walk2,
                          const BlockSchedule& schedule);

}  // namespace loctime
