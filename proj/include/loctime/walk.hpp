#pragma once

#include <bit>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "loctime/rng.hpp"

namespace loctime {

/// Simple symmetric random walk steps, bit-packed (bit set means +1).
///
/// Step X_{i+1} lives in bit (i % 64) of word (i / 64). Bits past size() are
/// always zero, so two sequences compare equal iff their steps agree.
class StepSequence {
 public:
  StepSequence() = default;

  static StepSequence from_steps(std::span<const int> steps);

  std::uint64_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  /// X_{i+1} for 0-based i.
  int step(std::uint64_t i) const {
    return ((words_[i >> 6] >> (i & 63)) & 1U) ? 1 : -1;
  }

  void push_back(int step);
  /// Appends the low `nbits` bits of `word` as steps.
  void append_word(std::uint64_t word, unsigned nbits);
  /// Appends steps [begin, end) of `src` (0-based step indices).
  void append_range(const StepSequence& src, std::uint64_t begin, std::uint64_t end);
  void reserve(std::uint64_t n) { words_.reserve((n + 63) / 64); }

  std::span<const std::uint64_t> words() const { return words_; }
  std::vector<int> to_vector() const;

  bool operator==(const StepSequence&) const = default;

 private:
  std::vector<std::uint64_t> words_;
  std::uint64_t size_ = 0;
};

/// n fair independent steps.
StepSequence simulate_walk(std::uint64_t n, RngStream& rng);

/// Snapshot format: 64-bit little-endian length, then ceil(n/8) bytes with
/// step 8b+j+1 in bit j of byte b.
void write_snapshot(std::ostream& out, const StepSequence& steps);
StepSequence read_snapshot(std::istream& in);

/// Read-only view exposing partial sums S_0 = 0, S_i = X_1 + ... + X_i.
class WalkPath {
 public:
  explicit WalkPath(const StepSequence& steps) : steps_(&steps) {}
  explicit WalkPath(StepSequence&&) = delete;

  std::uint64_t length() const { return steps_->size(); }
  const StepSequence& steps() const { return *steps_; }

  /// S_i in O(i / 64) via popcount.
  std::int64_t position(std::uint64_t i) const;

  /// Calls visit(i, S_i) for i = 1..n in order.
  template <class Visit>
  void scan(std::uint64_t n, Visit&& visit) const {
    check_time(n);
    const auto words = steps_->words();
    std::int64_t s = 0;
    std::uint64_t i = 0;
    for (std::size_t w = 0; i < n; ++w) {
      std::uint64_t word = words[w];
      const std::uint64_t stop = std::min<std::uint64_t>(n, i + 64);
      for (; i < stop; ++i, word >>= 1) {
        s += (word & 1U) ? 1 : -1;
        visit(i + 1, s);
      }
    }
  }

  /// S_0..S_n.
  std::vector<std::int64_t> positions(std::uint64_t n) const;

  void check_time(std::uint64_t n) const {
    if (n > length()) throw std::out_of_range("time exceeds path length");
  }

 private:
  const StepSequence* steps_;
};

/// Closed level interval [lo, hi].
struct LevelWindow {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  LevelWindow() = default;
  LevelWindow(std::int64_t lo_, std::int64_t hi_);

  bool contains(std::int64_t k) const { return lo <= k && k <= hi; }
  std::uint64_t width() const { return static_cast<std::uint64_t>(hi - lo + 1); }
};

/// xi(k, n) for every k in a window, plus two spill buckets for time points
/// spent below / above the window so that the partition identity stays
/// checkable.
struct LocalTimeProfile {
  std::uint64_t base_time = 0;
  LevelWindow window;
  std::vector<std::uint64_t> counts;
  std::uint64_t below = 0;
  std::uint64_t above = 0;
  /// 0 means no zero series was recorded.
  std::uint64_t zero_stride = 0;
  /// xi(0, m * zero_stride) for m = 1, 2, ...
  std::vector<std::uint64_t> zero_series;

  std::uint64_t at(std::int64_t k) const {
    return window.contains(k) ? counts[static_cast<std::size_t>(k - window.lo)] : 0;
  }
  /// Sum of window counts and both spill buckets; equals base_time.
  std::uint64_t total() const;
};

/// #{1 <= i <= n : S_i = k}, by direct scan. Reference implementation.
std::uint64_t local_time(const WalkPath& path, std::int64_t k, std::uint64_t n);

/// xi(k, n) - xi(0, n); k >= 1.
std::int64_t centered_local_time(const WalkPath& path, std::int64_t k, std::uint64_t n);

/// Default zero-series stride: 1 up to n = 10^6, else round(n / 10^6).
std::uint64_t default_zero_stride(std::uint64_t n);

LocalTimeProfile local_time_profile(const WalkPath& path, std::uint64_t n, LevelWindow window,
                                    std::uint64_t zero_stride = 0);

/// Generates n steps from `rng` and profiles them without storing the path.
/// Consumes the stream exactly like simulate_walk(n, rng).
LocalTimeProfile stream_local_time_profile(std::uint64_t n, LevelWindow window, RngStream& rng,
                                           std::uint64_t zero_stride = 0);

/// Streaming local-time counter over a level window. Words whose 64 time
/// points provably stay outside the window (and away from level 0) are
/// skipped with a popcount.
class LocalTimeAccumulator {
 public:
  explicit LocalTimeAccumulator(LevelWindow window);

  /// Consumes the low `nbits` steps of `word` (nbits <= 64).
  void feed(std::uint64_t word, unsigned nbits);

  std::uint64_t time() const { return time_; }
  std::int64_t position() const { return position_; }
  std::uint64_t count(std::int64_t k) const {
    return window_.contains(k) ? counts_[static_cast<std::size_t>(k - window_.lo)] : 0;
  }
  std::uint64_t zero_count() const { return zeros_; }
  std::uint64_t below() const { return below_; }
  std::uint64_t above() const { return above_; }
  const LevelWindow& window() const { return window_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

 private:
  LevelWindow window_;
  std::int64_t band_lo_;
  std::int64_t band_hi_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t zeros_ = 0;
  std::uint64_t below_ = 0;
  std::uint64_t above_ = 0;
  std::uint64_t time_ = 0;
  std::int64_t position_ = 0;
};

/// Feeds fresh fair steps from an RngStream in arbitrary-sized chunks.
class StepSource {
 public:
  explicit StepSource(RngStream& rng) : rng_(&rng) {}
  /// Pushes `steps` new steps into `sink.feed(word, nbits)`.
  template <class Sink>
  void advance(std::uint64_t steps, Sink& sink) {
    while (steps > 0) {
      if (left_ == 0) {
        word_ = rng_->next_u64();
        left_ = 64;
      }
      const unsigned take = static_cast<unsigned>(std::min<std::uint64_t>(steps, left_));
      sink.feed(word_, take);
      word_ = take == 64 ? 0 : word_ >> take;
      left_ -= take;
      steps -= take;
    }
  }

 private:
  RngStream* rng_;
  std::uint64_t word_ = 0;
  unsigned left_ = 0;
};

/// Fair-coin walk in which every excursion leaving [lo, hi] is replaced by
/// the shortest one (a step out and the step back).
///
/// Such excursions return with probability one and never touch the window in
/// between, so visits, directional counts and downcrossings at levels inside
/// the window keep the law of the full walk, indexed by excursion counts
/// rather than by time. Step cost is bounded by visits to the window.
class CensoredWalk {
 public:
  CensoredWalk(LevelWindow window, bool record_steps);

  /// One fair step from the current position (two when the walk leaves the
  /// window). Returns the new position, which is always inside the window.
  std::int64_t step(RngStream& rng);

  std::int64_t position() const { return position_; }
  /// Position before the last completed move; outside the window right after
  /// a collapsed excursion.
  std::int64_t previous() const { return previous_; }
  std::uint64_t time() const { return time_; }
  const StepSequence& steps() const { return steps_; }

 private:
  LevelWindow window_;
  bool record_;
  std::int64_t position_ = 0;
  std::int64_t previous_ = 0;
  std::uint64_t time_ = 0;
  StepSequence steps_;
};

}  // namespace loctime
