#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace loctime {

/// One hop of a stream path: an experiment label plus a replication index.
struct StreamLabel {
  std::string experiment;
  std::uint64_t index = 0;

  bool operator==(const StreamLabel&) const = default;
};

/// Deterministic random stream addressed by (master seed, label path).
///
/// The engine seed is a splitmix64 digest of the master seed and every label
/// on the path, so a child stream depends only on its address and never on how
/// many draws were taken from the parent. Satisfies
/// UniformRandomBitGenerator, so it plugs into <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t master_seed, std::vector<StreamLabel> path = {});

  RngStream child(std::string_view experiment, std::uint64_t index) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();
  /// One fair bit, drawn from a buffered 64-bit word.
  unsigned bit();
  /// +1 or -1 with probability 1/2 each.
  int sign() { return bit() ? 1 : -1; }

  std::uint64_t master_seed() const { return master_seed_; }
  const std::vector<StreamLabel>& path() const { return path_; }
  std::string path_string() const;
  std::uint64_t engine_seed() const { return engine_seed_; }

 private:
  std::uint64_t master_seed_;
  std::vector<StreamLabel> path_;
  std::uint64_t engine_seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t bit_buffer_ = 0;
  unsigned bits_left_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace loctime
