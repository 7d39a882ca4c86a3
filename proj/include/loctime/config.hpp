#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace loctime {

/// Raised for malformed or invalid configuration; the CLI maps it to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration. Blank lines and text after `#` are
/// ignored; list values are comma separated.
///
/// Keys:
///   experiment        identities | laws | limits | sheet | couple-eta |
///                     couple-sheet | splice | audits | lil
///   seed              master seed (unsigned 64-bit)
///   workers           OpenMP threads; absent means all available
///   out               output directory
///   n N K k_max       positive integers
///   reps samples      non-negative integers; 0 yields an empty report
///   k                 list of positive integers
///   n_grid            list of positive integers
///   u_grid            list of positive reals
///   dt t alpha        positive reals
///   ks_threshold      positive real
///   rate_threshold    positive real
///   level             significance level in (0, 1)
///   hard_diagnostics  true | false
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 20241016;
  int workers = 0;
  std::string out = "loctime-out";
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::int64_t get_i64(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::int64_t> get_i64_list(const std::string& key,
                                         std::vector<std::int64_t> fallback) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                          std::vector<std::uint64_t> fallback) const;
  std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) const;

  /// Sets one key with full validation (also used for CLI overrides).
  void set(const std::string& key, const std::string& value);
  /// Key-value snapshot in key order, including seed, workers and out.
  std::map<std::string, std::string> snapshot() const;
};

const std::vector<std::string>& experiment_ids();

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Output directory precedence: explicit flag, then LOCTIME_OUT_DIR, then the
/// file's `out` key.
std::string resolve_out_dir(const ExperimentConfig& config, const std::optional<std::string>& flag);

}  // namespace loctime
