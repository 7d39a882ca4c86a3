#include "loctime/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace loctime {

namespace {

enum class KeyType { text, experiment, u64, positive_int, count, int_list, u64_list, real_list, positive_real, probability, boolean, workers };

const std::map<std::string, KeyType>& key_types() {
  static const std::map<std::string, KeyType> types = {
      {"experiment", KeyType::experiment}, {"seed", KeyType::u64},
      {"workers", KeyType::workers},       {"out", KeyType::text},
      {"n", KeyType::positive_int},        {"N", KeyType::positive_int},
      {"K", KeyType::positive_int},        {"k_max", KeyType::positive_int},
      {"reps", KeyType::count},            {"samples", KeyType::count},
      {"k", KeyType::int_list},            {"n_grid", KeyType::u64_list},
      {"u_grid", KeyType::real_list},      {"dt", KeyType::positive_real},
      {"t", KeyType::positive_real},       {"alpha", KeyType::positive_real},
      {"ks_threshold", KeyType::positive_real},
      {"rate_threshold", KeyType::positive_real},
      {"level", KeyType::probability},     {"hard_diagnostics", KeyType::boolean},
  };
  return types;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return v;
  // Also accept exact real spellings such as 1e6.
  double d = 0.0;
  const auto [p2, e2] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (e2 == std::errc() && p2 == s.data() + s.size() && d >= 0.0 && d < 1.8e19 &&
      d == std::floor(d))
    return static_cast<std::uint64_t>(d);
  throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + s + "'");
}

double parse_real(const std::string& key, const std::string& s) {
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(d))
    throw ConfigError("key '" + key + "': expected a real number, got '" + s + "'");
  return d;
}

void validate(const std::string& key, const std::string& value) {
  const auto it = key_types().find(key);
  if (it == key_types().end()) throw ConfigError("unknown key '" + key + "'");
  switch (it->second) {
    case KeyType::text:
      if (value.empty()) throw ConfigError("key '" + key + "' is empty");
      break;
    case KeyType::experiment: {
      const auto& ids = experiment_ids();
      if (std::find(ids.begin(), ids.end(), value) == ids.end())
        throw ConfigError("unknown experiment '" + value + "'");
      break;
    }
    case KeyType::u64:
    case KeyType::count:
      parse_u64(key, value);
      break;
    case KeyType::workers:
    case KeyType::positive_int:
      if (parse_u64(key, value) == 0) throw ConfigError("key '" + key + "' must be positive");
      break;
    case KeyType::int_list:
    case KeyType::u64_list: {
      const auto items = split_list(value);
      if (items.empty()) throw ConfigError("key '" + key + "' is an empty list");
      for (const auto& item : items)
        if (parse_u64(key, item) == 0) throw ConfigError("key '" + key + "' must hold positive integers");
      break;
    }
    case KeyType::real_list: {
      const auto items = split_list(value);
      if (items.empty()) throw ConfigError("key '" + key + "' is an empty list");
      for (const auto& item : items)
        if (!(parse_real(key, item) > 0.0)) throw ConfigError("key '" + key + "' must hold positive reals");
      break;
    }
    case KeyType::positive_real:
      if (!(parse_real(key, value) > 0.0)) throw ConfigError("key '" + key + "' must be positive");
      break;
    case KeyType::probability: {
      const double p = parse_real(key, value);
      if (!(p > 0.0 && p < 1.0)) throw ConfigError("key '" + key + "' must lie in (0, 1)");
      break;
    }
    case KeyType::boolean:
      if (value != "true" && value != "false") throw ConfigError("key '" + key + "' must be true or false");
      break;
  }
}

}  // namespace

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"identities",   "laws",   "limits", "sheet", "couple-eta",
                                               "couple-sheet", "splice", "audits", "lil"};
  return ids;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  validate(key, value);
  if (key == "experiment") {
    experiment = value;
  } else if (key == "seed") {
    seed = parse_u64(key, value);
  } else if (key == "workers") {
    const auto w = parse_u64(key, value);
    if (w > 4096) throw ConfigError("key 'workers' is too large");
    workers = static_cast<int>(w);
  } else if (key == "out") {
    out = value;
  } else {
    values[key] = value;
  }
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_u64(key, it->second);
}

std::int64_t ExperimentConfig::get_i64(const std::string& key, std::int64_t fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  const auto v = parse_u64(key, it->second);
  if (v > static_cast<std::uint64_t>(INT64_MAX)) throw ConfigError("key '" + key + "' is too large");
  return static_cast<std::int64_t>(v);
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_real(key, it->second);
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second == "true";
}

std::vector<std::int64_t> ExperimentConfig::get_i64_list(const std::string& key,
                                                         std::vector<std::int64_t> fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(it->second)) out.push_back(static_cast<std::int64_t>(parse_u64(key, item)));
  return out;
}

std::vector<std::uint64_t> ExperimentConfig::get_u64_list(const std::string& key,
                                                          std::vector<std::uint64_t> fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(it->second)) out.push_back(parse_u64(key, item));
  return out;
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& key,
                                                      std::vector<double> fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(it->second)) out.push_back(parse_real(key, item));
  return out;
}

std::map<std::string, std::string> ExperimentConfig::snapshot() const {
  auto snap = values;
  snap["experiment"] = experiment;
  snap["seed"] = std::to_string(seed);
  snap["workers"] = std::to_string(workers);
  snap["out"] = out;
  return snap;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    try {
      config.set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (config.experiment.empty()) throw ConfigError("missing key 'experiment'");
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in);
}

std::string resolve_out_dir(const ExperimentConfig& config, const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("LOCTIME_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return config.out;
}

}  // namespace loctime
