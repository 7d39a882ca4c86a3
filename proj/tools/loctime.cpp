#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loctime/config.hpp"
#include "loctime/experiments.hpp"
#include "loctime/report.hpp"

namespace fs = std::filesystem;
using loctime::ordered_json;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int run_command(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                const std::optional<int>& workers, const std::optional<std::string>& out,
                const std::vector<std::string>& overrides) {
  loctime::ExperimentConfig config;
  std::string dir;
  try {
    config = loctime::load_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw loctime::ConfigError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) config.seed = *seed;
    if (workers) {
      if (*workers < 1) throw loctime::ConfigError("--workers must be positive");
      config.workers = *workers;
    }
    dir = loctime::resolve_out_dir(config, out);
    config.out = dir;
  } catch (const std::exception& e) {
    std::cerr << "loctime: " << e.what() << '\n';
    return exit_usage;
  }

  const std::string started = utc_now();
  loctime::ExperimentResult result;
  try {
    result = loctime::run_experiment(config);
  } catch (const loctime::ConfigError& e) {
    std::cerr << "loctime: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "loctime: invalid parameters: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::out_of_range& e) {
    std::cerr << "loctime: invalid parameters: " << e.what() << '\n';
    return exit_usage;
  }
  try {
    loctime::write_outputs(result, config, dir, started, utc_now());
  } catch (const std::exception& e) {
    std::cerr << "loctime: " << e.what() << '\n';
    return exit_usage;
  }
  for (const auto& a : result.assertions)
    std::cout << (a.pass ? "PASS " : "FAIL ") << (a.hard ? "" : "(diagnostic) ") << a.name
              << "  statistic=" << loctime::format_number(a.statistic)
              << " threshold=" << loctime::format_number(a.threshold)
              << (a.detail.empty() ? "" : "  " + a.detail) << '\n';
  std::cout << result.experiment << ": " << (result.hard_pass() ? "all hard assertions pass" : "hard assertion failed")
            << " (" << result.assertions.size() << " assertions, output in " << dir << ")\n";
  return result.hard_pass() ? exit_pass : exit_fail;
}

struct ExperimentSummary {
  std::string experiment;
  std::string source;
  ordered_json data;
};

std::vector<ExperimentSummary> load_summaries(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  if (fs::exists(dir / "summary.json")) files.push_back(dir / "summary.json");
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && fs::exists(entry.path() / "summary.json"))
      files.push_back(entry.path() / "summary.json");
  if (files.empty()) throw std::runtime_error("no summary.json under " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<ExperimentSummary> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    ordered_json j;
    try {
      j = ordered_json::parse(in);
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed " + f.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("experiment") || !j.contains("assertions") || !j["assertions"].is_array())
      throw std::runtime_error("malformed " + f.string() + ": missing experiment or assertions");
    out.push_back({j["experiment"].get<std::string>(), f.string(), std::move(j)});
  }
  return out;
}

std::string field(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return "";
  const auto& v = j[key];
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_float()) return loctime::format_number(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

int report_command(const std::string& in_dir, const std::string& format) {
  std::vector<ExperimentSummary> summaries;
  try {
    summaries = load_summaries(in_dir);
  } catch (const std::exception& e) {
    std::cerr << "loctime: " << e.what() << '\n';
    return exit_usage;
  }
  bool all_pass = true;
  if (format == "csv") {
    std::cout << "experiment,kind,name,pass,hard,statistic,threshold,exponent,ci_lo,ci_hi\n";
    for (const auto& s : summaries) {
      std::size_t passed = 0, failed = 0;
      for (const auto& a : s.data["assertions"]) {
        (a.value("pass", false) ? passed : failed) += 1;
        std::cout << s.experiment << ",assertion," << field(a, "name") << ',' << field(a, "pass") << ','
                  << field(a, "hard") << ',' << field(a, "statistic") << ',' << field(a, "threshold") << ",,,\n";
      }
      if (s.data.contains("rates"))
        for (const auto& r : s.data["rates"]) {
          const auto& fit = r.contains("fit") ? r["fit"] : ordered_json();
          std::cout << s.experiment << ",rate," << field(r, "experiment") << ",,,,,"
                    << (fit.is_object() ? field(fit, "exponent") + ',' + field(fit, "ci_lo") + ',' + field(fit, "ci_hi")
                                        : std::string(",,"))
                    << '\n';
        }
      const bool hard = s.data.value("hard_pass", false);
      all_pass = all_pass && hard;
      std::cout << s.experiment << ",summary,counts," << (hard ? 1 : 0) << ",," << passed << ',' << failed
                << ",,,\n";
    }
  } else {
    auto out = ordered_json::array();
    for (const auto& s : summaries) {
      ordered_json e;
      std::size_t passed = 0, failed = 0;
      for (const auto& a : s.data["assertions"]) (a.value("pass", false) ? passed : failed) += 1;
      e["experiment"] = s.experiment;
      e["source"] = s.source;
      e["hard_pass"] = s.data.value("hard_pass", false);
      e["passed"] = passed;
      e["failed"] = failed;
      e["assertions"] = s.data["assertions"];
      auto rates = ordered_json::array();
      if (s.data.contains("rates"))
        for (const auto& r : s.data["rates"]) {
          ordered_json x;
          x["name"] = r.value("experiment", "");
          x["fit"] = r.contains("fit") ? r["fit"] : ordered_json(nullptr);
          rates.push_back(std::move(x));
        }
      e["rates"] = std::move(rates);
      all_pass = all_pass && e["hard_pass"].get<bool>();
      out.push_back(std::move(e));
    }
    std::cout << out.dump(2) << '\n';
  }
  return all_pass ? exit_pass : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo lab for local times of the simple symmetric random walk"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
  run->add_option("--config", config_path, "key = value configuration file")->required();
  run->add_option("--seed", seed, "master seed (overrides the config)");
  run->add_option("--workers", workers, "OpenMP worker threads");
  run->add_option("--out", out, "output directory (overrides LOCTIME_OUT_DIR and the config)");
  run->add_option("--set", overrides, "override any config key, key=value (repeatable)");

  auto* report = app.add_subcommand("report", "Merge summary.json files under a directory");
  std::string in_dir;
  std::string format = "json";
  report->add_option("--in", in_dir, "directory holding summary.json or run subdirectories")->required();
  report->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }
  if (run->parsed()) return run_command(config_path, seed, workers, out, overrides);
  return report_command(in_dir, format);
}
