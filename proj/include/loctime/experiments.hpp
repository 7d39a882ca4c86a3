#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loctime/config.hpp"
#include "loctime/coupling.hpp"
#include "loctime/ray_knight.hpp"
#include "loctime/report.hpp"
#include "loctime/rng.hpp"
#include "loctime/stats.hpp"

namespace loctime {

/// One checked claim. Hard assertions decide the exit status; soft ones are
/// reported only.
struct Assertion {
  std::string name;
  bool pass = false;
  bool hard = true;
  double statistic = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Address of the random streams behind one component: replication i reads
/// `path` with ":i" appended to the last label.
struct StreamRecord {
  std::string component;
  std::string path;
  std::uint64_t replications = 0;
};

/// Empirical second moment of a centered Gaussian probe against its exact
/// value.
struct CovarianceProbe {
  std::string process;
  std::int64_t k = 0;
  std::int64_t l = 0;
  double s = 0.0;
  double t = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double exact = 0.0;
  bool pass = false;
};

struct ExperimentResult {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<Assertion> assertions;
  std::vector<TestReport> tests;
  std::vector<TailAudit> audits;
  std::vector<CouplingReport> rates;
  std::vector<DistributionSeries> distributions;
  std::vector<LilDiagnostic> lil;
  std::vector<CovarianceProbe> covariance;
  std::vector<StreamRecord> streams;
  /// Identity reports kept for export: the first few plus every failing one.
  std::vector<IdentityReport> identity_reports;
  std::vector<std::uint64_t> identity_seeds;

  void check(std::string name, bool pass, double statistic, double threshold, std::string detail = {},
             bool hard = true);
  bool hard_pass() const;
  /// Assertions whose name starts with `prefix`.
  std::vector<const Assertion*> matching(const std::string& prefix) const;
};

struct IdentityParams {
  std::uint64_t reps = 10000;
  std::uint64_t N_max = 100;
  std::int64_t k_max = 10;
  std::uint64_t walk_length = std::uint64_t{1} << 16;
};

struct OffspringParams {
  std::uint64_t samples = 1000000;
  std::int64_t levels = 10;
  std::uint64_t per_level = 100;
  double level = 1e-3;
};

struct BranchingParams {
  std::uint64_t reps = 100000;
  std::uint64_t N = 20;
  std::int64_t k = 3;
  double level = 1e-3;
};

struct FirstExcursionParams {
  std::uint64_t reps = 1000000;
  std::vector<std::int64_t> levels{1, 2, 5};
  double level = 1e-3;
  double relative_tolerance = 0.05;
  double min_expected = 1000.0;
};

struct MomentParams {
  std::uint64_t reps = 100000;
  std::int64_t k_max = 5;
  std::vector<double> times{0.25, 0.5, 1.0};
  double se_multiple = 3.0;
};

struct SheetExtraParams {
  std::uint64_t reps = 10000;
  double dt = 1e-4;
  double ks_threshold = 0.02;
  double se_multiple = 3.0;
};

struct LimitParams {
  std::uint64_t n = 1000000;
  std::uint64_t reps = 10000;
  std::int64_t k = 2;
  double ks_threshold = 0.02;
};

struct SkorokhodParams {
  std::uint64_t exit_samples = 1000000;
  std::uint64_t marks = 100000;
  std::uint64_t walk_length = std::uint64_t{1} << 16;
  double ks_threshold = 0.01;
  double se_multiple = 3.0;
};

struct EtaRateParams {
  std::vector<std::uint64_t> n_grid;
  std::uint64_t reps = 100;
  double threshold = 0.35;
  EtaRateParams();
};

struct SheetRateParams {
  std::vector<std::uint64_t> n_grid;
  std::int64_t K = 3;
  std::uint64_t reps = 100;
  double threshold = 0.40;
  double se_multiple = 3.0;
  SheetRateParams();
};

struct SpliceParams {
  std::uint64_t n = std::uint64_t{1} << 26;
  std::uint64_t test_steps = 1000000;
  double level = 1e-3;
};

struct SpliceRateParams {
  unsigned max_level = 12;
  std::int64_t K = 3;
  std::uint64_t reps = 100;
};

struct AuditParams {
  std::uint64_t reps = 100000;
  double alpha = 1.5;
  double c2 = 0.4;
};

struct LilParams {
  std::uint64_t n = 100000000;
  double lo = 0.3;
  double hi = 1.3;
  bool hard = false;
};

/// Each check draws from `root.child(<component>, i)` and appends its tests,
/// tables and assertions to `out`.
void check_identities(ExperimentResult& out, const RngStream& root, const IdentityParams& p, int workers);
void check_offspring_law(ExperimentResult& out, const RngStream& root, const OffspringParams& p, int workers);
void check_branching(ExperimentResult& out, const RngStream& root, const BranchingParams& p, int workers);
void check_first_excursion(ExperimentResult& out, const RngStream& root, const FirstExcursionParams& p,
                           int workers);
void check_g_moments(ExperimentResult& out, const RngStream& root, const MomentParams& p, int workers);
void check_sheet_extras(ExperimentResult& out, const RngStream& root, const SheetExtraParams& p, int workers);
void check_limits(ExperimentResult& out, const RngStream& root, const LimitParams& p, int workers);
void check_skorokhod(ExperimentResult& out, const RngStream& root, const SkorokhodParams& p, int workers);
void check_eta_rate(ExperimentResult& out, const RngStream& root, const EtaRateParams& p, int workers);
void check_sheet_rate(ExperimentResult& out, const RngStream& root, const SheetRateParams& p, int workers);
void check_splice(ExperimentResult& out, const RngStream& root, const SpliceParams& p);
void check_splice_rate(ExperimentResult& out, const RngStream& root, const SpliceRateParams& p, int workers);
void check_tail_audits(ExperimentResult& out, const RngStream& root, const AuditParams& p, int workers);
void check_lil(ExperimentResult& out, const RngStream& root, const LilParams& p);

/// Root stream of an experiment: (seed) / <experiment>:0.
RngStream experiment_root(const std::string& experiment, std::uint64_t seed);

/// Runs every check of `config.experiment` with parameters taken from the
/// config (defaults as in the structs above). reps = 0 yields an empty result.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes manifest.json, streams.csv, summary.json, audits.csv, rates.csv,
/// distributions.csv, covariance.csv and the per-experiment JSON files.
void write_outputs(const ExperimentResult& result, const ExperimentConfig& config, const std::string& dir,
                   const std::string& started_utc, const std::string& finished_utc);

ordered_json summary_json(const ExperimentResult& result);

inline constexpr const char* artifact_version = "1.0.0";

}  // namespace loctime
