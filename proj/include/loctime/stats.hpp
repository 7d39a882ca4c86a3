#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace loctime {

class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> samples);

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& values() const { return sorted_; }
  /// Right-continuous ECDF: fraction of samples <= x.
  double cdf(double x) const;

 private:
  std::vector<double> sorted_;
};

/// P(U sqrt|V| <= x) for independent standard normals U, V, by adaptive
/// Gauss-Kronrod quadrature over u of phi(u) P(|V| > x^2 / u^2), split at
/// u = x and u = 1 + x.
double cdf_product_law(double x);

double normal_cdf(double x);

class TargetLaw {
 public:
  enum class Kind { standard_normal, half_normal, exponential, geometric_half, product, tabulated };

  static TargetLaw standard_normal();
  static TargetLaw half_normal();
  static TargetLaw exponential();
  static TargetLaw geometric_half();
  static TargetLaw product();
  /// Piecewise-linear CDF through (x_i, F_i); flat 0 / 1 outside.
  static TargetLaw tabulated(std::vector<double> x, std::vector<double> cdf);

  Kind kind() const { return kind_; }
  bool discrete() const { return kind_ == Kind::geometric_half; }
  std::string name() const;
  double cdf(double x) const;
  /// Only for discrete laws.
  double pmf(std::int64_t j) const;

 private:
  explicit TargetLaw(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::vector<double> x_;
  std::vector<double> f_;
};

struct TestReport {
  std::string kind;
  std::string subject;
  double statistic = 0.0;
  double threshold = 0.0;
  /// Chi-square tests only; NaN otherwise.
  double p_value = 0.0;
  std::size_t dof = 0;
  bool pass = false;
  std::uint64_t sample_size = 0;
  std::uint64_t seed = 0;
};

/// sup_x |ECDF - CDF| against a continuous law.
double ks_statistic(const EmpiricalDistribution& samples, const TargetLaw& law);

/// Passes iff the KS distance is at most `threshold`. Needs >= 100 samples.
TestReport ks_test(const EmpiricalDistribution& samples, const TargetLaw& law, double threshold,
                   std::uint64_t seed = 0);

/// Bins lo..hi of an integer law; values below lo fall into the lo bin and
/// values above hi into the hi bin. Edge bins are then merged inward until
/// every expected count is at least 5. Passes iff p >= level.
TestReport chi_square_test(std::span<const std::int64_t> samples,
                           const std::function<double(std::int64_t)>& pmf, std::int64_t lo,
                           std::int64_t hi, double level, std::uint64_t seed = 0);

/// Homogeneity test of two integer samples on a 2 x B table; tail bins of the
/// pooled support are merged until each expected cell count is at least 5.
TestReport chi_square_two_sample(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                                 double level, std::uint64_t seed = 0);

double chi_square_sf(double statistic, std::size_t dof);

/// Least squares line through (log n, log error) with a 95% Student-t
/// interval on the slope.
struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t points = 0;
};

RateFit fit_power_law(std::span<const double> n, std::span<const double> error);

/// Least squares of log survival on a transformed abscissa (u^2, u^{4/3}, ...).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  std::size_t points = 0;
};

SlopeFit fit_log_survival(std::span<const double> x, std::span<const double> survival);

struct TailRow {
  double u = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  double ci = 0.0;
  bool violated = false;
  bool tight = false;
};

/// Inequality audit. A row is violated when the empirical frequency minus
/// its 99% Wald half-width still exceeds the bound; tight rows, where the
/// exact probability attains the bound, are reported but never counted.
struct TailAudit {
  std::string name;
  std::uint64_t sample_size = 0;
  std::vector<TailRow> rows;

  void add(double u, double empirical, double bound, bool tight = false);
  std::size_t violations() const;
  bool pass() const { return violations() == 0; }
};

double wald_halfwidth_99(double p, std::uint64_t n);

/// Running-sup tracker for iterated-logarithm statistics. The statistic is
/// already divided by its normalizer; `inside` compares sup / constant with
/// [lo, hi]. Diagnostic only.
struct LilDiagnostic {
  std::string name;
  double constant = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double running_sup = 0.0;
  double n_at_sup = 0.0;
  double ratio = 0.0;
  bool inside = false;
  std::size_t points = 0;
};

LilDiagnostic lil_tracker(std::string name, std::span<const double> n,
                          std::span<const double> statistic, double constant, double lo,
                          double hi);

double median(std::vector<double> values);

/// Fixed-order pairwise summation; identical result for identical input
/// regardless of how it was produced.
double pairwise_sum(std::span<const double> values);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;
  /// Standard error of the sample variance (fourth-moment formula).
  double variance_se = 0.0;
};

MeanEstimate estimate_mean(std::span<const double> values);

/// Pearson tests on +/-1 steps: step signs against 1/2, and non-overlapping
/// step pairs against the uniform law on four cells.
TestReport fair_coin_test(std::span<const int> steps, double level);
TestReport lag_pair_test(std::span<const int> steps, double level);

}  // namespace loctime
