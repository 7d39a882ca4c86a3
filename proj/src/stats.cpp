#include "loctime/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace loctime {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : sorted_(std::move(samples)) {
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::cdf(double x) const {
  if (sorted_.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double cdf_product_law(double x) {
  if (x == 0.0) return 0.5;
  if (x < 0.0) return 1.0 - cdf_product_law(-x);
  // P(U sqrt|V| > x) = int_0^inf phi(u) erfc(x^2 / (sqrt2 u^2)) du. The
  // integrand switches on around u = x and is negligible below x / 8.
  const auto integrand = [x](double u) {
    if (u <= 0.0) return 0.0;
    const double z = x * x / (u * u);
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi) * std::erfc(z / std::numbers::sqrt2);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  constexpr double tol = 1e-10;
  double error = 0.0;
  const double upper = 1.0 + x;
  const double tail = GK::integrate(integrand, x / 8.0, x, 15, tol, &error) +
                      GK::integrate(integrand, x, upper, 15, tol, &error) +
                      GK::integrate(integrand, upper, upper + 40.0, 15, tol, &error);
  return 1.0 - tail;
}

TargetLaw TargetLaw::standard_normal() { return TargetLaw(Kind::standard_normal); }
TargetLaw TargetLaw::half_normal() { return TargetLaw(Kind::half_normal); }
TargetLaw TargetLaw::exponential() { return TargetLaw(Kind::exponential); }
TargetLaw TargetLaw::geometric_half() { return TargetLaw(Kind::geometric_half); }
TargetLaw TargetLaw::product() { return TargetLaw(Kind::product); }

TargetLaw TargetLaw::tabulated(std::vector<double> x, std::vector<double> cdf) {
  if (x.size() != cdf.size() || x.size() < 2) throw std::invalid_argument("bad CDF table");
  if (!std::is_sorted(x.begin(), x.end()) || !std::is_sorted(cdf.begin(), cdf.end()) ||
      cdf.front() < 0.0 || cdf.back() > 1.0)
    throw std::invalid_argument("CDF table must be nondecreasing within [0, 1]");
  TargetLaw law(Kind::tabulated);
  law.x_ = std::move(x);
  law.f_ = std::move(cdf);
  return law;
}

std::string TargetLaw::name() const {
  switch (kind_) {
    case Kind::standard_normal: return "standard_normal";
    case Kind::half_normal: return "half_normal";
    case Kind::exponential: return "exponential";
    case Kind::geometric_half: return "geometric_half";
    case Kind::product: return "product";
    case Kind::tabulated: return "tabulated";
  }
  return "unknown";
}

double TargetLaw::cdf(double x) const {
  switch (kind_) {
    case Kind::standard_normal: return normal_cdf(x);
    case Kind::half_normal: return x <= 0.0 ? 0.0 : std::erf(x / std::numbers::sqrt2);
    case Kind::exponential: return x <= 0.0 ? 0.0 : -std::expm1(-x);
    case Kind::geometric_half: return x < 1.0 ? 0.0 : 1.0 - std::exp2(-std::floor(x));
    case Kind::product: return cdf_product_law(x);
    case Kind::tabulated: {
      if (x <= x_.front()) return x < x_.front() ? 0.0 : f_.front();
      if (x >= x_.back()) return 1.0;
      const auto it = std::upper_bound(x_.begin(), x_.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - x_.begin());
      const double w = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
      return f_[i - 1] + w * (f_[i] - f_[i - 1]);
    }
  }
  return 0.0;
}

double TargetLaw::pmf(std::int64_t j) const {
  if (kind_ != Kind::geometric_half) throw std::logic_error("pmf of a continuous law");
  return j < 1 ? 0.0 : std::exp2(-static_cast<double>(j));
}

double ks_statistic(const EmpiricalDistribution& samples, const TargetLaw& law) {
  const auto& v = samples.values();
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double f = law.cdf(v[i]);
    d = std::max({d, static_cast<double>(j) / n - f, f - static_cast<double>(i) / n});
    i = j;
  }
  return d;
}

TestReport ks_test(const EmpiricalDistribution& samples, const TargetLaw& law, double threshold,
                   std::uint64_t seed) {
  if (law.discrete()) throw std::invalid_argument("KS needs a continuous law; use chi-square");
  if (samples.size() < 100) throw std::invalid_argument("KS needs at least 100 samples");
  TestReport r;
  r.kind = "ks";
  r.subject = law.name();
  r.statistic = ks_statistic(samples, law);
  r.threshold = threshold;
  r.p_value = std::numeric_limits<double>::quiet_NaN();
  r.pass = r.statistic <= threshold;
  r.sample_size = samples.size();
  r.seed = seed;
  return r;
}

double chi_square_sf(double statistic, std::size_t dof) {
  if (dof == 0) throw std::invalid_argument("chi-square needs dof >= 1");
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, std::max(statistic, 0.0)));
}

namespace {

struct Bin {
  double observed = 0.0;
  double expected = 0.0;
};

void merge_small_bins(std::vector<Bin>& bins) {
  for (;;) {
    if (bins.size() < 2) return;
    auto it = std::find_if(bins.begin(), bins.end(), [](const Bin& b) { return b.expected < 5.0; });
    if (it == bins.end()) return;
    const std::size_t i = static_cast<std::size_t>(it - bins.begin());
    const std::size_t into = i + 1 < bins.size() ? i + 1 : i - 1;
    bins[into].observed += bins[i].observed;
    bins[into].expected += bins[i].expected;
    bins.erase(bins.begin() + static_cast<std::ptrdiff_t>(i));
  }
}

}  // namespace

TestReport chi_square_test(std::span<const std::int64_t> samples,
                           const std::function<double(std::int64_t)>& pmf, std::int64_t lo,
                           std::int64_t hi, double level, std::uint64_t seed) {
  if (hi < lo) throw std::invalid_argument("chi-square: empty bin range");
  const double n = static_cast<double>(samples.size());
  std::vector<Bin> bins(static_cast<std::size_t>(hi - lo + 1));
  double inner = 0.0;
  for (std::int64_t j = lo; j < hi; ++j) {
    const double p = pmf(j);
    bins[static_cast<std::size_t>(j - lo)].expected = n * p;
    inner += p;
  }
  bins.back().expected = n * std::max(0.0, 1.0 - inner);
  for (auto s : samples) {
    const std::int64_t c = std::clamp(s, lo, hi);
    bins[static_cast<std::size_t>(c - lo)].observed += 1.0;
  }
  merge_small_bins(bins);
  if (bins.size() < 2 || bins.front().expected < 5.0)
    throw std::invalid_argument("chi-square: degenerate binning");

  TestReport r;
  r.kind = "chi_square";
  r.subject = "pmf";
  for (const auto& b : bins) r.statistic += (b.observed - b.expected) * (b.observed - b.expected) / b.expected;
  r.dof = bins.size() - 1;
  r.p_value = chi_square_sf(r.statistic, r.dof);
  r.threshold = level;
  r.pass = r.p_value >= level;
  r.sample_size = samples.size();
  r.seed = seed;
  return r;
}

TestReport chi_square_two_sample(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                                 double level, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("two-sample chi-square: empty sample");
  std::map<std::int64_t, std::pair<double, double>> table;
  for (auto x : a) table[x].first += 1.0;
  for (auto x : b) table[x].second += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double fa = na / (na + nb);
  const double fb = nb / (na + nb);

  // Greedy left-to-right grouping until both expected counts reach 5; a short
  // remainder joins the last group.
  std::vector<std::pair<double, double>> cells;
  std::pair<double, double> acc{0.0, 0.0};
  for (const auto& [value, counts] : table) {
    acc.first += counts.first;
    acc.second += counts.second;
    const double pooled = acc.first + acc.second;
    if (pooled * fa >= 5.0 && pooled * fb >= 5.0) {
      cells.push_back(acc);
      acc = {0.0, 0.0};
    }
  }
  if (acc.first + acc.second > 0.0) {
    if (cells.empty()) throw std::invalid_argument("two-sample chi-square: degenerate binning");
    cells.back().first += acc.first;
    cells.back().second += acc.second;
  }
  if (cells.size() < 2) throw std::invalid_argument("two-sample chi-square: degenerate binning");

  TestReport r;
  r.kind = "chi_square_two_sample";
  r.subject = "homogeneity";
  for (const auto& [oa, ob] : cells) {
    const double pooled = oa + ob;
    const double ea = pooled * fa;
    const double eb = pooled * fb;
    r.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  r.dof = cells.size() - 1;
  r.p_value = chi_square_sf(r.statistic, r.dof);
  r.threshold = level;
  r.pass = r.p_value >= level;
  r.sample_size = a.size() + b.size();
  r.seed = seed;
  return r;
}

namespace {

struct LineFit {
  double slope, intercept, se;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit needs distinct abscissae");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = y[i] - intercept - slope * x[i];
    sse += e * e;
  }
  const double se = std::sqrt(sse / static_cast<double>(m - 2) / sxx);
  return {slope, intercept, se};
}

}  // namespace

RateFit fit_power_law(std::span<const double> n, std::span<const double> error) {
  if (n.size() != error.size() || n.size() < 3)
    throw std::invalid_argument("rate fit needs at least 3 paired points");
  std::vector<double> x(n.size()), y(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] <= 0.0 || error[i] <= 0.0)
      throw std::invalid_argument("rate fit needs positive grid values and errors");
    x[i] = std::log(n[i]);
    y[i] = std::log(error[i]);
  }
  const auto line = least_squares(x, y);
  boost::math::students_t dist(static_cast<double>(n.size() - 2));
  const double q = boost::math::quantile(dist, 0.975);
  RateFit fit;
  fit.exponent = line.slope;
  fit.intercept = line.intercept;
  fit.std_error = line.se;
  fit.ci_lo = line.slope - q * line.se;
  fit.ci_hi = line.slope + q * line.se;
  fit.points = n.size();
  return fit;
}

SlopeFit fit_log_survival(std::span<const double> x, std::span<const double> survival) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size() && i < survival.size(); ++i) {
    if (survival[i] > 0.0) {
      xs.push_back(x[i]);
      ys.push_back(std::log(survival[i]));
    }
  }
  if (xs.size() < 3) throw std::invalid_argument("too few positive survival values to fit");
  const auto line = least_squares(xs, ys);
  return {line.slope, line.intercept, line.se, xs.size()};
}

double wald_halfwidth_99(double p, std::uint64_t n) {
  if (n == 0) return 0.0;
  return 2.5758293035489004 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

void TailAudit::add(double u, double empirical, double bound, bool tight) {
  TailRow row;
  row.u = u;
  row.empirical = empirical;
  row.bound = bound;
  row.ci = wald_halfwidth_99(empirical, sample_size);
  row.tight = tight;
  row.violated = !tight && empirical - row.ci > bound;
  rows.push_back(row);
}

std::size_t TailAudit::violations() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const TailRow& r) { return r.violated; }));
}

LilDiagnostic lil_tracker(std::string name, std::span<const double> n,
                          std::span<const double> statistic, double constant, double lo,
                          double hi) {
  if (n.size() != statistic.size()) throw std::invalid_argument("series length mismatch");
  for (std::size_t i = 1; i < n.size(); ++i)
    if (!(n[i] > n[i - 1])) throw std::invalid_argument("series must be increasing in n");
  if (constant <= 0.0) throw std::invalid_argument("constant must be positive");
  LilDiagnostic d;
  d.name = std::move(name);
  d.constant = constant;
  d.lo = lo;
  d.hi = hi;
  d.points = n.size();
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (i == 0 || statistic[i] > d.running_sup) {
      d.running_sup = statistic[i];
      d.n_at_sup = n[i];
    }
  }
  d.ratio = d.running_sup / constant;
  d.inside = d.ratio >= lo && d.ratio <= hi;
  return d;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MeanEstimate estimate_mean(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("need at least 2 values");
  const double n = static_cast<double>(values.size());
  MeanEstimate e;
  e.mean = pairwise_sum(values) / n;
  std::vector<double> d2(values.size()), d4(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - e.mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = pairwise_sum(d2) / n;
  const double m4 = pairwise_sum(d4) / n;
  e.variance = m2 * n / (n - 1.0);
  e.std_error = std::sqrt(e.variance / n);
  e.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  return e;
}

TestReport fair_coin_test(std::span<const int> steps, double level) {
  double up = 0.0;
  for (int s : steps) up += (s > 0);
  const double n = static_cast<double>(steps.size());
  if (n < 10.0) throw std::invalid_argument("fair-coin test needs at least 10 steps");
  const double e = n / 2.0;
  TestReport r;
  r.kind = "chi_square";
  r.subject = "fair_coin";
  r.statistic = 2.0 * (up - e) * (up - e) / e;
  r.dof = 1;
  r.p_value = chi_square_sf(r.statistic, 1);
  r.threshold = level;
  r.pass = r.p_value >= level;
  r.sample_size = steps.size();
  return r;
}

TestReport lag_pair_test(std::span<const int> steps, double level) {
  double cell[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t pairs = steps.size() / 2;
  if (pairs < 20) throw std::invalid_argument("pair test needs at least 40 steps");
  for (std::size_t i = 0; i < pairs; ++i)
    cell[(steps[2 * i] > 0 ? 2 : 0) + (steps[2 * i + 1] > 0 ? 1 : 0)] += 1.0;
  const double e = static_cast<double>(pairs) / 4.0;
  TestReport r;
  r.kind = "chi_square";
  r.subject = "lag1_pairs";
  for (double c : cell) r.statistic += (c - e) * (c - e) / e;
  r.dof = 3;
  r.p_value = chi_square_sf(r.statistic, 3);
  r.threshold = level;
  r.pass = r.p_value >= level;
  r.sample_size = steps.size();
  return r;
}

}  // namespace loctime
