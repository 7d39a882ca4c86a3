#include "loctime/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace loctime {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

// JSON has no NaN; missing values become null.
ordered_json number(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

}  // namespace

void write_distributions_csv(std::ostream& out, std::span<const DistributionSeries> series) {
  out << "experiment,replication,value\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.values.size(); ++i)
      out << s.experiment << ',' << i << ',' << format_number(s.values[i]) << '\n';
}

void write_audits_csv(std::ostream& out, std::span<const TailAudit> audits) {
  out << "audit,u,empirical,bound,ci,violated,tight\n";
  for (const auto& a : audits)
    for (const auto& r : a.rows)
      out << a.name << ',' << format_number(r.u) << ',' << format_number(r.empirical) << ','
          << format_number(r.bound) << ',' << format_number(r.ci) << ',' << (r.violated ? 1 : 0)
          << ',' << (r.tight ? 1 : 0) << '\n';
}

void write_rates_csv(std::ostream& out, std::span<const CouplingReport> rates) {
  out << "experiment,n,error,exponent,ci_lo,ci_hi\n";
  for (const auto& r : rates) {
    const double nan = std::nan("");
    const double e = r.fit ? r.fit->exponent : nan;
    const double lo = r.fit ? r.fit->ci_lo : nan;
    const double hi = r.fit ? r.fit->ci_hi : nan;
    for (std::size_t i = 0; i < r.n_grid.size(); ++i)
      out << r.experiment << ',' << format_number(r.n_grid[i]) << ',' << format_number(r.errors[i])
          << ',' << format_number(e) << ',' << format_number(lo) << ',' << format_number(hi)
          << '\n';
  }
}

ordered_json to_json(const TestReport& r) {
  ordered_json j;
  j["kind"] = r.kind;
  j["subject"] = r.subject;
  j["statistic"] = number(r.statistic);
  j["threshold"] = number(r.threshold);
  j["p_value"] = number(r.p_value);
  j["dof"] = r.dof;
  j["pass"] = r.pass;
  j["sample_size"] = r.sample_size;
  j["seed"] = r.seed;
  return j;
}

ordered_json to_json(const TailAudit& a) {
  ordered_json j;
  j["name"] = a.name;
  j["sample_size"] = a.sample_size;
  j["violations"] = a.violations();
  j["pass"] = a.pass();
  auto rows = ordered_json::array();
  for (const auto& r : a.rows) {
    ordered_json row;
    row["u"] = number(r.u);
    row["empirical"] = number(r.empirical);
    row["bound"] = number(r.bound);
    row["ci"] = number(r.ci);
    row["violated"] = r.violated;
    row["tight"] = r.tight;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

ordered_json to_json(const RateFit& f) {
  ordered_json j;
  j["exponent"] = number(f.exponent);
  j["intercept"] = number(f.intercept);
  j["std_error"] = number(f.std_error);
  j["ci_lo"] = number(f.ci_lo);
  j["ci_hi"] = number(f.ci_hi);
  j["points"] = f.points;
  return j;
}

ordered_json to_json(const CouplingReport& r) {
  ordered_json j;
  j["experiment"] = r.experiment;
  j["n_grid"] = r.n_grid;
  auto errors = ordered_json::array();
  for (double e : r.errors) errors.push_back(number(e));
  j["errors"] = std::move(errors);
  j["normalization"] = r.normalization;
  j["fit"] = r.fit ? to_json(*r.fit) : ordered_json(nullptr);
  j["seed"] = r.seed;
  return j;
}

ordered_json to_json(const LilDiagnostic& d) {
  ordered_json j;
  j["name"] = d.name;
  j["constant"] = number(d.constant);
  j["lo"] = number(d.lo);
  j["hi"] = number(d.hi);
  j["running_sup"] = number(d.running_sup);
  j["n_at_sup"] = number(d.n_at_sup);
  j["ratio"] = number(d.ratio);
  j["inside"] = d.inside;
  j["points"] = d.points;
  j["diagnostic"] = true;
  return j;
}

}  // namespace loctime
