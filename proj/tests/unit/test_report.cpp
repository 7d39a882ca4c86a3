#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "loctime/report.hpp"

using namespace loctime;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv headers and rows") {
  std::ostringstream d;
  const std::vector<DistributionSeries> series{{"centered_limit", {0.5, -1.0}}};
  write_distributions_csv(d, series);
  CHECK(d.str() == "experiment,replication,value\ncentered_limit,0,0.5\ncentered_limit,1,-1\n");

  std::ostringstream a;
  TailAudit audit;
  audit.name = "rho_tail";
  audit.sample_size = 100;
  audit.add(4.0, 0.25, 0.5, true);
  write_audits_csv(a, std::vector<TailAudit>{audit});
  CHECK(first_line(a.str()) == "audit,u,empirical,bound,ci,violated,tight");
  CHECK(a.str().find("rho_tail,4,0.25,0.5,") != std::string::npos);

  std::ostringstream r;
  CouplingReport rep;
  rep.experiment = "couple-eta";
  rep.n_grid = {10, 100};
  rep.errors = {1.0, 2.0};
  write_rates_csv(r, std::vector<CouplingReport>{rep});
  CHECK(first_line(r.str()) == "experiment,n,error,exponent,ci_lo,ci_hi");
  CHECK(r.str().find("couple-eta,100,2,") != std::string::npos);
}

TEST_CASE("json conversion") {
  TestReport t;
  t.kind = "ks";
  t.statistic = 0.01;
  t.p_value = std::numeric_limits<double>::quiet_NaN();
  t.pass = true;
  const auto j = to_json(t);
  CHECK(j["kind"] == "ks");
  CHECK(j["p_value"].is_null());
  CHECK(j["pass"] == true);

  LilDiagnostic d;
  d.name = "lil";
  CHECK(to_json(d)["diagnostic"] == true);

  RateFit f;
  f.exponent = 0.25;
  CHECK(to_json(f)["exponent"] == 0.25);
}
