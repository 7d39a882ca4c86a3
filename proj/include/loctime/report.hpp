#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "loctime/coupling.hpp"
#include "loctime/stats.hpp"

namespace loctime {

using ordered_json = nlohmann::ordered_json;

/// Shortest round-trip decimal form ("%.17g"); "nan" / "inf" / "-inf" for
/// non-finite values.
std::string format_number(double x);

/// One named sample, one CSV row per replication.
struct DistributionSeries {
  std::string experiment;
  std::vector<double> values;
};

/// experiment,replication,value
void write_distributions_csv(std::ostream& out, std::span<const DistributionSeries> series);
/// audit,u,empirical,bound,ci,violated,tight
void write_audits_csv(std::ostream& out, std::span<const TailAudit> audits);
/// experiment,n,error,exponent,ci_lo,ci_hi
void write_rates_csv(std::ostream& out, std::span<const CouplingReport> rates);

ordered_json to_json(const TestReport& report);
ordered_json to_json(const TailAudit& audit);
ordered_json to_json(const CouplingReport& report);
ordered_json to_json(const LilDiagnostic& diagnostic);
ordered_json to_json(const RateFit& fit);

}  // namespace loctime
