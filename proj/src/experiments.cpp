#include "loctime/experiments.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "loctime/audits.hpp"
#include "loctime/excursions.hpp"
#include "loctime/exit_time.hpp"
#include "loctime/gaussian.hpp"
#include "loctime/parallel.hpp"
#include "loctime/walk.hpp"

namespace loctime {

void ExperimentResult::check(std::string name, bool pass, double statistic, double threshold,
                             std::string detail, bool hard) {
  assertions.push_back({std::move(name), pass, hard, statistic, threshold, std::move(detail)});
}

bool ExperimentResult::hard_pass() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass || !a.hard; });
}

std::vector<const Assertion*> ExperimentResult::matching(const std::string& prefix) const {
  std::vector<const Assertion*> out;
  for (const auto& a : assertions)
    if (a.name.rfind(prefix, 0) == 0) out.push_back(&a);
  return out;
}

RngStream experiment_root(const std::string& experiment, std::uint64_t seed) {
  return RngStream(seed).child(experiment, 0);
}

EtaRateParams::EtaRateParams() {
  for (unsigned e = 10; e <= 22; ++e) n_grid.push_back(std::uint64_t{1} << e);
}

SheetRateParams::SheetRateParams() {
  for (unsigned e = 8; e <= 16; ++e) n_grid.push_back(std::uint64_t{1} << e);
}

namespace {

void record_stream(ExperimentResult& out, const RngStream& root, const std::string& component,
                   std::uint64_t reps) {
  out.streams.push_back({component, root.path_string() + "/" + component + ":{i}", reps});
}

std::string describe(const TestReport& r) {
  std::ostringstream s;
  s << r.kind << " n=" << r.sample_size;
  if (r.kind == "chi_square") s << " dof=" << r.dof << " p=" << r.p_value;
  return s.str();
}

void add_chi_square(ExperimentResult& out, TestReport report, const std::string& name) {
  report.subject = name;
  out.check(name, report.pass, report.p_value, report.threshold, describe(report));
  out.tests.push_back(std::move(report));
}

void add_ks(ExperimentResult& out, TestReport report, const std::string& name) {
  report.subject = name;
  out.check(name, report.pass, report.statistic, report.threshold, describe(report));
  out.tests.push_back(std::move(report));
}

std::vector<double> to_double(std::span<const std::int64_t> v) { return {v.begin(), v.end()}; }

}  // namespace

// ---------------------------------------------------------------- identities

void check_identities(ExperimentResult& out, const RngStream& root, const IdentityParams& p, int workers) {
  if (p.reps == 0) return;
  record_stream(out, root, "walk", p.reps);
  record_stream(out, root, "N", p.reps);
  struct Rep {
    IdentityReport report;
    std::uint64_t seed = 0;
  };
  const auto reps = replicate(p.reps, workers, [&](std::uint64_t i) {
    auto rng = root.child("walk", i);
    // Fixed-length walks; one without a completed upward excursion (about
    // one in 600 at 2^16 steps) is replaced by the next draw of the stream.
    StepSequence steps;
    std::size_t ups = 0;
    while (ups == 0) {
      steps = simulate_walk(p.walk_length, rng);
      ups = return_times(WalkPath(steps), steps.size()).rho_plus.size();
    }
    const WalkPath path(steps);
    auto pick = root.child("N", i);
    const std::uint64_t N = 1 + pick.next_u64() % std::min<std::uint64_t>(p.N_max, ups);
    return Rep{verify_identities(path, N, p.k_max), rng.engine_seed()};
  });
  std::uint64_t failures = 0;
  std::uint64_t checked = 0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i].report;
    failures += r.failures();
    checked += 3 * r.levels.size();
    if (i < 20 || !r.all_hold()) {
      out.identity_reports.push_back(r);
      out.identity_seeds.push_back(reps[i].seed);
    }
  }
  out.check("identities", failures == 0, static_cast<double>(failures), 0.0,
            std::to_string(checked) + " identity evaluations over " + std::to_string(p.reps) + " walks");
}

// ---------------------------------------------------------------------- laws

void check_offspring_law(ExperimentResult& out, const RngStream& root, const OffspringParams& p, int workers) {
  if (p.samples == 0) return;
  const std::uint64_t per_path = static_cast<std::uint64_t>(p.levels) * p.per_level;
  const std::uint64_t paths = (p.samples + per_path - 1) / per_path;
  record_stream(out, root, "offspring-path", paths);
  const auto pooled = replicate(paths, workers, [&](std::uint64_t i) {
    auto rng = root.child("offspring-path", i);
    const auto steps = censored_path_with_downcrossings(p.levels, p.per_level, rng);
    const WalkPath path(steps);
    std::vector<std::int64_t> t;
    t.reserve(per_path);
    for (std::int64_t k = 1; k <= p.levels; ++k)
      for (auto v : extract_T_from_path(path, k, p.per_level)) t.push_back(static_cast<std::int64_t>(v));
    return t;
  });
  std::vector<std::int64_t> all;
  all.reserve(paths * per_path);
  for (const auto& t : pooled) all.insert(all.end(), t.begin(), t.end());
  all.resize(std::min<std::size_t>(all.size(), p.samples));
  const auto pmf = [](std::int64_t j) { return std::ldexp(1.0, -static_cast<int>(j)); };
  add_chi_square(out, chi_square_test(all, pmf, 1, 12, p.level, root.master_seed()), "offspring_extracted");

  // The direct sampler against the same law.
  auto direct = root.child("offspring-direct", 0);
  record_stream(out, root, "offspring-direct", 1);
  std::vector<std::int64_t> d(p.samples);
  for (auto& v : d) v = static_cast<std::int64_t>(sample_T(direct));
  add_chi_square(out, chi_square_test(d, pmf, 1, 12, p.level, root.master_seed()), "offspring_direct");
}

void check_branching(ExperimentResult& out, const RngStream& root, const BranchingParams& p, int workers) {
  if (p.reps == 0) return;
  record_stream(out, root, "branching-walk", p.reps);
  record_stream(out, root, "branching-gw", p.reps);
  const auto walk = replicate(p.reps, workers, [&](std::uint64_t i) {
    auto rng = root.child("branching-walk", i);
    const auto steps = censored_path_to_rho_plus(p.N, LevelWindow(0, p.k), rng);
    const WalkPath path(steps);
    return static_cast<std::int64_t>(directional_counts(path, p.k, steps.size()).up);
  });
  const auto gw = replicate(p.reps, workers, [&](std::uint64_t i) {
    auto rng = root.child("branching-gw", i);
    return static_cast<std::int64_t>(simulate_gw(p.N, static_cast<std::uint64_t>(p.k), rng).z.back());
  });
  add_chi_square(out, chi_square_two_sample(walk, gw, p.level, root.master_seed()), "branching_two_sample");
  out.distributions.push_back({"branching_walk", to_double(walk)});
  out.distributions.push_back({"branching_gw", to_double(gw)});
}

void check_first_excursion(ExperimentResult& out, const RngStream& root, const FirstExcursionParams& p,
                           int workers) {
  if (p.reps == 0) return;
  for (const std::int64_t k : p.levels) {
    const std::string component = "first-excursion-" + std::to_string(k);
    record_stream(out, root, component, p.reps);
    struct Draw {
      std::int64_t plus = 0;    // xi(k, rho_1^+)
      std::int64_t first = 0;   // xi(k, rho_1)
    };
    const auto draws = replicate(p.reps, workers, [&](std::uint64_t i) {
      auto rng = root.child(component, i);
      CensoredWalk walk(LevelWindow(0, k), false);
      Draw d;
      bool first_up = false;
      bool first_done = false;
      for (;;) {
        const std::int64_t s = walk.step(rng);
        if (s == k) ++d.plus;
        if (s != 0) continue;
        const bool up = walk.previous() == 1;
        if (!first_done) {
          first_done = true;
          first_up = up;
        }
        if (up) break;
      }
      d.first = first_up ? d.plus : 0;
      return d;
    });
    std::vector<std::int64_t> plus(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) plus[i] = draws[i].plus;
    const FirstExcursionLaw law(k);
    add_chi_square(out,
                   chi_square_test(plus, [&](std::int64_t m) { return law.pmf(static_cast<std::uint64_t>(m)); }, 0,
                                   400, p.level, root.master_seed()),
                   "first_excursion_pmf_k" + std::to_string(k));

    // Tail cells of xi(k, rho_1) with enough expected hits.
    std::vector<std::uint64_t> hist;
    for (const auto& d : draws) {
      const auto v = static_cast<std::size_t>(d.first);
      if (v >= hist.size()) hist.resize(v + 1, 0);
      ++hist[v];
    }
    const double n = static_cast<double>(p.reps);
    double worst = 0.0;
    std::uint64_t cells = 0;
    std::uint64_t at_least = p.reps;
    for (std::uint64_t j = 1;; ++j) {
      at_least -= j - 1 < hist.size() ? hist[j - 1] : 0;
      const double exact = first_return_visit_tail(k, j);
      if (n * exact < p.min_expected) break;
      const double rel = std::abs(static_cast<double>(at_least) / n - exact) / exact;
      worst = std::max(worst, rel);
      ++cells;
    }
    out.check("first_return_tail_k" + std::to_string(k), cells > 0 && worst <= p.relative_tolerance, worst,
              p.relative_tolerance, std::to_string(cells) + " cells");
  }
}

// --------------------------------------------------------------------- sheet

namespace {

struct ProbeSet {
  std::string process;
  std::vector<std::int64_t> level;
  std::vector<double> time;
};

// All unordered pairs of probe points; values[r][i] is point i in replication r.
void covariance_probes(ExperimentResult& out, const ProbeSet& points,
                       const std::vector<std::vector<double>>& values, double se_multiple,
                       const std::function<double(std::int64_t, double, std::int64_t, double)>& exact,
                       const std::string& name, bool all_pairs) {
  double worst = 0.0;
  std::size_t failed = 0;
  std::size_t probes = 0;
  std::vector<double> prod(values.size());
  const std::size_t m = points.level.size();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = all_pairs ? a : 0; b < m; ++b) {
      if (!all_pairs && b != a) continue;
      for (std::size_t r = 0; r < values.size(); ++r) prod[r] = values[r][a] * values[r][b];
      const auto est = estimate_mean(prod);
      CovarianceProbe probe{points.process, points.level[a], points.level[b], points.time[a], points.time[b],
                            est.mean, est.std_error, exact(points.level[a], points.time[a], points.level[b],
                                                           points.time[b]),
                            false};
      const double z = std::abs(probe.empirical - probe.exact) / probe.std_error;
      probe.pass = z <= se_multiple;
      worst = std::max(worst, z);
      failed += probe.pass ? 0 : 1;
      ++probes;
      out.covariance.push_back(probe);
    }
  }
  out.check(name, failed == 0, worst, se_multiple,
            std::to_string(probes) + " probes, " + std::to_string(failed) + " beyond the SE band");
}

TimeGrid probe_grid(const std::vector<double>& times) {
  const double dt = *std::min_element(times.begin(), times.end());
  const double t_max = *std::max_element(times.begin(), times.end());
  for (double t : times)
    if (std::abs(t / dt - std::round(t / dt)) > 1e-9)
      throw std::invalid_argument("probe times must be multiples of the smallest one");
  return TimeGrid(t_max, dt);
}

}  // namespace

void check_g_moments(ExperimentResult& out, const RngStream& root, const MomentParams& p, int workers) {
  if (p.reps == 0) return;
  const TimeGrid grid = probe_grid(p.times);
  ProbeSet points{"G", {}, {}};
  std::vector<std::size_t> index;
  for (std::int64_t k = 1; k <= p.k_max; ++k)
    for (double t : p.times) {
      points.level.push_back(k);
      points.time.push_back(t);
      index.push_back(grid.index_at_or_below(t + 1e-12));
    }
  record_stream(out, root, "g-sheet", p.reps);
  const auto values = replicate(p.reps, workers, [&](std::uint64_t i) {
    auto rng = root.child("g-sheet", i);
    const auto sheet = build_sheet(p.k_max, grid, rng);
    auto star_rng = rng.child("wstar", 0);
    const auto wstar = sample_wiener(grid, star_rng);
    std::vector<double> v(points.level.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
      const auto k = points.level[j];
      v[j] = sheet.at(k, index[j]) + sheet.at(k - 1, index[j]) - wstar.values[index[j]];
    }
    return v;
  });
  covariance_probes(out, points, values, p.se_multiple, g_covariance, "g_variance", false);
  covariance_probes(out, points, values, p.se_multiple, g_covariance, "g_covariance", true);
}

void check_sheet_extras(ExperimentResult& out, const RngStream& root, const SheetExtraParams& p, int workers) {
  if (p.reps == 0) return;
  // Sheet covariance on the 4 x 4 grid of levels k, l = 1..4 at times k/4, l/4.
  {
    const std::vector<double> times{0.25, 0.5, 0.75, 1.0};
    const TimeGrid grid = probe_grid(times);
    ProbeSet points{"W", {1, 2, 3, 4}, times};
    record_stream(out, root, "w-sheet", p.reps);
    const auto values = replicate(p.reps, workers, [&](std::uint64_t i) {
      auto rng = root.child("w-sheet", i);
      const auto sheet = build_sheet(4, grid, rng);
      std::vector<double> v(4);
      for (std::size_t j = 0; j < 4; ++j) v[j] = sheet.at(points.level[j], grid.index_at_or_below(times[j] + 1e-12));
      return v;
    });
    const auto exact = [](std::int64_t k, double s, std::int64_t l, double t) {
      return static_cast<double>(std::min(k, l)) * std::min(s, t);
    };
    covariance_probes(out, points, values, p.se_multiple, exact, "sheet_covariance", true);
  }

  // Local time at zero by Levy's identity, then G at that independent time.
  const TimeGrid fine(1.0, p.dt);
  const TimeGrid coarse(4.0, 1e-3);
  record_stream(out, root, "eta0", p.reps);
  record_stream(out, root, "g-at-eta", p.reps);
  struct Draw {
    double eta = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
  };
  const auto draws = replicate(p.reps, workers, [&](std::uint64_t i) {
    auto rng = root.child("eta0", i);
    Draw d;
    d.eta = sample_eta0(fine, rng).values.back();
    auto grng = root.child("g-at-eta", i);
    const auto sheet = build_sheet(2, coarse, grng);
    auto star_rng = grng.child("wstar", 0);
    const auto wstar = sample_wiener(coarse, star_rng);
    const auto j = coarse.index_at_or_below(d.eta);
    d.g1 = (sheet.at(1, j) + sheet.at(0, j) - wstar.values[j]) / std::sqrt(2.0);
    d.g2 = (sheet.at(2, j) + sheet.at(1, j) - wstar.values[j]) / std::sqrt(6.0);
    return d;
  });
  std::vector<double> eta(draws.size()), g1(draws.size()), g2(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    eta[i] = draws[i].eta;
    g1[i] = draws[i].g1;
    g2[i] = draws[i].g2;
  }
  add_ks(out, ks_test(EmpiricalDistribution(eta), TargetLaw::half_normal(), p.ks_threshold, root.master_seed()),
         "eta0_half_normal");
  add_ks(out, ks_test(EmpiricalDistribution(g1), TargetLaw::product(), p.ks_threshold, root.master_seed()),
         "g1_at_eta_product_law");
  add_ks(out, ks_test(EmpiricalDistribution(g2), TargetLaw::product(), p.ks_threshold, root.master_seed()),
         "g2_at_eta_product_law");
}

// -------------------------------------------------------------------- limits

void check_limits(ExperimentResult& out, const RngStream& root, const LimitParams& p, int workers) {
  if (p.reps == 0) return;
  if (p.k < 1) throw std::invalid_argument("limits need k >= 1");
  record_stream(out, root, "limit-walk", p.reps);
  struct Counts {
    double c0 = 0.0;
    double c1 = 0.0;
    double ck = 0.0;
  };
  const auto counts = replicate(p.reps, workers, [&](std::uint64_t i) {
    auto rng = root.child("limit-walk", i);
    const auto prof = stream_local_time_profile(p.n, LevelWindow(0, std::max<std::int64_t>(p.k, 1)), rng);
    return Counts{static_cast<double>(prof.at(0)), static_cast<double>(prof.at(1)),
                  static_cast<double>(prof.at(p.k))};
  });
  const double scale1 = std::sqrt(2.0) * std::pow(static_cast<double>(p.n), 0.25);
  std::vector<double> a1, a2;
  a1.reserve(counts.size());
  for (const auto& c : counts) {
    a1.push_back((c.c1 - c.c0) / scale1);
    if (c.c0 > 0.0) a2.push_back((c.ck - c.c0) / std::sqrt((4.0 * static_cast<double>(p.k) - 2.0) * c.c0));
  }
  add_ks(out, ks_test(EmpiricalDistribution(a1), TargetLaw::product(), p.ks_threshold, root.master_seed()),
         "centered_limit_ks");
  add_ks(out, ks_test(EmpiricalDistribution(a2), TargetLaw::standard_normal(), p.ks_threshold, root.master_seed()),
         "self_normalized_limit_ks");
  out.distributions.push_back({"centered_limit", a1});
  out.distributions.push_back({"self_normalized_limit", a2});
}

// ---------------------------------------------------------------- skorokhod

void check_skorokhod(ExperimentResult& out, const RngStream& root, const SkorokhodParams& p, int workers) {
  if (p.exit_samples > 0) {
    const std::uint64_t chunk = 10000;
    const std::uint64_t chunks = (p.exit_samples + chunk - 1) / chunk;
    record_stream(out, root, "exit-time", chunks);
    const auto parts = replicate(chunks, workers, [&](std::uint64_t c) {
      auto rng = root.child("exit-time", c);
      const std::uint64_t m = std::min(chunk, p.exit_samples - c * chunk);
      std::vector<double> v(m);
      for (auto& x : v) x = sample_exit_time(rng);
      return v;
    });
    std::vector<double> tau;
    tau.reserve(p.exit_samples);
    for (const auto& v : parts) tau.insert(tau.end(), v.begin(), v.end());
    const auto est = estimate_mean(tau);
    const double z_mean = std::abs(est.mean - 1.0) / est.std_error;
    out.check("exit_time_mean", z_mean <= p.se_multiple, z_mean, p.se_multiple,
              "mean " + format_number(est.mean) + " se " + format_number(est.std_error));
    const double z_var = std::abs(est.variance - 2.0 / 3.0) / est.variance_se;
    out.check("exit_time_variance", z_var <= p.se_multiple, z_var, p.se_multiple,
              "variance " + format_number(est.variance) + " se " + format_number(est.variance_se));
    for (double s : {0.25, 0.5, 1.0}) {
      std::vector<double> e(tau.size());
      for (std::size_t i = 0; i < tau.size(); ++i) e[i] = std::exp(-s * tau[i]);
      const auto le = estimate_mean(e);
      const double z = std::abs(le.mean - exit_time_laplace(s)) / le.std_error;
      out.check("exit_time_laplace_s" + format_number(s), z <= p.se_multiple, z, p.se_multiple,
                "estimate " + format_number(le.mean) + " exact " + format_number(exit_time_laplace(s)));
    }
    std::vector<double> x, f;
    for (int i = 0; i <= 20000; ++i) {
      x.push_back(i * 5e-4);
      f.push_back(exit_time_cdf(x.back()));
    }
    add_ks(out, ks_test(EmpiricalDistribution(tau), TargetLaw::tabulated(x, f), p.ks_threshold, root.master_seed()),
           "exit_time_ks");
  }
  if (p.marks > 0) {
    std::vector<double> eta;
    std::uint64_t walks = 0;
    while (eta.size() < p.marks) {
      auto rng = root.child("marks-walk", walks++);
      const auto sample = embed_walk(p.walk_length, rng, false);
      eta.insert(eta.end(), sample.marks.eta.begin(), sample.marks.eta.end());
    }
    record_stream(out, root, "marks-walk", walks);
    eta.resize(p.marks);
    add_ks(out, ks_test(EmpiricalDistribution(eta), TargetLaw::exponential(), p.ks_threshold, root.master_seed()),
           "eta_marks_ks");
  }
}

// ---------------------------------------------------------------- rates

namespace {

CouplingReport median_report(const std::string& name, std::span<const std::uint64_t> grid,
                             const std::vector<std::vector<double>>& per_rep, std::uint64_t seed) {
  CouplingReport r;
  r.experiment = name;
  r.n_grid.assign(grid.begin(), grid.end());
  r.normalization = "median over replications";
  r.seed = seed;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> col(per_rep.size());
    for (std::size_t i = 0; i < per_rep.size(); ++i) col[i] = per_rep[i][g];
    r.errors.push_back(median(col));
  }
  const bool positive = std::all_of(r.errors.begin(), r.errors.end(), [](double e) { return e > 0.0; });
  if (positive && grid.size() >= 3) r.fit = fit_power_law(r.n_grid, r.errors);
  return r;
}

void rate_assertion(ExperimentResult& out, const CouplingReport& r, double threshold, bool hard) {
  const double hi = r.fit ? r.fit->ci_hi : std::nan("");
  out.check(r.experiment + "_exponent", r.fit && hi <= threshold, hi, threshold,
            r.fit ? "exponent " + format_number(r.fit->exponent) + " ci [" + format_number(r.fit->ci_lo) + ", " +
                        format_number(r.fit->ci_hi) + "]"
                  : "no fit",
            hard);
}

}  // namespace

void check_eta_rate(ExperimentResult& out, const RngStream& root, const EtaRateParams& p, int workers) {
  if (p.reps == 0) return;
  record_stream(out, root, "eta-rate", p.reps);
  const auto errors = replicate(p.reps, workers, [&](std::uint64_t i) {
    auto rng = root.child("eta-rate", i);
    return stream_eta_errors(p.n_grid, rng);
  });
  auto report = median_report("couple_eta", p.n_grid, errors, root.master_seed());
  rate_assertion(out, report, p.threshold, true);
  out.rates.push_back(std::move(report));
}

void check_sheet_rate(ExperimentResult& out, const RngStream& root, const SheetRateParams& p, int workers) {
  if (p.reps == 0) return;
  record_stream(out, root, "sheet-rate", p.reps);
  const auto samples = replicate(p.reps, workers, [&](std::uint64_t i) {
    auto rng = root.child("sheet-rate", i);
    return assemble_sheet_coupling(p.n_grid, p.K, rng);
  });
  std::vector<std::vector<double>> sup(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) sup[i] = samples[i].sup_error;
  auto report = median_report("couple_sheet", p.n_grid, sup, root.master_seed());
  rate_assertion(out, report, p.threshold, true);
  out.rates.push_back(std::move(report));

  // Per-level error surface (level x N), reported without an assertion.
  for (std::int64_t k = 1; k <= p.K; ++k) {
    const auto kk = static_cast<std::size_t>(k - 1);
    std::vector<std::vector<double>> level(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      level[i].resize(p.n_grid.size());
      for (std::size_t g = 0; g < p.n_grid.size(); ++g)
        level[i][g] = std::abs(samples[i].centered[kk][g] - samples[i].g[kk][g]);
    }
    out.rates.push_back(median_report("couple_sheet_level_k" + std::to_string(k), p.n_grid, level,
                                      root.master_seed()));
  }

  // Critical branching: E xi(k, rho_M^+, up) = M at every level.
  const double M = static_cast<double>(p.n_grid.back());
  for (std::int64_t k = 1; k <= p.K; ++k) {
    std::vector<double> z(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) z[i] = static_cast<double>(samples[i].up_at_top[k - 1]);
    const auto est = estimate_mean(z);
    const double dev = std::abs(est.mean - M) / est.std_error;
    out.check("sheet_center_k" + std::to_string(k), dev <= p.se_multiple, dev, p.se_multiple,
              "mean " + format_number(est.mean) + " target " + format_number(M));
  }
  // Var(xi(1, rho_N) - N) = 2N exactly.
  std::vector<double> c(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) c[i] = samples[i].centered[0].back();
  const auto est = estimate_mean(c);
  const double dev = std::abs(est.variance - 2.0 * M) / est.variance_se;
  out.check("sheet_variance_k1", dev <= p.se_multiple, dev, p.se_multiple,
            "variance " + format_number(est.variance) + " target " + format_number(2.0 * M));
}

// -------------------------------------------------------------------- splice

void check_splice(ExperimentResult& out, const RngStream& root, const SpliceParams& p) {
  if (p.n == 0) return;
  auto r1 = root.child("splice-walk", 1);
  auto r2 = root.child("splice-walk", 2);
  out.streams.push_back({"splice-walk", root.path_string() + "/splice-walk:{1,2}", 2});
  const auto w1 = simulate_walk(p.n, r1);
  const auto w2 = simulate_walk(p.n, r2);
  const WalkPath p1(w1), p2(w2);
  const auto rho1 = return_times(p1, p.n).rho;
  const auto rho2 = return_times(p2, p.n).rho;
  const std::uint64_t avail = std::min(rho1.size(), rho2.size());
  if (avail < 2) {
    out.check("splice_walk_returns", false, static_cast<double>(avail), 2.0, "walks too short to splice");
    return;
  }
  const BlockSchedule schedule(static_cast<unsigned>(std::bit_width(avail) - 1));
  const auto spliced = splice_walks(p1, p2, schedule);

  const std::uint64_t m = std::min(p.test_steps, spliced.size());
  std::vector<int> steps(m);
  for (std::uint64_t i = 0; i < m; ++i) steps[i] = spliced.step(i);
  out.check("splice_length", m == p.test_steps, static_cast<double>(m), static_cast<double>(p.test_steps),
            "spliced walk has " + std::to_string(spliced.size()) + " steps over " +
                std::to_string(schedule.total()) + " excursions");
  add_chi_square(out, fair_coin_test(steps, p.level), "splice_fair_coin");
  add_chi_square(out, lag_pair_test(steps, p.level), "splice_lag_pairs");

  // Splicing a walk with itself must return its own prefix.
  const auto self = splice_walks(p1, p1, schedule);
  StepSequence prefix;
  prefix.append_range(w1, 0, rho1[schedule.total() - 1]);
  out.check("splice_identity_walk", self == prefix, self == prefix ? 0.0 : 1.0, 0.0);

  auto rr = root.child("splice-identity", 0);
  record_stream(out, root, "splice-identity", 1);
  const BlockSchedule small(10);
  const auto records = sample_excursion_stream(small, 3, rr);
  const auto err = splice_errors(records, records, small);
  double worst = 0.0;
  for (std::size_t i = 0; i < err.n.size(); ++i) worst = std::max({worst, err.rho_gap[i], err.level_gap[i]});
  out.check("splice_identity_error", worst == 0.0, worst, 0.0);
}

void check_splice_rate(ExperimentResult& out, const RngStream& root, const SpliceRateParams& p, int workers) {
  if (p.reps == 0) return;
  const BlockSchedule schedule(p.max_level);
  record_stream(out, root, "splice-rate", p.reps);
  const auto errs = replicate(p.reps, workers, [&](std::uint64_t i) {
    auto rng = root.child("splice-rate", i);
    auto a = rng.child("walk", 1);
    auto b = rng.child("walk", 2);
    const auto w1 = sample_excursion_stream(schedule, p.K, a);
    const auto w2 = sample_excursion_stream(schedule, p.K, b);
    return splice_errors(w1, w2, schedule);
  });
  std::vector<std::uint64_t> grid;
  for (unsigned l = 1; l <= p.max_level; ++l) grid.push_back(schedule.boundary(l));
  std::vector<std::vector<double>> rho(errs.size()), level(errs.size());
  for (std::size_t i = 0; i < errs.size(); ++i) {
    rho[i] = errs[i].rho_gap;
    level[i] = errs[i].level_gap;
  }
  out.rates.push_back(median_report("splice_rho_gap", grid, rho, root.master_seed()));
  out.rates.push_back(median_report("splice_level_gap", grid, level, root.master_seed()));
}

// -------------------------------------------------------------------- audits

namespace {

template <class Sample>
auto sample_many(ExperimentResult& out, const RngStream& root, const std::string& component, std::uint64_t reps,
                 int workers, Sample&& sample) {
  record_stream(out, root, component, reps);
  return replicate(reps, workers, [&](std::uint64_t i) {
    auto rng = root.child(component, i);
    return sample(rng);
  });
}

void add_audit(ExperimentResult& out, TailAudit audit, const std::string& label) {
  audit.name = label;
  std::size_t tight = 0;
  for (const auto& r : audit.rows) tight += r.tight ? 1 : 0;
  out.check(label, audit.pass(), static_cast<double>(audit.violations()), 0.0,
            std::to_string(audit.rows.size()) + " rows, " + std::to_string(tight) + " tight");
  out.audits.push_back(std::move(audit));
}

std::vector<double> arange(double lo, double hi, double step) {
  std::vector<double> v;
  for (int i = 0;; ++i) {
    const double x = lo + step * i;
    if (x > hi + 1e-12) break;
    v.push_back(x);
  }
  return v;
}

}  // namespace

void check_tail_audits(ExperimentResult& out, const RngStream& root, const AuditParams& p, int workers) {
  if (p.reps == 0) return;
  const std::uint64_t n = p.reps;
  const std::uint64_t n_small = std::max<std::uint64_t>(n / 10, 100);

  // Return times. For N = 1 the rows 1 < u <= 2 are left out: rho_1 >= 2
  // always, so P(rho_1 >= u) = 1 there and the bound cannot hold.
  for (const std::uint64_t N : {1ULL, 10ULL, 100ULL}) {
    const auto rho = sample_many(out, root, "rho-" + std::to_string(N), n, workers,
                                 [N](RngStream& rng) { return sample_rho(N, rng); });
    const std::vector<double> u = N == 1 ? std::vector<double>{1, 4, 9, 25, 100}
                                         : std::vector<double>{1, 1.5, 2, 4, 9, 25, 100};
    add_audit(out, audit_rho_tail(rho, N, u), "rho_tail_N" + std::to_string(N));
  }

  for (const std::uint64_t N : {10ULL, 100ULL}) {
    const auto nu = sample_many(out, root, "binomial-" + std::to_string(N), n, workers, [N](RngStream& rng) {
      std::int64_t v = 0;
      for (std::uint64_t done = 0; done < N; done += 64) {
        const auto bits = static_cast<unsigned>(std::min<std::uint64_t>(64, N - done));
        const std::uint64_t w = rng.next_u64();
        v += std::popcount(bits == 64 ? w : w & ((std::uint64_t{1} << bits) - 1));
      }
      return v;
    });
    const double s = std::sqrt(static_cast<double>(N));
    std::vector<double> u{0.0};
    for (double c : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) u.push_back(std::round(c * s));
    add_audit(out, audit_binomial_tail(nu, N, u), "binomial_tail_N" + std::to_string(N));
  }

  {
    const std::uint64_t m = 100;
    const auto mx = sample_many(out, root, "u-sums", n, workers, [m](RngStream& rng) { return sample_u_sum_max(m, rng); });
    std::vector<double> z;
    for (double c : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) z.push_back(c * std::sqrt(static_cast<double>(m)));
    add_audit(out, audit_u_sum_max(mx, m, z), "u_sum_max_n100");
  }

  for (const auto& [N, K] : {std::pair<std::uint64_t, std::int64_t>{100, 5}, {50, 2}}) {
    const auto mx = sample_many(out, root, "level-max-" + std::to_string(N), n_small, workers,
                                [N = N, K = K](RngStream& rng) { return sample_level_max(N, K, rng); });
    add_audit(out, audit_level_max(mx, N, K), "level_max_N" + std::to_string(N) + "_K" + std::to_string(K));
  }

  {
    const std::uint64_t m = 100;
    const auto mx = sample_many(out, root, "exp-sums", n, workers, [m](RngStream& rng) {
      double s = 0.0, best = 0.0;
      for (std::uint64_t i = 0; i < m; ++i) {
        s += rng.exponential() - 1.0;
        best = std::max(best, std::abs(s));
      }
      return best / std::sqrt(static_cast<double>(m));
    });
    add_audit(out, audit_exp_partial_sums(mx, m, std::vector<double>{0.5, 1, 2, 3, 4, 5}), "exp_partial_sums_n100");
  }

  {
    const std::uint64_t m = 1000;
    const auto mx = sample_many(out, root, "exp-max", n, workers, [m](RngStream& rng) {
      double best = 0.0;
      for (std::uint64_t i = 0; i < m; ++i) best = std::max(best, rng.exponential());
      return best;
    });
    add_audit(out, audit_exp_max(mx, m, std::vector<double>{1.0, 1.5, 2.0, 3.0}), "exp_max_n1000");
  }

  // Sup inequalities for G, checked by decay slope.
  {
    const std::int64_t K = 2;
    const TimeGrid grid(1.0, 1e-3);
    struct Sup {
      double fixed = 0.0;
      double local = 0.0;
    };
    const auto sups = sample_many(out, root, "g-sup", n_small, workers, [&](RngStream& rng) {
      const auto sheet = build_sheet(K, grid, rng);
      auto star_rng = rng.child("wstar", 0);
      const auto wstar = sample_wiener(grid, star_rng);
      Sup s;
      s.fixed = sup_abs_g(sheet, wstar, K);
      // sup over s <= eta(0, 1) by Brownian scaling, eta(0, 1) ~ |N|.
      s.local = std::sqrt(std::abs(rng.child("eta", 0).normal())) * s.fixed;
      return s;
    });
    std::vector<double> fixed(sups.size()), local(sups.size());
    for (std::size_t i = 0; i < sups.size(); ++i) {
      fixed[i] = sups[i].fixed;
      local[i] = sups[i].local;
    }
    const auto u = arange(0.5, 14.0, 0.5);
    for (const auto& [variant, samples, label] :
         {std::tuple{SupVariant::fixed_time, &fixed, std::string("sup_g_fixed_time")},
          std::tuple{SupVariant::local_time, &local, std::string("sup_g_local_time")}}) {
      const auto a = audit_sup_inequality(*samples, p.alpha, K, 1.0, u, variant);
      out.check(label + "_slope", a.slope_pass, a.fit.slope, a.bound_slope,
                "fitted slope " + format_number(a.fit.slope) + " se " + format_number(a.fit.std_error));
      out.audits.push_back(a.audit);
    }
  }

  // Increment bounds: random-walk local time at zero and Wiener increments.
  {
    const std::uint64_t t = 10000;
    const std::uint64_t a = 100;
    const auto mx = sample_many(out, root, "zero-increments", n_small, workers,
                                [&](RngStream& rng) { return sample_zero_increment_max(t, a, rng); });
    const auto inc = audit_increment_bounds(mx, arange(0.25, 8.0, 0.25), p.c2);
    out.check("zero_increment_slope", inc.slope_pass, inc.fit.slope, -p.c2,
              "fitted slope " + format_number(inc.fit.slope) + " se " + format_number(inc.fit.std_error));
    auto audit = inc.audit;
    audit.name = "zero_increment_bound";
    out.audits.push_back(std::move(audit));
  }
  {
    const TimeGrid grid(1.0, 1e-4);
    const auto mx = sample_many(out, root, "wiener-increments", n_small, workers, [&](RngStream& rng) {
      return wiener_increment_max(sample_wiener(grid, rng), 0.01);
    });
    const auto inc = audit_increment_bounds(mx, arange(0.25, 8.0, 0.25), p.c2);
    out.check("wiener_increment_slope", inc.slope_pass, inc.fit.slope, -p.c2,
              "fitted slope " + format_number(inc.fit.slope) + " se " + format_number(inc.fit.std_error));
    auto audit = inc.audit;
    audit.name = "wiener_increment_bound";
    out.audits.push_back(std::move(audit));
  }
}

// ----------------------------------------------------------------------- lil

namespace {

// Scans one path and keeps, per twentieth of a decade in n, the largest value
// of each statistic. Statistics only rise when the walk is at 0 or 1, so
// they are evaluated there.
class LilScan {
 public:
  static constexpr std::int64_t top = 16;

  struct Bucket {
    double n = 0.0;
    double value = -1e300;
  };

  void feed(std::uint64_t word, unsigned nbits) {
    const auto nb = static_cast<std::int64_t>(nbits);
    if (pos_ < -nb || pos_ > top + nb) {
      const std::uint64_t mask = nbits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << nbits) - 1);
      pos_ += 2 * static_cast<std::int64_t>(std::popcount(word & mask)) - nb;
      t_ += nbits;
      return;
    }
    for (unsigned b = 0; b < nbits; ++b, word >>= 1) {
      pos_ += (word & 1U) ? 1 : -1;
      ++t_;
      if (pos_ < 0 || pos_ > top) continue;
      ++xi_[static_cast<std::size_t>(pos_)];
      if (pos_ <= 1) at_zero_or_one();
      if (pos_ == 0) at_return();
    }
  }

  std::vector<Bucket> c1, c2, strong;

 private:
  static void put(std::vector<Bucket>& series, double n, double value) {
    const auto b = static_cast<std::size_t>(std::floor(20.0 * std::log10(n)));
    if (series.size() <= b) series.resize(b + 1);
    if (value > series[b].value) series[b] = {n, value};
  }

  void at_zero_or_one() {
    const double n = static_cast<double>(t_);
    if (n < 100.0 || xi_[0] == 0) return;
    const double ll = std::log(std::log(n));
    const double diff = static_cast<double>(xi_[1]) - static_cast<double>(xi_[0]);
    put(c2, n, diff / (std::sqrt(2.0) * std::sqrt(static_cast<double>(xi_[0]) * ll)));
    put(c1, n, diff / (std::sqrt(2.0) * std::pow(n, 0.25) * std::pow(ll, 0.75)));
  }

  void at_return() {
    ++returns_;
    const double N = static_cast<double>(returns_);
    if (returns_ < 16) return;
    const auto K = std::min<std::int64_t>(top, static_cast<std::int64_t>(std::floor(std::pow(N, 0.2))));
    double sup = 0.0;
    for (std::int64_t k = 1; k <= K; ++k) sup = std::max(sup, std::abs(static_cast<double>(xi_[static_cast<std::size_t>(k)]) - N));
    put(strong, N, sup / (std::sqrt(4.0 * static_cast<double>(K) - 2.0) * std::sqrt(N * std::log(std::log(N)))));
  }

  std::int64_t pos_ = 0;
  std::uint64_t t_ = 0;
  std::uint64_t returns_ = 0;
  std::array<std::uint64_t, top + 1> xi_{};
};

LilDiagnostic track(const std::string& name, const std::vector<LilScan::Bucket>& series, double constant,
                    const LilParams& p) {
  std::vector<double> n, v;
  for (const auto& b : series)
    if (b.n > 0.0) {
      n.push_back(b.n);
      v.push_back(b.value);
    }
  return lil_tracker(name, n, v, constant, p.lo, p.hi);
}

}  // namespace

void check_lil(ExperimentResult& out, const RngStream& root, const LilParams& p) {
  if (p.n == 0) return;
  auto rng = root.child("lil-walk", 0);
  record_stream(out, root, "lil-walk", 1);
  LilScan scan;
  StepSource source(rng);
  source.advance(p.n, scan);
  const double c1_const = 2.0 / 3.0 * std::pow(6.0, 0.25);
  for (const auto& d : {track("local_time_standardized", scan.c2, std::sqrt(2.0), p),
                        track("time_standardized", scan.c1, c1_const, p),
                        track("returns_sup_levels", scan.strong, std::sqrt(2.0), p)}) {
    out.check("lil_" + d.name, d.inside, d.ratio, p.hi,
              "running sup / constant " + format_number(d.ratio) + " at n " + format_number(d.n_at_sup), p.hard);
    out.lil.push_back(d);
  }
}

// -------------------------------------------------------------------- runner

ExperimentResult run_experiment(const ExperimentConfig& c) {
  ExperimentResult out;
  out.experiment = c.experiment;
  out.seed = c.seed;
  if (c.has("reps") && c.get_u64("reps", 1) == 0) return out;
  const RngStream root = experiment_root(c.experiment, c.seed);
  const int w = c.workers;
  const auto& id = c.experiment;

  if (id == "identities") {
    IdentityParams p;
    p.reps = c.get_u64("reps", p.reps);
    p.N_max = c.get_u64("N", p.N_max);
    p.k_max = c.get_i64("k_max", p.k_max);
    p.walk_length = c.get_u64("n", p.walk_length);
    check_identities(out, root, p, w);
  } else if (id == "laws") {
    OffspringParams o;
    o.samples = c.get_u64("samples", o.samples);
    o.levels = c.get_i64("k_max", o.levels);
    o.level = c.get_double("level", o.level);
    check_offspring_law(out, root, o, w);
    BranchingParams b;
    b.reps = c.get_u64("reps", b.reps);
    b.N = c.get_u64("N", b.N);
    b.k = c.get_i64("K", b.k);
    b.level = o.level;
    check_branching(out, root, b, w);
    FirstExcursionParams f;
    f.reps = o.samples;
    f.levels = c.get_i64_list("k", f.levels);
    f.level = o.level;
    check_first_excursion(out, root, f, w);
  } else if (id == "limits") {
    LimitParams p;
    p.n = c.get_u64("n", p.n);
    p.reps = c.get_u64("reps", p.reps);
    p.k = c.get_i64_list("k", {p.k}).front();
    p.ks_threshold = c.get_double("ks_threshold", p.ks_threshold);
    check_limits(out, root, p, w);
  } else if (id == "sheet") {
    MomentParams m;
    m.reps = c.get_u64("reps", m.reps);
    m.k_max = c.get_i64("k_max", m.k_max);
    const double t = c.get_double("t", 1.0);
    m.times = {t / 4.0, t / 2.0, t};
    check_g_moments(out, root, m, w);
    SheetExtraParams e;
    e.reps = c.get_u64("samples", e.reps);
    e.dt = c.get_double("dt", e.dt);
    e.ks_threshold = c.get_double("ks_threshold", e.ks_threshold);
    check_sheet_extras(out, root, e, w);
  } else if (id == "couple-eta") {
    SkorokhodParams s;
    s.exit_samples = c.get_u64("samples", s.exit_samples);
    s.marks = s.exit_samples / 10;
    s.ks_threshold = c.get_double("ks_threshold", s.ks_threshold);
    check_skorokhod(out, root, s, w);
    EtaRateParams r;
    r.n_grid = c.get_u64_list("n_grid", r.n_grid);
    r.reps = c.get_u64("reps", r.reps);
    r.threshold = c.get_double("rate_threshold", r.threshold);
    check_eta_rate(out, root, r, w);
  } else if (id == "couple-sheet") {
    SheetRateParams r;
    r.n_grid = c.get_u64_list("n_grid", r.n_grid);
    r.K = c.get_i64("K", r.K);
    r.reps = c.get_u64("reps", r.reps);
    r.threshold = c.get_double("rate_threshold", r.threshold);
    check_sheet_rate(out, root, r, w);
  } else if (id == "splice") {
    SpliceParams s;
    s.n = c.get_u64("n", s.n);
    s.test_steps = c.get_u64("samples", s.test_steps);
    s.level = c.get_double("level", s.level);
    check_splice(out, root, s);
    SpliceRateParams r;
    r.max_level = static_cast<unsigned>(c.get_u64("N", r.max_level));
    r.K = c.get_i64("K", r.K);
    r.reps = c.get_u64("reps", r.reps);
    check_splice_rate(out, root, r, w);
  } else if (id == "audits") {
    AuditParams a;
    a.reps = c.get_u64("reps", a.reps);
    a.alpha = c.get_double("alpha", a.alpha);
    if (!(a.alpha > 1.0)) throw ConfigError("key 'alpha' must exceed 1");
    check_tail_audits(out, root, a, w);
  } else if (id == "lil") {
    LilParams l;
    l.n = c.get_u64("n", l.n);
    l.hard = c.get_bool("hard_diagnostics", l.hard);
    check_lil(out, root, l);
  } else {
    throw ConfigError("unknown experiment '" + id + "'");
  }
  return out;
}

ordered_json summary_json(const ExperimentResult& r) {
  ordered_json j;
  j["experiment"] = r.experiment;
  j["seed"] = r.seed;
  j["hard_pass"] = r.hard_pass();
  auto list = [](const auto& items) {
    auto a = ordered_json::array();
    for (const auto& x : items) a.push_back(to_json(x));
    return a;
  };
  auto assertions = ordered_json::array();
  for (const auto& a : r.assertions) {
    ordered_json x;
    x["name"] = a.name;
    x["pass"] = a.pass;
    x["hard"] = a.hard;
    x["statistic"] = std::isfinite(a.statistic) ? ordered_json(a.statistic) : ordered_json(nullptr);
    x["threshold"] = a.threshold;
    x["detail"] = a.detail;
    assertions.push_back(std::move(x));
  }
  j["assertions"] = std::move(assertions);
  j["tests"] = list(r.tests);
  j["audits"] = list(r.audits);
  j["rates"] = list(r.rates);
  j["lil"] = list(r.lil);
  return j;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

}  // namespace

void write_outputs(const ExperimentResult& r, const ExperimentConfig& config, const std::string& dir,
                   const std::string& started_utc, const std::string& finished_utc) {
  const std::filesystem::path base(dir);
  std::error_code ec;
  std::filesystem::create_directories(base, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());

  {
    ordered_json m;
    m["artifact_version"] = artifact_version;
    m["experiment"] = r.experiment;
    ordered_json snap;
    for (const auto& [k, v] : config.snapshot()) snap[k] = v;
    m["config"] = std::move(snap);
    m["started_utc"] = started_utc;
    m["finished_utc"] = finished_utc;
    auto streams = ordered_json::array();
    for (const auto& s : r.streams) {
      ordered_json x;
      x["component"] = s.component;
      x["path"] = s.path;
      x["replications"] = s.replications;
      streams.push_back(std::move(x));
    }
    m["streams"] = std::move(streams);
    open_out(base / "manifest.json") << m.dump(2) << '\n';
  }
  {
    auto f = open_out(base / "streams.csv");
    f << "component,path,replications\n";
    for (const auto& s : r.streams) f << s.component << ',' << s.path << ',' << s.replications << '\n';
  }
  open_out(base / "summary.json") << summary_json(r).dump(2) << '\n';
  {
    auto f = open_out(base / "audits.csv");
    write_audits_csv(f, r.audits);
  }
  {
    auto f = open_out(base / "rates.csv");
    write_rates_csv(f, r.rates);
  }
  {
    auto f = open_out(base / "distributions.csv");
    write_distributions_csv(f, r.distributions);
  }
  {
    auto f = open_out(base / "covariance.csv");
    f << "process,k,l,s,t,empirical,std_error,exact,pass\n";
    for (const auto& c : r.covariance)
      f << c.process << ',' << c.k << ',' << c.l << ',' << format_number(c.s) << ',' << format_number(c.t) << ','
        << format_number(c.empirical) << ',' << format_number(c.std_error) << ',' << format_number(c.exact) << ','
        << (c.pass ? 1 : 0) << '\n';
  }
  if (!r.identity_reports.empty()) {
    // One flat row list across all exported walks.
    auto rows = ordered_json::array();
    for (std::size_t i = 0; i < r.identity_reports.size(); ++i) {
      std::ostringstream one;
      write_identities_json(one, r.identity_seeds[i], std::span(&r.identity_reports[i], 1));
      for (auto& row : ordered_json::parse(one.str())) rows.push_back(std::move(row));
    }
    open_out(base / "identities.json") << rows.dump(2) << '\n';
  }
  for (const auto& rate : r.rates) {
    auto f = open_out(base / ("coupling_" + rate.experiment + ".json"));
    write_coupling_json(f, rate);
  }
}

}  // namespace loctime
