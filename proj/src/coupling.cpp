#include "loctime/coupling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "loctime/brownian.hpp"
#include "loctime/exit_time.hpp"

namespace loctime {

EmbeddedWalkSample embed_walk(std::uint64_t n, RngStream& rng, bool with_times) {
  if (n < 1) throw std::invalid_argument("embedded walk needs n >= 1");
  EmbeddedWalkSample out;
  auto signs = rng.child("signs", 0);
  out.walk.steps = simulate_walk(n, signs);
  if (with_times) {
    auto times = rng.child("exit-times", 0);
    out.walk.tau.reserve(n);
    double t = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      t += sample_exit_time(times);
      out.walk.tau.push_back(t);
    }
  }
  const WalkPath path(out.walk.steps);
  const std::uint64_t returns = local_time(path, 0, n);
  auto marks = rng.child("marks", 0);
  out.marks.eta.reserve(returns);
  for (std::uint64_t i = 0; i < returns; ++i) out.marks.eta.push_back(marks.exponential());
  return out;
}

namespace {

std::vector<double> eta_errors(std::span<const std::uint64_t> zero_counts, std::span<const double> eta) {
  std::vector<double> prefix(eta.size() + 1, 0.0);
  for (std::size_t i = 0; i < eta.size(); ++i) prefix[i + 1] = prefix[i] + eta[i];
  std::vector<double> out;
  out.reserve(zero_counts.size());
  for (auto z : zero_counts) {
    if (z > eta.size()) throw std::invalid_argument("fewer marks than returns");
    out.push_back(std::abs(static_cast<double>(z) - prefix[z]));
  }
  return out;
}

void check_grid(std::span<const std::uint64_t> grid) {
  if (grid.empty()) throw std::invalid_argument("empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1]) throw std::invalid_argument("grid must be increasing");
}

std::optional<RateFit> try_fit(std::span<const double> n, std::span<const double> e) {
  if (n.size() < 3) return std::nullopt;
  for (double v : e)
    if (!(v > 0.0)) return std::nullopt;
  return fit_power_law(n, e);
}

}  // namespace

CouplingReport coupling_error_eta(const EmbeddedWalk& walk, const EtaMarks& marks,
                                  std::span<const std::uint64_t> n_grid) {
  check_grid(n_grid);
  const WalkPath path(walk.steps);
  path.check_time(n_grid.back());
  std::vector<std::uint64_t> zeros;
  zeros.reserve(n_grid.size());
  std::uint64_t count = 0;
  std::size_t g = 0;
  if (n_grid.front() == 0) zeros.push_back(0), ++g;
  path.scan(n_grid.back(), [&](std::uint64_t i, std::int64_t s) {
    count += (s == 0);
    if (g < n_grid.size() && i == n_grid[g]) {
      zeros.push_back(count);
      ++g;
    }
  });
  CouplingReport r;
  r.experiment = "couple-eta";
  r.n_grid.assign(n_grid.begin(), n_grid.end());
  r.errors = eta_errors(zeros, marks.eta);
  r.fit = try_fit(r.n_grid, r.errors);
  return r;
}

std::vector<double> stream_eta_errors(std::span<const std::uint64_t> n_grid, RngStream& rng) {
  check_grid(n_grid);
  auto signs = rng.child("signs", 0);
  StepSource source(signs);
  LocalTimeAccumulator acc(LevelWindow(0, 0));
  std::vector<std::uint64_t> zeros;
  zeros.reserve(n_grid.size());
  for (auto n : n_grid) {
    source.advance(n - acc.time(), acc);
    zeros.push_back(acc.zero_count());
  }
  auto marks = rng.child("marks", 0);
  std::vector<double> eta(zeros.back());
  for (auto& e : eta) e = marks.exponential();
  return eta_errors(zeros, eta);
}

void write_coupling_json(std::ostream& out, const CouplingReport& report) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["n_grid"] = report.n_grid;
  j["errors"] = report.errors;
  j["normalization"] = report.normalization;
  if (report.fit) {
    j["exponent"] = report.fit->exponent;
    j["ci_lo"] = report.fit->ci_lo;
    j["ci_hi"] = report.fit->ci_hi;
  } else {
    j["exponent"] = nullptr;
    j["ci_lo"] = nullptr;
    j["ci_hi"] = nullptr;
  }
  j["seed"] = report.seed;
  out << j.dump(2) << '\n';
}

std::vector<LevelEmbedding> embed_U_sums(std::int64_t k_max, std::uint64_t j_max, RngStream& rng) {
  if (k_max < 1 || j_max < 1) throw std::invalid_argument("embedding needs k_max, j_max >= 1");
  std::vector<double> obs(j_max);
  for (std::uint64_t j = 0; j < j_max; ++j) obs[j] = 2.0 * static_cast<double>(j + 1);
  std::vector<LevelEmbedding> out;
  out.reserve(static_cast<std::size_t>(k_max));
  for (std::int64_t k = 1; k <= k_max; ++k) {
    auto level_rng = rng.child("level", static_cast<std::uint64_t>(k));
    EmbeddedSum sum(obs);
    LevelEmbedding e;
    e.sums.level = k;
    e.sums.values.reserve(j_max);
    e.sigma.reserve(j_max);
    for (std::uint64_t j = 0; j < j_max; ++j) {
      sum.step(level_rng);
      e.sums.values.push_back(sum.value());
      e.sigma.push_back(sum.sigma());
    }
    sum.finish(level_rng);
    e.w_at_2j = sum.motion().observed();
    out.push_back(std::move(e));
  }
  return out;
}

SheetCouplingSample assemble_sheet_coupling(std::span<const std::uint64_t> n_grid, std::int64_t K,
                                            RngStream& rng) {
  check_grid(n_grid);
  if (K < 1) throw std::out_of_range("K must be >= 1");
  const double cube = static_cast<double>(K) * static_cast<double>(K) * static_cast<double>(K);
  if (cube > static_cast<double>(n_grid.front())) throw std::out_of_range("K exceeds N^{1/3}");

  const std::vector<double> obs(n_grid.begin(), n_grid.end());
  const auto levels = static_cast<std::size_t>(K);
  std::vector<EmbeddedSum> sums(levels, EmbeddedSum(obs));
  std::vector<RngStream> level_rng;
  level_rng.reserve(levels);
  for (std::size_t k = 0; k < levels; ++k) level_rng.push_back(rng.child("level", k + 1));
  std::vector<std::vector<std::int64_t>> U(levels);

  auto U_at = [&](std::size_t k, std::uint64_t j) -> std::int64_t {
    while (sums[k].count() < j) {
      sums[k].step(level_rng[k]);
      U[k].push_back(sums[k].value());
    }
    return j == 0 ? 0 : U[k][j - 1];
  };
  // xi_k(M) = xi_{k-1}(M) + U^(k)(xi_{k-1}(M)), xi_0(M) = M.
  auto chain = [&](std::uint64_t M) {
    std::vector<std::uint64_t> xi(levels + 1);
    xi[0] = M;
    for (std::size_t k = 1; k <= levels; ++k)
      xi[k] = static_cast<std::uint64_t>(static_cast<std::int64_t>(xi[k - 1]) + U_at(k - 1, xi[k - 1]));
    return xi;
  };

  EmbeddedSum star(obs);
  auto star_rng = rng.child("wstar", 0);

  SheetCouplingSample out;
  out.n_grid.assign(n_grid.begin(), n_grid.end());
  out.centered.assign(levels, std::vector<double>(n_grid.size()));
  out.g.assign(levels, std::vector<double>(n_grid.size()));

  // Excursions come as T*_i downward ones followed by one upward one;
  // `pos` is the index of the last upward excursion consumed.
  std::uint64_t ups = 0;
  std::uint64_t pos = 0;
  std::optional<std::uint64_t> pending;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::uint64_t N = n_grid[g];
    for (;;) {
      if (!pending) pending = static_cast<std::uint64_t>(static_cast<std::int64_t>(pos) + 2 + star.step(star_rng));
      if (*pending > N) break;
      pos = *pending;
      ++ups;
      pending.reset();
    }
    out.nu.push_back(ups);
    const auto xi = chain(ups);
    for (std::size_t k = 1; k <= levels; ++k)
      out.centered[k - 1][g] = static_cast<double>(xi[k] + xi[k - 1]) - static_cast<double>(N);
  }
  const auto top = chain(n_grid.back());
  out.up_at_top.assign(top.begin() + 1, top.end());

  for (std::size_t k = 0; k < levels; ++k) sums[k].finish(level_rng[k]);
  star.finish(star_rng);

  out.sup_error.assign(n_grid.size(), 0.0);
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    double sheet_prev = 0.0;
    double sheet = 0.0;
    for (std::size_t k = 0; k < levels; ++k) {
      sheet_prev = sheet;
      sheet += sums[k].motion().observed()[g];
      out.g[k][g] = sheet + sheet_prev - star.motion().observed()[g];
      out.sup_error[g] = std::max(out.sup_error[g], std::abs(out.centered[k][g] - out.g[k][g]));
    }
  }
  return out;
}

double return_probability(std::uint64_t m) {
  constexpr std::size_t table_size = 1025;
  static const auto table = [] {
    std::array<double, table_size> t{};
    t[0] = 1.0;
    for (std::size_t i = 1; i < table_size; ++i)
      t[i] = t[i - 1] * (2.0 * static_cast<double>(i) - 1.0) / (2.0 * static_cast<double>(i));
    return t;
  }();
  if (m < table_size) return table[m];
  const double x = static_cast<double>(m);
  const double inv = 1.0 / x;
  const double series =
      1.0 + inv * (-1.0 / 8.0 + inv * (1.0 / 128.0 + inv * (5.0 / 1024.0 + inv * (-21.0 / 32768.0))));
  return series / std::sqrt(std::numbers::pi * x);
}

std::uint64_t sample_excursion_length(RngStream& rng) {
  constexpr std::uint64_t cap = std::uint64_t{1} << 61;
  const double u = rng.uniform();
  // Smallest m >= 1 with P(S_2m = 0) < u; rho_1 = 2m.
  std::uint64_t lo = 0;  // return_probability(lo) >= u
  std::uint64_t hi = 1024;
  if (return_probability(hi) >= u) {
    lo = hi;
    hi = std::max<std::uint64_t>(2048, static_cast<std::uint64_t>(std::min(2.0 / (std::numbers::pi * u * u), 1e18)));
    while (hi < cap && return_probability(hi) >= u) {
      lo = hi;
      hi = std::min(cap, 2 * hi);
    }
    if (return_probability(hi) >= u) return 2 * cap;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (return_probability(mid) >= u ? lo : hi) = mid;
  }
  return 2 * hi;
}

std::vector<ExcursionRecord> sample_excursion_stream(const BlockSchedule& schedule, std::int64_t K,
                                                     RngStream& rng) {
  if (K < 1) throw std::invalid_argument("need K >= 1");
  std::vector<ExcursionRecord> out;
  out.reserve(schedule.total());
  for (unsigned l = 1; l <= schedule.max_level(); ++l) {
    const double thr = schedule.threshold(l);
    const std::uint64_t cap = thr >= 4.6e18 ? std::uint64_t{1} << 62 : static_cast<std::uint64_t>(std::floor(thr));
    for (std::uint64_t i = 0; i < schedule.block_size(l); ++i) {
      ExcursionRecord rec;
      rec.visits.assign(static_cast<std::size_t>(K), 0);
      std::int64_t pos = rng.sign();
      std::uint64_t len = 1;
      if (pos == 1) ++rec.visits[0];
      while (pos != 0 && len < cap) {
        pos += rng.sign();
        ++len;
        if (pos >= 1 && pos <= K) ++rec.visits[static_cast<std::size_t>(pos - 1)];
      }
      if (pos == 0) {
        rec.small = true;
        rec.length = len;
      } else {
        rec.visits.clear();
        std::uint64_t rest = 0;
        for (std::int64_t d = 0; d < std::abs(pos); ++d) rest += sample_excursion_length(rng) - 1;
        rec.length = len + rest;
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

SpliceErrors splice_errors(std::span<const ExcursionRecord> walk1,
                           std::span<const ExcursionRecord> walk2, const BlockSchedule& schedule) {
  std::vector<std::uint64_t> len1(walk1.size()), len2(walk2.size());
  for (std::size_t i = 0; i < walk1.size(); ++i) len1[i] = walk1[i].length;
  for (std::size_t i = 0; i < walk2.size(); ++i) len2[i] = walk2[i].length;
  const auto plan = splice_plan(len1, len2, schedule);

  const std::size_t K = walk1.empty() ? 0 : std::max(walk1.front().visits.size(), std::size_t{1});
  std::vector<long long> level_diff(K, 0);
  long double rho1 = 0.0L;
  long double rho_s = 0.0L;
  double rho_gap = 0.0;
  double level_gap = 0.0;
  SpliceErrors out;
  unsigned level = 1;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& own = walk1[i];
    const auto& used = plan[i].source == 1 ? walk1[plan[i].index] : walk2[plan[i].index];
    rho1 += static_cast<long double>(own.length);
    rho_s += static_cast<long double>(used.length);
    rho_gap = std::max(rho_gap, static_cast<double>(std::abs(rho_s - rho1)));
    if (plan[i].source == 2) {
      for (std::size_t k = 0; k < used.visits.size() && k < own.visits.size(); ++k) {
        level_diff[k] += static_cast<long long>(used.visits[k]) - static_cast<long long>(own.visits[k]);
        level_gap = std::max(level_gap, static_cast<double>(std::llabs(level_diff[k])));
      }
    }
    if (i + 1 == schedule.boundary(level)) {
      out.n.push_back(i + 1);
      out.rho_gap.push_back(rho_gap);
      out.level_gap.push_back(level_gap);
      ++level;
    }
  }
  return out;
}

}  // namespace loctime
