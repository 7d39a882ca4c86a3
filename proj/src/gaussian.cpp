#include "loctime/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace loctime {

TimeGrid::TimeGrid(double t_max, double dt) : t_max_(t_max), dt_(dt) {
  if (!(dt > 0.0) || !(t_max >= 0.0)) throw std::invalid_argument("grid needs dt > 0, t_max >= 0");
  const double steps = std::round(t_max / dt);
  if (steps > 1e12) throw std::invalid_argument("grid too fine");
  steps_ = static_cast<std::size_t>(steps);
}

std::size_t TimeGrid::index_at_or_below(double t) const {
  if (t <= 0.0) return 0;
  const auto j = static_cast<std::size_t>(std::floor(t / dt_ + 1e-9));
  return std::min(j, steps_);
}

WienerPath sample_wiener(const TimeGrid& grid, RngStream& rng) {
  WienerPath w{grid, std::vector<double>(grid.points(), 0.0)};
  const double sd = std::sqrt(grid.dt());
  for (std::size_t j = 1; j < grid.points(); ++j) w.values[j] = w.values[j - 1] + sd * rng.normal();
  return w;
}

WienerSheetLattice::WienerSheetLattice(std::int64_t k_max, TimeGrid grid)
    : k_max_(k_max), grid_(grid) {
  if (k_max < 1) throw std::invalid_argument("sheet needs k_max >= 1");
  values_.assign(static_cast<std::size_t>(k_max + 1) * grid_.points(), 0.0);
}

WienerSheetLattice build_sheet(std::int64_t k_max, const TimeGrid& grid, RngStream& rng) {
  WienerSheetLattice sheet(k_max, grid);
  for (std::int64_t i = 1; i <= k_max; ++i) {
    auto level = rng.child("sheet-level", static_cast<std::uint64_t>(i));
    const auto w = sample_wiener(grid, level);
    for (std::size_t j = 0; j < grid.points(); ++j) sheet.at(i, j) = sheet.at(i - 1, j) + w.values[j];
  }
  return sheet;
}

GProcess g_process(const WienerSheetLattice& sheet, const WienerPath& wstar, std::int64_t k) {
  if (k < 1 || k > sheet.k_max()) throw std::out_of_range("G level outside the sheet");
  if (wstar.values.size() != sheet.grid().points())
    throw std::invalid_argument("W* and sheet grids differ");
  GProcess g{k, sheet.grid(), std::vector<double>(sheet.grid().points())};
  for (std::size_t j = 0; j < g.values.size(); ++j)
    g.values[j] = sheet.at(k, j) + sheet.at(k - 1, j) - wstar.values[j];
  return g;
}

double g_covariance(std::int64_t k, double s, std::int64_t l, double t) {
  if (k < 1 || l < 1 || s < 0.0 || t < 0.0) throw std::invalid_argument("covariance arguments");
  const double m = static_cast<double>(std::min(k, l));
  return std::min(s, t) * (4.0 * m - (k == l ? 1.0 : 0.0) - 1.0);
}

BrownianLocalTimeZero sample_eta0(const TimeGrid& grid, RngStream& rng) {
  const auto w = sample_wiener(grid, rng);
  BrownianLocalTimeZero eta{grid, std::vector<double>(grid.points(), 0.0)};
  for (std::size_t j = 1; j < grid.points(); ++j) eta.values[j] = std::max(eta.values[j - 1], w.values[j]);
  return eta;
}

double sup_abs_g(const WienerSheetLattice& sheet, const WienerPath& wstar, std::int64_t K) {
  if (K < 1 || K > sheet.k_max()) throw std::out_of_range("K outside the sheet");
  double m = 0.0;
  for (std::int64_t k = 1; k <= K; ++k)
    for (std::size_t j = 0; j < sheet.grid().points(); ++j)
      m = std::max(m, std::abs(sheet.at(k, j) + sheet.at(k - 1, j) - wstar.values[j]));
  return m;
}

SupAudit audit_sup_inequality(std::span<const double> sup_samples, double alpha, std::int64_t K,
                              double t, std::span<const double> u_grid, SupVariant variant,
                              double u0, double min_survival) {
  if (sup_samples.size() < 100) throw std::invalid_argument("too few samples for a tail audit");
  if (!(alpha > 1.0) || K < 1 || !(t > 0.0)) throw std::invalid_argument("bad audit parameters");
  const double width = 4.0 * static_cast<double>(K) - 2.0;
  double bound_slope = 0.0;
  auto abscissa = [&](double u) { return variant == SupVariant::fixed_time ? u * u : std::pow(u, 4.0 / 3.0); };
  if (variant == SupVariant::fixed_time) {
    bound_slope = -1.0 / (2.0 * alpha * t * width);
  } else {
    bound_slope = -3.0 / (std::pow(2.0, 5.0 / 3.0) * alpha * std::cbrt(t) * std::pow(width, 2.0 / 3.0));
  }

  std::vector<double> sorted(sup_samples.begin(), sup_samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<double> surv(u_grid.size());
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), u_grid[i]);
    surv[i] = static_cast<double>(above) / n;
  }
  const double smallest_resolvable = std::max(min_survival, 20.0 / n);
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    if (u_grid[i] >= u0 && surv[i] <= 0.5 && surv[i] >= smallest_resolvable) {
      fx.push_back(abscissa(u_grid[i]));
      fy.push_back(surv[i]);
    }
  }
  if (fx.size() < 3) throw std::invalid_argument("too few samples for the requested u range");

  SupAudit out;
  out.fit = fit_log_survival(fx, fy);
  out.bound_slope = bound_slope;
  out.fitted_c = std::exp(out.fit.intercept);
  out.slope_pass = out.fit.slope - 1.96 * out.fit.std_error <= bound_slope;

  // Smallest constant C making C * shape dominate every row.
  double c_min = 0.0;
  for (std::size_t i = 0; i < u_grid.size(); ++i)
    c_min = std::max(c_min, surv[i] / std::exp(bound_slope * abscissa(u_grid[i])));
  out.audit.name = variant == SupVariant::fixed_time ? "sup_g_fixed_time" : "sup_g_local_time";
  out.audit.sample_size = sorted.size();
  for (std::size_t i = 0; i < u_grid.size(); ++i)
    out.audit.add(u_grid[i], surv[i], c_min * std::exp(bound_slope * abscissa(u_grid[i])));
  return out;
}

}  // namespace loctime
