#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "loctime/rng.hpp"
#include "loctime/stats.hpp"

namespace loctime {

/// Points t_j = j dt for j = 0..steps, steps = round(t_max / dt).
class TimeGrid {
 public:
  TimeGrid(double t_max, double dt);

  double t_max() const { return t_max_; }
  double dt() const { return dt_; }
  std::size_t steps() const { return steps_; }
  std::size_t points() const { return steps_ + 1; }
  double at(std::size_t j) const { return static_cast<double>(j) * dt_; }
  /// Largest j with t_j <= t (clamped to the grid).
  std::size_t index_at_or_below(double t) const;

 private:
  double t_max_;
  double dt_;
  std::size_t steps_;
};

struct WienerPath {
  TimeGrid grid;
  std::vector<double> values;
};

WienerPath sample_wiener(const TimeGrid& grid, RngStream& rng);

/// W(k, t_j) = W_1(t_j) + ... + W_k(t_j), k = 0..k_max, from independent
/// Wiener paths; W_i is drawn from the child stream ("sheet-level", i).
class WienerSheetLattice {
 public:
  WienerSheetLattice(std::int64_t k_max, TimeGrid grid);

  std::int64_t k_max() const { return k_max_; }
  const TimeGrid& grid() const { return grid_; }
  double at(std::int64_t k, std::size_t j) const {
    return values_[static_cast<std::size_t>(k) * grid_.points() + j];
  }
  double& at(std::int64_t k, std::size_t j) {
    return values_[static_cast<std::size_t>(k) * grid_.points() + j];
  }

 private:
  std::int64_t k_max_;
  TimeGrid grid_;
  std::vector<double> values_;
};

WienerSheetLattice build_sheet(std::int64_t k_max, const TimeGrid& grid, RngStream& rng);

/// G(k, t_j) = W(k, t_j) + W(k - 1, t_j) - W*(t_j) for one level k.
struct GProcess {
  std::int64_t k = 1;
  TimeGrid grid;
  std::vector<double> values;
};

GProcess g_process(const WienerSheetLattice& sheet, const WienerPath& wstar, std::int64_t k);

/// (s ^ t)(4 (k ^ l) - 1{k = l} - 1).
double g_covariance(std::int64_t k, double s, std::int64_t l, double t);

/// Running maximum of a fresh Wiener path, equal in law to the Brownian
/// local time at zero.
struct BrownianLocalTimeZero {
  TimeGrid grid;
  std::vector<double> values;
};

BrownianLocalTimeZero sample_eta0(const TimeGrid& grid, RngStream& rng);

/// max_{1 <= k <= K} max_j |G(k, t_j)| over the whole grid.
double sup_abs_g(const WienerSheetLattice& sheet, const WienerPath& wstar, std::int64_t K);

enum class SupVariant {
  /// exp(-u^2 / (2 alpha t (4K - 2))), abscissa u^2.
  fixed_time,
  /// exp(-3 u^{4/3} / (2^{5/3} alpha t^{1/3} (4K - 2)^{2/3})), abscissa u^{4/3}.
  local_time,
};

struct SupAudit {
  TailAudit audit;
  SlopeFit fit;
  /// Decay coefficient of the bound in the fitted abscissa (negative).
  double bound_slope = 0.0;
  /// exp(intercept) of the fit.
  double fitted_c = 0.0;
  /// The fitted slope, allowing 1.96 standard errors, reaches the bound's.
  bool slope_pass = false;
};

/// Decay-slope audit of the sup inequalities. `sup_samples` are realizations
/// of the audited maximum. The fit uses rows u >= u0 whose survival lies in
/// [min_survival, 0.5]. Rows carry exp(intercept) * shape as the bound.
SupAudit audit_sup_inequality(std::span<const double> sup_samples, double alpha, std::int64_t K,
                              double t, std::span<const double> u_grid, SupVariant variant,
                              double u0 = 0.0, double min_survival = 1e-3);

}  // namespace loctime
