#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "hhr/grid.hpp"
#include "hhr/life_markov.hpp"
#include "hhr/measure_change.hpp"
#include "hhr/pide.hpp"

namespace hhr {

enum class ReserveMethod { Quadrature, Pide };

std::string to_string(ReserveMethod method);

struct ReserveOptions {
  GridSize grid{64, 40, 20, 10};
  // Composite Simpson panels over the maturity integral (33 maturities).
  int simpson_panels = 32;
  // Relative Richardson estimate above which the panel count is doubled once.
  double richardson_budget = 1e-3;
  bool auto_double = true;
  // Reserve layer t; the solvers run on [t, T].
  double t_layer = 0.0;
  double theta = 0.5 + 0.28867513459481288225;
};

struct ReserveSurface {
  std::string policy;
  std::vector<std::string> states;
  double a = 0.0;
  double t = 0.0;
  ReserveMethod method = ReserveMethod::Quadrature;
  Grid4 grid;  // horizon T - t
  std::vector<std::vector<double>> values;  // per state, spatial field at t
  // Quadrature only.
  int simpson_panels = 0;
  double richardson_error = 0.0;  // relative to max |V|

  double value_at(std::size_t state, double x, double y, double z) const;
};

// Solutions W_psi(tau) = U_{t+tau}^psi(t) of the price PIDE for each basis
// payoff, stored at the tau layers a Simpson rule with up to `max_panels`
// panels needs.
class PriceLibrary {
 public:
  PriceLibrary(const Grid4& grid, int max_panels) : grid_(grid), max_panels_(max_panels) {}

  void add(const Payoff& payoff, PIDESolution solution);
  bool contains(const Payoff& payoff) const { return prices_.count(payoff.describe()) > 0; }
  // Layer tau = m H / panels.  MissingPrice when absent.
  const std::vector<double>& layer(const Payoff& payoff, int m, int panels) const;

  const Grid4& grid() const { return grid_; }
  int max_panels() const { return max_panels_; }

 private:
  Grid4 grid_;
  int max_panels_;
  std::map<std::string, PIDESolution> prices_;
};

// Basis payoffs of the quadrature representation: every nonzero f_j, g_j, h_jk.
std::vector<Payoff> basis_payoffs(const PolicySpec& policy);

// Time grid for reserve solves: horizon T - t, steps rounded up to a
// multiple of 2 * simpson_panels and to the CFL bound.
Grid4 reserve_grid(const ValidatedModel& model, const PolicySpec& policy, const ReserveOptions& options);

PriceLibrary build_price_library(const PolicySpec& policy, const ValidatedModel& model,
                                 const JumpDistribution& dist, const MeasureSelection& selection,
                                 const Grid4& grid, int max_panels, double theta);

// V_i(t) = sum_j p_ij(t, T) U_T^{f_j}(t) + int_t^T sum_j p_ij(t, s) U_s^{theta_j}(t) ds
// by composite Simpson in s.
ReserveSurface reserve_quadrature(const PolicySpec& policy, const ValidatedModel& model,
                                  const MeasureSelection& selection, const PriceLibrary& prices,
                                  const ReserveOptions& options = {});
ReserveSurface reserve_quadrature(const PolicySpec& policy, const ValidatedModel& model,
                                  const JumpDistribution& dist, const MeasureSelection& selection,
                                  const ReserveOptions& options = {});

// Coupled backward Thiele system; inter-state coupling and g_i explicit.
ReserveSurface solve_thiele_pide(const PolicySpec& policy, const ValidatedModel& model,
                                 const JumpDistribution& dist, const MeasureSelection& selection,
                                 const ReserveOptions& options = {});

struct ProbePoint {
  std::size_t i, j, k;
  double x, y, z;
};

// 3 x 3 x 3 grid nodes around (S0, v0, lambda0).
std::vector<ProbePoint> probe_points(const Grid4& grid, const ModelParams& model);

struct ProbeComparison {
  ProbePoint point;
  std::size_t state;
  double quadrature, pide, rel_diff;
  double dV_dz;  // from the PIDE surface
};

struct CrossValidation {
  std::string policy;
  std::vector<ProbeComparison> probes;
  double max_rel_diff = 0.0;
  double tolerance = 0.01;
  bool pass = false;
};

CrossValidation cross_validate(const ReserveSurface& quadrature, const ReserveSurface& pide,
                               const ModelParams& model, double tolerance = 0.01);

struct PremiumResult {
  double benefit_value;
  double annuity_value;
  double premium;  // constant rate paid in the initial state
};

// Equivalence premium: V_benefits(0) = P * V_annuity(0) at (S0, v0, lambda0),
// by the quadrature route.
PremiumResult equivalence_premium(const PolicySpec& policy, const ValidatedModel& model,
                                  const JumpDistribution& dist, const MeasureSelection& selection,
                                  const ReserveOptions& options = {});

}  // namespace hhr
