#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hhr/core_model.hpp"
#include "hhr/grid.hpp"
#include "hhr/measure_change.hpp"
#include "hhr/payoff.hpp"

namespace hhr {

// Discrete jump-size law: nodes u_q and weights summing to one.
struct JumpQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  // Constant: one node.  Exponential: n-point Gauss-Laguerre scaled by the
  // rate; nodes beyond the tail quantile are merged into one node at their
  // weighted mean, which keeps the mass and the mean.
  static JumpQuadrature build(const JumpDistribution& dist, int n = 32, double tail_quantile = 0.99999);

  double mean() const;
  std::size_t size() const { return nodes.size(); }
};

// Gauss-Laguerre rule for int_0^inf f(x) e^{-x} dx (Golub-Welsch).
void gauss_laguerre(int n, std::vector<double>& nodes, std::vector<double>& weights);

enum class XMinBoundary {
  DiscountedPayoff,  // Dirichlet e^{-r tau} phi(x_min e^{r tau})
  OneSided,          // no d2/dx2, upwind first difference
};

// Splitting of the generator (plus the -r discount) into
//   A0: mixed derivative and the whole jump integral (explicit),
//   A1: x terms and -r, A2: y terms, A3: z drift (implicit, tridiagonal).
class GeneratorDiscretization {
 public:
  GeneratorDiscretization(const Grid4& grid, const ValidatedModel& model, const QDynamics& q,
                          const JumpQuadrature& jumps, XMinBoundary x_min);

  const Grid4& grid() const { return grid_; }
  bool dirichlet_x_min() const { return dirichlet_; }
  double r() const { return r_; }

  void apply_a0(const double* u, double* out) const;
  void apply_a1(const double* u, double* out) const;
  void apply_a2(const double* u, double* out) const;
  void apply_a3(const double* u, double* out) const;

  // Solves (I - c A_d) out = rhs along direction d in {1, 2, 3}.  With a
  // Dirichlet x_min the boundary rows of direction 1 are set to `boundary`.
  void solve(int direction, double c, const double* rhs, double* out, double boundary = 0.0) const;

  // Share of jump-quadrature mass shifted past y_max, averaged over y nodes,
  // and share of z nodes whose shift z + alpha passes z_max.
  double y_clamp_fraction() const { return y_clamp_fraction_; }
  double z_clamp_fraction() const { return z_clamp_fraction_; }
  double z_max() const { return grid_.z.back(); }

  std::size_t line_solves() const { return line_solves_; }

 private:
  struct Tridiag {
    std::vector<double> l, d, u;
  };
  struct Factor {
    std::vector<double> m, inv_w, sup;
  };
  struct Factors {
    std::vector<Factor> x;  // one per y index
    Factor y, z;
  };
  const Factors& factors(double c) const;
  static Factor factorize(const Tridiag& t, std::size_t offset, std::size_t n, double c);
  static void thomas(const Factor& f, const double* rhs, std::size_t stride, double* out, std::size_t n);

  Grid4 grid_;
  double r_;
  bool dirichlet_;
  Tridiag ax_;  // indexed j * nx + i
  Tridiag ay_;  // indexed j
  Tridiag az_;  // indexed k
  std::vector<double> mixed_;  // indexed j * nx + i, interior only
  std::vector<std::vector<std::pair<std::size_t, double>>> jump_rows_;  // per y index
  std::vector<std::size_t> z_cell_;
  std::vector<double> z_weight_;
  double y_clamp_fraction_ = 0.0;
  double z_clamp_fraction_ = 0.0;
  mutable std::map<double, Factors> cache_;
  mutable std::size_t line_solves_ = 0;
};

// L^a f on the grid (without the -r f discount).  Boundary rows use the
// same one-sided treatment as the solver.
std::vector<double> apply_generator(const std::vector<double>& f, const Grid4& grid,
                                    const ValidatedModel& model, const JumpDistribution& dist,
                                    const MeasureSelection& selection);

struct PideOptions {
  double theta = 0.5 + 0.28867513459481288225;  // 1/2 + sqrt(3)/6
  bool rannacher = true;  // first step as two fully implicit half steps
  XMinBoundary x_min = XMinBoundary::DiscountedPayoff;
  int quadrature_nodes = 32;
  std::vector<int> snapshot_steps;  // store the layer after these step counts
};

struct PideDiagnostics {
  int steps = 0;
  int rannacher_half_steps = 0;
  std::size_t line_solves = 0;
  double cfl_number = 0.0;  // dt * (z_max + coupling rate)
  double y_clamp_fraction = 0.0;
  double z_clamp_fraction = 0.0;
  double max_boundary_flux = 0.0;  // max |drift * one-sided derivative| on the truncated faces
};

struct PIDESolution {
  Grid4 grid;
  std::string payoff;
  double maturity = 0.0;
  double a = 0.0;
  std::vector<double> values;    // t = 0
  std::vector<double> terminal;  // t = maturity
  std::map<int, std::vector<double>> snapshots;  // step n: t = maturity - n dt
  PideDiagnostics diagnostics;

  double at(std::size_t i, std::size_t j, std::size_t k) const { return values[grid.index(i, j, k)]; }
  double value_at(double x, double y, double z) const;
};

// Multilinear interpolation of a grid field.
double interpolate(const Grid4& grid, const std::vector<double>& field, double x, double y, double z);

// Explicit extra term for coupled systems: out[m] += E_m(tau, u).
using ExplicitTerm = std::function<void(double tau, const std::vector<std::vector<double>>& u,
                                        std::vector<std::vector<double>>& out)>;

// Backward solver in time-to-maturity tau for m coupled fields sharing the
// spatial operator.  `boundary(tau)` gives the Dirichlet x_min value.
class AdiSolver {
 public:
  AdiSolver(const GeneratorDiscretization& op, double theta);

  void hv_step(std::vector<std::vector<double>>& u, double tau, double dt, const ExplicitTerm& extra,
               const std::function<double(double)>& boundary) const;
  void douglas_step(std::vector<std::vector<double>>& u, double tau, double dt,
                    const ExplicitTerm& extra, const std::function<double(double)>& boundary) const;

 private:
  struct Parts {
    std::vector<std::vector<double>> total, a1, a2, a3;
  };
  void evaluate(const std::vector<std::vector<double>>& u, double tau, const ExplicitTerm& extra,
                Parts& parts) const;
  const GeneratorDiscretization& op_;
  double theta_;
};

// Raises CFLViolation when dt * (z_max + extra_rate) > 1.
void check_cfl(const Grid4& grid, double extra_rate);

// Max over truncated faces (x_max, y_max, z_max) of |drift * one-sided derivative|.
double boundary_flux(const Grid4& grid, const ValidatedModel& model, const QDynamics& q,
                     const std::vector<double>& field);

PIDESolution solve_price_pide(const Payoff& payoff, double maturity, const ValidatedModel& model,
                              const JumpDistribution& dist, const MeasureSelection& selection,
                              const GridSize& size, const PideOptions& options = {});
PIDESolution solve_price_pide(const Payoff& payoff, const ValidatedModel& model,
                              const JumpDistribution& dist, const MeasureSelection& selection,
                              const Grid4& grid, const PideOptions& options = {});

}  // namespace hhr
