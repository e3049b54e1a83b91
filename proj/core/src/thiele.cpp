#include "hhr/thiele.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hhr {

std::string to_string(ReserveMethod method) { return method == ReserveMethod::Pide ? "pide" : "quadrature"; }

double ReserveSurface::value_at(std::size_t state, double x, double y, double z) const {
  return interpolate(grid, values.at(state), x, y, z);
}

void PriceLibrary::add(const Payoff& payoff, PIDESolution solution) {
  prices_.insert_or_assign(payoff.describe(), std::move(solution));
}

const std::vector<double>& PriceLibrary::layer(const Payoff& payoff, int m, int panels) const {
  static const std::vector<double> empty;
  const auto it = prices_.find(payoff.describe());
  if (it == prices_.end()) raise(ErrorKind::MissingPrice, "no price for payoff " + payoff.describe());
  if (panels <= 0 || grid_.n_t % panels != 0 || m < 0 || m > panels)
    raise(ErrorKind::MissingPrice, "maturity layer not on the price grid");
  const int step = m * (grid_.n_t / panels);
  const auto layer = it->second.snapshots.find(step);
  if (layer == it->second.snapshots.end()) {
    raise(ErrorKind::MissingPrice,
          "payoff " + payoff.describe() + " has no layer at step " + std::to_string(step));
  }
  return layer->second;
}

std::vector<Payoff> basis_payoffs(const PolicySpec& policy) {
  std::vector<Payoff> out;
  std::set<std::string> seen;
  auto add = [&](const Payoff& p) {
    if (p.is_zero()) return;
    if (seen.insert(p.describe()).second) out.push_back(p);
  };
  for (const auto& f : policy.terminal) add(f);
  for (const auto& g : policy.rate) add(g);
  for (const auto& tr : policy.transitions) add(tr.payment);
  return out;
}

Grid4 reserve_grid(const ValidatedModel& model, const PolicySpec& policy, const ReserveOptions& options) {
  const double horizon = model->T - options.t_layer;
  if (!(options.t_layer >= 0.0) || !(horizon > 0.0)) raise(ErrorKind::TimeOrder, "reserve layer must lie in [0, T)");
  if (options.simpson_panels < 2 || options.simpson_panels % 2 != 0)
    raise(ErrorKind::Range, "Simpson panel count must be even and >= 2");
  Grid4 grid = make_grid(model, horizon, options.grid);
  const int unit = 2 * options.simpson_panels;
  const double rate = grid.z.back() + policy.max_exit_rate();
  int steps = std::max(options.grid.nt, static_cast<int>(std::ceil(horizon * rate)));
  steps = (steps + unit - 1) / unit * unit;
  grid.n_t = steps;
  return grid;
}

PriceLibrary build_price_library(const PolicySpec& policy, const ValidatedModel& model,
                                 const JumpDistribution& dist, const MeasureSelection& selection,
                                 const Grid4& grid, int max_panels, double theta) {
  if (grid.n_t % max_panels != 0) raise(ErrorKind::Range, "time steps must be a multiple of the panel count");
  PriceLibrary lib(grid, max_panels);
  PideOptions opt;
  opt.theta = theta;
  opt.x_min = XMinBoundary::OneSided;
  for (int m = 0; m <= max_panels; ++m) opt.snapshot_steps.push_back(m * (grid.n_t / max_panels));
  for (const auto& payoff : basis_payoffs(policy)) {
    lib.add(payoff, solve_price_pide(payoff, model, dist, selection, grid, opt));
  }
  return lib;
}

namespace {

// Simpson sum over panels (every `stride`-th node of the finest rule).
std::vector<std::vector<double>> simpson(const std::vector<std::vector<std::vector<double>>>& integrand,
                                         int panels, int stride, double horizon) {
  const std::size_t states = integrand[0].size();
  const std::size_t n = integrand[0][0].size();
  const double h = horizon / panels;
  std::vector<std::vector<double>> out(states, std::vector<double>(n, 0.0));
  for (int m = 0; m <= panels; ++m) {
    const double w = (m == 0 || m == panels) ? 1.0 : (m % 2 == 1 ? 4.0 : 2.0);
    const auto& f = integrand[m * stride];
    for (std::size_t i = 0; i < states; ++i)
      for (std::size_t c = 0; c < n; ++c) out[i][c] += w * h / 3.0 * f[i][c];
  }
  return out;
}

double max_abs(const std::vector<std::vector<double>>& v) {
  double m = 0.0;
  for (const auto& f : v)
    for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

ReserveSurface reserve_quadrature(const PolicySpec& policy, const ValidatedModel& /*model*/,
                                  const MeasureSelection& selection, const PriceLibrary& prices,
                                  const ReserveOptions& options) {
  policy.check();
  const Grid4& grid = prices.grid();
  const double t = options.t_layer;
  const double horizon = grid.horizon;
  const double T = t + horizon;
  const std::size_t states = policy.n_states();
  const std::size_t n = grid.spatial_size();

  ReserveSurface out;
  out.policy = policy.name;
  out.states = policy.states;
  out.a = selection.a;
  out.t = t;
  out.method = ReserveMethod::Quadrature;
  out.grid = grid;

  // Terminal part: sum_j p_ij(t, T) W_{f_j}(horizon).
  const Eigen::MatrixXd p_end = transition_probs(policy, t, T);
  std::vector<std::vector<double>> terminal(states, std::vector<double>(n, 0.0));
  const int max_panels = prices.max_panels();
  for (std::size_t j = 0; j < states; ++j) {
    if (policy.terminal[j].is_zero()) continue;
    const auto& w = prices.layer(policy.terminal[j], max_panels, max_panels);
    for (std::size_t i = 0; i < states; ++i) {
      const double pij = p_end(i, j);
      if (pij == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) terminal[i][c] += pij * w[c];
    }
  }

  auto integrand_at = [&](int m, int panels) {
    const double tau = horizon * m / panels;
    const double s = t + tau;
    const Eigen::MatrixXd p = transition_probs(policy, t, s);
    std::vector<std::vector<double>> f(states, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < states; ++j) {
      // theta_j price = W_{g_j} + sum_k mu_jk(s) W_{h_jk}.
      std::vector<std::pair<double, const std::vector<double>*>> terms;
      if (!policy.rate[j].is_zero()) terms.emplace_back(1.0, &prices.layer(policy.rate[j], m, panels));
      for (const auto& tr : policy.transitions) {
        if (tr.from != j || tr.payment.is_zero()) continue;
        const double mu = tr.rate(s);
        if (mu != 0.0) terms.emplace_back(mu, &prices.layer(tr.payment, m, panels));
      }
      if (terms.empty()) continue;
      for (std::size_t i = 0; i < states; ++i) {
        const double pij = p(i, j);
        if (pij == 0.0) continue;
        for (const auto& [coef, w] : terms)
          for (std::size_t c = 0; c < n; ++c) f[i][c] += pij * coef * (*w)[c];
      }
    }
    return f;
  };

  int panels = options.simpson_panels;
  if (max_panels % panels != 0) raise(ErrorKind::MissingPrice, "library does not cover the Simpson nodes");
  std::vector<std::vector<std::vector<double>>> nodes;
  auto fill = [&](int count) {
    nodes.clear();
    for (int m = 0; m <= count; ++m) nodes.push_back(integrand_at(m * (max_panels / count), max_panels));
  };
  fill(panels);
  auto fine = simpson(nodes, panels, 1, horizon);
  auto coarse = simpson(nodes, panels / 2, 2, horizon);

  auto combine = [&](const std::vector<std::vector<double>>& integral) {
    std::vector<std::vector<double>> v = terminal;
    for (std::size_t i = 0; i < states; ++i)
      for (std::size_t c = 0; c < n; ++c) v[i][c] += integral[i][c];
    return v;
  };
  auto richardson = [&](const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                        const std::vector<std::vector<double>>& v) {
    double diff = 0.0;
    for (std::size_t i = 0; i < states; ++i)
      for (std::size_t c = 0; c < n; ++c) diff = std::max(diff, std::abs(a[i][c] - b[i][c]));
    const double scale = max_abs(v);
    return scale > 0.0 ? diff / 15.0 / scale : 0.0;
  };

  out.values = combine(fine);
  out.richardson_error = richardson(fine, coarse, out.values);
  out.simpson_panels = panels;
  if (out.richardson_error > options.richardson_budget && options.auto_double && 2 * panels <= max_panels) {
    panels *= 2;
    fill(panels);
    auto finer = simpson(nodes, panels, 1, horizon);
    out.values = combine(finer);
    out.richardson_error = richardson(finer, fine, out.values);
    out.simpson_panels = panels;
  }
  return out;
}

ReserveSurface reserve_quadrature(const PolicySpec& policy, const ValidatedModel& model,
                                  const JumpDistribution& dist, const MeasureSelection& selection,
                                  const ReserveOptions& options) {
  const Grid4 grid = reserve_grid(model, policy, options);
  const int max_panels = options.auto_double ? 2 * options.simpson_panels : options.simpson_panels;
  const PriceLibrary lib = build_price_library(policy, model, dist, selection, grid, max_panels, options.theta);
  return reserve_quadrature(policy, model, selection, lib, options);
}

ReserveSurface solve_thiele_pide(const PolicySpec& policy, const ValidatedModel& model,
                                 const JumpDistribution& dist, const MeasureSelection& selection,
                                 const ReserveOptions& options) {
  policy.check();
  const Grid4 grid = reserve_grid(model, policy, options);
  check_cfl(grid, policy.max_exit_rate());
  const QDynamics q = q_dynamics(model, selection);
  const GeneratorDiscretization op(grid, model, q, JumpQuadrature::build(dist), XMinBoundary::OneSided);
  const AdiSolver solver(op, options.theta);

  const std::size_t states = policy.n_states();
  const std::size_t n = grid.spatial_size();
  const std::size_t nx = grid.nx();
  auto field_of = [&](const Payoff& p) {
    std::vector<double> f(n);
    for (std::size_t c = 0; c < n; ++c) f[c] = p(grid.x[c % nx]);
    return f;
  };

  std::vector<std::vector<double>> u(states);
  std::vector<std::vector<double>> g(states);
  for (std::size_t i = 0; i < states; ++i) {
    u[i] = field_of(policy.terminal[i]);
    g[i] = field_of(policy.rate[i]);
  }
  std::vector<std::vector<double>> h;
  for (const auto& tr : policy.transitions) h.push_back(field_of(tr.payment));

  const double T = model->T;
  const ExplicitTerm coupling = [&](double tau, const std::vector<std::vector<double>>& v,
                                    std::vector<std::vector<double>>& out) {
    const double s = T - tau;
    for (std::size_t i = 0; i < states; ++i) {
      if (!policy.rate[i].is_zero()) {
        for (std::size_t c = 0; c < n; ++c) out[i][c] += g[i][c];
      }
    }
    for (std::size_t t = 0; t < policy.transitions.size(); ++t) {
      const auto& tr = policy.transitions[t];
      const double mu = tr.rate(s);
      if (mu == 0.0) continue;
      auto& o = out[tr.from];
      const auto& vi = v[tr.from];
      const auto& vk = v[tr.to];
      for (std::size_t c = 0; c < n; ++c) o[c] += mu * (h[t][c] + vk[c] - vi[c]);
    }
  };

  const double dt = grid.dt();
  for (int step = 0; step < grid.n_t; ++step) {
    const double tau = step * dt;
    if (step == 0) {
      solver.douglas_step(u, tau, 0.5 * dt, coupling, nullptr);
      solver.douglas_step(u, tau + 0.5 * dt, 0.5 * dt, coupling, nullptr);
    } else {
      solver.hv_step(u, tau, dt, coupling, nullptr);
    }
  }

  ReserveSurface out;
  out.policy = policy.name;
  out.states = policy.states;
  out.a = selection.a;
  out.t = options.t_layer;
  out.method = ReserveMethod::Pide;
  out.grid = grid;
  out.values = std::move(u);
  return out;
}

namespace {

std::array<std::size_t, 3> three_nodes(const Axis& axis, double lo, double mid, double hi) {
  std::array<std::size_t, 3> idx{axis.nearest(lo), axis.nearest(mid), axis.nearest(hi)};
  if (axis.size() >= 3) {
    if (idx[1] == 0) idx[1] = 1;
    if (idx[1] == axis.size() - 1) idx[1] = axis.size() - 2;
    if (idx[0] >= idx[1]) idx[0] = idx[1] - 1;
    if (idx[2] <= idx[1]) idx[2] = idx[1] + 1;
  }
  return idx;
}

}  // namespace

std::vector<ProbePoint> probe_points(const Grid4& grid, const ModelParams& model) {
  const auto xs = three_nodes(grid.x, 0.8 * model.S0, model.S0, 1.25 * model.S0);
  const auto ys = three_nodes(grid.y, 0.5 * model.v0, model.v0, 2.0 * model.v0);
  const auto zs = three_nodes(grid.z, model.lambda0, model.lambda0 + model.alpha, model.lambda0 + 2.0 * model.alpha);
  std::vector<ProbePoint> out;
  for (auto k : zs)
    for (auto j : ys)
      for (auto i : xs) out.push_back({i, j, k, grid.x[i], grid.y[j], grid.z[k]});
  return out;
}

CrossValidation cross_validate(const ReserveSurface& quadrature, const ReserveSurface& pide,
                               const ModelParams& model, double tolerance) {
  if (quadrature.values.size() != pide.values.size()) raise(ErrorKind::Range, "surfaces cover different states");
  CrossValidation cv;
  cv.policy = quadrature.policy;
  cv.tolerance = tolerance;
  const Grid4& g = pide.grid;
  for (const auto& pt : probe_points(g, model)) {
    for (std::size_t s = 0; s < pide.values.size(); ++s) {
      ProbeComparison c;
      c.point = pt;
      c.state = s;
      c.quadrature = quadrature.values[s][g.index(pt.i, pt.j, pt.k)];
      c.pide = pide.values[s][g.index(pt.i, pt.j, pt.k)];
      const double scale = std::max(std::abs(c.quadrature), std::abs(c.pide));
      c.rel_diff = scale > 1e-12 ? std::abs(c.quadrature - c.pide) / scale : 0.0;
      if (g.nz() > 1) {
        const std::size_t k0 = pt.k == 0 ? 0 : pt.k - 1;
        const std::size_t k1 = std::min(pt.k + 1, g.nz() - 1);
        c.dV_dz = (pide.values[s][g.index(pt.i, pt.j, k1)] - pide.values[s][g.index(pt.i, pt.j, k0)]) /
                  (g.z[k1] - g.z[k0]);
      } else {
        c.dV_dz = 0.0;
      }
      cv.max_rel_diff = std::max(cv.max_rel_diff, c.rel_diff);
      cv.probes.push_back(c);
    }
  }
  cv.pass = cv.max_rel_diff <= tolerance;
  return cv;
}

PremiumResult equivalence_premium(const PolicySpec& policy, const ValidatedModel& model,
                                  const JumpDistribution& dist, const MeasureSelection& selection,
                                  const ReserveOptions& options) {
  const auto& p = model.params();
  const ReserveSurface benefits = reserve_quadrature(policy, model, dist, selection, options);
  PolicySpec annuity = policy;
  annuity.name = policy.name + "_premium_annuity";
  for (auto& f : annuity.terminal) f = Payoff::zero();
  for (auto& g : annuity.rate) g = Payoff::zero();
  for (auto& tr : annuity.transitions) tr.payment = Payoff::zero();
  annuity.rate[policy.initial_state] = Payoff::constant(1.0);
  const ReserveSurface unit = reserve_quadrature(annuity, model, dist, selection, options);
  PremiumResult r;
  r.benefit_value = benefits.value_at(policy.initial_state, p.S0, p.v0, p.lambda0);
  r.annuity_value = unit.value_at(policy.initial_state, p.S0, p.v0, p.lambda0);
  if (!(r.annuity_value > 0.0)) raise(ErrorKind::Domain, "premium annuity has zero value");
  r.premium = r.benefit_value / r.annuity_value;
  return r;
}

}  // namespace hhr
