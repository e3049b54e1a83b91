// One line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hhr/hawkes.hpp"
#include "hhr/measure_change.hpp"
#include "hhr/parallel.hpp"
#include "hhr/pide.hpp"
#include "hhr/sde_simulator.hpp"
#include "hhr/special_functions.hpp"
#include "hhr/thiele.hpp"
#include "oracles.hpp"

namespace {

constexpr std::uint64_t kSeed = 20240601;
constexpr double kSe = 3.0;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Desk {
  hhr::ModelParams p;
  hhr::ValidatedModel model = hhr::validate_or_throw(p);
  hhr::JumpDistribution dist = hhr::JumpDistribution::exponential(1.0);
  hhr::AdmissibilityReport adm = hhr::a_bounds(model, dist);
  hhr::MeasureSelection sel = hhr::select_measure(adm, 0.8 * adm.bound_EmQS.value(), hhr::MeasureLevel::EmQS);
};

const Desk& desk() {
  static const Desk d;
  return d;
}

// Compensator of N at t written out from the event times.
double compensator_n(const hhr::HawkesPath& path, const hhr::ModelParams& p, double t) {
  double c = p.lambda0 * t;
  for (double ti : path.event_times()) {
    if (ti > t) break;
    c += p.alpha / p.beta * (1.0 - std::exp(-p.beta * (t - ti)));
  }
  return c;
}

const std::vector<hhr::HawkesPath>& hawkes_paths() {
  static const auto paths = hhr::simulate_hawkes_paths(desk().model, desk().dist, kSeed, 100000);
  return paths;
}

hhr::PathBundle weighted_bundle(std::size_t n) {
  hhr::SimulationOptions o;
  o.n_paths = n;
  o.n_steps = 252;
  o.seed = kSeed;
  o.measure = hhr::SimMeasure::P;
  o.selection = desk().sel;
  o.observation_times = {0.5 * desk().p.T};
  return hhr::simulate(desk().model, desk().dist, o);
}

const hhr::PathBundle& weighted() {
  static const auto b = weighted_bundle(200000);
  return b;
}

const hhr::PathBundle& risk_neutral() {
  static const hhr::PathBundle b = [] {
    hhr::SimulationOptions o;
    o.n_paths = 200000;
    o.n_steps = 252;
    o.seed = kSeed + 1;
    o.measure = hhr::SimMeasure::Q;
    o.selection = desk().sel;
    return hhr::simulate(desk().model, desk().dist, o);
  }();
  return b;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto paths = hhr::simulate_hawkes_paths(desk().model, desk().dist, kSeed, 100000);
  std::vector<double> lam(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) lam[i] = paths[i].lambda_at(1.0);
  const double secs = seconds_since(t0);
  const auto s = oracle::mean_se(lam);
  const double ref = oracle::hawkes_mean_intensity(1.0, 0.5, 1.0, 1.0);
  const double closed = 2.0 - std::exp(-0.5);
  const bool ok = std::abs(s.mean - ref) <= kSe * s.se && std::abs(ref - closed) < 1e-9 && secs < 30.0;
  return {ok, fmt("mean %.5f vs %.5f, z %.2f, %.2f s", s.mean, ref, (s.mean - ref) / s.se, secs)};
}

Outcome criterion2() {
  const auto& paths = hawkes_paths();
  const auto& p = desk().p;
  const double ej = desk().dist.mean();
  bool ok = true;
  double worst = 0.0;
  for (double t : {0.5 * p.T, p.T}) {
    std::vector<double> rn(paths.size()), rl(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const double comp = compensator_n(paths[i], p, t);
      double n = 0.0, l = 0.0;
      for (std::size_t e = 0; e < paths[i].size() && paths[i].event_times()[e] <= t; ++e) {
        n += 1.0;
        l += paths[i].marks()[e];
      }
      rn[i] = n - comp;
      rl[i] = l - ej * comp;
    }
    for (const auto& s : {oracle::mean_se(rn), oracle::mean_se(rl)}) {
      ok = ok && std::abs(s.mean) <= kSe * s.se;
      worst = std::max(worst, std::abs(s.mean / s.se));
    }
  }
  return {ok, fmt("max |z| %.2f over t in {T/2, T}, 1e5 paths", worst)};
}

Outcome criterion3() {
  const auto& b = weighted();
  bool ok = true;
  double worst = 0.0;
  for (double t : {0.5 * desk().p.T, desk().p.T}) {
    const std::size_t k = b.obs_index(t);
    std::vector<double> w(b.n_paths);
    for (std::size_t i = 0; i < b.n_paths; ++i) {
      const std::size_t c = i * b.n_obs + k;
      w[i] = b.X[c] * (static_cast<double>(b.N[c]) - b.LambdaN[c]);
    }
    const auto s = oracle::mean_se(w);
    ok = ok && std::abs(s.mean) <= kSe * s.se;
    worst = std::max(worst, std::abs(s.mean / s.se));
  }
  return {ok, fmt("a %.6f (0.8 of %.6f), max |z| %.2f", desk().sel.a, desk().adm.bound_EmQS.value(), worst)};
}

Outcome criterion4() {
  const auto& b = weighted();
  const auto x = b.column(b.X, b.obs_index(desk().p.T));
  const std::vector<double> first(x.begin(), x.begin() + 100000);
  const auto s = oracle::mean_se(first);
  const double q = 2.0 + desk().sel.epsilon1;
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = std::pow(x[i], q);
    m2 += v;
    if (i < 100000) m1 += v;
  }
  m1 /= 100000.0;
  m2 /= static_cast<double>(x.size());
  const double change = std::abs(m2 - m1) / m1;
  const bool ok = std::abs(s.mean - 1.0) <= kSe * s.se && change < 0.05;
  return {ok, fmt("E[X_T] %.5f, z %.2f, moment change %.2e", s.mean, (s.mean - 1.0) / s.se, change)};
}

Outcome criterion5() {
  const auto& b = risk_neutral();
  const auto& p = desk().p;
  auto d = b.column(b.S, b.obs_index(p.T));
  for (double& s : d) s *= std::exp(-p.r * p.T);
  const auto s = oracle::mean_se(d);
  return {std::abs(s.mean - p.S0) <= kSe * s.se, fmt("mean %.4f vs %.1f, z %.2f", s.mean, p.S0, (s.mean - p.S0) / s.se)};
}

Outcome criterion6() {
  const auto& p = desk().p;
  // Negative moment of order 1/2 (finite variance at these parameters).
  const double s = 0.5;
  std::vector<double> draws(1000000);
  {
    std::mt19937_64 gen(kSeed);
    for (double& d : draws) d = std::pow(oracle::cir_step(gen, p.v0, p.T, p.kappa, p.vbar, p.sigma), -s);
  }
  const auto neg = oracle::mean_se(draws);
  const double neg_formula = hhr::cir_neg_moment(p.kappa, p.vbar, p.sigma, p.v0, p.T, s);
  const double neg_rel = std::abs(neg_formula - neg.mean) / neg.mean;

  const double sig2 = p.sigma * p.sigma;
  const double c = 0.25 * 0.5 * std::pow((2.0 * p.kappa * p.vbar - sig2) / (2.0 * p.sigma), 2);
  const int steps = 400;
  const double dt = p.T / steps;
  std::vector<double> ex(100000);
  hhr::parallel_for(ex.size(), [&](std::size_t i) {
    std::mt19937_64 gen(kSeed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
    double v = p.v0, integral = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double next = oracle::cir_step(gen, v, dt, p.kappa, p.vbar, p.sigma);
      integral += 0.5 * dt * (1.0 / v + 1.0 / next);
      v = next;
    }
    ex[i] = std::exp(c * integral);
  });
  const auto inv = oracle::mean_se(ex);
  const double inv_formula = hhr::integrated_inverse_cir_exp(p.kappa, p.vbar, p.sigma, p.v0, p.T, c);
  const double inv_rel = std::abs(inv_formula - inv.mean) / inv.mean;

  double ident = std::abs(hhr::hyp1f1(0.7, 1.9, 0.0) - 1.0);
  for (double z : {-12.0, -1.5, 2.0, 10.0})
    ident = std::max(ident, std::abs(hhr::hyp1f1(1.3, 1.3, z) / std::exp(z) - 1.0));
  const double kummer[][3] = {{0.5, 1.5, -10.0}, {2.5, 1.0, 5.0}, {1.2, 3.4, -25.0}, {0.3, 0.8, 40.0}};
  for (const auto& k : kummer) {
    const double lhs = hhr::hyp1f1(k[0], k[1], k[2]);
    ident = std::max(ident, std::abs(lhs / (std::exp(k[2]) * hhr::hyp1f1(k[1] - k[0], k[1], -k[2])) - 1.0));
    ident = std::max(ident, std::abs(lhs / oracle::hyp1f1(k[0], k[1], k[2]) - 1.0));
  }
  const bool ok = neg_rel <= 0.02 && inv_rel <= 0.02 && ident <= 1e-9;
  return {ok, fmt("neg moment rel %.2e, inverse-CIR rel %.2e, 1F1 identities %.1e", neg_rel, inv_rel, ident)};
}

Outcome criterion7() {
  const auto& d = desk();
  const hhr::GridSize g{64, 48, 24, 16};
  const auto t0 = std::chrono::steady_clock::now();
  const auto lin = hhr::solve_price_pide(hhr::Payoff::linear(), d.p.T, d.model, d.dist, d.sel, g);
  const auto one = hhr::solve_price_pide(hhr::Payoff::constant(1.0), d.p.T, d.model, d.dist, d.sel, g);
  const double secs = seconds_since(t0);
  const double disc = std::exp(-d.p.r * d.p.T);
  double wl = 0.0, wc = 0.0;
  const auto& grid = lin.grid;
  for (std::size_t k = 0; k < grid.nz(); ++k)
    for (std::size_t j = 0; j < grid.ny(); ++j)
      for (std::size_t i = 0; i < grid.nx(); ++i) {
        wl = std::max(wl, std::abs(lin.at(i, j, k) - grid.x[i]) / grid.x[i]);
        wc = std::max(wc, std::abs(one.at(i, j, k) - disc) / disc);
      }
  return {wl <= 1e-3 && wc <= 1e-6 && secs < 300.0,
          fmt("linear %.2e, constant %.2e, %.1f s on 64x48x24x16", wl, wc, secs)};
}

Outcome criterion8() {
  const auto& d = desk();
  const double G = d.p.S0 * std::exp(d.p.r * d.p.T);
  const auto sol =
      hhr::solve_price_pide(hhr::Payoff::guarantee(G), d.p.T, d.model, d.dist, d.sel, hhr::GridSize{64, 48, 24, 16});
  const double pide = sol.value_at(d.p.S0, d.p.v0, d.p.lambda0);
  const auto& b = risk_neutral();
  auto pay = b.column(b.S, b.obs_index(d.p.T));
  for (double& s : pay) s = std::exp(-d.p.r * d.p.T) * std::max(G, s);
  const auto mc = oracle::mean_se(pay);
  const double allowed = 0.01 * mc.mean + kSe * mc.se;
  return {std::abs(pide - mc.mean) <= allowed,
          fmt("PIDE %.4f vs MC %.4f +- %.4f, allowed %.3f", pide, mc.mean, mc.se, allowed)};
}

Outcome criterion9() {
  const auto& d = desk();
  hhr::ReserveOptions o;
  double worst = 0.0;
  bool ok = true;
  for (const auto& policy : hhr::builtin_templates(d.p)) {
    const auto q = hhr::reserve_quadrature(policy, d.model, d.dist, d.sel, o);
    const auto v = hhr::solve_thiele_pide(policy, d.model, d.dist, d.sel, o);
    const auto pts = hhr::probe_points(q.grid, d.p);
    ok = ok && pts.size() == 27;
    for (std::size_t st = 0; st < policy.n_states(); ++st)
      for (const auto& pt : pts) {
        const double a = q.values[st][q.grid.index(pt.i, pt.j, pt.k)];
        const double b = v.values[st][v.grid.index(pt.i, pt.j, pt.k)];
        const double m = std::max(std::abs(a), std::abs(b));
        const double r = m <= 1e-12 ? 0.0 : std::abs(a - b) / m;
        worst = std::max(worst, r);
      }
  }
  ok = ok && worst <= 0.01;

  hhr::ModelParams ten = d.p;
  ten.T = 10.0;
  const auto m10 = hhr::validate_or_throw(ten);
  const auto s10 = hhr::select_measure(hhr::a_bounds(m10, d.dist), 0.0, hhr::MeasureLevel::E);
  const double mu = 0.02;
  const auto term = hhr::term_insurance(mu);
  const double closed = mu / (d.p.r + mu) * (1.0 - std::exp(-(d.p.r + mu) * 10.0));
  const double vq = hhr::reserve_quadrature(term, m10, d.dist, s10, o).value_at(0, d.p.S0, d.p.v0, d.p.lambda0);
  const double vp = hhr::solve_thiele_pide(term, m10, d.dist, s10, o).value_at(0, d.p.S0, d.p.v0, d.p.lambda0);
  const double err = std::max(std::abs(vq - closed), std::abs(vp - closed));
  ok = ok && err <= 1e-4;
  return {ok, fmt("max probe rel diff %.2e over 4 templates, classical term insurance err %.2e", worst, err)};
}

Outcome criterion10() {
  const auto& d = desk();
  const oracle::NovikovInputs in{d.p.kappa, d.p.sigma, d.p.eta, d.p.T, d.p.alpha, d.p.beta, 1.0, 0.0};
  const double scan = oracle::c_l_scan(in, 1000000);
  const double diff = std::abs(d.adm.c_l.value - scan);

  const std::vector<std::function<void(hhr::ModelParams&)>> sweep = {
      [](hhr::ModelParams&) {},
      [](hhr::ModelParams& m) { m.rho = -0.8; },
      [](hhr::ModelParams& m) { m.sigma = 0.2; },
      [](hhr::ModelParams& m) { m.eta = 0.1; },
      [](hhr::ModelParams& m) { m.alpha = 0.2; m.kappa = 3.0; },
  };
  bool nested = true;
  int checked = 0;
  for (const auto& tweak : sweep) {
    hhr::ModelParams m = d.p;
    tweak(m);
    const auto r = hhr::a_bounds(hhr::validate_or_throw(m), d.dist);
    if (!r.bound_Em || !r.bound_EmQS) {
      nested = false;
      continue;
    }
    nested = nested && *r.bound_EmQS <= *r.bound_Em && *r.bound_Em <= r.bound_E;
    ++checked;
  }

  hhr::ModelParams flat = d.p;
  flat.eta = 0.0;
  const auto r0 = hhr::a_bounds(hhr::validate_or_throw(flat), d.dist);
  const double cap = flat.kappa * flat.kappa / (2.0 * flat.sigma * flat.sigma);
  const bool exact = r0.c_l.value == cap;
  return {diff <= 1e-10 && nested && checked == 5 && exact,
          fmt("c_l %.10f vs scan %.10f (diff %.1e), eta=0 c_l - cap = %.1e", d.adm.c_l.value, scan, diff,
              r0.c_l.value - cap)};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu: %s %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
