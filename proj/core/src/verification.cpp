#include "hhr/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "hhr/hawkes.hpp"
#include "hhr/parallel.hpp"
#include "hhr/pide.hpp"
#include "hhr/rng.hpp"
#include "hhr/sde_simulator.hpp"
#include "hhr/special_functions.hpp"
#include "hhr/thiele.hpp"

namespace hhr {

using nlohmann::json;

namespace {

constexpr std::uint64_t kRetryMix = 0xD1B54A32D192ED03ULL;

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

json estimate_json(const MeanEstimate& e) { return {{"mean", e.mean}, {"se", e.se}, {"n", e.n}}; }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Simulated inputs shared by several checks, keyed by seed so a retry
// draws fresh paths.
class Context {
 public:
  Context(const RunConfig& config, const ValidatedModel& model, const MeasureSelection& selection)
      : config_(config), model_(model), selection_(selection) {}

  const RunConfig& config() const { return config_; }
  const ValidatedModel& model() const { return model_; }
  const ModelParams& params() const { return model_.params(); }
  const JumpDistribution& dist() const { return config_.jump; }
  const MeasureSelection& selection() const { return selection_; }
  const RunSettings& run() const { return config_.run; }
  const Tolerances& tol() const { return config_.run.tolerances; }

  const std::vector<HawkesPath>& hawkes(std::uint64_t seed) {
    auto it = hawkes_.find(seed);
    if (it == hawkes_.end()) it = hawkes_.emplace(seed, simulate_hawkes_paths(model_, dist(), seed, run().paths)).first;
    return it->second;
  }

  // P paths carrying X^(a); twice the configured count so the moment
  // estimate can be compared at n and 2n.
  const PathBundle& weighted(std::uint64_t seed) {
    auto it = weighted_.find(seed);
    if (it == weighted_.end()) {
      SimulationOptions o;
      o.n_paths = 2 * run().paths;
      o.n_steps = run().steps;
      o.seed = seed;
      o.measure = SimMeasure::P;
      o.selection = selection_;
      o.observation_times = {0.5 * params().T};
      it = weighted_.emplace(seed, simulate(model_, dist(), o)).first;
    }
    return it->second;
  }

  const PathBundle& risk_neutral(std::uint64_t seed) {
    auto it = risk_neutral_.find(seed);
    if (it == risk_neutral_.end()) {
      SimulationOptions o;
      o.n_paths = run().price_paths;
      o.n_steps = run().steps;
      o.seed = seed;
      o.measure = SimMeasure::Q;
      o.selection = selection_;
      it = risk_neutral_.emplace(seed, simulate(model_, dist(), o)).first;
    }
    return it->second;
  }

 private:
  const RunConfig& config_;
  const ValidatedModel& model_;
  MeasureSelection selection_;
  std::map<std::uint64_t, std::vector<HawkesPath>> hawkes_;
  std::map<std::uint64_t, PathBundle> weighted_;
  std::map<std::uint64_t, PathBundle> risk_neutral_;
};

using CheckFn = std::function<void(Context&, CheckResult&, std::uint64_t)>;

struct CheckSpec {
  std::string name;
  int group;
  std::optional<int> criterion;
  std::string claim;
  std::string reference_kind;
  bool statistical;
  CheckFn run;
};

// (1) compensators under P

void check_hawkes_mean(Context& c, CheckResult& r, std::uint64_t seed) {
  const auto& paths = c.hawkes(seed);
  const double T = c.params().T;
  std::vector<double> lam(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) lam[i] = paths[i].lambda_at(T);
  const MeanEstimate e = estimate_mean(lam);
  const double ref = mean_intensity_ode(c.model(), T).Elambda;
  r.values = {{"t", T}, {"lambda", estimate_json(e)}, {"z", e.z_score(ref)}};
  r.reference = {{"E_lambda", ref}};
  r.tolerance = {{"k_se", c.tol().k_se}, {"max_seconds", 30.0}};
  r.pass = e.within(ref, c.tol().k_se);
  r.note = "mean " + fmt(e.mean) + " vs " + fmt(ref) + ", z " + fmt(e.z_score(ref), 3);
}

json residual_json(const ResidualReport& rep) {
  json lines = json::array();
  for (const auto& l : rep.lines) {
    lines.push_back({{"t", l.t},
                     {"N_minus_LambdaN", estimate_json(l.n_residual)},
                     {"L_minus_LambdaL", estimate_json(l.l_residual)},
                     {"flagged", l.flagged}});
  }
  return lines;
}

void check_compensator_p(Context& c, CheckResult& r, std::uint64_t seed) {
  const auto& paths = c.hawkes(seed);
  const double T = c.params().T;
  const std::vector<double> times{0.5 * T, T};
  const ResidualReport rep = martingale_residual_test(paths, times, c.dist().mean(), c.tol().k_se);
  r.values = {{"lines", residual_json(rep)}};
  r.reference = {{"mean", 0.0}};
  r.tolerance = {{"k_se", c.tol().k_se}};
  r.pass = rep.all_pass();
  double worst = 0.0;
  for (const auto& l : rep.lines)
    worst = std::max({worst, std::abs(l.n_residual.z_score(0.0)), std::abs(l.l_residual.z_score(0.0))});
  r.note = "max |z| " + fmt(worst, 3) + " over t in {T/2, T}";
}

void check_sde_compensator(Context& c, CheckResult& r, std::uint64_t seed) {
  const PathBundle& b = c.weighted(seed);
  const std::size_t k = b.obs_index(c.params().T);
  std::vector<double> n_res(b.n_paths), l_res(b.n_paths);
  for (std::size_t p = 0; p < b.n_paths; ++p) {
    const std::size_t cell = p * b.n_obs + k;
    n_res[p] = static_cast<double>(b.N[cell]) - b.LambdaN[cell];
    l_res[p] = b.L[cell] - b.LambdaL[cell];
  }
  const MeanEstimate en = estimate_mean(n_res);
  const MeanEstimate el = estimate_mean(l_res);
  const VarianceMoments vm = variance_moment_ode(c.model(), c.dist(), c.params().T);
  const MeanEstimate iv = estimate_mean(b.column(b.int_v, k));
  r.values = {{"N_minus_LambdaN", estimate_json(en)},
              {"L_minus_LambdaL", estimate_json(el)},
              {"int_v", estimate_json(iv)},
              {"truncation_fraction", b.truncation_fraction()}};
  r.reference = {{"mean_residual", 0.0}, {"int_Ev", vm.int_Ev}};
  r.tolerance = {{"k_se", c.tol().k_se}};
  r.pass = en.within(0.0, c.tol().k_se) && el.within(0.0, c.tol().k_se) && iv.within(vm.int_Ev, c.tol().k_se);
  r.note = "z(N) " + fmt(en.z_score(0.0), 3) + ", z(L) " + fmt(el.z_score(0.0), 3) + ", z(int v) " +
           fmt(iv.z_score(vm.int_Ev), 3);
}

// (2) compensator under Q(a) by X-weighting

void check_compensator_q(Context& c, CheckResult& r, std::uint64_t seed) {
  const PathBundle& b = c.weighted(seed);
  json lines = json::array();
  bool pass = true;
  double worst = 0.0;
  for (double t : {0.5 * c.params().T, c.params().T}) {
    const std::size_t k = b.obs_index(t);
    std::vector<double> w(b.n_paths);
    for (std::size_t p = 0; p < b.n_paths; ++p) {
      const std::size_t cell = p * b.n_obs + k;
      w[p] = b.X[cell] * (static_cast<double>(b.N[cell]) - b.LambdaN[cell]);
    }
    const MeanEstimate e = estimate_mean(w);
    pass = pass && e.within(0.0, c.tol().k_se);
    worst = std::max(worst, std::abs(e.z_score(0.0)));
    lines.push_back({{"t", t}, {"X_times_N_minus_LambdaN", estimate_json(e)}});
  }
  r.values = {{"a", c.selection().a}, {"lines", lines}};
  r.reference = {{"mean", 0.0}};
  r.tolerance = {{"k_se", c.tol().k_se}};
  r.pass = pass;
  r.note = "a " + fmt(c.selection().a) + ", max |z| " + fmt(worst, 3);
}

// (3) density normalisation

void check_density(Context& c, CheckResult& r, std::uint64_t seed) {
  const PathBundle& b = c.weighted(seed);
  const std::size_t k = b.obs_index(c.params().T);
  const std::vector<double> x = b.column(b.X, k);
  const MeanEstimate e = estimate_mean(x);
  const double s = 2.0 + c.selection().epsilon1;
  const std::size_t half = x.size() / 2;
  double m_half = 0.0, m_full = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = std::pow(x[i], s);
    m_full += p;
    if (i < half) m_half += p;
  }
  m_half /= static_cast<double>(half);
  m_full /= static_cast<double>(x.size());
  const double drift = std::abs(m_full - m_half) / m_half;
  r.values = {{"X_T", estimate_json(e)},
              {"moment_order", s},
              {"moment_n", m_half},
              {"moment_2n", m_full},
              {"moment_change", drift}};
  r.reference = {{"E_X_T", 1.0}};
  r.tolerance = {{"k_se", c.tol().k_se}, {"moment_change", c.tol().moment_drift}};
  r.pass = e.within(1.0, c.tol().k_se) && drift < c.tol().moment_drift;
  r.note = "E[X_T] " + fmt(e.mean) + " (z " + fmt(e.z_score(1.0), 3) + "), moment change " + fmt(drift, 3);
}

// (4) Girsanov price checks

void check_martingale_measure(Context& c, CheckResult& r, std::uint64_t seed) {
  const PathBundle& b = c.risk_neutral(seed);
  const auto& p = c.params();
  const std::size_t k = b.obs_index(p.T);
  std::vector<double> d = b.column(b.S, k);
  const double df = std::exp(-p.r * p.T);
  for (double& s : d) s *= df;
  const MeanEstimate e = estimate_mean(d);
  r.values = {{"discounted_S_T", estimate_json(e)}, {"z", e.z_score(p.S0)}};
  r.reference = {{"S0", p.S0}};
  r.tolerance = {{"k_se", c.tol().k_se}};
  r.pass = e.within(p.S0, c.tol().k_se);
  r.note = "mean " + fmt(e.mean) + " vs " + fmt(p.S0) + ", z " + fmt(e.z_score(p.S0), 3);
}

void check_girsanov_price(Context& c, CheckResult& r, std::uint64_t seed) {
  const auto& p = c.params();
  const Payoff payoff = Payoff::guarantee(p.S0 * std::exp(p.r * p.T));
  const GirsanovReport g =
      girsanov_cross_check(c.model(), c.dist(), c.selection(), payoff, c.run().girsanov_paths, c.run().steps, seed, true);
  r.values = {{"payoff", payoff.describe()},
              {"weighted_P", estimate_json(g.weighted)},
              {"direct_Q", estimate_json(g.direct)},
              {"difference", g.difference},
              {"se_pooled", g.se_pooled}};
  r.reference = {{"difference", 0.0}};
  r.tolerance = {{"k_se", c.tol().k_se}};
  r.pass = std::abs(g.difference) <= c.tol().k_se * g.se_pooled;
  r.note = "P-weighted " + fmt(g.weighted.mean) + " vs Q " + fmt(g.direct.mean);
}

// (5) special-function oracles

void check_special_functions(Context& c, CheckResult& r, std::uint64_t seed) {
  const auto& p = c.params();
  const double tol = c.tol().oracle_rel;
  json values, reference;
  bool pass = true;
  bool skipped_any = false;

  // 1F1 identities.
  double worst_identity = 0.0;
  worst_identity = std::max(worst_identity, std::abs(hyp1f1(0.7, 1.9, 0.0) - 1.0));
  for (double z : {-12.0, -1.5, 2.0, 10.0}) worst_identity = std::max(worst_identity, rel(hyp1f1(1.3, 1.3, z), std::exp(z)));
  const double kummer_args[][3] = {{0.5, 1.5, -10.0}, {2.5, 1.0, 5.0}, {1.2, 3.4, -25.0}, {0.3, 0.8, 40.0}};
  for (const auto& k : kummer_args) {
    worst_identity = std::max(worst_identity,
                              rel(hyp1f1(k[0], k[1], k[2]), std::exp(k[2]) * hyp1f1(k[1] - k[0], k[1], -k[2])));
  }
  values["hyp1f1_identity_max_rel"] = worst_identity;
  reference["hyp1f1_identities"] = "z=0 gives 1; a=b gives e^z; Kummer transform";
  pass = pass && worst_identity <= c.tol().hyp1f1_rel;

  // Negative moment against exact noncentral chi-square transitions.
  const double s = 0.5;
  if (2.0 * p.kappa * p.vbar > 2.0 * s * p.sigma * p.sigma) {
    const std::size_t n = c.run().oracle_samples;
    std::vector<double> draws(n);
    parallel_for(n, [&](std::size_t i) {
      Philox4x32 gen = make_stream(seed, i, Substream::Oracle);
      draws[i] = std::pow(sample_cir_step(gen, p.v0, p.T, p.kappa, p.vbar, p.sigma), -s);
    });
    const MeanEstimate e = estimate_mean(draws);
    const double exact = cir_neg_moment(p.kappa, p.vbar, p.sigma, p.v0, p.T, s);
    values["cir_neg_moment"] = {{"s", s}, {"t", p.T}, {"formula", exact}, {"mc", estimate_json(e)}, {"rel_diff", rel(exact, e.mean)}};
    pass = pass && rel(exact, e.mean) <= tol;
  } else {
    values["cir_neg_moment"] = "skipped: second moment of v^-s infinite";
    skipped_any = true;
  }

  // Integrated inverse variance against fine-step exact-transition paths.
  const double sig2 = p.sigma * p.sigma;
  if (2.0 * p.kappa * p.vbar > sig2) {
    const double c_max = 0.5 * std::pow((2.0 * p.kappa * p.vbar - sig2) / (2.0 * p.sigma), 2);
    const double cc = 0.25 * c_max;
    const std::size_t n = c.run().oracle_paths;
    const int steps = c.run().oracle_steps;
    const double dt = p.T / steps;
    std::vector<double> draws(n);
    parallel_for(n, [&](std::size_t i) {
      Philox4x32 gen = make_stream(seed, i, Substream::Oracle);
      double v = p.v0;
      double integral = 0.0;
      for (int k = 0; k < steps; ++k) {
        const double next = sample_cir_step(gen, v, dt, p.kappa, p.vbar, p.sigma);
        integral += 0.5 * dt * (1.0 / v + 1.0 / next);
        v = next;
      }
      draws[i] = std::exp(cc * integral);
    });
    const MeanEstimate e = estimate_mean(draws);
    const double exact = integrated_inverse_cir_exp(p.kappa, p.vbar, p.sigma, p.v0, p.T, cc);
    values["integrated_inverse_cir_exp"] = {
        {"c", cc}, {"T", p.T}, {"steps", steps}, {"formula", exact}, {"mc", estimate_json(e)}, {"rel_diff", rel(exact, e.mean)}};
    pass = pass && rel(exact, e.mean) <= tol;
  } else {
    values["integrated_inverse_cir_exp"] = "skipped: 2 kappa vbar <= sigma^2";
    skipped_any = true;
  }
  r.values = values;
  r.reference = reference;
  r.tolerance = {{"mc_rel", tol}, {"identity_rel", c.tol().hyp1f1_rel}};
  r.pass = pass;
  r.note = "identities " + fmt(worst_identity, 3) + (skipped_any ? ", some oracles not applicable" : "");
}

// (6) PIDE exactness and Monte Carlo agreement

void check_pide_exact(Context& c, CheckResult& r, std::uint64_t) {
  const auto& p = c.params();
  double worst_linear = 0.0, worst_constant = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  const PIDESolution lin = solve_price_pide(Payoff::linear(), p.T, c.model(), c.dist(), c.selection(), c.run().grid);
  const PIDESolution one = solve_price_pide(Payoff::constant(1.0), p.T, c.model(), c.dist(), c.selection(), c.run().grid);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double disc = std::exp(-p.r * p.T);
  const Grid4& g = lin.grid;
  for (std::size_t k = 0; k < g.nz(); ++k)
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i) {
        worst_linear = std::max(worst_linear, rel(lin.at(i, j, k), g.x[i]));
        worst_constant = std::max(worst_constant, rel(one.at(i, j, k), disc));
      }
  r.values = {{"grid", c.run().grid.to_string()},
              {"linear_max_rel", worst_linear},
              {"constant_max_rel", worst_constant},
              {"cfl_number", lin.diagnostics.cfl_number}};
  r.reference = {{"linear", "U = x"}, {"constant", disc}};
  r.tolerance = {{"linear_rel", c.tol().pide_linear}, {"constant_rel", c.tol().pide_constant}, {"max_seconds", 300.0}};
  r.pass = worst_linear <= c.tol().pide_linear && worst_constant <= c.tol().pide_constant && seconds < 300.0;
  r.note = "linear " + fmt(worst_linear, 3) + ", constant " + fmt(worst_constant, 3);
}

void check_pide_vs_mc(Context& c, CheckResult& r, std::uint64_t seed) {
  const auto& p = c.params();
  const Payoff payoff = Payoff::guarantee(p.S0 * std::exp(p.r * p.T));
  const PIDESolution sol = solve_price_pide(payoff, p.T, c.model(), c.dist(), c.selection(), c.run().grid);
  const double pide = sol.value_at(p.S0, p.v0, p.lambda0);
  const PathBundle& b = c.risk_neutral(seed);
  const std::size_t k = b.obs_index(p.T);
  std::vector<double> pay = b.column(b.S, k);
  const double df = std::exp(-p.r * p.T);
  for (double& s : pay) s = df * payoff(s);
  const MeanEstimate e = estimate_mean(pay);
  const double allowed = c.tol().pide_mc_rel * std::abs(e.mean) + c.tol().k_se * e.se;
  r.values = {{"payoff", payoff.describe()}, {"pide", pide}, {"mc", estimate_json(e)}, {"difference", pide - e.mean}};
  r.reference = {{"mc_mean", e.mean}};
  r.tolerance = {{"rel", c.tol().pide_mc_rel}, {"k_se", c.tol().k_se}, {"allowed", allowed}};
  r.pass = std::abs(pide - e.mean) <= allowed;
  r.note = "PIDE " + fmt(pide, 7) + " vs MC " + fmt(e.mean, 7) + " +- " + fmt(e.se, 3);
}

// (7) Thiele reserves

ReserveOptions reserve_options(const Context& c) {
  ReserveOptions o;
  o.grid = c.run().reserve_grid;
  return o;
}

void check_thiele_consistency(Context& c, CheckResult& r, std::uint64_t) {
  const auto& p = c.params();
  json per_policy = json::array();
  bool pass = true;
  double worst = 0.0;
  for (const auto& policy : c.config().policies()) {
    const ReserveOptions o = reserve_options(c);
    const ReserveSurface q = reserve_quadrature(policy, c.model(), c.dist(), c.selection(), o);
    const ReserveSurface d = solve_thiele_pide(policy, c.model(), c.dist(), c.selection(), o);
    const CrossValidation cv = cross_validate(q, d, p, c.tol().thiele_rel);
    per_policy.push_back({{"policy", policy.name},
                          {"probes", cv.probes.size()},
                          {"max_rel_diff", cv.max_rel_diff},
                          {"V0_quadrature", q.value_at(policy.initial_state, p.S0, p.v0, p.lambda0)},
                          {"V0_pide", d.value_at(policy.initial_state, p.S0, p.v0, p.lambda0)},
                          {"simpson_panels", q.simpson_panels},
                          {"richardson_error", q.richardson_error}});
    pass = pass && cv.pass;
    worst = std::max(worst, cv.max_rel_diff);
  }

  // x-independent term insurance over ten years against the classical closed form.
  ModelParams long_run = p;
  long_run.T = 10.0;
  const ValidatedModel m10 = validate_or_throw(long_run);
  const MeasureSelection s10 = select_measure(a_bounds(m10, c.dist(), c.config().admissibility_options()), 0.0, MeasureLevel::E);
  const double mu = 0.02;
  const PolicySpec term = term_insurance(mu);
  ReserveOptions o10 = reserve_options(c);
  const double vq = reserve_quadrature(term, m10, c.dist(), s10, o10).value_at(0, p.S0, p.v0, p.lambda0);
  const double vp = solve_thiele_pide(term, m10, c.dist(), s10, o10).value_at(0, p.S0, p.v0, p.lambda0);
  const double closed = mu / (p.r + mu) * (-std::expm1(-(p.r + mu) * 10.0));
  const double err = std::max(std::abs(vq - closed), std::abs(vp - closed));
  pass = pass && err <= c.tol().thiele_classical_abs;

  r.values = {{"policies", per_policy},
              {"classical", {{"mortality", mu}, {"horizon", 10.0}, {"quadrature", vq}, {"pide", vp}, {"max_abs_err", err}}}};
  r.reference = {{"classical_closed_form", closed}};
  r.tolerance = {{"probe_rel", c.tol().thiele_rel}, {"classical_abs", c.tol().thiele_classical_abs}};
  r.pass = pass;
  r.note = "max probe diff " + fmt(worst, 3) + ", classical err " + fmt(err, 3);
}

void check_thiele_exact(Context& c, CheckResult& r, std::uint64_t) {
  const auto& p = c.params();
  PolicySpec unit;
  unit.name = "unit_terminal";
  unit.states = {"alive"};
  unit.terminal = {Payoff::constant(1.0)};
  unit.rate = {Payoff::zero()};
  PolicySpec zero = term_insurance(0.02, Payoff::zero());
  zero.name = "zero";
  const ReserveOptions o = reserve_options(c);
  const double disc = std::exp(-p.r * p.T);
  double worst_unit = 0.0, worst_zero = 0.0;
  for (const auto& s : {reserve_quadrature(unit, c.model(), c.dist(), c.selection(), o),
                        solve_thiele_pide(unit, c.model(), c.dist(), c.selection(), o)}) {
    for (double v : s.values[0]) worst_unit = std::max(worst_unit, rel(v, disc));
  }
  for (const auto& s : {reserve_quadrature(zero, c.model(), c.dist(), c.selection(), o),
                        solve_thiele_pide(zero, c.model(), c.dist(), c.selection(), o)}) {
    for (const auto& f : s.values)
      for (double v : f) worst_zero = std::max(worst_zero, std::abs(v));
  }
  r.values = {{"unit_terminal_max_rel", worst_unit}, {"zero_policy_max_abs", worst_zero}};
  r.reference = {{"unit_terminal", disc}, {"zero_policy", 0.0}};
  r.tolerance = {{"unit_rel", 1e-6}, {"zero_abs", 0.0}};
  r.pass = worst_unit <= 1e-6 && worst_zero == 0.0;
  r.note = "unit " + fmt(worst_unit, 3) + ", zero " + fmt(worst_zero, 3);
}

void check_transition_probs(Context& c, CheckResult& r, std::uint64_t) {
  const auto& p = c.params();
  const PolicySpec two = term_insurance(0.02);
  const double paa = transition_probs(two, 0.0, 10.0)(0, 0);
  const double paa_ode = transition_probs(two, 0.0, 10.0, TransitionMethod::Ode)(0, 0);
  double row_err = 0.0, ck_err = 0.0, route_err = 0.0;
  for (const auto& policy : c.config().policies()) {
    const double T = p.T;
    const double triples[][3] = {{0.0, 0.3 * T, T}, {0.1 * T, 0.5 * T, 0.9 * T}, {0.25 * T, 0.75 * T, T}};
    for (const auto& t : triples) {
      const Eigen::MatrixXd a = transition_probs(policy, t[0], t[1]);
      const Eigen::MatrixXd b = transition_probs(policy, t[1], t[2]);
      const Eigen::MatrixXd whole = transition_probs(policy, t[0], t[2]);
      const Eigen::MatrixXd ode = transition_probs(policy, t[0], t[2], TransitionMethod::Ode);
      ck_err = std::max(ck_err, (a * b - whole).cwiseAbs().maxCoeff());
      route_err = std::max(route_err, (ode - whole).cwiseAbs().maxCoeff());
      row_err = std::max(row_err, (whole.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
  }
  const double closed = std::exp(-0.2);
  r.values = {{"p_alive_alive_10y", paa},
              {"p_alive_alive_10y_ode", paa_ode},
              {"row_sum_max_err", row_err},
              {"chapman_kolmogorov_max_err", ck_err},
              {"matrix_exponential_vs_ode", route_err}};
  r.reference = {{"p_alive_alive_10y", closed}};
  r.tolerance = {{"p_rel", 1e-10}, {"row_sum", 1e-10}, {"chapman_kolmogorov", 1e-8}, {"routes", 1e-8}};
  r.pass = rel(paa, closed) <= 1e-10 && rel(paa_ode, closed) <= 1e-8 && row_err <= 1e-10 && ck_err <= 1e-8 &&
           route_err <= 1e-8;
  r.note = "p_aa " + fmt(paa, 8) + ", CK " + fmt(ck_err, 3);
}

// Admissibility ledger

// sup{c : predicate} from a dense scan, refined by a bracketing root
// finder on log(threshold) - log M_J(Lambda(c)).
double scan_c_l(const ValidatedModel& model, const JumpDistribution& dist, int points) {
  const double cap = c_cap(model);
  int last_true = -1;
  for (int k = 0; k <= points; ++k) {
    if (novikov_predicate(model, dist, cap * k / points)) {
      last_true = k;
    } else {
      break;
    }
  }
  if (last_true == points) return cap;
  if (last_true < 0) return 0.0;
  const double thr = std::log(mgf_threshold(model));
  auto h = [&](double cc) {
    const double lam = lambda_cap(model, cc);
    if (!(lam < dist.epsilon_j())) return -1e300;
    return thr - std::log(dist.mgf(lam));
  };
  const double lo = cap * last_true / points;
  const double hi = cap * (last_true + 1) / points;
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(h, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (root.first + root.second);
}

void check_admissibility(Context& c, CheckResult& r, std::uint64_t) {
  const auto& p = c.params();
  const AdmissibilityOptions opt = c.config().admissibility_options();
  const AdmissibilityReport rep = a_bounds(c.model(), c.dist(), opt);
  const double oracle = scan_c_l(c.model(), c.dist(), 1000000);
  const double c_l_err = std::abs(rep.c_l.value - oracle);

  ModelParams q = p;
  const std::vector<std::pair<std::string, std::function<void(ModelParams&)>>> sweep = {
      {"configured", [](ModelParams&) {}},
      {"rho=-0.8", [](ModelParams& m) { m.rho = -0.8; }},
      {"sigma=0.2", [](ModelParams& m) { m.sigma = 0.2; }},
      {"eta=0.1", [](ModelParams& m) { m.eta = 0.1; }},
      {"alpha=0.2,kappa=3", [](ModelParams& m) { m.alpha = 0.2 * m.beta; m.kappa = 3.0; }},
  };
  json nest = json::array();
  bool nested = true;
  for (const auto& [label, tweak] : sweep) {
    ModelParams m = p;
    tweak(m);
    const ValidationResult vr = validate(m);
    if (!vr.ok()) {
      nest.push_back({{"set", label}, {"status", "invalid parameters"}});
      continue;
    }
    const AdmissibilityReport b = a_bounds(*vr.model, c.dist(), opt);
    bool ok = true;
    if (b.bound_Em) ok = ok && *b.bound_Em <= b.bound_E;
    if (b.bound_EmQS && b.bound_Em) ok = ok && *b.bound_EmQS <= *b.bound_Em;
    nested = nested && ok;
    nest.push_back({{"set", label},
                    {"E", b.bound_E},
                    {"Em", b.bound_Em ? json(*b.bound_Em) : json(nullptr)},
                    {"EmQS", b.bound_EmQS ? json(*b.bound_EmQS) : json(nullptr)},
                    {"nested", ok}});
  }

  q.eta = 0.0;
  const ValidatedModel m0 = validate_or_throw(q);
  const AdmissibilityReport r0 = a_bounds(m0, c.dist(), opt);
  const bool eta0_exact = r0.c_l.value == c_cap(m0);

  r.values = {{"c_l", rep.c_l.value},
              {"c_l_method", rep.c_l.method},
              {"c_l_scan_oracle", oracle},
              {"c_l_abs_diff", c_l_err},
              {"nesting", nest},
              {"eta0_c_l", r0.c_l.value},
              {"eta0_c_cap", c_cap(m0)}};
  r.reference = {{"c_l", oracle}, {"eta0_c_l", c_cap(m0)}};
  r.tolerance = {{"c_l_abs", c.tol().c_l_agreement}, {"eta0", "exact"}};
  r.pass = c_l_err <= c.tol().c_l_agreement && nested && eta0_exact;
  r.note = "c_l " + fmt(rep.c_l.value, 10) + ", |diff| " + fmt(c_l_err, 3);
}

const std::vector<CheckSpec>& suite() {
  static const std::vector<CheckSpec> specs = {
      {"hawkes_mean_intensity", 1, 1, "mean of lambda_T matches the linear moment ODE", "closed_form", true,
       check_hawkes_mean},
      {"compensator_P", 1, 2, "N - Lambda^N and L - Lambda^L are P-martingales", "exact_identity", true,
       check_compensator_p},
      {"sde_compensator_and_variance_mean", 1, std::nullopt,
       "coupled-SDE residuals vanish and E[int v] matches its moment ODE", "independent_oracle", true,
       check_sde_compensator},
      {"compensator_Q_weighted", 2, 3, "X^(a) (N - Lambda^N) has P-mean zero", "exact_identity", true,
       check_compensator_q},
      {"density_normalization", 3, 4, "E[X_T^(a)] = 1 and its 2+eps1 moment is stable", "exact_identity", true,
       check_density},
      {"martingale_measure_Q", 4, 5, "e^{-rT} S_T has Q(a)-mean S0", "exact_identity", true,
       check_martingale_measure},
      {"girsanov_price_cross_check", 4, std::nullopt, "P-weighted and Q-simulated prices agree", "independent_oracle",
       true, check_girsanov_price},
      {"special_function_oracles", 5, 6, "CIR negative moment, inverse-CIR exponential moment, 1F1 identities",
       "independent_oracle", true, check_special_functions},
      {"pide_exact_solutions", 6, 7, "PIDE reproduces U = x and U = e^{-r tau}", "closed_form", false,
       check_pide_exact},
      {"pide_vs_monte_carlo", 6, 8, "PIDE guarantee price matches Q(a) Monte Carlo", "independent_oracle", true,
       check_pide_vs_mc},
      {"thiele_quadrature_vs_pide", 7, 9, "quadrature and Thiele PIDE reserves agree; classical reduction",
       "independent_oracle", false, check_thiele_consistency},
      {"thiele_exact_layers", 7, std::nullopt, "unit terminal benefit discounts exactly; zero policy is zero",
       "closed_form", false, check_thiele_exact},
      {"transition_probabilities", 7, std::nullopt, "Kolmogorov solutions: closed form, Chapman-Kolmogorov, two routes",
       "closed_form", false, check_transition_probs},
      {"admissibility_ledger", 8, 10, "c_l against a scan oracle, bound nesting, eta = 0 cap", "independent_oracle",
       false, check_admissibility},
  };
  return specs;
}

}  // namespace

std::vector<std::string> check_names() {
  std::vector<std::string> out;
  for (const auto& s : suite()) out.push_back(s.name);
  return out;
}

bool VerificationReport::all_hard_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.hard || c.skipped || c.pass; });
}

json VerificationReport::to_json() const {
  json list = json::array();
  for (const auto& c : checks) {
    list.push_back({{"name", c.name},
                    {"group", c.group},
                    {"criterion", c.criterion ? json(*c.criterion) : json(nullptr)},
                    {"claim", c.claim},
                    {"values", c.values},
                    {"reference", c.reference},
                    {"reference_kind", c.reference_kind},
                    {"tolerance", c.tolerance},
                    {"status", c.status()},
                    {"pass", c.pass},
                    {"hard", c.hard},
                    {"statistical", c.statistical},
                    {"attempts", c.attempts},
                    {"seed", c.seed},
                    {"summary", c.note}});
  }
  std::size_t passed = 0;
  for (const auto& c : checks) passed += c.pass ? 1 : 0;
  return {{"config", config},
          {"admissibility", admissibility},
          {"a", a},
          {"checks", list},
          {"summary", {{"checks", checks.size()}, {"passed", passed}, {"all_hard_pass", all_hard_pass()}}}};
}

json VerificationReport::timing_json() const {
  json j = json::object();
  double total = 0.0;
  for (const auto& c : checks) {
    j[c.name] = c.seconds;
    total += c.seconds;
  }
  j["total"] = total;
  return j;
}

std::string VerificationReport::table() const {
  std::ostringstream os;
  os << std::left << std::setw(36) << "check" << std::setw(6) << "crit" << std::setw(9) << "status"
     << std::setw(20) << "reference" << "summary\n";
  for (const auto& c : checks) {
    os << std::left << std::setw(36) << c.name << std::setw(6) << (c.criterion ? std::to_string(*c.criterion) : "-")
       << std::setw(9) << c.status() << std::setw(20) << c.reference_kind << c.note
       << (c.attempts > 1 ? " (retried)" : "") << "\n";
  }
  return os.str();
}

VerificationReport run_verification(const RunConfig& config, const VerificationOptions& options) {
  const ValidatedModel model = config.validated();
  const AdmissibilityReport adm = a_bounds(model, config.jump, config.admissibility_options());
  const MeasureSelection selection = config.select(adm);

  VerificationReport report;
  report.config = config.to_json();
  report.admissibility = to_json(adm);
  report.a = selection.a;

  Context ctx(config, model, selection);
  for (const auto& entry : suite()) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), entry.name) == options.only.end())
      continue;
    CheckResult r;
    r.name = entry.name;
    r.group = entry.group;
    r.criterion = entry.criterion;
    r.claim = entry.claim;
    r.reference_kind = entry.reference_kind;
    r.statistical = entry.statistical;
    r.seed = config.run.seed;
    const auto t0 = std::chrono::steady_clock::now();
    auto attempt = [&](std::uint64_t seed) {
      try {
        entry.run(ctx, r, seed);
      } catch (const Error& e) {
        r.pass = false;
        r.note = std::string(to_string(e.kind())) + ": " + e.what();
      }
    };
    attempt(r.seed);
    if (entry.statistical && !r.pass) {
      r.attempts = 2;
      r.seed = config.run.seed ^ kRetryMix;
      attempt(r.seed);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (options.on_check) options.on_check(r);
    report.checks.push_back(std::move(r));
  }
  return report;
}

}  // namespace hhr
