#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "hhr/core_model.hpp"
#include "hhr/payoff.hpp"

namespace hhr {

struct Transition {
  std::size_t from = 0;
  std::size_t to = 0;
  PiecewiseConstant rate;          // mu_jk(t) >= 0
  Payoff payment = Payoff::zero();  // h_jk(t, x), paid on the jump
};

// Insured-state chain with piecewise-constant intensities and the policy
// functions: terminal benefit f_j, payment rate g_j, transition payments h_jk.
struct PolicySpec {
  std::string name;
  std::vector<std::string> states;
  std::vector<Transition> transitions;
  std::vector<Payoff> terminal;  // f_j, one per state
  std::vector<Payoff> rate;      // g_j, one per state
  std::size_t initial_state = 0;

  std::size_t n_states() const { return states.size(); }
  std::size_t state_index(const std::string& label) const;
  // Generator matrix Q(t): off-diagonal mu_jk(t), rows summing to zero.
  Eigen::MatrixXd generator(double t) const;
  double exit_rate(std::size_t j, double t) const;
  double max_exit_rate() const;
  // Breakpoints of any intensity strictly inside (t, s).
  std::vector<double> breakpoints(double t, double s) const;
  // Throws Config on inconsistent sizes, unknown states, self transitions,
  // negative rates.
  void check() const;

  // {"name", "states", "initial_state", "intensities": [{from, to,
  // rate_segments, payment}], "functions": {"terminal": {state: payoff},
  // "rate": {state: payoff}}}, or {"template": name, ...parameters}.
  static PolicySpec from_json(const nlohmann::json& j, const ModelParams& model);
  nlohmann::json to_json() const;
};

enum class TransitionMethod { MatrixExponential, Ode };

// p_ij(t, s).  MatrixExponential multiplies exp(Q (segment length)) over the
// constant-intensity segments; Ode integrates the backward Kolmogorov
// system with adaptive Dormand-Prince 5(4).  TimeOrder unless 0 <= t <= s.
Eigen::MatrixXd transition_probs(const PolicySpec& policy, double t, double s,
                                 TransitionMethod method = TransitionMethod::MatrixExponential);

// theta_j(s, x) = g_j(x) + sum_{k != j} mu_jk(s) h_jk(x).
double theta_rate(const PolicySpec& policy, std::size_t j, double s, double x);

// Built-in templates on {alive, dead} unless noted.
// Unit-linked pure endowment: f_alive = benefit (default x).
PolicySpec pure_endowment(double mortality, const Payoff& benefit = Payoff::linear());
// Term insurance: h_alive,dead = benefit (default 1).
PolicySpec term_insurance(double mortality, const Payoff& benefit = Payoff::constant(1.0));
// Endowment with guarantee: f_alive = h_alive,dead = max(G, x).
PolicySpec endowment_guarantee(double mortality, double G);
// {active, disabled, dead}: annuity rate while disabled, unit-linked death
// benefit x, unit-linked survival benefit x at T in the active state.
PolicySpec disability_annuity(double incidence, double recovery, double mortality_active,
                              double mortality_disabled, double annuity_rate);

std::vector<std::string> template_names();
PolicySpec make_template(const std::string& name, const ModelParams& model, const nlohmann::json& parameters);
// Every template at its default parameters (G = S0).
std::vector<PolicySpec> builtin_templates(const ModelParams& model);

}  // namespace hhr
