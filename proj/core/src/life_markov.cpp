#include "hhr/life_markov.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/numeric/odeint.hpp>
#include <nlohmann/json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace hhr {

std::size_t PolicySpec::state_index(const std::string& label) const {
  const auto it = std::find(states.begin(), states.end(), label);
  if (it == states.end()) raise(ErrorKind::Config, "unknown state '" + label + "' in policy '" + name + "'");
  return static_cast<std::size_t>(it - states.begin());
}

Eigen::MatrixXd PolicySpec::generator(double t) const {
  const auto n = static_cast<Eigen::Index>(n_states());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (const auto& tr : transitions) {
    const double mu = tr.rate(t);
    q(tr.from, tr.to) += mu;
    q(tr.from, tr.from) -= mu;
  }
  return q;
}

double PolicySpec::exit_rate(std::size_t j, double t) const {
  double total = 0.0;
  for (const auto& tr : transitions) {
    if (tr.from == j) total += tr.rate(t);
  }
  return total;
}

double PolicySpec::max_exit_rate() const {
  double best = 0.0;
  for (std::size_t j = 0; j < n_states(); ++j) {
    std::set<double> times{0.0};
    for (const auto& tr : transitions)
      for (const auto& seg : tr.rate.segments()) times.insert(seg.first);
    for (double t : times) best = std::max(best, exit_rate(j, t));
  }
  return best;
}

std::vector<double> PolicySpec::breakpoints(double t, double s) const {
  std::set<double> out;
  for (const auto& tr : transitions) {
    for (double b : tr.rate.breakpoints_in(t, s)) out.insert(b);
  }
  return {out.begin(), out.end()};
}

void PolicySpec::check() const {
  if (states.empty()) raise(ErrorKind::Config, "policy '" + name + "' has no states");
  if (terminal.size() != n_states() || rate.size() != n_states())
    raise(ErrorKind::Config, "policy '" + name + "' needs one terminal and one rate function per state");
  if (initial_state >= n_states()) raise(ErrorKind::Config, "policy '" + name + "' has a bad initial state");
  for (const auto& tr : transitions) {
    if (tr.from >= n_states() || tr.to >= n_states()) raise(ErrorKind::Config, "transition names an unknown state");
    if (tr.from == tr.to) raise(ErrorKind::Config, "self transitions are not allowed");
    for (const auto& seg : tr.rate.segments()) {
      if (!(seg.second >= 0.0)) raise(ErrorKind::Config, "transition intensities must be >= 0");
    }
  }
}

namespace {

PiecewiseConstant parse_segments(const nlohmann::json& j) {
  if (j.is_number()) return PiecewiseConstant(j.get<double>());
  std::vector<std::pair<double, double>> segs;
  for (const auto& item : j) segs.emplace_back(item.at(0).get<double>(), item.at(1).get<double>());
  return PiecewiseConstant(std::move(segs));
}

}  // namespace

PolicySpec PolicySpec::from_json(const nlohmann::json& j, const ModelParams& model) {
  if (j.contains("template")) return make_template(j.at("template").get<std::string>(), model, j);
  PolicySpec p;
  p.name = j.value("name", std::string("custom"));
  p.states = j.at("states").get<std::vector<std::string>>();
  p.terminal.assign(p.n_states(), Payoff::zero());
  p.rate.assign(p.n_states(), Payoff::zero());
  if (j.contains("initial_state")) p.initial_state = p.state_index(j.at("initial_state").get<std::string>());
  const nlohmann::json intensities = j.value("intensities", nlohmann::json::array());
  for (const auto& item : intensities) {
    Transition tr;
    tr.from = p.state_index(item.at("from").get<std::string>());
    tr.to = p.state_index(item.at("to").get<std::string>());
    tr.rate = parse_segments(item.at("rate_segments"));
    if (item.contains("payment")) tr.payment = Payoff::from_json(item.at("payment"));
    p.transitions.push_back(std::move(tr));
  }
  if (j.contains("functions")) {
    const auto& f = j.at("functions");
    const nlohmann::json terminal = f.value("terminal", nlohmann::json::object());
    const nlohmann::json rate = f.value("rate", nlohmann::json::object());
    for (const auto& [label, payoff] : terminal.items()) p.terminal[p.state_index(label)] = Payoff::from_json(payoff);
    for (const auto& [label, payoff] : rate.items()) p.rate[p.state_index(label)] = Payoff::from_json(payoff);
  }
  p.check();
  return p;
}

nlohmann::json PolicySpec::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["states"] = states;
  j["initial_state"] = states.at(initial_state);
  j["intensities"] = nlohmann::json::array();
  for (const auto& tr : transitions) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& [t, v] : tr.rate.segments()) segs.push_back({t, v});
    j["intensities"].push_back(
        {{"from", states[tr.from]}, {"to", states[tr.to]}, {"rate_segments", segs}, {"payment", tr.payment.to_json()}});
  }
  for (std::size_t s = 0; s < n_states(); ++s) {
    j["functions"]["terminal"][states[s]] = terminal[s].to_json();
    j["functions"]["rate"][states[s]] = rate[s].to_json();
  }
  return j;
}

namespace {

Eigen::MatrixXd by_expm(const PolicySpec& policy, double t, double s) {
  const auto n = static_cast<Eigen::Index>(policy.n_states());
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  std::vector<double> cuts{t};
  for (double b : policy.breakpoints(t, s)) cuts.push_back(b);
  cuts.push_back(s);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (len <= 0.0) continue;
    const Eigen::MatrixXd q = policy.generator(0.5 * (cuts[i] + cuts[i + 1]));
    p = p * (q * len).exp();
  }
  return p;
}

Eigen::MatrixXd by_ode(const PolicySpec& policy, double t, double s) {
  namespace ode = boost::numeric::odeint;
  const std::size_t n = policy.n_states();
  using State = std::vector<double>;
  // In u = s - t' the backward equation reads dP/du = Q(s - u) P.
  State state(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) state[i * n + i] = 1.0;
  // Intensities are constant on each segment; the generator is frozen at
  // the segment midpoint so no stage evaluates across a breakpoint.
  Eigen::MatrixXd q;
  auto rhs = [&](const State& x, State& dxdu, double) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += q(i, k) * x[k * n + j];
        dxdu[i * n + j] = acc;
      }
    }
  };
  std::vector<double> cuts{0.0};
  const auto bps = policy.breakpoints(t, s);
  for (auto it = bps.rbegin(); it != bps.rend(); ++it) cuts.push_back(s - *it);
  cuts.push_back(s - t);
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (len <= 0.0) continue;
    q = policy.generator(s - 0.5 * (cuts[i] + cuts[i + 1]));
    ode::integrate_adaptive(stepper, rhs, state, cuts[i], cuts[i + 1], std::min(1e-3, len / 4.0));
  }
  Eigen::MatrixXd p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = state[i * n + j];
  return p;
}

}  // namespace

Eigen::MatrixXd transition_probs(const PolicySpec& policy, double t, double s, TransitionMethod method) {
  if (!(t >= 0.0) || !(t <= s)) {
    raise(ErrorKind::TimeOrder, "transition_probs needs 0 <= t <= s, got t = " + std::to_string(t) +
                                    ", s = " + std::to_string(s));
  }
  const auto n = static_cast<Eigen::Index>(policy.n_states());
  if (t == s) return Eigen::MatrixXd::Identity(n, n);
  return method == TransitionMethod::MatrixExponential ? by_expm(policy, t, s) : by_ode(policy, t, s);
}

double theta_rate(const PolicySpec& policy, std::size_t j, double s, double x) {
  if (j >= policy.n_states()) raise(ErrorKind::Range, "state index out of range");
  double total = policy.rate[j](x);
  for (const auto& tr : policy.transitions) {
    if (tr.from != j) continue;
    const double mu = tr.rate(s);
    if (mu != 0.0 && !tr.payment.is_zero()) total += mu * tr.payment(x);
  }
  return total;
}

namespace {

PolicySpec two_state(const std::string& name, double mortality) {
  PolicySpec p;
  p.name = name;
  p.states = {"alive", "dead"};
  p.terminal.assign(2, Payoff::zero());
  p.rate.assign(2, Payoff::zero());
  p.transitions.push_back({0, 1, PiecewiseConstant(mortality), Payoff::zero()});
  return p;
}

}  // namespace

PolicySpec pure_endowment(double mortality, const Payoff& benefit) {
  PolicySpec p = two_state("pure_endowment", mortality);
  p.terminal[0] = benefit;
  return p;
}

PolicySpec term_insurance(double mortality, const Payoff& benefit) {
  PolicySpec p = two_state("term_insurance", mortality);
  p.transitions[0].payment = benefit;
  return p;
}

PolicySpec endowment_guarantee(double mortality, double G) {
  PolicySpec p = two_state("endowment_guarantee", mortality);
  p.terminal[0] = Payoff::guarantee(G);
  p.transitions[0].payment = Payoff::guarantee(G);
  return p;
}

PolicySpec disability_annuity(double incidence, double recovery, double mortality_active,
                              double mortality_disabled, double annuity_rate) {
  PolicySpec p;
  p.name = "disability_annuity";
  p.states = {"active", "disabled", "dead"};
  p.terminal = {Payoff::linear(), Payoff::zero(), Payoff::zero()};
  p.rate = {Payoff::zero(), Payoff::constant(annuity_rate), Payoff::zero()};
  p.transitions.push_back({0, 1, PiecewiseConstant(incidence), Payoff::zero()});
  p.transitions.push_back({1, 0, PiecewiseConstant(recovery), Payoff::zero()});
  p.transitions.push_back({0, 2, PiecewiseConstant(mortality_active), Payoff::linear()});
  p.transitions.push_back({1, 2, PiecewiseConstant(mortality_disabled), Payoff::linear()});
  return p;
}

std::vector<std::string> template_names() {
  return {"pure_endowment", "term_insurance", "endowment_guarantee", "disability_annuity"};
}

PolicySpec make_template(const std::string& name, const ModelParams& model, const nlohmann::json& j) {
  const double mu = j.value("mortality", 0.02);
  const double G = j.value("G", model.S0);
  PolicySpec p;
  if (name == "pure_endowment") {
    p = pure_endowment(mu, j.contains("benefit") ? Payoff::from_json(j.at("benefit")) : Payoff::linear());
  } else if (name == "term_insurance") {
    p = term_insurance(mu, j.contains("benefit") ? Payoff::from_json(j.at("benefit")) : Payoff::constant(1.0));
  } else if (name == "endowment_guarantee") {
    p = endowment_guarantee(mu, G);
  } else if (name == "disability_annuity") {
    p = disability_annuity(j.value("incidence", 0.01), j.value("recovery", 0.005), mu,
                           j.value("mortality_disabled", 0.04), j.value("annuity_rate", 10.0));
  } else {
    raise(ErrorKind::Config, "unknown policy template '" + name + "'");
  }
  p.check();
  return p;
}

std::vector<PolicySpec> builtin_templates(const ModelParams& model) {
  std::vector<PolicySpec> out;
  for (const auto& name : template_names()) out.push_back(make_template(name, model, nlohmann::json::object()));
  return out;
}

}  // namespace hhr
