#include "hhr/config.hpp"

#include <fstream>
#include <set>

namespace hhr {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) raise(ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    raise(ErrorKind::Config, where + "." + key + ": " + e.what());
  }
}

GridSize read_grid(const json& j, const char* key, GridSize fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) raise(ErrorKind::Config, std::string("run.") + key + " must be a string TxXxYxZ");
  return GridSize::parse(j.at(key).get<std::string>());
}

const std::set<std::string> kModelKeys = {"lambda0", "alpha", "beta", "S0", "r", "mu", "mu_breakpoints",
                                          "rho", "v0", "kappa", "vbar", "sigma", "eta", "T"};

void read_model(const json& j, ModelParams& m, const std::string& where) {
  read(j, "lambda0", m.lambda0, where);
  read(j, "alpha", m.alpha, where);
  read(j, "beta", m.beta, where);
  read(j, "S0", m.S0, where);
  read(j, "r", m.r, where);
  read(j, "rho", m.rho, where);
  read(j, "v0", m.v0, where);
  read(j, "kappa", m.kappa, where);
  read(j, "vbar", m.vbar, where);
  read(j, "sigma", m.sigma, where);
  read(j, "eta", m.eta, where);
  read(j, "T", m.T, where);
  if (j.contains("mu") && j.contains("mu_breakpoints"))
    raise(ErrorKind::Config, where + ": give either mu or mu_breakpoints");
  if (j.contains("mu")) {
    double mu = 0.0;
    read(j, "mu", mu, where);
    m.mu = PiecewiseConstant(mu);
  }
  if (j.contains("mu_breakpoints")) {
    std::vector<std::pair<double, double>> seg;
    try {
      for (const auto& p : j.at("mu_breakpoints")) seg.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    } catch (const json::exception& e) {
      raise(ErrorKind::Config, where + ".mu_breakpoints must be [[t, mu], ...]: " + e.what());
    }
    m.mu = PiecewiseConstant(std::move(seg));
  }
}

}  // namespace

JumpDistribution jump_from_json(const json& j) {
  if (!j.is_object()) raise(ErrorKind::Config, "jump must be an object");
  reject_unknown(j, {"kind", "value", "rate"}, "jump");
  const std::string kind = j.value("kind", std::string("exponential"));
  if (kind == "constant") {
    if (!j.contains("value")) raise(ErrorKind::Config, "constant jump needs 'value'");
    return JumpDistribution::constant(j.at("value").get<double>());
  }
  if (kind == "exponential") return JumpDistribution::exponential(j.value("rate", 1.0));
  raise(ErrorKind::Config, "unknown jump kind '" + kind + "'");
}

json jump_to_json(const JumpDistribution& dist) {
  if (dist.kind() == JumpDistribution::Kind::Constant) return {{"kind", "constant"}, {"value", dist.parameter()}};
  return {{"kind", "exponential"}, {"rate", dist.parameter()}};
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) raise(ErrorKind::Config, "config root must be an object");
  std::set<std::string> top = kModelKeys;
  top.insert({"model", "jump", "measure", "policy", "run"});
  reject_unknown(j, top, "config");

  RunConfig c;
  read_model(j, c.model, "config");
  if (j.contains("model")) {
    reject_unknown(j.at("model"), kModelKeys, "model");
    read_model(j.at("model"), c.model, "model");
  }
  if (j.contains("jump")) c.jump = jump_from_json(j.at("jump"));

  if (j.contains("measure")) {
    const json& m = j.at("measure");
    reject_unknown(m, {"a", "fraction", "level", "epsilon1", "epsilon2"}, "measure");
    if (m.contains("a")) c.measure.a = m.at("a").get<double>();
    read(m, "fraction", c.measure.fraction, "measure");
    if (m.contains("level")) c.measure.level = parse_measure_level(m.at("level").get<std::string>());
    read(m, "epsilon1", c.measure.epsilon1, "measure");
    read(m, "epsilon2", c.measure.epsilon2, "measure");
    if (!(c.measure.fraction >= 0.0 && c.measure.fraction < 1.0))
      raise(ErrorKind::Config, "measure.fraction must lie in [0, 1)");
  }

  if (j.contains("policy")) c.policy = j.at("policy");

  if (j.contains("run")) {
    const json& r = j.at("run");
    reject_unknown(r, {"seed", "paths", "steps", "price_paths", "girsanov_paths", "oracle_samples", "oracle_paths",
                       "oracle_steps", "grid", "reserve_grid", "output_dir", "threads", "tolerances"},
                   "run");
    auto& s = c.run;
    read(r, "seed", s.seed, "run");
    read(r, "paths", s.paths, "run");
    read(r, "steps", s.steps, "run");
    read(r, "price_paths", s.price_paths, "run");
    read(r, "girsanov_paths", s.girsanov_paths, "run");
    read(r, "oracle_samples", s.oracle_samples, "run");
    read(r, "oracle_paths", s.oracle_paths, "run");
    read(r, "oracle_steps", s.oracle_steps, "run");
    s.grid = read_grid(r, "grid", s.grid);
    s.reserve_grid = read_grid(r, "reserve_grid", s.reserve_grid);
    read(r, "output_dir", s.output_dir, "run");
    read(r, "threads", s.threads, "run");
    if (r.contains("tolerances")) {
      const json& t = r.at("tolerances");
      reject_unknown(t, {"k_se", "pide_linear", "pide_constant", "oracle_rel", "hyp1f1_rel", "pide_mc_rel",
                         "thiele_rel", "thiele_classical_abs", "moment_drift", "c_l_agreement"},
                     "run.tolerances");
      auto& tol = s.tolerances;
      read(t, "k_se", tol.k_se, "run.tolerances");
      read(t, "pide_linear", tol.pide_linear, "run.tolerances");
      read(t, "pide_constant", tol.pide_constant, "run.tolerances");
      read(t, "oracle_rel", tol.oracle_rel, "run.tolerances");
      read(t, "hyp1f1_rel", tol.hyp1f1_rel, "run.tolerances");
      read(t, "pide_mc_rel", tol.pide_mc_rel, "run.tolerances");
      read(t, "thiele_rel", tol.thiele_rel, "run.tolerances");
      read(t, "thiele_classical_abs", tol.thiele_classical_abs, "run.tolerances");
      read(t, "moment_drift", tol.moment_drift, "run.tolerances");
      read(t, "c_l_agreement", tol.c_l_agreement, "run.tolerances");
    }
    if (s.paths < 2 || s.price_paths < 2 || s.girsanov_paths < 2 || s.oracle_samples < 2 || s.oracle_paths < 2)
      raise(ErrorKind::Config, "path counts must be >= 2");
    if (s.steps < 50) raise(ErrorKind::Config, "run.steps must be >= 50");
    if (s.threads < 0) raise(ErrorKind::Config, "run.threads must be >= 0");
  }
  // Surface policy errors at load time rather than mid-run.
  if (c.policy) (void)PolicySpec::from_json(*c.policy, c.model).check();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Config, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    raise(ErrorKind::Config, "config '" + path + "': " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json j;
  const auto& m = model;
  j["model"] = {{"lambda0", m.lambda0}, {"alpha", m.alpha}, {"beta", m.beta}, {"S0", m.S0},
                {"r", m.r},             {"rho", m.rho},     {"v0", m.v0},     {"kappa", m.kappa},
                {"vbar", m.vbar},       {"sigma", m.sigma}, {"eta", m.eta},   {"T", m.T}};
  json segs = json::array();
  for (const auto& [t, v] : m.mu.segments()) segs.push_back({t, v});
  j["model"]["mu_breakpoints"] = segs;
  j["jump"] = jump_to_json(jump);
  j["measure"] = {{"fraction", measure.fraction},
                  {"level", to_string(measure.level)},
                  {"epsilon1", measure.epsilon1},
                  {"epsilon2", measure.epsilon2}};
  if (measure.a) j["measure"]["a"] = *measure.a;
  if (policy) j["policy"] = *policy;
  const auto& t = run.tolerances;
  j["run"] = {{"seed", run.seed},
              {"paths", run.paths},
              {"steps", run.steps},
              {"price_paths", run.price_paths},
              {"girsanov_paths", run.girsanov_paths},
              {"oracle_samples", run.oracle_samples},
              {"oracle_paths", run.oracle_paths},
              {"oracle_steps", run.oracle_steps},
              {"grid", run.grid.to_string()},
              {"reserve_grid", run.reserve_grid.to_string()},
              {"output_dir", run.output_dir},
              {"threads", run.threads},
              {"tolerances",
               {{"k_se", t.k_se},
                {"pide_linear", t.pide_linear},
                {"pide_constant", t.pide_constant},
                {"oracle_rel", t.oracle_rel},
                {"hyp1f1_rel", t.hyp1f1_rel},
                {"pide_mc_rel", t.pide_mc_rel},
                {"thiele_rel", t.thiele_rel},
                {"thiele_classical_abs", t.thiele_classical_abs},
                {"moment_drift", t.moment_drift},
                {"c_l_agreement", t.c_l_agreement}}}};
  return j;
}

ValidatedModel RunConfig::validated() const { return validate_or_throw(model); }

AdmissibilityOptions RunConfig::admissibility_options() const {
  AdmissibilityOptions o;
  o.epsilon1 = measure.epsilon1;
  o.epsilon2 = measure.epsilon2;
  return o;
}

MeasureSelection RunConfig::select(const AdmissibilityReport& report) const {
  const double a = measure.a ? *measure.a : measure.fraction * level_bound(report, measure.level);
  return select_measure(report, a, measure.level);
}

std::vector<PolicySpec> RunConfig::policies() const {
  if (policy) return {PolicySpec::from_json(*policy, model)};
  return builtin_templates(model);
}

}  // namespace hhr
