#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hhr/config.hpp"
#include "hhr/parallel.hpp"
#include "hhr/pide.hpp"
#include "hhr/sde_simulator.hpp"
#include "hhr/thiele.hpp"
#include "hhr/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 success, 1 a hard check failed, 2 configuration or
// admissibility error, 3 anything else.
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kInternal = 3;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
};

struct MeasureFlags {
  std::optional<double> a;
  std::string level;
};

hhr::RunConfig load_config(const Globals& g) {
  hhr::RunConfig c = g.config_path.empty() ? hhr::RunConfig{} : hhr::RunConfig::load(g.config_path);
  if (g.seed) c.run.seed = *g.seed;
  if (!g.out.empty()) c.run.output_dir = g.out;
  if (g.threads > 0) c.run.threads = g.threads;
  hhr::set_thread_count(c.run.threads);
  return c;
}

void apply_measure(hhr::RunConfig& c, const MeasureFlags& m) {
  if (m.a) c.measure.a = m.a;
  if (!m.level.empty()) c.measure.level = hhr::parse_measure_level(m.level);
}

fs::path out_dir(const hhr::RunConfig& c) {
  fs::path dir(c.run.output_dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  os << j.dump(2) << "\n";
}

int cmd_admissible(const hhr::RunConfig& c) {
  const hhr::ValidatedModel m = c.validated();
  const auto rep = hhr::a_bounds(m, c.jump, c.admissibility_options());
  json j = hhr::to_json(rep);
  const double a = c.measure.a ? *c.measure.a : c.measure.fraction * hhr::level_bound(rep, c.measure.level);
  j["requested"] = {{"a", a}, {"level", hhr::to_string(c.measure.level)}};
  const auto sel = hhr::select_measure(rep, a, c.measure.level);
  const auto q = hhr::q_dynamics(m, sel);
  j["requested"]["kappa_a"] = q.kappa_a;
  j["requested"]["vbar_a"] = q.vbar_a;
  write_json(out_dir(c) / "admissibility.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const hhr::RunConfig& c, const std::string& measure, std::size_t trajectories, bool antithetic) {
  const hhr::ValidatedModel m = c.validated();
  const auto rep = hhr::a_bounds(m, c.jump, c.admissibility_options());
  hhr::SimulationOptions o;
  o.n_paths = c.run.paths;
  o.n_steps = c.run.steps;
  o.seed = c.run.seed;
  o.antithetic = antithetic;
  if (measure == "Q") {
    o.measure = hhr::SimMeasure::Q;
    o.selection = c.select(rep);
  } else if (measure == "P") {
    o.measure = hhr::SimMeasure::P;
    o.selection = c.select(rep);
  } else {
    hhr::raise(hhr::ErrorKind::Config, "--measure must be P or Q");
  }
  o.observation_times = {0.25 * m->T, 0.5 * m->T, 0.75 * m->T};
  const hhr::PathBundle b = hhr::simulate(m, c.jump, o);

  const fs::path dir = out_dir(c);
  {
    std::ofstream os(dir / "paths.csv");
    if (trajectories > 0) {
      // Streams are keyed by path index, so these are the first paths of b.
      hhr::SimulationOptions keep = o;
      keep.n_paths = std::min(o.n_paths, trajectories);
      keep.keep_trajectories = true;
      hhr::write_paths_csv(os, hhr::simulate(m, c.jump, keep));
    } else {
      hhr::write_paths_csv(os, b);
    }
  }
  json obs = json::array();
  for (std::size_t k = 0; k < b.n_obs; ++k) {
    const double t = b.observation_times[k];
    std::vector<double> disc = b.column(b.S, k);
    for (double& s : disc) s *= std::exp(-m->r * t);
    std::vector<double> n_res(b.n_paths);
    for (std::size_t p = 0; p < b.n_paths; ++p)
      n_res[p] = static_cast<double>(b.N[p * b.n_obs + k]) - b.LambdaN[p * b.n_obs + k];
    auto est = [](const std::vector<double>& xs) {
      const auto e = hhr::estimate_mean(xs);
      return json{{"mean", e.mean}, {"se", e.se}};
    };
    json line = {{"t", t},
                 {"discounted_S", est(disc)},
                 {"v", est(b.column(b.v, k))},
                 {"lambda", est(b.column(b.lambda, k))},
                 {"N_minus_LambdaN", est(n_res)}};
    if (b.has_density) line["X"] = est(b.column(b.X, k));
    obs.push_back(line);
  }
  json summary = {{"measure", measure},
                  {"a", b.a},
                  {"paths", b.n_paths},
                  {"steps", o.n_steps},
                  {"seed", o.seed},
                  {"truncation_fraction", b.truncation_fraction()},
                  {"observations", obs}};
  write_json(dir / "simulation.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_price(const hhr::RunConfig& c, const std::string& payoff_text, std::optional<double> maturity,
              const std::string& method) {
  const hhr::ValidatedModel m = c.validated();
  const auto rep = hhr::a_bounds(m, c.jump, c.admissibility_options());
  const auto sel = c.select(rep);
  const double s = maturity.value_or(m->T);
  // A bare "guarantee" pays max(S0 e^{rs}, x).
  const hhr::Payoff payoff = payoff_text == "guarantee" ? hhr::Payoff::guarantee(m->S0 * std::exp(m->r * s))
                                                        : hhr::Payoff::parse(payoff_text);
  json j = {{"payoff", payoff.describe()}, {"maturity", s}, {"a", sel.a}};
  const fs::path dir = out_dir(c);
  if (method == "pide" || method == "both") {
    const auto sol = hhr::solve_price_pide(payoff, s, m, c.jump, sel, c.run.grid);
    j["pide"] = {{"value", sol.value_at(m->S0, m->v0, m->lambda0)},
                 {"grid", c.run.grid.to_string()},
                 {"cfl_number", sol.diagnostics.cfl_number},
                 {"max_boundary_flux", sol.diagnostics.max_boundary_flux}};
    std::ofstream os(dir / "price_surface.csv");
    os << "x,y,z,U\n" << std::setprecision(12);
    const auto& g = sol.grid;
    for (std::size_t k = 0; k < g.nz(); ++k)
      for (std::size_t jj = 0; jj < g.ny(); ++jj)
        for (std::size_t i = 0; i < g.nx(); ++i)
          os << g.x[i] << ',' << g.y[jj] << ',' << g.z[k] << ',' << sol.at(i, jj, k) << '\n';
  }
  if (method == "mc" || method == "both") {
    if (std::abs(s - m->T) > 1e-12) hhr::raise(hhr::ErrorKind::Config, "Monte Carlo prices are at maturity T only");
    hhr::SimulationOptions o;
    o.n_paths = c.run.price_paths;
    o.n_steps = c.run.steps;
    o.seed = c.run.seed;
    o.measure = hhr::SimMeasure::Q;
    o.selection = sel;
    const auto b = hhr::simulate(m, c.jump, o);
    std::vector<double> pay = b.column(b.S, b.obs_index(m->T));
    for (double& x : pay) x = std::exp(-m->r * s) * payoff(x);
    const auto e = hhr::estimate_mean(pay);
    j["mc"] = {{"value", e.mean}, {"se", e.se}, {"paths", e.n}};
  }
  if (!j.contains("pide") && !j.contains("mc")) hhr::raise(hhr::ErrorKind::Config, "--method must be pide, mc or both");
  write_json(dir / "price.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_reserve(hhr::RunConfig c, const std::string& policy_arg, const std::string& method,
                const std::string& grid) {
  const hhr::ValidatedModel m = c.validated();
  const auto rep = hhr::a_bounds(m, c.jump, c.admissibility_options());
  const auto sel = c.select(rep);
  if (!policy_arg.empty()) {
    const auto names = hhr::template_names();
    if (std::find(names.begin(), names.end(), policy_arg) != names.end()) {
      c.policy = json{{"template", policy_arg}};
    } else {
      std::ifstream in(policy_arg);
      if (!in) hhr::raise(hhr::ErrorKind::Config, "--policy is neither a template nor a readable file: " + policy_arg);
      c.policy = json::parse(in, nullptr, true, true);
    }
  }
  hhr::ReserveOptions o;
  o.grid = grid.empty() ? c.run.reserve_grid : hhr::GridSize::parse(grid);
  const bool quad = method == "quadrature" || method == "both";
  const bool pide = method == "pide" || method == "both";
  if (!quad && !pide) hhr::raise(hhr::ErrorKind::Config, "--method must be pide, quadrature or both");

  const fs::path dir = out_dir(c);
  json summary = json::array();
  for (const auto& policy : c.policies()) {
    std::optional<hhr::ReserveSurface> q, d;
    if (quad) q = hhr::reserve_quadrature(policy, m, c.jump, sel, o);
    if (pide) d = hhr::solve_thiele_pide(policy, m, c.jump, sel, o);
    const hhr::ReserveSurface& any = q ? *q : *d;
    std::ofstream os(dir / ("reserve_" + policy.name + ".csv"));
    os << "state,t,x,y,z,V" << (method == "both" ? ",V_pide,rel_diff" : "") << "\n" << std::setprecision(12);
    const auto& g = any.grid;
    for (std::size_t st = 0; st < policy.n_states(); ++st)
      for (std::size_t k = 0; k < g.nz(); ++k)
        for (std::size_t jj = 0; jj < g.ny(); ++jj)
          for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t n = g.index(i, jj, k);
            os << policy.states[st] << ',' << any.t << ',' << g.x[i] << ',' << g.y[jj] << ',' << g.z[k] << ','
               << any.values[st][n];
            if (method == "both") {
              const double a = q->values[st][n], b = d->values[st][n];
              const double scale = std::max(std::abs(a), std::abs(b));
              os << ',' << b << ',' << (scale > 1e-12 ? std::abs(a - b) / scale : 0.0);
            }
            os << '\n';
          }
    json entry = {{"policy", policy.name}, {"states", policy.states}};
    json v0 = json::object();
    for (std::size_t st = 0; st < policy.n_states(); ++st) {
      json cell;
      if (q) cell["quadrature"] = q->value_at(st, m->S0, m->v0, m->lambda0);
      if (d) cell["pide"] = d->value_at(st, m->S0, m->v0, m->lambda0);
      v0[policy.states[st]] = cell;
    }
    entry["V0"] = v0;
    if (q && d) {
      const auto cv = hhr::cross_validate(*q, *d, m.params(), c.run.tolerances.thiele_rel);
      json probes = json::array();
      for (const auto& p : cv.probes) {
        probes.push_back({{"state", policy.states[p.state]}, {"x", p.point.x}, {"y", p.point.y}, {"z", p.point.z},
                          {"quadrature", p.quadrature}, {"pide", p.pide}, {"rel_diff", p.rel_diff},
                          {"dV_dz", p.dV_dz}});
      }
      entry["cross_validation"] = {{"max_rel_diff", cv.max_rel_diff}, {"pass", cv.pass}, {"probes", probes}};
    }
    summary.push_back(entry);
  }
  write_json(dir / "reserve.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_verify(const hhr::RunConfig& c, const std::vector<std::string>& only, bool quiet) {
  hhr::VerificationOptions o;
  o.only = only;
  if (!quiet) {
    o.on_check = [](const hhr::CheckResult& r) {
      std::cerr << "[" << r.status() << "] " << r.name << " (" << std::fixed << std::setprecision(2) << r.seconds
                << " s)" << std::defaultfloat << "\n";
    };
  }
  const hhr::VerificationReport rep = hhr::run_verification(c, o);
  const fs::path dir = out_dir(c);
  write_json(dir / "report.json", rep.to_json());
  write_json(dir / "timing.json", rep.timing_json());
  std::cout << rep.table();
  std::cout << (rep.all_hard_pass() ? "all hard checks passed" : "hard check failures") << " (" << rep.checks.size()
            << " checks, report in " << (dir / "report.json").string() << ")\n";
  return rep.all_hard_pass() ? 0 : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heston-Hawkes pricing and reserving engine"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "override run.seed");
  app.add_option("--threads", g.threads, "worker threads (fallback: HHR_THREADS)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "output directory");

  MeasureFlags mf;
  auto measure_flags = [&](CLI::App* sub) {
    sub->add_option("--a", mf.a, "Girsanov coefficient a (default: fraction of the level bound)");
    sub->add_option("--level", mf.level, "admissibility level E, Em or EmQS");
  };

  auto* adm = app.add_subcommand("admissible", "admissibility bounds and the certified a");
  measure_flags(adm);

  std::string sim_measure = "P";
  std::size_t trajectories = 0;
  std::optional<std::size_t> sim_paths;
  std::optional<int> sim_steps;
  bool antithetic = false;
  auto* sim = app.add_subcommand("simulate", "simulate the coupled SDE");
  measure_flags(sim);
  sim->add_option("--measure", sim_measure, "P (with X^(a)) or Q")->check(CLI::IsMember({"P", "Q"}));
  sim->add_option("--paths", sim_paths, "number of paths");
  sim->add_option("--steps", sim_steps, "time steps (>= 50)");
  sim->add_option("--trajectories", trajectories, "keep full trajectories for this many paths");
  sim->add_flag("--antithetic", antithetic, "antithetic Brownian pairs");

  std::string payoff = "guarantee";
  std::optional<double> maturity;
  std::string price_method = "pide";
  std::string price_grid;
  auto* price = app.add_subcommand("price", "price U_s^phi at (0, S0, v0, lambda0)");
  measure_flags(price);
  price->add_option("--payoff", payoff, "zero | constant[:c] | linear[:k] | guarantee[:G] | put:G");
  price->add_option("--maturity", maturity, "maturity s (default T)");
  price->add_option("--method", price_method, "pide, mc or both")->check(CLI::IsMember({"pide", "mc", "both"}));
  price->add_option("--grid", price_grid, "grid TxXxYxZ");

  std::string policy;
  std::string reserve_method = "both";
  std::string reserve_grid;
  auto* reserve = app.add_subcommand("reserve", "reserve surfaces by quadrature and Thiele PIDE");
  measure_flags(reserve);
  reserve->add_option("--policy", policy, "policy JSON file or template name");
  reserve->add_option("--method", reserve_method, "pide, quadrature or both")
      ->check(CLI::IsMember({"pide", "quadrature", "both"}));
  reserve->add_option("--grid", reserve_grid, "grid TxXxYxZ");

  std::vector<std::string> only;
  bool quiet = false;
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  measure_flags(verify);
  verify->add_option("--only", only, "run only the named checks");
  verify->add_flag("--quiet", quiet, "no per-check progress on stderr");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;

  try {
    hhr::RunConfig c = load_config(g);
    apply_measure(c, mf);
    if (*adm) return cmd_admissible(c);
    if (*sim) {
      if (sim_paths) c.run.paths = *sim_paths;
      if (sim_steps) c.run.steps = *sim_steps;
      return cmd_simulate(c, sim_measure, trajectories, antithetic);
    }
    if (*price) {
      if (!price_grid.empty()) c.run.grid = hhr::GridSize::parse(price_grid);
      return cmd_price(c, payoff, maturity, price_method);
    }
    if (*reserve) return cmd_reserve(c, policy, reserve_method, reserve_grid);
    if (*verify) return cmd_verify(c, only, quiet);
  } catch (const hhr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
