#include "hhr/sde_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hhr/parallel.hpp"
#include "hhr/rng.hpp"

namespace hhr {

std::size_t PathBundle::obs_index(double t) const {
  for (std::size_t k = 0; k < observation_times.size(); ++k) {
    if (std::abs(observation_times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return k;
  }
  raise(ErrorKind::Range, "time " + std::to_string(t) + " is not an observation time");
}

std::vector<double> PathBundle::column(const std::vector<double>& field, std::size_t k) const {
  std::vector<double> out(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) out[p] = field[p * n_obs + k];
  return out;
}

namespace {

struct PathCounts {
  std::uint64_t substeps = 0;
  std::uint64_t truncated = 0;
};

}  // namespace

PathBundle simulate(const ValidatedModel& model, const JumpDistribution& dist, const SimulationOptions& options) {
  const auto& p = model.params();
  if (options.n_steps < 50) raise(ErrorKind::Range, "n_steps must be >= 50");
  if (options.measure == SimMeasure::Q && !options.selection)
    raise(ErrorKind::Admissibility, "simulation under Q(a) needs a certified measure selection");
  if (options.antithetic && options.n_paths % 2 != 0) raise(ErrorKind::Range, "antithetic runs need an even path count");

  PathBundle b;
  b.measure = options.measure;
  b.a = options.selection ? options.selection->a : 0.0;
  b.has_density = options.measure == SimMeasure::P && options.selection.has_value();
  b.observation_times = options.observation_times;
  for (double t : b.observation_times) {
    if (t < 0.0 || t > p.T) raise(ErrorKind::Range, "observation times must lie in [0, T]");
  }
  if (std::find(b.observation_times.begin(), b.observation_times.end(), p.T) == b.observation_times.end())
    b.observation_times.push_back(p.T);
  std::sort(b.observation_times.begin(), b.observation_times.end());
  b.observation_times.erase(std::unique(b.observation_times.begin(), b.observation_times.end()),
                            b.observation_times.end());
  b.n_paths = options.n_paths;
  b.n_obs = b.observation_times.size();
  const std::size_t cells = b.n_paths * b.n_obs;
  for (auto* f : {&b.S, &b.v, &b.lambda, &b.L, &b.LambdaN, &b.LambdaL, &b.int_v, &b.X}) f->assign(cells, 0.0);
  b.N.assign(cells, 0);
  if (options.keep_trajectories) b.trajectories.resize(b.n_paths);

  const bool under_q = options.measure == SimMeasure::Q;
  double kappa = p.kappa, vbar = p.vbar;
  if (under_q) {
    const QDynamics q = q_dynamics(model, *options.selection);
    kappa = q.kappa_a;
    vbar = q.vbar_a;
  }
  const double a = b.a;
  const double rho_bar = std::sqrt(1.0 - p.rho * p.rho);
  const double meanJ = dist.mean();
  const int M = options.n_steps;

  std::vector<PathCounts> counts(b.n_paths);
  parallel_for(b.n_paths, [&](std::size_t path) {
    const std::size_t base = options.antithetic ? path / 2 : path;
    const double sign = (options.antithetic && path % 2 == 1) ? -1.0 : 1.0;
    const HawkesPath hp = simulate_hawkes(model, dist, options.seed, base, options.event_cap);
    auto gen = make_stream(options.seed, base, Substream::Brownian);
    NormalSampler normal;

    std::vector<double> grid;
    grid.reserve(M + 1 + hp.size() + b.n_obs);
    for (int k = 0; k <= M; ++k) grid.push_back(k == M ? p.T : p.T * k / M);
    grid.insert(grid.end(), hp.event_times().begin(), hp.event_times().end());
    grid.insert(grid.end(), b.observation_times.begin(), b.observation_times.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    Trajectory* traj = options.keep_trajectories ? &b.trajectories[path] : nullptr;
    double log_s = std::log(p.S0);
    double v = p.v0;
    double log_x = 0.0;
    double int_v = 0.0;
    std::size_t next_event = 0;
    std::size_t next_obs = 0;
    std::size_t n_events = 0;
    double cum_marks = 0.0;
    PathCounts pc;

    auto record = [&](double t) {
      const double vp = std::max(v, 0.0);
      if (traj) {
        traj->t.push_back(t);
        traj->S.push_back(std::exp(log_s));
        traj->v.push_back(vp);
        traj->lambda.push_back(hp.lambda_at(t));
        traj->N.push_back(n_events);
        traj->L.push_back(cum_marks);
        traj->X.push_back(std::exp(log_x));
      }
      while (next_obs < b.n_obs && b.observation_times[next_obs] == t) {
        const std::size_t c = path * b.n_obs + next_obs;
        b.S[c] = std::exp(log_s);
        b.v[c] = vp;
        b.lambda[c] = hp.lambda_at(t);
        b.N[c] = n_events;
        b.L[c] = cum_marks;
        b.LambdaN[c] = hp.integrated_intensity(t);
        b.LambdaL[c] = meanJ * b.LambdaN[c];
        b.int_v[c] = int_v;
        b.X[c] = std::exp(log_x);
        ++next_obs;
      }
    };

    record(0.0);
    for (std::size_t g = 1; g < grid.size(); ++g) {
      const double t0 = grid[g - 1];
      const double t1 = grid[g];
      const double dt = t1 - t0;
      const double vp = std::max(v, 0.0);
      ++pc.substeps;
      if (v < 0.0) ++pc.truncated;
      const double sq = std::sqrt(dt);
      const double dB = sign * sq * normal(gen);
      const double dW = sign * sq * normal(gen);
      const double sv = std::sqrt(vp);
      const double drift = under_q ? p.r : model.mu(t0);
      log_s += (drift - 0.5 * vp) * dt + sv * (rho_bar * dB + p.rho * dW);
      if (b.has_density) {
        // Over a step that starts at v+ ~ 0 the variance rises by about
        // kappa vbar dt; using that as the floor keeps theta^2 dt bounded
        // while theta stays predictable.
        const double floor_v = std::max(options.theta_v_floor, p.kappa * p.vbar * dt);
        const double th = theta(model, *options.selection, t0, std::max(vp, floor_v));
        log_x += -th * dB - a * sv * dW - 0.5 * (th * th + a * a * vp) * dt;
      }
      const double v_next = v + kappa * (vbar - vp) * dt + p.sigma * sv * dW;
      int_v += 0.5 * (vp + std::max(v_next, 0.0)) * dt;
      v = v_next;
      while (next_event < hp.size() && hp.event_times()[next_event] == t1) {
        const double mark = hp.marks()[next_event];
        const double v_minus = v;
        v += p.eta * mark;
        ++n_events;
        cum_marks += mark;
        if (traj) {
          traj->events.push_back({t1, mark, v_minus, v, hp.lambda_before(t1), hp.lambda_after(next_event)});
        }
        ++next_event;
      }
      record(t1);
    }
    counts[path] = pc;
  });
  for (const auto& c : counts) {
    b.substeps += c.substeps;
    b.truncated_substeps += c.truncated;
  }
  return b;
}

GirsanovReport girsanov_cross_check(const ValidatedModel& model, const JumpDistribution& dist,
                                    const MeasureSelection& selection, const Payoff& payoff,
                                    std::size_t n_paths, int n_steps, std::uint64_t seed, bool discount) {
  const double df = discount ? std::exp(-model->r * model->T) : 1.0;
  SimulationOptions opt;
  opt.n_paths = n_paths;
  opt.n_steps = n_steps;
  opt.seed = seed;
  opt.selection = selection;
  opt.measure = SimMeasure::P;
  const PathBundle under_p = simulate(model, dist, opt);
  // Independent streams for the second estimator.
  opt.seed = seed ^ 0x9E3779B97F4A7C15ULL;
  opt.measure = SimMeasure::Q;
  const PathBundle under_q = simulate(model, dist, opt);

  const std::size_t kT = under_p.n_obs - 1;
  std::vector<double> a_vals(n_paths), b_vals(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const std::size_t c = i * under_p.n_obs + kT;
    a_vals[i] = df * under_p.X[c] * payoff(under_p.S[c]);
    b_vals[i] = df * payoff(under_q.S[i * under_q.n_obs + kT]);
  }
  GirsanovReport rep;
  rep.weighted = estimate_mean(a_vals);
  rep.direct = estimate_mean(b_vals);
  rep.difference = rep.weighted.mean - rep.direct.mean;
  rep.se_pooled = std::hypot(rep.weighted.se, rep.direct.se);
  rep.flagged = std::abs(rep.difference) > 3.0 * rep.se_pooled;
  return rep;
}

VarianceMoments variance_moment_ode(const ValidatedModel& model, const JumpDistribution& dist, double t,
                                    const std::optional<QDynamics>& q, int steps) {
  const auto& p = model.params();
  const double kappa = q ? q->kappa_a : p.kappa;
  const double vbar = q ? q->vbar_a : p.vbar;
  const double gap = p.beta - p.alpha;
  const double jump_rate = p.eta * dist.mean();
  auto mean_lambda = [&](double u) { return p.lambda0 * (p.beta - p.alpha * std::exp(-gap * u)) / gap; };
  auto f = [&](double u, double ev) { return -kappa * (ev - vbar) + jump_rate * mean_lambda(u); };
  double ev = p.v0;
  double integral = 0.0;
  const double h = t / steps;
  for (int n = 0; n < steps; ++n) {
    const double u = n * h;
    // (E[v], int E[v]) integrated jointly; the second component's slope is E[v].
    const double k1 = f(u, ev), i1 = ev;
    const double k2 = f(u + 0.5 * h, ev + 0.5 * h * k1), i2 = ev + 0.5 * h * k1;
    const double k3 = f(u + 0.5 * h, ev + 0.5 * h * k2), i3 = ev + 0.5 * h * k2;
    const double k4 = f(u + h, ev + h * k3), i4 = ev + h * k3;
    ev += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    integral += h / 6.0 * (i1 + 2.0 * i2 + 2.0 * i3 + i4);
  }
  return {ev, integral};
}

void write_paths_csv(std::ostream& os, const PathBundle& b) {
  os << "path_id,t,S,v,lambda,N,L,X\n";
  os.precision(12);
  if (!b.trajectories.empty()) {
    for (std::size_t p = 0; p < b.trajectories.size(); ++p) {
      const auto& tr = b.trajectories[p];
      for (std::size_t i = 0; i < tr.t.size(); ++i) {
        os << p << ',' << tr.t[i] << ',' << tr.S[i] << ',' << tr.v[i] << ',' << tr.lambda[i] << ',' << tr.N[i]
           << ',' << tr.L[i] << ',' << tr.X[i] << '\n';
      }
    }
    return;
  }
  for (std::size_t p = 0; p < b.n_paths; ++p) {
    for (std::size_t k = 0; k < b.n_obs; ++k) {
      const std::size_t c = p * b.n_obs + k;
      os << p << ',' << b.observation_times[k] << ',' << b.S[c] << ',' << b.v[c] << ',' << b.lambda[c] << ','
         << b.N[c] << ',' << b.L[c] << ',' << b.X[c] << '\n';
    }
  }
}

}  // namespace hhr
