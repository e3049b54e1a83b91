#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hhr/core_model.hpp"
#include "hhr/hawkes.hpp"
#include "hhr/measure_change.hpp"
#include "hhr/payoff.hpp"
#include "hhr/stats.hpp"

namespace hhr {

enum class SimMeasure { P, Q };

struct SimulationOptions {
  std::size_t n_paths = 10000;
  int n_steps = 252;
  std::uint64_t seed = 1;
  SimMeasure measure = SimMeasure::P;
  // Required under Q.  Under P it switches on the density process X^(a).
  std::optional<MeasureSelection> selection;
  // Summaries are stored at these times; T is always added.
  std::vector<double> observation_times;
  bool keep_trajectories = false;
  // Pairs (2i, 2i + 1) share the Hawkes path and use negated Gaussians.
  bool antithetic = false;
  // theta(t, v) is evaluated at max(v+, floor, kappa vbar dt) to keep
  // 1/sqrt(v) finite on steps that start at the truncation boundary.
  double theta_v_floor = 1e-8;
  std::size_t event_cap = kDefaultEventCap;
};

struct EventRecord {
  double t;
  double mark;
  double v_minus, v_plus;
  double lambda_minus, lambda_plus;
};

struct Trajectory {
  std::vector<double> t, S, v, lambda, L, X;
  std::vector<std::size_t> N;
  std::vector<EventRecord> events;
};

// Per-path values at the observation times, stored path-major:
// field[path * n_obs + k].
struct PathBundle {
  SimMeasure measure = SimMeasure::P;
  double a = 0.0;
  bool has_density = false;
  std::vector<double> observation_times;
  std::size_t n_paths = 0;
  std::size_t n_obs = 0;

  std::vector<double> S, v, lambda, L, LambdaN, LambdaL, int_v, X;
  std::vector<std::size_t> N;
  std::vector<Trajectory> trajectories;

  std::uint64_t substeps = 0;
  std::uint64_t truncated_substeps = 0;

  std::size_t obs_index(double t) const;
  // One observation column across paths.
  std::vector<double> column(const std::vector<double>& field, std::size_t k) const;
  double truncation_fraction() const {
    return substeps ? static_cast<double>(truncated_substeps) / static_cast<double>(substeps) : 0.0;
  }
};

// Full-truncation Euler for v with exact jumps at the Hawkes event times
// merged into the uniform grid, log-Euler for S, left-point density
// increments.  Deterministic in (seed, n_paths, n_steps) for any thread count.
PathBundle simulate(const ValidatedModel& model, const JumpDistribution& dist, const SimulationOptions& options);

struct GirsanovReport {
  MeanEstimate weighted;  // A = mean_P[X_T phi(S_T)]
  MeanEstimate direct;    // B = mean_Q[phi(S_T)]
  double difference = 0.0;
  double se_pooled = 0.0;
  bool flagged = false;   // |A - B| > 3 se_pooled
};

GirsanovReport girsanov_cross_check(const ValidatedModel& model, const JumpDistribution& dist,
                                    const MeasureSelection& selection, const Payoff& payoff,
                                    std::size_t n_paths, int n_steps, std::uint64_t seed,
                                    bool discount = false);

struct VarianceMoments {
  double Ev;      // E[v_t]
  double int_Ev;  // int_0^t E[v_u] du
};

// RK4 on dE[v]/dt = -kappa (E[v] - vbar) + eta E[J] E[lambda_t]; pass q to
// use the Q(a) reversion parameters.
VarianceMoments variance_moment_ode(const ValidatedModel& model, const JumpDistribution& dist, double t,
                                    const std::optional<QDynamics>& q = std::nullopt, int steps = 10000);

// CSV: path_id,t,S,v,lambda,N,L,X.  Uses the stored trajectories when
// present, otherwise the observation summaries.
void write_paths_csv(std::ostream& os, const PathBundle& bundle);

}  // namespace hhr
