#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hhr/core_model.hpp"
#include "hhr/stats.hpp"

namespace hhr {

inline constexpr std::size_t kDefaultEventCap = 1'000'000;

// One realisation of the self-exciting counting process N, its intensity
// lambda and the compound process L = sum of marks.  Immutable.
class HawkesPath {
 public:
  HawkesPath(double lambda0, double alpha, double beta, double horizon,
             std::vector<double> event_times, std::vector<double> marks);

  const std::vector<double>& event_times() const { return times_; }
  const std::vector<double>& marks() const { return marks_; }
  std::size_t size() const { return times_.size(); }
  double horizon() const { return horizon_; }

  // Right-continuous intensity: includes the jump of an event at t.
  double lambda_at(double t) const;
  // Left limit lambda_{t-}.
  double lambda_before(double t) const;
  // Intensity just after event i.
  double lambda_after(std::size_t i) const { return lambda_after_[i]; }

  std::size_t N_at(double t) const;
  double L_at(double t) const;

  // Lambda^N_t = int_0^t lambda_u du, exact.
  double integrated_intensity(double t) const;

 private:
  std::size_t events_up_to(double t) const;

  double lambda0_, alpha_, beta_, horizon_;
  std::vector<double> times_;
  std::vector<double> marks_;
  std::vector<double> lambda_after_;
  std::vector<double> cum_marks_;
};

// Ogata thinning with the decaying intensity as the dominating rate.
// Deterministic in (seed, path_index).
HawkesPath simulate_hawkes(const ValidatedModel& model, const JumpDistribution& dist,
                           std::uint64_t seed, std::uint64_t path_index = 0,
                           std::size_t event_cap = kDefaultEventCap);

std::vector<HawkesPath> simulate_hawkes_paths(const ValidatedModel& model,
                                              const JumpDistribution& dist, std::uint64_t seed,
                                              std::size_t n_paths,
                                              std::size_t event_cap = kDefaultEventCap);

struct IntensityMoments {
  double EN;
  double Elambda;
};

// First moments of (N_t, lambda_t) from the linear moment ODE, closed form.
IntensityMoments mean_intensity_ode(const ValidatedModel& model, double t);

struct Compensator {
  double LambdaN;
  double LambdaL;
};

Compensator compensator(const HawkesPath& path, double meanJ, double t);

struct ResidualLine {
  double t;
  MeanEstimate n_residual;  // N_t - Lambda^N_t
  MeanEstimate l_residual;  // L_t - Lambda^L_t
  bool flagged;             // either |mean| > k * SE
};

struct ResidualReport {
  std::vector<ResidualLine> lines;
  double k_se = 3.0;
  bool all_pass() const;
};

ResidualReport martingale_residual_test(std::span<const HawkesPath> paths,
                                        std::span<const double> times, double meanJ,
                                        double k_se = 3.0);

// CSV: path_id,event_index,time,mark,lambda_after
void write_events_csv(std::ostream& os, std::span<const HawkesPath> paths);

}  // namespace hhr
