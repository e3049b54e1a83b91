#include "hhr/hawkes.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "hhr/parallel.hpp"
#include "hhr/rng.hpp"

namespace hhr {

HawkesPath::HawkesPath(double lambda0, double alpha, double beta, double horizon,
                       std::vector<double> event_times, std::vector<double> marks)
    : lambda0_(lambda0),
      alpha_(alpha),
      beta_(beta),
      horizon_(horizon),
      times_(std::move(event_times)),
      marks_(std::move(marks)) {
  if (times_.size() != marks_.size()) raise(ErrorKind::Range, "event times and marks differ in length");
  lambda_after_.reserve(times_.size());
  cum_marks_.reserve(times_.size());
  double excess = 0.0;  // lambda - lambda0 just after the previous event
  double prev = 0.0;
  double cum = 0.0;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (times_[i] < prev) raise(ErrorKind::Range, "event times must be nondecreasing");
    excess = excess * std::exp(-beta_ * (times_[i] - prev)) + alpha_;
    prev = times_[i];
    lambda_after_.push_back(lambda0_ + excess);
    cum += marks_[i];
    cum_marks_.push_back(cum);
  }
}

std::size_t HawkesPath::events_up_to(double t) const {
  return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
}

double HawkesPath::lambda_at(double t) const {
  const std::size_t n = events_up_to(t);
  if (n == 0) return lambda0_;
  return lambda0_ + (lambda_after_[n - 1] - lambda0_) * std::exp(-beta_ * (t - times_[n - 1]));
}

double HawkesPath::lambda_before(double t) const {
  const std::size_t n = static_cast<std::size_t>(
      std::lower_bound(times_.begin(), times_.end(), t) - times_.begin());
  if (n == 0) return lambda0_;
  return lambda0_ + (lambda_after_[n - 1] - lambda0_) * std::exp(-beta_ * (t - times_[n - 1]));
}

std::size_t HawkesPath::N_at(double t) const { return events_up_to(t); }

double HawkesPath::L_at(double t) const {
  const std::size_t n = events_up_to(t);
  return n == 0 ? 0.0 : cum_marks_[n - 1];
}

double HawkesPath::integrated_intensity(double t) const {
  if (t <= 0.0) return 0.0;
  const std::size_t n = events_up_to(t);
  double kernel = 0.0;
  for (std::size_t i = 0; i < n; ++i) kernel += -std::expm1(-beta_ * (t - times_[i]));
  return lambda0_ * t + (beta_ > 0.0 ? alpha_ / beta_ * kernel : 0.0);
}

HawkesPath simulate_hawkes(const ValidatedModel& model, const JumpDistribution& dist,
                           std::uint64_t seed, std::uint64_t path_index, std::size_t event_cap) {
  const auto& p = model.params();
  auto gen = make_stream(seed, path_index, Substream::Hawkes);
  std::vector<double> times;
  std::vector<double> marks;

  double t = 0.0;
  double t_ref = 0.0;
  double excess = 0.0;  // lambda - lambda0 at t_ref
  while (true) {
    const double bound = p.lambda0 + excess;
    t += -std::log(gen.uniform()) / bound;
    if (t > p.T) break;
    excess *= std::exp(-p.beta * (t - t_ref));
    t_ref = t;
    const double intensity = p.lambda0 + excess;
    if (gen.uniform() * bound <= intensity) {
      if (times.size() >= event_cap) {
        std::ostringstream os;
        os << "path " << path_index << " exceeded " << event_cap << " events";
        raise(ErrorKind::EventOverflow, os.str());
      }
      times.push_back(t);
      marks.push_back(dist.sample(gen));
      excess += p.alpha;
    }
  }
  return HawkesPath(p.lambda0, p.alpha, p.beta, p.T, std::move(times), std::move(marks));
}

std::vector<HawkesPath> simulate_hawkes_paths(const ValidatedModel& model,
                                              const JumpDistribution& dist, std::uint64_t seed,
                                              std::size_t n_paths, std::size_t event_cap) {
  std::vector<std::optional<HawkesPath>> slots(n_paths);
  parallel_for(n_paths, [&](std::size_t i) { slots[i] = simulate_hawkes(model, dist, seed, i, event_cap); });
  std::vector<HawkesPath> out;
  out.reserve(n_paths);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

IntensityMoments mean_intensity_ode(const ValidatedModel& model, double t) {
  const auto& p = model.params();
  if (t < 0.0 || t > p.T) raise(ErrorKind::Domain, "moment time must lie in [0, T]");
  const double gap = p.beta - p.alpha;  // > 0 by stability
  const double decay = std::exp(-gap * t);
  const double Elambda = p.lambda0 * (p.beta - p.alpha * decay) / gap;
  // E[N_t] = int_0^t E[lambda_u] du; -expm1 keeps small gap*t accurate.
  const double EN = p.lambda0 * (p.beta * t - p.alpha * (-std::expm1(-gap * t)) / gap) / gap;
  return {EN, Elambda};
}

Compensator compensator(const HawkesPath& path, double meanJ, double t) {
  const double LambdaN = path.integrated_intensity(t);
  return {LambdaN, meanJ * LambdaN};
}

bool ResidualReport::all_pass() const {
  return std::none_of(lines.begin(), lines.end(), [](const ResidualLine& l) { return l.flagged; });
}

ResidualReport martingale_residual_test(std::span<const HawkesPath> paths,
                                        std::span<const double> times, double meanJ,
                                        double k_se) {
  ResidualReport report;
  report.k_se = k_se;
  std::vector<double> n_res(paths.size());
  std::vector<double> l_res(paths.size());
  for (double t : times) {
    parallel_for(paths.size(), [&](std::size_t i) {
      const auto comp = compensator(paths[i], meanJ, t);
      n_res[i] = static_cast<double>(paths[i].N_at(t)) - comp.LambdaN;
      l_res[i] = paths[i].L_at(t) - comp.LambdaL;
    });
    ResidualLine line{t, estimate_mean(n_res), estimate_mean(l_res), false};
    // A zero-variance residual (t = 0) must be exactly zero.
    auto bad = [k_se](const MeanEstimate& m) {
      return m.se > 0.0 ? std::abs(m.mean) > k_se * m.se : m.mean != 0.0;
    };
    line.flagged = bad(line.n_residual) || bad(line.l_residual);
    report.lines.push_back(line);
  }
  return report;
}

void write_events_csv(std::ostream& os, std::span<const HawkesPath> paths) {
  os << "path_id,event_index,time,mark,lambda_after\n";
  os.precision(12);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    for (std::size_t i = 0; i < path.size(); ++i) {
      os << p << ',' << i << ',' << path.event_times()[i] << ',' << path.marks()[i] << ','
         << path.lambda_after(i) << '\n';
    }
  }
}

}  // namespace hhr
