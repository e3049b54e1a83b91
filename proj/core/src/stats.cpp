#include "hhr/stats.hpp"

namespace hhr {

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double total = static_cast<double>(n_ + other.n_);
  const double delta = other.mean_ - mean_;
  mean_ += delta * static_cast<double>(other.n_) / total;
  m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
  n_ += other.n_;
}

double RunningStats::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::std_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

RunningStats summarize(std::span<const double> xs) {
  RunningStats s;
  for (double x : xs) s.add(x);
  return s;
}

MeanEstimate estimate_mean(std::span<const double> xs) {
  const auto s = summarize(xs);
  return {s.mean(), s.std_error(), s.count()};
}

MeanEstimate estimate_mean_paired(std::span<const double> xs) {
  RunningStats s;
  for (std::size_t i = 0; i + 1 < xs.size(); i += 2) s.add(0.5 * (xs[i] + xs[i + 1]));
  if (xs.size() % 2 == 1) s.add(xs.back());
  return {s.mean(), s.std_error(), xs.size()};
}

}  // namespace hhr
