#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace hhr {

// Welford accumulator with an associative merge, so per-chunk partial
// results can be combined in a fixed order for thread-count independence.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

RunningStats summarize(std::span<const double> xs);

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;

  // |mean - target| <= k * se
  bool within(double target, double k = 3.0) const { return std::abs(mean - target) <= k * se; }
  double z_score(double target) const { return se > 0.0 ? (mean - target) / se : 0.0; }
};

MeanEstimate estimate_mean(std::span<const double> xs);

// Pairs consecutive samples (antithetic partners) before estimating.
MeanEstimate estimate_mean_paired(std::span<const double> xs);

// Two-sided one-sample Kolmogorov-Smirnov statistic against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf);

// Asymptotic critical value of sqrt(n) * D at the 1% level.
inline constexpr double kKsCritical1Percent = 1.6276;

}  // namespace hhr

#include <algorithm>

namespace hhr {

template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
  }
  return d;
}

}  // namespace hhr
