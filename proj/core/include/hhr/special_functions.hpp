#pragma once

#include <cmath>
#include <random>

namespace hhr {

struct Hyp1F1Params {
  double tolerance = 1e-12;
  int max_terms = 200000;
  // Below this z the Kummer transform e^z 1F1(b - a, b; -z) is used.
  double kummer_threshold = -30.0;
};

// Confluent hypergeometric function of the first kind by its power series.
// DomainError for b in {0, -1, -2, ...} or |z| > 700; NonConvergence after
// max_terms.
double hyp1f1(double a, double b, double z, const Hyp1F1Params& params = {});

// e^{-z} 1F1(a, b; z) for z >= 0, summed in log space so that arguments far
// beyond the exp() overflow range stay finite.  Requires a > 0 and b > 0.
double hyp1f1_scaled(double a, double b, double z, const Hyp1F1Params& params = {});

// E[1 / v_t^s] for the jump-free CIR started at v0 (noncentral chi-square
// representation).  HypothesisViolated unless 2 kappa vbar > s sigma^2;
// DomainError for t <= 0.
double cir_neg_moment(double kappa, double vbar, double sigma, double v0, double t, double s);

// E[exp(c int_0^T du / v_u)] for the jump-free CIR, via the reciprocal
// (3/2) process.  HypothesisViolated unless 2 kappa vbar > sigma^2 and
// c <= ((2 kappa vbar - sigma^2) / (2 sigma))^2 / 2.
double integrated_inverse_cir_exp(double kappa, double vbar, double sigma, double v0, double T,
                                  double c);

// Poisson mixture of central chi-squares.
template <class URBG>
double sample_noncentral_chi_square(URBG& gen, double df, double noncentrality) {
  int extra = 0;
  if (noncentrality > 0.0) {
    std::poisson_distribution<int> poisson(0.5 * noncentrality);
    extra = poisson(gen);
  }
  std::gamma_distribution<double> gamma(0.5 * df + extra, 2.0);
  return gamma(gen);
}

// Exact CIR transition v_t -> v_{t+dt}.
template <class URBG>
double sample_cir_step(URBG& gen, double v, double dt, double kappa, double vbar, double sigma) {
  const double scale = sigma * sigma * (-std::expm1(-kappa * dt)) / (4.0 * kappa);
  const double df = 4.0 * kappa * vbar / (sigma * sigma);
  const double ncp = v * std::exp(-kappa * dt) / scale;
  return scale * sample_noncentral_chi_square(gen, df, ncp);
}

}  // namespace hhr
