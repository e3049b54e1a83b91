#include "hhr/special_functions.hpp"

#include <limits>
#include <sstream>

#include "hhr/error.hpp"

namespace hhr {

namespace {

constexpr double kZGuard = 700.0;
// Above this k(t)/2 the negative CIR moment switches to the large-argument form.
constexpr double kAsymptoticZ = 1e3;
// Beyond this the positive series becomes too long and the variance is negligible.
constexpr double kSeriesZLimit = 1e7;

bool nonpositive_integer(double b) { return b <= 0.0 && b == std::floor(b); }

__extension__ typedef __float128 quad;

// Direct series.  Negative z alternates in sign and cancels by up to e^{|z|},
// so that branch accumulates in 128-bit floating point.
template <class Real>
double series(double a, double b, double z, const Hyp1F1Params& params) {
  auto absval = [](Real x) { return x < 0 ? -x : x; };
  Real term = 1;
  Real sum = 1;
  const Real zr = z;
  const Real tol = params.tolerance * 1e-3;
  for (int n = 0; n < params.max_terms; ++n) {
    const Real ratio = (Real(a) + n) / ((Real(b) + n) * (n + 1)) * zr;
    term *= ratio;
    sum += term;
    if (term == 0) return static_cast<double>(sum);  // a is a nonpositive integer
    // Relative stopping: the alternating branch can end far below 1.
    if (absval(term) <= tol * absval(sum) && absval(ratio) < 1) return static_cast<double>(sum);
  }
  std::ostringstream os;
  os << "1F1(" << a << ", " << b << "; " << z << ") did not converge in " << params.max_terms
     << " terms";
  raise(ErrorKind::NonConvergence, os.str());
}

}  // namespace

double hyp1f1(double a, double b, double z, const Hyp1F1Params& params) {
  if (nonpositive_integer(b)) raise(ErrorKind::Domain, "1F1 requires b not in {0, -1, -2, ...}");
  if (!std::isfinite(z) || std::abs(z) > kZGuard) {
    std::ostringstream os;
    os << "1F1 argument |z| = " << std::abs(z) << " exceeds " << kZGuard;
    raise(ErrorKind::Domain, os.str());
  }
  if (z == 0.0) return 1.0;
  if (z < params.kummer_threshold) return std::exp(z) * series<long double>(b - a, b, -z, params);
  if (z < 0.0) return series<quad>(a, b, z, params);
  return series<long double>(a, b, z, params);
}

double hyp1f1_scaled(double a, double b, double z, const Hyp1F1Params& params) {
  if (!(a > 0.0) || !(b > 0.0)) raise(ErrorKind::Domain, "scaled 1F1 requires a > 0 and b > 0");
  if (!(z >= 0.0) || !std::isfinite(z)) raise(ErrorKind::Domain, "scaled 1F1 requires finite z >= 0");
  if (z == 0.0) return 1.0;
  // All terms are positive: track log(term) and a running log-sum.
  const double log_z = std::log(z);
  const double log_tol = std::log(params.tolerance * 1e-3);
  const long long limit = params.max_terms + static_cast<long long>(4.0 * z);
  double log_term = 0.0;
  double log_sum = 0.0;
  for (long long n = 0; n < limit; ++n) {
    const double step = std::log((a + n) / ((b + n) * (n + 1.0))) + log_z;
    log_term += step;
    if (log_term > log_sum) {
      log_sum = log_term + std::log1p(std::exp(log_sum - log_term));
    } else {
      log_sum += std::log1p(std::exp(log_term - log_sum));
    }
    if (step < 0.0 && log_term - log_sum < log_tol) return std::exp(log_sum - z);
  }
  raise(ErrorKind::NonConvergence, "scaled 1F1 did not converge");
}

double cir_neg_moment(double kappa, double vbar, double sigma, double v0, double t, double s) {
  if (!(t > 0.0)) raise(ErrorKind::Domain, "cir_neg_moment requires t > 0");
  if (!(kappa > 0.0) || !(sigma > 0.0) || !(v0 > 0.0) || !(vbar > 0.0))
    raise(ErrorKind::Domain, "cir_neg_moment requires positive kappa, vbar, sigma, v0");
  if (!(2.0 * kappa * vbar > s * sigma * sigma)) {
    std::ostringstream os;
    os << "2 kappa vbar = " << 2.0 * kappa * vbar << " <= s sigma^2 = " << s * sigma * sigma;
    raise(ErrorKind::HypothesisViolated, os.str());
  }
  const double sig2 = sigma * sigma;
  const double one_minus = -std::expm1(-kappa * t);
  const double half_df = 2.0 * kappa * vbar / sig2;                      // delta / 2
  const double z = 2.0 * kappa * v0 * std::exp(-kappa * t) / (sig2 * one_minus);  // k(t) / 2
  const double shape = half_df - s;

  if (z > kAsymptoticZ) {
    // Large-argument expansion of e^{-z} 1F1 times the Gamma ratio; the
    // leading term is (e^{kappa t} / v0)^s.
    const double lead = std::pow(std::exp(kappa * t) / v0, s);
    double term = 1.0;
    double sum = 1.0;
    bool converged = false;
    for (int n = 0; n < 60; ++n) {
      const double next = term * (s + n) * (1.0 - shape + n) / ((n + 1.0) * z);
      if (std::abs(next) >= std::abs(term) && n > 0) break;
      term = next;
      sum += term;
      if (std::abs(term) < 1e-15 * std::abs(sum)) {
        converged = true;
        break;
      }
    }
    if (converged) return lead * sum;
    if (z > kSeriesZLimit) {
      // Near-deterministic variance: second-order delta method around the mean.
      const double e = std::exp(-kappa * t);
      const double m = vbar + (v0 - vbar) * e;
      const double var = v0 * sig2 / kappa * (e - e * e) + vbar * sig2 / (2.0 * kappa) * one_minus * one_minus;
      return std::pow(m, -s) * (1.0 + 0.5 * s * (s + 1.0) * var / (m * m));
    }
  }

  const double log_gamma_ratio = std::lgamma(shape) - std::lgamma(half_df);
  const double log_prefactor = -s * std::log(sig2 * one_minus / (2.0 * kappa));  // (1 / (2 scale))^s
  return std::exp(log_prefactor + log_gamma_ratio) * hyp1f1_scaled(shape, half_df, z);
}

double integrated_inverse_cir_exp(double kappa, double vbar, double sigma, double v0, double T,
                                  double c) {
  if (!(kappa > 0.0) || !(sigma > 0.0) || !(v0 > 0.0) || !(vbar > 0.0) || !(T > 0.0))
    raise(ErrorKind::Domain, "integrated_inverse_cir_exp requires positive parameters");
  const double sig2 = sigma * sigma;
  if (!(2.0 * kappa * vbar > sig2)) raise(ErrorKind::HypothesisViolated, "2 kappa vbar <= sigma^2");
  const double nu = kappa * vbar / sig2 - 0.5;
  const double c_max = 0.5 * std::pow((2.0 * kappa * vbar - sig2) / (2.0 * sigma), 2);
  if (c > c_max) {
    std::ostringstream os;
    os << "c = " << c << " exceeds " << c_max;
    raise(ErrorKind::HypothesisViolated, os.str());
  }
  const double disc = std::max(0.0, nu * nu - 2.0 * c / sig2);
  const double alpha = -nu + std::sqrt(disc);
  const double gamma = 2.0 * (alpha + kappa * vbar / sig2);
  if (c == 0.0 || alpha == 0.0) return 1.0;
  const double y = std::expm1(kappa * T) / (v0 * kappa);
  const double x = 2.0 / (sig2 * y);
  // 1F1(alpha, gamma; -x) = e^{-x} 1F1(gamma - alpha, gamma; x), both parameters positive.
  const double log_front = std::lgamma(gamma - alpha) - std::lgamma(gamma) + alpha * std::log(x);
  return std::exp(log_front) * hyp1f1_scaled(gamma - alpha, gamma, x);
}

}  // namespace hhr
