#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hhr/error.hpp"

namespace hhr {

// Right-continuous step function on [0, inf): value_i applies on
// [t_i, t_{i+1}).  The first breakpoint must sit at t = 0.
class PiecewiseConstant {
 public:
  PiecewiseConstant() = default;
  explicit PiecewiseConstant(double constant) : segments_{{0.0, constant}} {}
  explicit PiecewiseConstant(std::vector<std::pair<double, double>> segments);

  double operator()(double t) const;
  const std::vector<std::pair<double, double>>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }

  // Breakpoints strictly inside (a, b).
  std::vector<double> breakpoints_in(double a, double b) const;

  // sup over [0, horizon] of (value - shift)^2; exact for a step function.
  double sup_squared_gap(double shift, double horizon) const;

 private:
  std::vector<std::pair<double, double>> segments_;
};

struct ModelParams {
  double lambda0 = 1.0;
  double alpha = 0.5;
  double beta = 1.0;
  double S0 = 100.0;
  double r = 0.03;
  PiecewiseConstant mu{0.05};
  double rho = -0.5;
  double v0 = 0.04;
  double kappa = 2.0;
  double vbar = 0.04;
  double sigma = 0.3;
  double eta = 0.05;
  double T = 1.0;
};

class JumpDistribution {
 public:
  enum class Kind { Constant, Exponential };

  static JumpDistribution constant(double value);
  static JumpDistribution exponential(double rate);

  Kind kind() const { return kind_; }
  // Constant: the jump size.  Exponential: the rate.
  double parameter() const { return parameter_; }

  // Right edge of the MGF domain: +inf for Constant, the rate for Exponential.
  double epsilon_j() const;
  double mean() const { return moment(1); }
  double moment(int s) const;
  double mgf(double t) const;

  // Inverse-CDF draw from a uniform on (0, 1).
  double quantile(double u) const;

  template <class URBG>
  double sample(URBG& gen) const {
    if (kind_ == Kind::Constant) return parameter_;
    const double u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
    return quantile(u);
  }

  std::string describe() const;

 private:
  JumpDistribution(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}
  Kind kind_;
  double parameter_;
};

struct Violation {
  ErrorKind kind;
  std::string field;
  std::string message;
};

struct ValidationResult;
ValidationResult validate(const ModelParams& params);

// Parameters that passed every static check.  Downstream modules only
// accept this type, so an unchecked ModelParams cannot reach a solver.
class ValidatedModel {
 public:
  const ModelParams& params() const { return params_; }
  const ModelParams* operator->() const { return &params_; }

  // D = sup_t (mu(t) - r)^2 on [0, T].
  double drift_gap_sup() const { return drift_gap_sup_; }
  double mu(double t) const { return params_.mu(t); }

 private:
  friend ValidationResult validate(const ModelParams& params);
  explicit ValidatedModel(ModelParams params);
  ModelParams params_;
  double drift_gap_sup_;
};

struct ValidationResult {
  std::optional<ValidatedModel> model;
  std::vector<Violation> violations;

  bool ok() const { return model.has_value(); }
};

// Total: never throws; reports every violated condition.
ValidationResult validate(const ModelParams& params);

// Throws the first violation as an Error, with all messages joined.
ValidatedModel validate_or_throw(const ModelParams& params);

double mgf(const JumpDistribution& dist, double t);
double jump_moment(const JumpDistribution& dist, int s);

}  // namespace hhr
