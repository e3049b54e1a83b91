#pragma once

#include <array>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "hhr/core_model.hpp"

namespace hhr {

// Upper end of the exponential-moment coefficient range: kappa^2 / (2 sigma^2).
double c_cap(const ValidatedModel& model);

// sqrt(kappa^2 - 2 sigma^2 c); DomainError above c_cap.
double big_d(const ValidatedModel& model, double c);

// Riccati bound on the variance exponential moment; uses the D -> 0 limit
// 2 eta c T / (2 + kappa T) at the cap.
double lambda_cap(const ValidatedModel& model, double c);

// (beta/alpha) exp(alpha/beta - 1); +inf when alpha = 0.
double mgf_threshold(const ValidatedModel& model);

// Lambda(c) < eps_J and M_J(Lambda(c)) <= mgf_threshold.
bool novikov_predicate(const ValidatedModel& model, const JumpDistribution& dist, double c);

struct NovikovThreshold {
  double value = 0.0;
  bool at_cap = false;         // predicate holds on the whole search range
  bool monotone_scan = true;   // Lambda nondecreasing on the scan grid
  std::string method;          // "cap", "bisection" or "grid"
  int iterations = 0;
};

struct NovikovOptions {
  int scan_points = 1024;
  double tolerance = 1e-10;
};

// sup{c in (0, c_cap] : novikov_predicate(c)} by scan-then-bisect.  Falls
// back to the grid supremum (monotone_scan = false) if Lambda is not
// monotone on the scan.
NovikovThreshold compute_c_l(const ValidatedModel& model, const JumpDistribution& dist,
                             const NovikovOptions& options = {});

struct AdmissibilityOptions {
  double epsilon1 = 0.1;
  double epsilon2 = 0.1;
  NovikovOptions novikov{};
};

struct AdmissibilityReport {
  NovikovThreshold c_l;
  double c_cap = 0.0;
  double D = 0.0;  // sup_t (mu_t - r)^2
  double epsilon1 = 0.1;
  double epsilon2 = 0.1;
  double moment_order = 2.1;  // s = 2 + epsilon1

  double bound_E = 0.0;
  std::optional<double> bound_Em;

  // Assumption checks: [0] rho^2 < c_l, [1] negative-moment condition at
  // s = 2 + eps1, [2] 2 kappa vbar > (1 + eps2) sigma^2.
  std::array<bool, 3> assumption_ok{};
  double condition2_value = 0.0;  // left-hand side of check [1]; +inf when D = 0

  std::optional<double> Q2;
  std::optional<double> Q1;
  std::optional<double> bound_EmQS_formula;  // raw two-term minimum at (Q1, s)
  std::optional<double> bound_EmQS;          // min(formula, bound_Em)

  bool all_assumptions() const { return assumption_ok[0] && assumption_ok[1] && assumption_ok[2]; }
};

// Two-term minimum defining the E_m(q, s) bound on |a|.
double em_qs_formula(double c_l, double rho, double q, double s);

AdmissibilityReport a_bounds(const ValidatedModel& model, const JumpDistribution& dist,
                             const AdmissibilityOptions& options = {});

nlohmann::json to_json(const AdmissibilityReport& report);

enum class MeasureLevel { E, Em, EmQS };

std::string to_string(MeasureLevel level);
MeasureLevel parse_measure_level(const std::string& text);

struct MeasureSelection {
  double a = 0.0;
  MeasureLevel level = MeasureLevel::EmQS;
  double epsilon1 = 0.1;
  double epsilon2 = 0.1;
  double bound = 0.0;  // the bound |a| was certified against
};

// Certifies |a| against the level's bound.  Throws RhoTooLarge,
// Assumption3Violated or AdmissibilityError naming the violated bound.
MeasureSelection select_measure(const AdmissibilityReport& report, double a, MeasureLevel level);

// Bound for a level, or throws as select_measure would.
double level_bound(const AdmissibilityReport& report, MeasureLevel level);

// Market price of risk for the B-component of the density process.
double theta(const ValidatedModel& model, const MeasureSelection& selection, double t, double v);

struct QDynamics {
  double kappa_a;
  double vbar_a;
};

// Variance mean reversion under Q(a); DegenerateReversion when kappa + a sigma <= 0.
QDynamics q_dynamics(const ValidatedModel& model, const MeasureSelection& selection);
QDynamics q_dynamics(const ValidatedModel& model, double a);

}  // namespace hhr
