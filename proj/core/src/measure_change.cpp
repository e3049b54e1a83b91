#include "hhr/measure_change.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hhr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest Q2 used when the negative-moment constraint is vacuous (D = 0).
constexpr double kQ2Ceiling = 1e16;

}  // namespace

double c_cap(const ValidatedModel& model) {
  const auto& p = model.params();
  return p.kappa * p.kappa / (2.0 * p.sigma * p.sigma);
}

double big_d(const ValidatedModel& model, double c) {
  const auto& p = model.params();
  const double cap = c_cap(model);
  if (c > cap) {
    std::ostringstream os;
    os << "c = " << c << " exceeds kappa^2/(2 sigma^2) = " << cap;
    raise(ErrorKind::Domain, os.str());
  }
  if (c == cap) return 0.0;
  return std::sqrt(std::max(0.0, p.kappa * p.kappa - 2.0 * p.sigma * p.sigma * c));
}

double lambda_cap(const ValidatedModel& model, double c) {
  const auto& p = model.params();
  const double D = big_d(model, c);
  // Rewritten with E = expm1(D T):  2 eta c E / (2 D + (D + kappa) E),
  // then divided through by D so the D -> 0 corner is continuous.
  const double e_over_d = D > 0.0 ? std::expm1(D * p.T) / D : p.T;
  return 2.0 * p.eta * c * e_over_d / (2.0 + (D + p.kappa) * e_over_d);
}

double mgf_threshold(const ValidatedModel& model) {
  const auto& p = model.params();
  if (p.alpha == 0.0) return kInf;
  const double ratio = p.alpha / p.beta;
  return std::exp(ratio - 1.0) / ratio;
}

bool novikov_predicate(const ValidatedModel& model, const JumpDistribution& dist, double c) {
  const double lam = lambda_cap(model, c);
  if (!(lam < dist.epsilon_j())) return false;
  return dist.mgf(lam) <= mgf_threshold(model);
}

NovikovThreshold compute_c_l(const ValidatedModel& model, const JumpDistribution& dist,
                             const NovikovOptions& options) {
  const double cap = c_cap(model);
  const int n = std::max(options.scan_points, 2);
  NovikovThreshold out;

  double prev_lambda = -kInf;
  double grid_sup = 0.0;
  int first_false = -1;
  for (int k = 0; k <= n; ++k) {
    const double c = cap * static_cast<double>(k) / n;
    const double lam = lambda_cap(model, c);
    if (lam < prev_lambda) out.monotone_scan = false;
    prev_lambda = lam;
    if (novikov_predicate(model, dist, c)) {
      if (first_false < 0) grid_sup = c;
    } else if (first_false < 0) {
      first_false = k;
    }
  }

  if (!out.monotone_scan) {
    // The predicate set may not be an interval; report the last grid point
    // that satisfies it.
    double sup = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double c = cap * static_cast<double>(k) / n;
      if (novikov_predicate(model, dist, c)) sup = c;
    }
    out.value = sup;
    out.at_cap = sup == cap;
    out.method = "grid";
    return out;
  }

  if (first_false < 0) {
    out.value = cap;
    out.at_cap = true;
    out.method = "cap";
    return out;
  }

  double lo = grid_sup;
  double hi = cap * static_cast<double>(first_false) / n;
  while (hi - lo > options.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (novikov_predicate(model, dist, mid) ? lo : hi) = mid;
    ++out.iterations;
  }
  out.value = 0.5 * (lo + hi);
  out.method = "bisection";
  return out;
}

double em_qs_formula(double c_l, double rho, double q, double s) {
  const double rho2 = rho * rho;
  const double qs = q * s;
  const double first = std::sqrt(c_l / 2.0) / qs;
  const double bracket = 2.0 * qs * (1.0 - rho2) + rho2 * s - 1.0;
  const double second = std::sqrt((1.0 - rho2) * c_l / (qs * bracket));
  return std::min(first, second);
}

AdmissibilityReport a_bounds(const ValidatedModel& model, const JumpDistribution& dist,
                             const AdmissibilityOptions& options) {
  const auto& p = model.params();
  if (!(options.epsilon1 > 0.0) || !(options.epsilon2 > 0.0))
    raise(ErrorKind::Range, "epsilon1 and epsilon2 must be > 0");

  AdmissibilityReport rep;
  rep.epsilon1 = options.epsilon1;
  rep.epsilon2 = options.epsilon2;
  rep.moment_order = 2.0 + options.epsilon1;
  rep.c_cap = c_cap(model);
  rep.D = model.drift_gap_sup();
  rep.c_l = compute_c_l(model, dist, options.novikov);

  const double cl = rep.c_l.value;
  const double rho2 = p.rho * p.rho;
  rep.bound_E = std::sqrt(2.0 * cl);
  rep.assumption_ok[0] = rho2 < cl;
  if (rep.assumption_ok[0]) {
    rep.bound_Em = std::min(std::sqrt(2.0 * cl) / 2.0, std::sqrt(cl - rho2));
  }

  const double s = rep.moment_order;
  const double feller_gap = (2.0 * p.kappa * p.vbar - p.sigma * p.sigma) / (2.0 * p.sigma);
  rep.condition2_value = rep.D > 0.0
                             ? (1.0 - rho2) / (rep.D * (s * s - s)) * feller_gap * feller_gap
                             : kInf;
  rep.assumption_ok[1] = (2.0 * p.kappa * p.vbar > p.sigma * p.sigma) && rep.condition2_value > 1.0;
  rep.assumption_ok[2] = 2.0 * p.kappa * p.vbar > (1.0 + options.epsilon2) * p.sigma * p.sigma;

  if (rep.assumption_ok[1]) {
    const double upper = std::min(rep.condition2_value, kQ2Ceiling);
    const double q2 = std::sqrt(upper);  // geometric mean of 1 and the upper end
    rep.Q2 = q2;
    rep.Q1 = q2 / (q2 - 1.0);
    rep.bound_EmQS_formula = em_qs_formula(cl, p.rho, *rep.Q1, s);
    if (rep.bound_Em) rep.bound_EmQS = std::min(*rep.bound_EmQS_formula, *rep.bound_Em);
  }
  return rep;
}

nlohmann::json to_json(const AdmissibilityReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  auto finite_or_string = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf");
  };
  nlohmann::json j;
  j["c_l"] = r.c_l.value;
  j["c_l_method"] = r.c_l.method;
  j["c_l_at_cap"] = r.c_l.at_cap;
  j["c_l_monotone_scan"] = r.c_l.monotone_scan;
  j["c_l_iterations"] = r.c_l.iterations;
  j["c_cap"] = r.c_cap;
  j["D"] = r.D;
  j["epsilon1"] = r.epsilon1;
  j["epsilon2"] = r.epsilon2;
  j["moment_order"] = r.moment_order;
  j["bound_E"] = r.bound_E;
  j["bound_Em"] = opt(r.bound_Em);
  j["bound_EmQS"] = opt(r.bound_EmQS);
  j["bound_EmQS_formula"] = opt(r.bound_EmQS_formula);
  j["Q1"] = opt(r.Q1);
  j["Q2"] = opt(r.Q2);
  j["condition2_value"] = finite_or_string(r.condition2_value);
  j["assumptions"] = {
      {{"index", 1}, {"condition", "rho^2 < c_l"}, {"pass", r.assumption_ok[0]}},
      {{"index", 2}, {"condition", "negative-moment condition at s = 2 + epsilon1"}, {"pass", r.assumption_ok[1]}},
      {{"index", 3}, {"condition", "2 kappa vbar > (1 + epsilon2) sigma^2"}, {"pass", r.assumption_ok[2]}},
  };
  return j;
}

std::string to_string(MeasureLevel level) {
  switch (level) {
    case MeasureLevel::E: return "E";
    case MeasureLevel::Em: return "Em";
    case MeasureLevel::EmQS: return "EmQS";
  }
  return "?";
}

MeasureLevel parse_measure_level(const std::string& text) {
  if (text == "E") return MeasureLevel::E;
  if (text == "Em") return MeasureLevel::Em;
  if (text == "EmQS") return MeasureLevel::EmQS;
  raise(ErrorKind::Config, "unknown measure level '" + text + "' (expected E, Em or EmQS)");
}

double level_bound(const AdmissibilityReport& r, MeasureLevel level) {
  switch (level) {
    case MeasureLevel::E:
      return r.bound_E;
    case MeasureLevel::Em:
      if (!r.bound_Em) {
        std::ostringstream os;
        os << "rho^2 >= c_l = " << r.c_l.value;
        raise(ErrorKind::RhoTooLarge, os.str());
      }
      return *r.bound_Em;
    case MeasureLevel::EmQS:
      if (!r.assumption_ok[0]) {
        std::ostringstream os;
        os << "rho^2 >= c_l = " << r.c_l.value;
        raise(ErrorKind::RhoTooLarge, os.str());
      }
      for (int i = 1; i < 3; ++i) {
        if (!r.assumption_ok[i]) {
          raise(ErrorKind::Assumption3Violated, "condition " + std::to_string(i + 1) + " fails");
        }
      }
      return *r.bound_EmQS;
  }
  raise(ErrorKind::Admissibility, "unknown level");
}

MeasureSelection select_measure(const AdmissibilityReport& r, double a, MeasureLevel level) {
  const double bound = level_bound(r, level);
  if (!(std::abs(a) < bound)) {
    std::ostringstream os;
    os << "|a| = " << std::abs(a) << " is not below the " << to_string(level) << " bound " << bound;
    raise(ErrorKind::Admissibility, os.str());
  }
  return {a, level, r.epsilon1, r.epsilon2, bound};
}

double theta(const ValidatedModel& model, const MeasureSelection& selection, double t, double v) {
  if (!(v > 0.0)) raise(ErrorKind::Domain, "theta requires v > 0");
  const auto& p = model.params();
  const double sv = std::sqrt(v);
  return ((model.mu(t) - p.r) / sv - selection.a * p.rho * sv) / std::sqrt(1.0 - p.rho * p.rho);
}

QDynamics q_dynamics(const ValidatedModel& model, double a) {
  const auto& p = model.params();
  const double kappa_a = p.kappa + a * p.sigma;
  if (!(kappa_a > 0.0)) {
    std::ostringstream os;
    os << "kappa + a sigma = " << kappa_a << " <= 0";
    raise(ErrorKind::DegenerateReversion, os.str());
  }
  return {kappa_a, p.kappa * p.vbar / kappa_a};
}

QDynamics q_dynamics(const ValidatedModel& model, const MeasureSelection& selection) {
  return q_dynamics(model, selection.a);
}

}  // namespace hhr
