#include "hhr/core_model.hpp"

#include <algorithm>
#include <sstream>

namespace hhr {

PiecewiseConstant::PiecewiseConstant(std::vector<std::pair<double, double>> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) raise(ErrorKind::Range, "piecewise-constant function needs at least one segment");
  if (segments_.front().first != 0.0) raise(ErrorKind::Range, "first breakpoint must be at t = 0");
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    if (!(segments_[i].first > segments_[i - 1].first))
      raise(ErrorKind::Range, "breakpoints must be strictly increasing");
  }
  for (const auto& [t, v] : segments_) {
    if (!std::isfinite(t) || !std::isfinite(v)) raise(ErrorKind::Range, "non-finite breakpoint or value");
  }
}

double PiecewiseConstant::operator()(double t) const {
  if (segments_.empty()) return 0.0;
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double x, const auto& seg) { return x < seg.first; });
  if (it == segments_.begin()) return segments_.front().second;
  return std::prev(it)->second;
}

std::vector<double> PiecewiseConstant::breakpoints_in(double a, double b) const {
  std::vector<double> out;
  for (const auto& seg : segments_) {
    if (seg.first > a && seg.first < b) out.push_back(seg.first);
  }
  return out;
}

double PiecewiseConstant::sup_squared_gap(double shift, double horizon) const {
  double sup = 0.0;
  for (const auto& [t, v] : segments_) {
    if (t > horizon) break;
    sup = std::max(sup, (v - shift) * (v - shift));
  }
  return sup;
}

JumpDistribution JumpDistribution::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) raise(ErrorKind::Range, "constant jump size must be > 0");
  return {Kind::Constant, value};
}

JumpDistribution JumpDistribution::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) raise(ErrorKind::Range, "exponential jump rate must be > 0");
  return {Kind::Exponential, rate};
}

double JumpDistribution::epsilon_j() const {
  return kind_ == Kind::Constant ? std::numeric_limits<double>::infinity() : parameter_;
}

double JumpDistribution::moment(int s) const {
  if (s < 1) raise(ErrorKind::Domain, "jump moment order must be >= 1");
  if (kind_ == Kind::Constant) return std::pow(parameter_, s);
  // s! / rate^s
  double m = 1.0;
  for (int k = 1; k <= s; ++k) m *= static_cast<double>(k) / parameter_;
  return m;
}

double JumpDistribution::mgf(double t) const {
  if (!(t < epsilon_j())) {
    std::ostringstream os;
    os << "MGF argument " << t << " outside (-inf, " << epsilon_j() << ")";
    raise(ErrorKind::Domain, os.str());
  }
  if (kind_ == Kind::Constant) return std::exp(t * parameter_);
  return parameter_ / (parameter_ - t);
}

double JumpDistribution::quantile(double u) const {
  if (kind_ == Kind::Constant) return parameter_;
  return -std::log1p(-u) / parameter_;
}

std::string JumpDistribution::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::Constant) os << "Constant(" << parameter_ << ")";
  else os << "Exponential(rate " << parameter_ << ")";
  return os.str();
}

ValidatedModel::ValidatedModel(ModelParams params)
    : params_(std::move(params)),
      drift_gap_sup_(params_.mu.sup_squared_gap(params_.r, params_.T)) {}

namespace {

void require_positive(std::vector<Violation>& out, const char* name, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << name << " must be finite and > 0 (got " << value << ")";
    out.push_back({ErrorKind::Range, name, os.str()});
  }
}

}  // namespace

ValidationResult validate(const ModelParams& p) {
  std::vector<Violation> v;
  require_positive(v, "lambda0", p.lambda0);
  require_positive(v, "beta", p.beta);
  require_positive(v, "S0", p.S0);
  require_positive(v, "v0", p.v0);
  require_positive(v, "kappa", p.kappa);
  require_positive(v, "vbar", p.vbar);
  require_positive(v, "sigma", p.sigma);
  require_positive(v, "T", p.T);
  if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha))
    v.push_back({ErrorKind::Range, "alpha", "alpha must be finite and >= 0"});
  if (!(p.eta >= 0.0) || !std::isfinite(p.eta))
    v.push_back({ErrorKind::Range, "eta", "eta must be finite and >= 0"});
  if (!std::isfinite(p.r)) v.push_back({ErrorKind::Range, "r", "r must be finite"});
  if (!(p.rho > -1.0 && p.rho < 1.0))
    v.push_back({ErrorKind::Range, "rho", "rho must lie in (-1, 1)"});
  if (p.mu.empty()) v.push_back({ErrorKind::Range, "mu", "drift function has no segments"});

  if (p.beta > 0.0 && p.alpha >= 0.0 && !(p.alpha < p.beta)) {
    std::ostringstream os;
    os << "alpha/beta = " << p.alpha / p.beta << " >= 1";
    v.push_back({ErrorKind::StabilityViolated, "alpha", os.str()});
  }
  if (p.kappa > 0.0 && p.vbar > 0.0 && p.sigma > 0.0 &&
      !(2.0 * p.kappa * p.vbar >= p.sigma * p.sigma)) {
    std::ostringstream os;
    os << "2*kappa*vbar = " << 2.0 * p.kappa * p.vbar << " < sigma^2 = " << p.sigma * p.sigma;
    v.push_back({ErrorKind::FellerViolated, "sigma", os.str()});
  }

  ValidationResult result;
  result.violations = std::move(v);
  if (result.violations.empty()) result.model = ValidatedModel(p);
  return result;
}

ValidatedModel validate_or_throw(const ModelParams& params) {
  auto result = validate(params);
  if (result.ok()) return *result.model;
  std::string msg;
  for (const auto& viol : result.violations) {
    if (!msg.empty()) msg += "; ";
    msg += std::string(to_string(viol.kind)) + " (" + viol.message + ")";
  }
  throw Error(result.violations.front().kind, msg);
}

double mgf(const JumpDistribution& dist, double t) { return dist.mgf(t); }

double jump_moment(const JumpDistribution& dist, int s) { return dist.moment(s); }

}  // namespace hhr
