#include "hhr/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hhr/error.hpp"

namespace hhr {

Payoff Payoff::zero() { return Payoff(Kind::Zero, 0.0, 0.0); }
Payoff Payoff::constant(double value) { return Payoff(Kind::Constant, 0.0, value); }
Payoff Payoff::linear(double scale) { return Payoff(Kind::Linear, 0.0, scale); }
Payoff Payoff::guarantee(double G, double scale) { return Payoff(Kind::Guarantee, G, scale); }
Payoff Payoff::put(double G, double scale) { return Payoff(Kind::Put, G, scale); }

namespace {

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    raise(ErrorKind::Config, "bad number '" + text + "' in payoff " + what);
  }
}

// Shortest text that reads back to the same double.
std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

Payoff Payoff::parse(const std::string& full) {
  // Optional "*scale" suffix, as written by describe().
  const auto star = full.find('*');
  const std::string text = full.substr(0, star);
  const double scale = star == std::string::npos ? 1.0 : parse_number(full.substr(star + 1), full);
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const bool has_arg = colon != std::string::npos;
  const std::string arg = has_arg ? text.substr(colon + 1) : "";
  if (head == "zero") return zero();
  if (head == "constant") return constant(scale * (has_arg ? parse_number(arg, full) : 1.0));
  if (head == "linear") return linear(scale * (has_arg ? parse_number(arg, full) : 1.0));
  if (head == "guarantee" || head == "put") {
    if (!has_arg) raise(ErrorKind::Config, "payoff '" + head + "' needs a level, e.g. " + head + ":100");
    const double G = parse_number(arg, full);
    return head == "guarantee" ? guarantee(G, scale) : put(G, scale);
  }
  raise(ErrorKind::Config, "unknown payoff '" + full + "'");
}

Payoff Payoff::from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse(j.get<std::string>());
  if (j.is_number()) return constant(j.get<double>());
  if (!j.is_object() || !j.contains("type")) raise(ErrorKind::Config, "payoff must be a string or an object with 'type'");
  const auto type = j.at("type").get<std::string>();
  const double scale = j.value("scale", 1.0);
  if (type == "zero") return zero();
  if (type == "constant") return constant(j.value("value", 1.0) * scale);
  if (type == "linear") return linear(scale);
  if (type == "guarantee" || type == "put") {
    if (!j.contains("G")) raise(ErrorKind::Config, "payoff '" + type + "' needs G");
    const double G = j.at("G").get<double>();
    return type == "guarantee" ? guarantee(G, scale) : put(G, scale);
  }
  raise(ErrorKind::Config, "unknown payoff type '" + type + "'");
}

double Payoff::operator()(double x) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return scale_;
    case Kind::Linear: return scale_ * x;
    case Kind::Guarantee: return scale_ * std::max(strike_, x);
    case Kind::Put: return scale_ * std::max(strike_ - x, 0.0);
  }
  return 0.0;
}

Payoff Payoff::scaled(double factor) const { return Payoff(kind_, strike_, scale_ * factor); }

std::string Payoff::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Zero: return "zero";
    case Kind::Constant: os << "constant:" << shortest(scale_); return os.str();
    case Kind::Linear: os << "linear"; break;
    case Kind::Guarantee: os << "guarantee:" << shortest(strike_); break;
    case Kind::Put: os << "put:" << shortest(strike_); break;
  }
  if (scale_ != 1.0) os << "*" << shortest(scale_);
  return os.str();
}

nlohmann::json Payoff::to_json() const {
  switch (kind_) {
    case Kind::Zero: return {{"type", "zero"}};
    case Kind::Constant: return {{"type", "constant"}, {"value", scale_}};
    case Kind::Linear: return {{"type", "linear"}, {"scale", scale_}};
    case Kind::Guarantee: return {{"type", "guarantee"}, {"G", strike_}, {"scale", scale_}};
    case Kind::Put: return {{"type", "put"}, {"G", strike_}, {"scale", scale_}};
  }
  return {};
}

}  // namespace hhr
