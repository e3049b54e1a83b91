#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace hhr {

// Time-independent terminal or running payment phi(x) of the stock price,
// shared by the price solver and the policy functions.
class Payoff {
 public:
  enum class Kind { Zero, Constant, Linear, Guarantee, Put };

  static Payoff zero();
  static Payoff constant(double value = 1.0);
  static Payoff linear(double scale = 1.0);
  // scale * max(G, x)
  static Payoff guarantee(double G, double scale = 1.0);
  // scale * max(G - x, 0)
  static Payoff put(double G, double scale = 1.0);

  // "zero", "constant[:c]", "linear[:k]", "guarantee:G", "put:G", each with an
  // optional "*scale" suffix as written by describe().
  static Payoff parse(const std::string& text);
  // Either a descriptor string or {"type": ..., "G": ..., "scale": ...}.
  static Payoff from_json(const nlohmann::json& j);

  double operator()(double x) const;

  Kind kind() const { return kind_; }
  double strike() const { return strike_; }
  double scale() const { return scale_; }
  bool is_zero() const { return kind_ == Kind::Zero || scale_ == 0.0; }
  bool nondecreasing() const { return kind_ != Kind::Put || scale_ == 0.0; }
  // True when phi does not depend on x.
  bool x_independent() const { return kind_ == Kind::Zero || kind_ == Kind::Constant; }

  Payoff scaled(double factor) const;
  std::string describe() const;
  nlohmann::json to_json() const;

 private:
  Payoff(Kind kind, double strike, double scale) : kind_(kind), strike_(strike), scale_(scale) {}
  Kind kind_ = Kind::Zero;
  double strike_ = 0.0;
  double scale_ = 0.0;
};

}  // namespace hhr
