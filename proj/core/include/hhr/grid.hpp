#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hhr/core_model.hpp"

namespace hhr {

class Axis {
 public:
  Axis() = default;
  explicit Axis(std::vector<double> nodes);

  static Axis single(double value);
  static Axis uniform(double lo, double hi, std::size_t n);
  // Log-uniform on each side of anchor, with anchor itself a node.
  static Axis log_spaced(double lo, double hi, std::size_t n, double anchor);
  // y = anchor + c sinh(xi), xi uniform on each side of 0; clusters nodes
  // around anchor, which is a node.
  static Axis sinh_stretched(double lo, double hi, std::size_t n, double anchor, double c);

  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double front() const { return nodes_.front(); }
  double back() const { return nodes_.back(); }
  const std::vector<double>& nodes() const { return nodes_; }

  std::size_t nearest(double v) const;
  // Cell index i and weight w so that v ~ (1 - w) node[i] + w node[i + 1];
  // v outside the axis is clamped to the end node.
  std::pair<std::size_t, double> locate(double v) const;

 private:
  std::vector<double> nodes_;
};

// Node counts in the order t x y z; the string form is "TxXxYxZ".
struct GridSize {
  int nt = 64;
  int nx = 48;
  int ny = 24;
  int nz = 16;

  static GridSize parse(const std::string& text);
  std::string to_string() const;
};

struct GridOverrides {
  std::optional<double> x_min, x_max, y_min, y_max, z_max;
};

struct Grid4 {
  int n_t = 0;          // uniform steps on [0, horizon]
  double horizon = 0.0;
  Axis x, y, z;

  std::size_t nx() const { return x.size(); }
  std::size_t ny() const { return y.size(); }
  std::size_t nz() const { return z.size(); }
  std::size_t spatial_size() const { return nx() * ny() * nz(); }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (k * ny() + j) * nx() + i; }
  double dt() const { return horizon / n_t; }
};

// Default truncation: x in [S0/8, 8 S0] log-spaced around S0; y in
// [v0/50, 12 max(vbar, v0)] sinh-stretched around v0; z uniform on
// [lambda0, lambda0 + 8 alpha max(1, E[lambda_horizon] / beta)].  nz = 1
// collapses the intensity axis.
Grid4 make_grid(const ValidatedModel& model, double horizon, const GridSize& size,
                const GridOverrides& overrides = {});

}  // namespace hhr
