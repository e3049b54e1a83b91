#include "hhr/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>


namespace hhr {

Axis::Axis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) raise(ErrorKind::Range, "axis needs at least one node");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) raise(ErrorKind::Range, "axis nodes must be strictly increasing");
  }
}

Axis Axis::single(double value) { return Axis(std::vector<double>{value}); }

Axis Axis::uniform(double lo, double hi, std::size_t n) {
  if (n == 1) return single(lo);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  v.back() = hi;
  return Axis(std::move(v));
}

namespace {

// Uniform in s on [s_lo, 0] and [0, s_hi] with 0 at node `split`.
std::vector<double> two_sided(double s_lo, double s_hi, std::size_t n) {
  std::size_t split = static_cast<std::size_t>(std::lround((n - 1) * (-s_lo) / (s_hi - s_lo)));
  split = std::clamp<std::size_t>(split, 1, n - 2);
  std::vector<double> s(n);
  for (std::size_t i = 0; i <= split; ++i) s[i] = s_lo * (1.0 - static_cast<double>(i) / split);
  for (std::size_t i = split; i < n; ++i) s[i] = s_hi * static_cast<double>(i - split) / (n - 1 - split);
  s[split] = 0.0;
  return s;
}

}  // namespace

Axis Axis::log_spaced(double lo, double hi, std::size_t n, double anchor) {
  if (n < 3 || !(lo > 0.0) || !(lo < anchor) || !(anchor < hi))
    raise(ErrorKind::Range, "log axis needs n >= 3 and 0 < lo < anchor < hi");
  auto s = two_sided(std::log(lo / anchor), std::log(hi / anchor), n);
  for (auto& v : s) v = anchor * std::exp(v);
  s.front() = lo;
  s.back() = hi;
  return Axis(std::move(s));
}

Axis Axis::sinh_stretched(double lo, double hi, std::size_t n, double anchor, double c) {
  if (n < 3 || !(lo < anchor) || !(anchor < hi) || !(c > 0.0))
    raise(ErrorKind::Range, "sinh axis needs n >= 3, lo < anchor < hi and c > 0");
  auto s = two_sided(std::asinh((lo - anchor) / c), std::asinh((hi - anchor) / c), n);
  for (auto& v : s) v = anchor + c * std::sinh(v);
  s.front() = lo;
  s.back() = hi;
  return Axis(std::move(s));
}

std::size_t Axis::nearest(double v) const {
  const auto [i, w] = locate(v);
  return (w > 0.5 && i + 1 < size()) ? i + 1 : i;
}

std::pair<std::size_t, double> Axis::locate(double v) const {
  if (nodes_.size() == 1 || v <= nodes_.front()) return {0, 0.0};
  if (v >= nodes_.back()) return {nodes_.size() - 2, 1.0};
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), v);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return {i, (v - nodes_[i]) / (nodes_[i + 1] - nodes_[i])};
}

GridSize GridSize::parse(const std::string& text) {
  GridSize g;
  int* fields[] = {&g.nt, &g.nx, &g.ny, &g.nz};
  std::stringstream ss(text);
  std::string item;
  int count = 0;
  while (std::getline(ss, item, 'x')) {
    if (count == 4) raise(ErrorKind::Config, "grid '" + text + "' has more than four sizes");
    try {
      *fields[count] = std::stoi(item);
    } catch (const std::exception&) {
      raise(ErrorKind::Config, "bad grid size '" + item + "' in '" + text + "'");
    }
    ++count;
  }
  if (count != 4) raise(ErrorKind::Config, "grid must look like TxXxYxZ, got '" + text + "'");
  if (g.nt < 1 || g.nx < 3 || g.ny < 3 || g.nz < 1)
    raise(ErrorKind::Config, "grid needs nt >= 1, nx >= 3, ny >= 3, nz >= 1");
  return g;
}

std::string GridSize::to_string() const {
  std::ostringstream os;
  os << nt << 'x' << nx << 'x' << ny << 'x' << nz;
  return os.str();
}

Grid4 make_grid(const ValidatedModel& model, double horizon, const GridSize& size,
                const GridOverrides& overrides) {
  const auto& p = model.params();
  if (!(horizon > 0.0)) raise(ErrorKind::Range, "grid horizon must be > 0");
  Grid4 g;
  g.n_t = size.nt;
  g.horizon = horizon;

  const double x_lo = overrides.x_min.value_or(p.S0 / 8.0);
  const double x_hi = overrides.x_max.value_or(8.0 * p.S0);
  g.x = Axis::log_spaced(x_lo, x_hi, size.nx, p.S0);

  const double y_lo = overrides.y_min.value_or(p.v0 / 50.0);
  const double y_hi = overrides.y_max.value_or(12.0 * std::max(p.vbar, p.v0));
  g.y = Axis::sinh_stretched(y_lo, y_hi, size.ny, p.v0, 0.25 * std::max(p.vbar, p.v0));

  if (size.nz == 1) {
    g.z = Axis::single(p.lambda0);
  } else {
    // E[lambda] is monotone in t, so its value at the horizon is the sup.
    const double gap = p.beta - p.alpha;
    const double mean_lambda = p.lambda0 * (p.beta - p.alpha * std::exp(-gap * horizon)) / gap;
    const double scale = std::max(1.0, mean_lambda / p.beta);
    const double z_hi = overrides.z_max.value_or(p.lambda0 + 8.0 * std::max(p.alpha, 0.05) * scale);
    g.z = Axis::uniform(p.lambda0, z_hi, size.nz);
  }
  return g;
}

}  // namespace hhr
