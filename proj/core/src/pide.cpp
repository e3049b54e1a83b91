#include "hhr/pide.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hhr/parallel.hpp"

namespace hhr {

void gauss_laguerre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) raise(ErrorKind::Range, "Gauss-Laguerre needs n >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    jacobi(i, i) = 2.0 * i + 1.0;
    if (i + 1 < n) jacobi(i, i + 1) = jacobi(i + 1, i) = i + 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    weights[i] = v0 * v0;
  }
}

JumpQuadrature JumpQuadrature::build(const JumpDistribution& dist, int n, double tail_quantile) {
  JumpQuadrature q;
  if (dist.kind() == JumpDistribution::Kind::Constant) {
    q.nodes = {dist.parameter()};
    q.weights = {1.0};
    return q;
  }
  std::vector<double> x, w;
  gauss_laguerre(n, x, w);
  const double rate = dist.parameter();
  const double cutoff = dist.quantile(tail_quantile);
  double tail_mass = 0.0;
  double tail_moment = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = x[i] / rate;
    if (u <= cutoff) {
      q.nodes.push_back(u);
      q.weights.push_back(w[i]);
    } else {
      tail_mass += w[i];
      tail_moment += w[i] * u;
    }
  }
  if (tail_mass > 0.0) {
    q.nodes.push_back(tail_moment / tail_mass);
    q.weights.push_back(tail_mass);
  }
  double total = 0.0;
  for (double v : q.weights) total += v;
  for (double& v : q.weights) v /= total;
  return q;
}

double JumpQuadrature::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) m += weights[i] * nodes[i];
  return m;
}

namespace {

// Drift b and diffusion coefficient d at an interior node with spacings
// hm (left) and hp (right).  Central differences unless the cell Peclet
// number exceeds 2, then first-order upwind for the drift.
void interior_row(double b, double d, double hm, double hp, double& l, double& c, double& u) {
  const double h = std::max(hm, hp);
  const bool upwind = d <= 0.0 || std::abs(b) * h > 2.0 * d;
  l = c = u = 0.0;
  if (upwind) {
    if (b > 0.0) {
      c -= b / hp;
      u += b / hp;
    } else {
      l -= b / hm;
      c += b / hm;
    }
  } else {
    l += -b * hp / (hm * (hm + hp));
    c += b * (hp - hm) / (hm * hp);
    u += b * hm / (hp * (hm + hp));
  }
  l += 2.0 * d / (hm * (hm + hp));
  c -= 2.0 * d / (hm * hp);
  u += 2.0 * d / (hp * (hm + hp));
}

}  // namespace

GeneratorDiscretization::GeneratorDiscretization(const Grid4& grid, const ValidatedModel& model,
                                                 const QDynamics& q, const JumpQuadrature& jumps,
                                                 XMinBoundary x_min)
    : grid_(grid), r_(model->r), dirichlet_(x_min == XMinBoundary::DiscountedPayoff) {
  const auto& p = model.params();
  const std::size_t nx = grid.nx(), ny = grid.ny(), nz = grid.nz();
  const auto& X = grid.x;
  const auto& Y = grid.y;
  const auto& Z = grid.z;

  ax_.l.assign(nx * ny, 0.0);
  ax_.d.assign(nx * ny, 0.0);
  ax_.u.assign(nx * ny, 0.0);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t id = j * nx + i;
      const double b = p.r * X[i];
      const double d = 0.5 * X[i] * X[i] * Y[j];
      if (i == 0) {
        if (dirichlet_) continue;
        const double hp = X[1] - X[0];
        ax_.d[id] = -b / hp - p.r;
        ax_.u[id] = b / hp;
      } else if (i == nx - 1) {
        const double hm = X[i] - X[i - 1];
        ax_.l[id] = -b / hm;
        ax_.d[id] = b / hm - p.r;
      } else {
        interior_row(b, d, X[i] - X[i - 1], X[i + 1] - X[i], ax_.l[id], ax_.d[id], ax_.u[id]);
        ax_.d[id] -= p.r;
      }
    }
  }

  ay_.l.assign(ny, 0.0);
  ay_.d.assign(ny, 0.0);
  ay_.u.assign(ny, 0.0);
  for (std::size_t j = 0; j < ny; ++j) {
    const double b = -q.kappa_a * (Y[j] - q.vbar_a);
    const double d = 0.5 * p.sigma * p.sigma * Y[j];
    if (j == 0) {
      if (b > 0.0) {
        const double hp = Y[1] - Y[0];
        ay_.d[j] = -b / hp;
        ay_.u[j] = b / hp;
      }
    } else if (j == ny - 1) {
      if (b < 0.0) {
        const double hm = Y[j] - Y[j - 1];
        ay_.l[j] = -b / hm;
        ay_.d[j] = b / hm;
      }
    } else {
      interior_row(b, d, Y[j] - Y[j - 1], Y[j + 1] - Y[j], ay_.l[j], ay_.d[j], ay_.u[j]);
    }
  }

  az_.l.assign(nz, 0.0);
  az_.d.assign(nz, 0.0);
  az_.u.assign(nz, 0.0);
  for (std::size_t k = 1; k < nz; ++k) {
    // Drift toward lambda0 is nonpositive: backward difference is upwind.
    const double b = -p.beta * (Z[k] - p.lambda0);
    const double hm = Z[k] - Z[k - 1];
    az_.l[k] = -b / hm;
    az_.d[k] = b / hm;
  }

  mixed_.assign(nx * ny, 0.0);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      mixed_[j * nx + i] = p.sigma * p.rho * X[i] * Y[j] / ((X[i + 1] - X[i - 1]) * (Y[j + 1] - Y[j - 1]));
    }
  }

  jump_rows_.resize(ny);
  double clamped = 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    std::vector<double> row(ny, 0.0);
    for (std::size_t q_i = 0; q_i < jumps.size(); ++q_i) {
      const double w = jumps.weights[q_i];
      const double target = Y[j] + p.eta * jumps.nodes[q_i];
      if (target > Y.back()) clamped += w;
      const auto [cell, t] = Y.locate(target);
      row[cell] += (1.0 - t) * w;
      if (t > 0.0) row[cell + 1] += t * w;
    }
    for (std::size_t jj = 0; jj < ny; ++jj) {
      if (row[jj] != 0.0) jump_rows_[j].emplace_back(jj, row[jj]);
    }
  }
  y_clamp_fraction_ = clamped / static_cast<double>(ny);

  z_cell_.assign(nz, 0);
  z_weight_.assign(nz, 0.0);
  std::size_t z_clamped = 0;
  for (std::size_t k = 0; k < nz; ++k) {
    const double target = Z[k] + p.alpha;
    if (nz > 1) {
      const auto [cell, t] = Z.locate(target);
      z_cell_[k] = cell;
      z_weight_[k] = t;
    }
    if (target > Z.back()) ++z_clamped;
  }
  z_clamp_fraction_ = static_cast<double>(z_clamped) / static_cast<double>(nz);
}

void GeneratorDiscretization::apply_a0(const double* u, double* out) const {
  const std::size_t nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const std::size_t plane = nx * ny;
  const std::size_t i0 = dirichlet_ ? 1 : 0;
  parallel_for(nz * ny, [&](std::size_t line) {
    const std::size_t k = line / ny;
    const std::size_t j = line % ny;
    const double z = grid_.z[k];
    const std::size_t kk = z_cell_[k];
    const double wz = z_weight_[k];
    double* o = out + line * nx;
    const double* self = u + line * nx;
    for (std::size_t i = 0; i < nx; ++i) o[i] = 0.0;
    for (const auto& [jj, w] : jump_rows_[j]) {
      const double* lo = u + kk * plane + jj * nx;
      if (wz > 0.0) {
        const double* hi = lo + plane;
        for (std::size_t i = i0; i < nx; ++i) o[i] += w * ((1.0 - wz) * lo[i] + wz * hi[i]);
      } else {
        for (std::size_t i = i0; i < nx; ++i) o[i] += w * lo[i];
      }
    }
    for (std::size_t i = i0; i < nx; ++i) o[i] = z * (o[i] - self[i]);
    if (j > 0 && j + 1 < ny) {
      const double* up = self + nx;
      const double* dn = self - nx;
      const double* m = mixed_.data() + j * nx;
      for (std::size_t i = 1; i + 1 < nx; ++i) {
        o[i] += m[i] * (up[i + 1] - dn[i + 1] - up[i - 1] + dn[i - 1]);
      }
    }
  });
}

void GeneratorDiscretization::apply_a1(const double* u, double* out) const {
  const std::size_t nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  parallel_for(nz * ny, [&](std::size_t line) {
    const std::size_t j = line % ny;
    const double* l = ax_.l.data() + j * nx;
    const double* d = ax_.d.data() + j * nx;
    const double* up = ax_.u.data() + j * nx;
    const double* v = u + line * nx;
    double* o = out + line * nx;
    o[0] = d[0] * v[0] + up[0] * v[1];
    for (std::size_t i = 1; i + 1 < nx; ++i) o[i] = l[i] * v[i - 1] + d[i] * v[i] + up[i] * v[i + 1];
    o[nx - 1] = l[nx - 1] * v[nx - 2] + d[nx - 1] * v[nx - 1];
  });
}

void GeneratorDiscretization::apply_a2(const double* u, double* out) const {
  const std::size_t nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const std::size_t i0 = dirichlet_ ? 1 : 0;
  parallel_for(nz * ny, [&](std::size_t line) {
    const std::size_t j = line % ny;
    const double* v = u + line * nx;
    double* o = out + line * nx;
    const double l = ay_.l[j], d = ay_.d[j], up = ay_.u[j];
    for (std::size_t i = 0; i < i0; ++i) o[i] = 0.0;
    for (std::size_t i = i0; i < nx; ++i) {
      double s = d * v[i];
      if (j > 0) s += l * v[i - nx];
      if (j + 1 < ny) s += up * v[i + nx];
      o[i] = s;
    }
  });
}

void GeneratorDiscretization::apply_a3(const double* u, double* out) const {
  const std::size_t nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const std::size_t plane = nx * ny;
  const std::size_t i0 = dirichlet_ ? 1 : 0;
  parallel_for(nz * ny, [&](std::size_t line) {
    const std::size_t k = line / ny;
    const double* v = u + line * nx;
    double* o = out + line * nx;
    const double l = az_.l[k], d = az_.d[k];
    for (std::size_t i = 0; i < i0; ++i) o[i] = 0.0;
    for (std::size_t i = i0; i < nx; ++i) {
      double s = d * v[i];
      if (k > 0) s += l * v[i - plane];
      o[i] = s;
    }
  });
}

GeneratorDiscretization::Factor GeneratorDiscretization::factorize(const Tridiag& t, std::size_t offset,
                                                                   std::size_t n, double c) {
  Factor f;
  f.m.assign(n, 0.0);
  f.inv_w.assign(n, 0.0);
  f.sup.assign(n, 0.0);
  double w = 1.0 - c * t.d[offset];
  f.inv_w[0] = 1.0 / w;
  for (std::size_t i = 0; i < n; ++i) f.sup[i] = -c * t.u[offset + i];
  for (std::size_t i = 1; i < n; ++i) {
    const double sub = -c * t.l[offset + i];
    f.m[i] = sub * f.inv_w[i - 1];
    w = 1.0 - c * t.d[offset + i] - f.m[i] * f.sup[i - 1];
    f.inv_w[i] = 1.0 / w;
  }
  return f;
}

void GeneratorDiscretization::thomas(const Factor& f, const double* rhs, std::size_t stride, double* out,
                                     std::size_t n) {
  out[0] = rhs[0];
  for (std::size_t i = 1; i < n; ++i) out[i * stride] = rhs[i * stride] - f.m[i] * out[(i - 1) * stride];
  out[(n - 1) * stride] *= f.inv_w[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    out[i * stride] = (out[i * stride] - f.sup[i] * out[(i + 1) * stride]) * f.inv_w[i];
  }
}

const GeneratorDiscretization::Factors& GeneratorDiscretization::factors(double c) const {
  auto it = cache_.find(c);
  if (it != cache_.end()) return it->second;
  Factors fs;
  const std::size_t nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  fs.x.reserve(ny);
  for (std::size_t j = 0; j < ny; ++j) fs.x.push_back(factorize(ax_, j * nx, nx, c));
  fs.y = factorize(ay_, 0, ny, c);
  fs.z = factorize(az_, 0, nz, c);
  return cache_.emplace(c, std::move(fs)).first->second;
}

void GeneratorDiscretization::solve(int direction, double c, const double* rhs, double* out,
                                    double boundary) const {
  const Factors& fs = factors(c);
  const std::size_t nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const std::size_t plane = nx * ny;
  const std::size_t i0 = dirichlet_ ? 1 : 0;
  switch (direction) {
    case 1:
      parallel_for(nz * ny, [&](std::size_t line) {
        const std::size_t j = line % ny;
        const double* r = rhs + line * nx;
        double* o = out + line * nx;
        if (dirichlet_) {
          thread_local std::vector<double> buf;
          buf.assign(r, r + nx);
          buf[0] = boundary;
          thomas(fs.x[j], buf.data(), 1, o, nx);
        } else {
          thomas(fs.x[j], r, 1, o, nx);
        }
      });
      line_solves_ += nz * ny;
      break;
    case 2:
      parallel_for(nz * nx, [&](std::size_t line) {
        const std::size_t k = line / nx;
        const std::size_t i = line % nx;
        const std::size_t off = k * plane + i;
        if (i < i0) {
          for (std::size_t j = 0; j < ny; ++j) out[off + j * nx] = rhs[off + j * nx];
          return;
        }
        thomas(fs.y, rhs + off, nx, out + off, ny);
      });
      line_solves_ += nz * nx;
      break;
    case 3:
      parallel_for(ny * nx, [&](std::size_t line) {
        const std::size_t i = line % nx;
        if (i < i0 || nz == 1) {
          for (std::size_t k = 0; k < nz; ++k) out[line + k * plane] = rhs[line + k * plane];
          return;
        }
        thomas(fs.z, rhs + line, plane, out + line, nz);
      });
      line_solves_ += ny * nx;
      break;
    default:
      raise(ErrorKind::Range, "direction must be 1, 2 or 3");
  }
}

std::vector<double> apply_generator(const std::vector<double>& f, const Grid4& grid,
                                    const ValidatedModel& model, const JumpDistribution& dist,
                                    const MeasureSelection& selection) {
  if (f.size() != grid.spatial_size()) raise(ErrorKind::Range, "field size does not match the grid");
  const GeneratorDiscretization op(grid, model, q_dynamics(model, selection), JumpQuadrature::build(dist),
                                   XMinBoundary::OneSided);
  std::vector<double> out(f.size()), part(f.size());
  op.apply_a0(f.data(), out.data());
  for (auto apply : {&GeneratorDiscretization::apply_a1, &GeneratorDiscretization::apply_a2,
                     &GeneratorDiscretization::apply_a3}) {
    (op.*apply)(f.data(), part.data());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += part[n];
  }
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += model->r * f[n];
  return out;
}

double interpolate(const Grid4& grid, const std::vector<double>& field, double x, double y, double z) {
  const auto [i, wx] = grid.x.locate(x);
  const auto [j, wy] = grid.y.locate(y);
  const auto [k, wz] = grid.z.locate(z);
  double acc = 0.0;
  for (int dk = 0; dk < 2; ++dk) {
    const double fz = dk ? wz : 1.0 - wz;
    if (fz == 0.0) continue;
    for (int dj = 0; dj < 2; ++dj) {
      const double fy = dj ? wy : 1.0 - wy;
      if (fy == 0.0) continue;
      for (int di = 0; di < 2; ++di) {
        const double fx = di ? wx : 1.0 - wx;
        if (fx == 0.0) continue;
        acc += fx * fy * fz * field[grid.index(i + di, j + dj, k + dk)];
      }
    }
  }
  return acc;
}

double PIDESolution::value_at(double x, double y, double z) const { return interpolate(grid, values, x, y, z); }

AdiSolver::AdiSolver(const GeneratorDiscretization& op, double theta) : op_(op), theta_(theta) {}

void AdiSolver::evaluate(const std::vector<std::vector<double>>& u, double tau, const ExplicitTerm& extra,
                         Parts& parts) const {
  const std::size_t m = u.size();
  const std::size_t n = op_.grid().spatial_size();
  for (auto* v : {&parts.total, &parts.a1, &parts.a2, &parts.a3}) v->assign(m, std::vector<double>(n));
  for (std::size_t c = 0; c < m; ++c) {
    op_.apply_a0(u[c].data(), parts.total[c].data());
    op_.apply_a1(u[c].data(), parts.a1[c].data());
    op_.apply_a2(u[c].data(), parts.a2[c].data());
    op_.apply_a3(u[c].data(), parts.a3[c].data());
    auto& t = parts.total[c];
    for (std::size_t i = 0; i < n; ++i) t[i] += parts.a1[c][i] + parts.a2[c][i] + parts.a3[c][i];
  }
  if (extra) extra(tau, u, parts.total);
}

namespace {

const std::vector<std::vector<double>>& pick(int d, const std::vector<std::vector<double>>& a1,
                                             const std::vector<std::vector<double>>& a2,
                                             const std::vector<std::vector<double>>& a3) {
  return d == 1 ? a1 : (d == 2 ? a2 : a3);
}

}  // namespace

void AdiSolver::hv_step(std::vector<std::vector<double>>& u, double tau, double dt, const ExplicitTerm& extra,
                        const std::function<double(double)>& boundary) const {
  const std::size_t m = u.size();
  const std::size_t n = op_.grid().spatial_size();
  const double bnd = boundary ? boundary(tau + dt) : 0.0;
  const double c = theta_ * dt;
  Parts p0, p1;
  evaluate(u, tau, extra, p0);

  std::vector<std::vector<double>> y0(m, std::vector<double>(n)), y(m), rhs(m, std::vector<double>(n));
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t i = 0; i < n; ++i) y0[s][i] = u[s][i] + dt * p0.total[s][i];
  y = y0;
  for (int d = 1; d <= 3; ++d) {
    const auto& a = pick(d, p0.a1, p0.a2, p0.a3);
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t i = 0; i < n; ++i) rhs[s][i] = y[s][i] - c * a[s][i];
      op_.solve(d, c, rhs[s].data(), y[s].data(), bnd);
    }
  }

  evaluate(y, tau + dt, extra, p1);
  std::vector<std::vector<double>> z(m, std::vector<double>(n));
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t i = 0; i < n; ++i) z[s][i] = y0[s][i] + 0.5 * dt * (p1.total[s][i] - p0.total[s][i]);
  for (int d = 1; d <= 3; ++d) {
    const auto& a = pick(d, p1.a1, p1.a2, p1.a3);
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t i = 0; i < n; ++i) rhs[s][i] = z[s][i] - c * a[s][i];
      op_.solve(d, c, rhs[s].data(), z[s].data(), bnd);
    }
  }
  u = std::move(z);
}

void AdiSolver::douglas_step(std::vector<std::vector<double>>& u, double tau, double dt,
                             const ExplicitTerm& extra, const std::function<double(double)>& boundary) const {
  const std::size_t m = u.size();
  const std::size_t n = op_.grid().spatial_size();
  const double bnd = boundary ? boundary(tau + dt) : 0.0;
  Parts p0;
  evaluate(u, tau, extra, p0);
  std::vector<std::vector<double>> y(m, std::vector<double>(n)), rhs(m, std::vector<double>(n));
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t i = 0; i < n; ++i) y[s][i] = u[s][i] + dt * p0.total[s][i];
  for (int d = 1; d <= 3; ++d) {
    const auto& a = pick(d, p0.a1, p0.a2, p0.a3);
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t i = 0; i < n; ++i) rhs[s][i] = y[s][i] - dt * a[s][i];
      op_.solve(d, dt, rhs[s].data(), y[s].data(), bnd);
    }
  }
  u = std::move(y);
}

void check_cfl(const Grid4& grid, double extra_rate) {
  const double rate = grid.z.back() + extra_rate;
  const double dt = grid.dt();
  if (dt * rate > 1.0) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds the explicit-part bound 1/(z_max + coupling) = " << 1.0 / rate
       << "; use at least " << static_cast<int>(std::ceil(grid.horizon * rate)) << " time steps";
    raise(ErrorKind::CFLViolation, os.str());
  }
}

double boundary_flux(const Grid4& grid, const ValidatedModel& model, const QDynamics& q,
                     const std::vector<double>& field) {
  const auto& p = model.params();
  const std::size_t nx = grid.nx(), ny = grid.ny(), nz = grid.nz();
  double flux = 0.0;
  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double dx = grid.x[nx - 1] - grid.x[nx - 2];
      const double g = (field[grid.index(nx - 1, j, k)] - field[grid.index(nx - 2, j, k)]) / dx;
      flux = std::max(flux, std::abs(p.r * grid.x[nx - 1] * g));
    }
    for (std::size_t i = 0; i < nx; ++i) {
      const double dy = grid.y[ny - 1] - grid.y[ny - 2];
      const double g = (field[grid.index(i, ny - 1, k)] - field[grid.index(i, ny - 2, k)]) / dy;
      flux = std::max(flux, std::abs(q.kappa_a * (grid.y[ny - 1] - q.vbar_a) * g));
    }
  }
  if (nz > 1) {
    const double dz = grid.z[nz - 1] - grid.z[nz - 2];
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const double g = (field[grid.index(i, j, nz - 1)] - field[grid.index(i, j, nz - 2)]) / dz;
        flux = std::max(flux, std::abs(p.beta * (grid.z[nz - 1] - p.lambda0) * g));
      }
    }
  }
  return flux;
}

PIDESolution solve_price_pide(const Payoff& payoff, const ValidatedModel& model, const JumpDistribution& dist,
                              const MeasureSelection& selection, const Grid4& grid, const PideOptions& options) {
  check_cfl(grid, 0.0);
  const QDynamics q = q_dynamics(model, selection);
  const GeneratorDiscretization op(grid, model, q, JumpQuadrature::build(dist, options.quadrature_nodes),
                                   options.x_min);
  const AdiSolver solver(op, options.theta);

  PIDESolution sol;
  sol.grid = grid;
  sol.payoff = payoff.describe();
  sol.maturity = grid.horizon;
  sol.a = selection.a;

  const std::size_t n = grid.spatial_size();
  std::vector<std::vector<double>> u(1, std::vector<double>(n));
  for (std::size_t k = 0; k < grid.nz(); ++k)
    for (std::size_t j = 0; j < grid.ny(); ++j)
      for (std::size_t i = 0; i < grid.nx(); ++i) u[0][grid.index(i, j, k)] = payoff(grid.x[i]);
  sol.terminal = u[0];

  const double r = model->r;
  const double x_min = grid.x.front();
  std::function<double(double)> boundary;
  if (op.dirichlet_x_min()) {
    boundary = [=](double tau) { return std::exp(-r * tau) * payoff(x_min * std::exp(r * tau)); };
  }

  auto wants = [&](int step) {
    return std::find(options.snapshot_steps.begin(), options.snapshot_steps.end(), step) !=
           options.snapshot_steps.end();
  };
  if (wants(0)) sol.snapshots[0] = u[0];
  const double dt = grid.dt();
  for (int step = 0; step < grid.n_t; ++step) {
    const double tau = step * dt;
    if (step == 0 && options.rannacher) {
      solver.douglas_step(u, tau, 0.5 * dt, nullptr, boundary);
      solver.douglas_step(u, tau + 0.5 * dt, 0.5 * dt, nullptr, boundary);
      sol.diagnostics.rannacher_half_steps = 2;
    } else {
      solver.hv_step(u, tau, dt, nullptr, boundary);
    }
    if (wants(step + 1)) sol.snapshots[step + 1] = u[0];
  }
  sol.values = std::move(u[0]);
  sol.diagnostics.steps = grid.n_t;
  sol.diagnostics.line_solves = op.line_solves();
  sol.diagnostics.cfl_number = dt * grid.z.back();
  sol.diagnostics.y_clamp_fraction = op.y_clamp_fraction();
  sol.diagnostics.z_clamp_fraction = op.z_clamp_fraction();
  sol.diagnostics.max_boundary_flux = boundary_flux(grid, model, q, sol.values);
  return sol;
}

PIDESolution solve_price_pide(const Payoff& payoff, double maturity, const ValidatedModel& model,
                              const JumpDistribution& dist, const MeasureSelection& selection,
                              const GridSize& size, const PideOptions& options) {
  return solve_price_pide(payoff, model, dist, selection, make_grid(model, maturity, size), options);
}

}  // namespace hhr
