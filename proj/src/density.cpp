#include "coulomb/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coulomb/fft.hpp"
#include "coulomb/kernels.hpp"

namespace coulomb {

Density Density::constant(double value, const DomainUnion& support) {
  if (value <= 0) throw std::invalid_argument("Density::constant: positive value required");
  Density d;
  d.kind = Kind::Constant;
  d.value = value;
  d.support = support;
  d.mass = support.volume() * value;
  d.lower_m = d.upper_L = value;
  return d;
}

Density Density::from_grid(GridField f) {
  Density d;
  d.kind = Kind::Grid;
  d.mass = f.integral();
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (size_t i = 0; i < f.v.size(); ++i)
    if (f.grid.active(i)) {
      lo = std::min(lo, f.v[i]);
      hi = std::max(hi, f.v[i]);
    }
  d.lower_m = lo;
  d.upper_L = hi;
  d.support = DomainUnion::box(f.grid.box());
  d.field = std::move(f);
  return d;
}

int Density::dim() const { return kind == Kind::Constant ? support.d : field.grid.d; }

double Density::value_at(const Vec& x) const {
  if (kind == Kind::Constant) return support.contains(x) ? value : 0.0;
  if (!field.grid.box().contains(x)) return 0.0;
  return std::max(interpolate(field, x), 0.0);
}

namespace {

double overlap_volume(const HyperRectangle& a, const HyperRectangle& b) {
  double v = 1;
  for (int i = 0; i < a.d; ++i) {
    double lo = std::max(a.lo[i], b.lo[i]);
    double hi = std::min(a.hi[i], b.hi[i]);
    if (hi <= lo) return 0.0;
    v *= hi - lo;
  }
  return v;
}

} // namespace

double Density::box_mass(const HyperRectangle& b) const {
  if (kind == Kind::Constant) {
    if (support.whole_space_flag) return value * b.volume();
    double inter = 0;
    for (const auto& c : support.cells) inter += overlap_volume(b, c);
    if (support.complement_flag) return value * (b.volume() - inter);
    return value * inter;
  }
  const Grid& g = field.grid;
  int lo_idx[3] = {0, 0, 0}, hi_idx[3] = {g.n[0] - 1, g.n[1] - 1, g.n[2] - 1};
  for (int a = 0; a < g.d; ++a) {
    lo_idx[a] = std::max(0, int(std::floor((b.lo[a] - g.origin[a]) / g.h[a])));
    hi_idx[a] = std::min(g.n[a] - 1, int(std::floor((b.hi[a] - g.origin[a]) / g.h[a])));
  }
  double s = 0;
  for (int k = lo_idx[2]; k <= hi_idx[2]; ++k)
    for (int j = lo_idx[1]; j <= hi_idx[1]; ++j)
      for (int i = lo_idx[0]; i <= hi_idx[0]; ++i) {
        size_t idx = g.index(i, j, k);
        if (!g.active(idx)) continue;
        Vec c = g.cell_center(i, j, k);
        HyperRectangle cell = b;
        for (int a = 0; a < g.d; ++a) {
          cell.lo[a] = c[a] - 0.5 * g.h[a];
          cell.hi[a] = c[a] + 0.5 * g.h[a];
        }
        double ov = overlap_volume(cell, b);
        if (ov > 0) s += field.v[idx] * ov;
      }
  return s;
}

BoxMassFn Density::mass_fn() const {
  return [this](const HyperRectangle& b) { return box_mass(b); };
}

GridField Density::sample(const Grid& g) const {
  GridField out(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        Vec c = g.cell_center(i, j, k);
        if (kind == Kind::Constant) {
          HyperRectangle cell(Vec{c[0] - 0.5 * g.h[0], c[1] - 0.5 * g.h[1],
                                  g.d == 3 ? c[2] - 0.5 * g.h[2] : -0.5},
                              Vec{c[0] + 0.5 * g.h[0], c[1] + 0.5 * g.h[1],
                                  g.d == 3 ? c[2] + 0.5 * g.h[2] : 0.5},
                              g.d);
          out.v[g.index(i, j, k)] = box_mass(cell) / g.cell_volume();
        } else {
          out.v[g.index(i, j, k)] = value_at(c);
        }
      }
  return out;
}

Density blow_up(const Density& mu, long long N) {
  if (std::abs(mu.mass - 1.0) > 1e-6)
    throw std::invalid_argument("blow_up: input density must have mass 1");
  int d = mu.dim();
  double s = std::pow(double(N), 1.0 / double(d));
  if (mu.kind == Density::Kind::Constant) {
    DomainUnion sup = mu.support;
    for (auto& c : sup.cells)
      for (int i = 0; i < d; ++i) {
        c.lo[i] *= s;
        c.hi[i] *= s;
      }
    return Density::constant(mu.value, sup);
  }
  GridField f = mu.field;
  for (int i = 0; i < d; ++i) {
    f.grid.origin[i] *= s;
    f.grid.h[i] *= s;
  }
  return Density::from_grid(std::move(f));
}

ConfiningPotential ConfiningPotential::quadratic(double coeff) {
  ConfiningPotential v;
  v.kind = Kind::Quadratic;
  v.quadratic_coeff = coeff;
  return v;
}

ConfiningPotential ConfiningPotential::custom(GridField f) {
  ConfiningPotential v;
  v.kind = Kind::CustomGrid;
  v.grid = std::move(f);
  return v;
}

double ConfiningPotential::operator()(const Vec& x) const {
  if (kind == Kind::Quadratic) {
    double s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return quadratic_coeff * s;
  }
  return interpolate(grid, x);
}

bool ConfiningPotential::admissible_on(const HyperRectangle& box, double theta) const {
  double mt = std::min(1.0, theta);
  int n = 16;
  double acc = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec x;
      x[0] = box.lo[0] + (i + 0.5) * box.side(0) / n;
      x[1] = box.lo[1] + (j + 0.5) * box.side(1) / n;
      if (box.d == 3) x[2] = box.center()[2];
      double v = (*this)(x);
      if (!std::isfinite(v)) return false;
      acc += std::exp(-mt * v);
    }
  if (!std::isfinite(acc)) return false;
  // V + g increasing along a ray toward the box corner
  Vec corner = box.hi;
  double rc = norm(corner, box.d);
  if (rc <= 0) return false;
  Vec dir = corner * (1.0 / rc);
  double a = (*this)(dir * (0.6 * rc)) + coulomb_g(0.6 * rc, box.d);
  double b = (*this)(dir * (0.95 * rc)) + coulomb_g(0.95 * rc, box.d);
  return b > a - 1e-9;
}

double thermal_free_energy(const GridField& mu, const ConfiningPotential& V, double theta) {
  GridField phi = coulomb_convolve(mu);
  const Grid& g = mu.grid;
  double vol = g.cell_volume();
  double e = 0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        size_t idx = g.index(i, j, k);
        double m = mu.v[idx];
        if (m <= 0) continue;
        Vec c = g.cell_center(i, j, k);
        e += (0.5 * phi.v[idx] + V(c) + std::log(m) / theta) * m * vol;
      }
  return e;
}

ThermalEquilibrium solve_thermal_equilibrium(const ConfiningPotential& V, double theta,
                                             const HyperRectangle& box, int cells,
                                             const ThermalSolveOptions& opts) {
  if (theta <= 0) throw std::invalid_argument("solve_thermal_equilibrium: theta > 0 required");
  if (!V.admissible_on(box, theta))
    throw std::invalid_argument("solve_thermal_equilibrium: potential not admissible on the box");
  Grid g = Grid::over_box(box, cells);
  double vol = g.cell_volume();

  std::vector<double> vgrid(g.size());
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) vgrid[g.index(i, j, k)] = V(g.cell_center(i, j, k));

  // floor keeps logs finite in far tails that underflow
  const double kFloor = 1e-300;
  auto normalize_exp = [&](const std::vector<double>& expo, GridField& out) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double e : expo) mx = std::max(mx, e);
    double z = 0;
    for (size_t i = 0; i < expo.size(); ++i) {
      out.v[i] = std::max(std::exp(expo[i] - mx), kFloor);
      z += out.v[i];
    }
    z *= vol;
    for (auto& v : out.v) v = std::max(v / z, kFloor);
  };

  GridField mu(g);
  {
    std::vector<double> e(g.size());
    for (size_t i = 0; i < e.size(); ++i) e[i] = -theta * vgrid[i];
    normalize_exp(e, mu);
  }

  ThermalEquilibrium te;
  te.theta = theta;
  double lambda = opts.damping;
  double energy = thermal_free_energy(mu, V, theta);
  double residual = std::numeric_limits<double>::infinity();
  GridField cand(g), trial(g);

  for (int it = 0; it < opts.max_iter; ++it) {
    GridField phi = coulomb_convolve(mu);
    // Euler-Lagrange residual over the effective support (cells whose density
    // is below 1e-13 of the max have underflowed and carry no information)
    double mumax = mu.max_abs();
    double support_cut = 1e-13 * mumax;
    double c_num = 0, c_den = 0;
    for (size_t i = 0; i < mu.v.size(); ++i) {
      if (mu.v[i] < support_cut) continue;
      c_num += (phi.v[i] + vgrid[i] + std::log(mu.v[i]) / theta) * mu.v[i];
      c_den += mu.v[i];
    }
    double C = c_num / c_den;
    residual = 0;
    for (size_t i = 0; i < mu.v.size(); ++i) {
      if (mu.v[i] < support_cut) continue;
      residual = std::max(residual, std::abs(phi.v[i] + vgrid[i] + std::log(mu.v[i]) / theta - C));
    }
    te.residual_history.push_back(residual);
    te.constant_C = C;
    if (residual < opts.tol) break;

    std::vector<double> e(g.size());
    for (size_t i = 0; i < e.size(); ++i) e[i] = -theta * (phi.v[i] + vgrid[i]);
    normalize_exp(e, cand);

    bool accepted = false;
    while (lambda >= opts.min_damping) {
      // geometric damping (equivalent to damping the potential) keeps the
      // doubly-exponential tails converging at the same rate as the bulk
      double zn = 0;
      for (size_t i = 0; i < mu.v.size(); ++i) {
        trial.v[i] = std::exp((1 - lambda) * std::log(mu.v[i]) + lambda * std::log(cand.v[i]));
        zn += trial.v[i];
      }
      zn *= vol;
      for (auto& v : trial.v) v = std::max(v / zn, kFloor);
      double etrial = thermal_free_energy(trial, V, theta);
      if (etrial <= energy + 1e-12 * std::abs(energy)) {
        mu.v = trial.v;
        energy = etrial;
        lambda = std::min(1.0, lambda * 1.25);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted)
      throw std::runtime_error("solve_thermal_equilibrium: stalled at residual " + std::to_string(residual));
    for (double m : mu.v)
      if (!(m > 0) || !std::isfinite(m))
        throw std::runtime_error("solve_thermal_equilibrium: non-positive or NaN density");
  }
  if (residual >= opts.tol)
    throw std::runtime_error("solve_thermal_equilibrium: no convergence after max iterations, residual " +
                             std::to_string(residual));
  if (opts.check_boundary_mass) {
    double mx = mu.max_abs(), edge = 0;
    for (int k = 0; k < g.n[2]; ++k)
      for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i)
          if (i == 0 || j == 0 || i == g.n[0] - 1 || j == g.n[1] - 1 ||
              (g.d == 3 && (k == 0 || k == g.n[2] - 1)))
            edge = std::max(edge, mu.v[g.index(i, j, k)]);
    if (edge > 1e-8 * mx)
      throw std::runtime_error("solve_thermal_equilibrium: box too small, boundary density is " +
                               std::to_string(edge / mx) + " of max");
  }

  te.zeta_theta = GridField(g);
  for (size_t i = 0; i < mu.v.size(); ++i) te.zeta_theta.v[i] = -std::log(mu.v[i]) / theta;
  te.free_energy = energy;
  te.residual = residual;
  te.mu_theta = Density::from_grid(std::move(mu));
  return te;
}

GridField effective_potential_zeta(const ThermalEquilibrium& te, long long N, double beta) {
  Density blown = blow_up(te.mu_theta, N);
  GridField out(blown.field.grid);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = -std::log(blown.field.v[i]) / beta;
  return out;
}

} // namespace coulomb
