#include "coulomb/energy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "coulomb/kernels.hpp"

namespace coulomb {

namespace {

// iint ln(u^2+v^2) primitive: d2/dudv = ln(u^2+v^2); single-valued only away
// from the axes, so integration rectangles are split at u=0 and v=0.
double log_primitive(double u, double v) {
  if (u == 0.0 || v == 0.0) return 0.0;
  return u * v * (std::log(u * u + v * v) - 3.0) + u * u * std::atan(v / u) + v * v * std::atan(u / v);
}

void split_at_zero(double a, double b, double* pieces, int& count) {
  count = 0;
  if (a < 0 && b > 0) {
    pieces[count++] = a;
    pieces[count++] = 0;
    pieces[count++] = b;
  } else {
    pieces[count++] = a;
    pieces[count++] = b;
  }
}

// (g * 1_B)(x) in d=2 for a rectangle B, exact
double g_conv_box_2d(const Vec& x, const HyperRectangle& B) {
  double ulo = x[0] - B.hi[0], uhi = x[0] - B.lo[0];
  double vlo = x[1] - B.hi[1], vhi = x[1] - B.lo[1];
  double us[3], vs[3];
  int nu, nv;
  split_at_zero(ulo, uhi, us, nu);
  split_at_zero(vlo, vhi, vs, nv);
  double I = 0;
  for (int i = 0; i + 1 < nu; ++i)
    for (int j = 0; j + 1 < nv; ++j)
      I += log_primitive(us[i + 1], vs[j + 1]) - log_primitive(us[i], vs[j + 1]) -
           log_primitive(us[i + 1], vs[j]) + log_primitive(us[i], vs[j]);
  return -0.5 * I;
}

// triple primitive of 1/r (d=3), used away from the coordinate planes
double inv_r_primitive(double x, double y, double z) {
  double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) return 0.0;
  double s = 0;
  if (y != 0.0 && z != 0.0) s += y * z * std::log(x + r);
  if (x != 0.0 && z != 0.0) s += x * z * std::log(y + r);
  if (x != 0.0 && y != 0.0) s += x * y * std::log(z + r);
  if (x != 0.0) s -= 0.5 * x * x * std::atan(y * z / (x * r));
  if (y != 0.0) s -= 0.5 * y * y * std::atan(x * z / (y * r));
  if (z != 0.0) s -= 0.5 * z * z * std::atan(x * y / (z * r));
  return s;
}

// (g * 1_B)(x) in d=3 for a box B, exact corner sums over axis-split sub-boxes
double g_conv_box_3d(const Vec& x, const HyperRectangle& B) {
  double us[3], vs[3], ws[3];
  int nu, nv, nw;
  split_at_zero(x[0] - B.hi[0], x[0] - B.lo[0], us, nu);
  split_at_zero(x[1] - B.hi[1], x[1] - B.lo[1], vs, nv);
  split_at_zero(x[2] - B.hi[2], x[2] - B.lo[2], ws, nw);
  double I = 0;
  for (int i = 0; i + 1 < nu; ++i)
    for (int j = 0; j + 1 < nv; ++j)
      for (int k = 0; k + 1 < nw; ++k) {
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
              double sgn = ((a + b + c) % 2 == 1) ? 1.0 : -1.0; // (-1)^{#lower ends}
              I += sgn * inv_r_primitive(us[i + a], vs[j + b], ws[k + c]);
            }
      }
  return I;
}

double g_conv_box(const Vec& x, const HyperRectangle& B, int d) {
  return d == 2 ? g_conv_box_2d(x, B) : g_conv_box_3d(x, B);
}

// int over ball B(x_i,eta) of f_eta against mu, restricted to the active
// region of `quad` when the ball is not fully inside a constant-density zone.
double trunc_mu_integral(const Vec& xi, double eta, const Density& mu, const Grid& quad,
                         bool ball_inside_const_region) {
  int d = quad.d;
  if (ball_inside_const_region && mu.kind == Density::Kind::Constant)
    return mu.value * truncated_kernel_ball_integral(eta, d);
  // grid quadrature with the singular cell averaged exactly
  double geta = coulomb_g(eta, d);
  double sing = singular_cell_average(quad.h, d);
  int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) {
    lo[a] = std::max(0, int(std::floor((xi[a] - eta - quad.origin[a]) / quad.h[a])) - 1);
    hi[a] = std::min(quad.n[a] - 1, int(std::floor((xi[a] + eta - quad.origin[a]) / quad.h[a])) + 1);
  }
  if (d == 2) {
    lo[2] = hi[2] = 0;
  }
  double vol = quad.cell_volume();
  double s = 0;
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) {
        size_t idx = quad.index(i, j, k);
        if (!quad.active(idx)) continue;
        Vec c = quad.cell_center(i, j, k);
        double r = dist(c, xi, d);
        if (r >= eta) continue;
        double hmax = std::max({quad.h[0], quad.h[1], d == 3 ? quad.h[2] : 0.0});
        double fval = (r < 0.5 * hmax) ? std::max(sing - geta, 0.0)
                                       : truncated_kernel_radial(r, eta, d);
        s += fval * mu.value_at(c) * vol;
      }
  return s;
}

// Inhomogeneous Neumann data created by truncation balls crossing the
// active-region boundary: adds -d_nu f_{eta_i} to the rhs at boundary cells.
void add_ball_boundary_flux(GridField& rhs, const std::vector<Vec>& pts,
                            const std::vector<double>& eta) {
  const Grid& g = rhs.grid;
  int d = g.d;
  static const int dirs[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        size_t idx = g.index(i, j, k);
        if (!g.active(idx)) continue;
        for (int dir = 0; dir < 2 * d; ++dir) {
          int ni = i + dirs[dir][0], nj = j + dirs[dir][1], nk = k + dirs[dir][2];
          bool inside = ni >= 0 && ni < g.n[0] && nj >= 0 && nj < g.n[1] && nk >= 0 && nk < g.n[2];
          if (inside && g.active(g.index(ni, nj, nk))) continue;
          int axis = dir / 2;
          Vec fc = g.cell_center(i, j, k);
          fc[axis] += (dir % 2 == 0 ? -0.5 : 0.5) * g.h[axis];
          double nu = dir % 2 == 0 ? -1.0 : 1.0;
          double flux = 0;
          for (size_t p = 0; p < pts.size(); ++p) {
            double r = dist(fc, pts[p], d);
            if (r >= eta[p] || r < 1e-12) continue;
            double gp = d == 2 ? -1.0 / r : (2.0 - d) * std::pow(r, 1.0 - d);
            flux += -gp * (fc[axis] - pts[p][axis]) / r * nu;
          }
          if (flux != 0.0) rhs.v[idx] += flux / g.h[axis];
        }
      }
}

double total_active_mass(const Density& mu, const Grid& g) {
  if (g.full()) return mu.box_mass(g.box());
  double s = 0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        size_t idx = g.index(i, j, k);
        if (!g.active(idx)) continue;
        Vec c = g.cell_center(i, j, k);
        HyperRectangle cell(Vec{c[0] - 0.5 * g.h[0], c[1] - 0.5 * g.h[1],
                                g.d == 3 ? c[2] - 0.5 * g.h[2] : -0.5},
                            Vec{c[0] + 0.5 * g.h[0], c[1] + 0.5 * g.h[1],
                                g.d == 3 ? c[2] + 0.5 * g.h[2] : 0.5},
                            g.d);
        s += mu.box_mass(cell);
      }
  return s;
}

} // namespace

Configuration Configuration::make(std::vector<Vec> pts, int d, bool* perturbed) {
  const double min_sep = 1e-12;
  bool did = false;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = 0; j < i; ++j) {
      if (dist(pts[i], pts[j], d) < min_sep) {
        pts[i][0] += min_sep * (1.0 + double(i));
        did = true;
      }
    }
  if (perturbed) *perturbed = did;
  Configuration c;
  c.points = std::move(pts);
  c.d = d;
  return c;
}

double boundary_penalty(const Vec& x, const DomainUnion& U, int d) {
  double bd = boundary_distance(x, U);
  if (!std::isfinite(bd)) return 0.0;
  if (bd <= 0) return std::numeric_limits<double>::infinity();
  return std::max(coulomb_g(bd / 4.0, d) - coulomb_g(0.25, d), 0.0);
}

// --- pair-sum form -------------------------------------------------------

PairSumContext::PairSumContext(const Density& mu, const EnergyOptions& opts) : mu_(mu) {
  int d = mu.dim();
  if (mu.kind == Density::Kind::Constant && !mu.support.complement_flag && !mu.support.whole_space_flag) {
    closed_form_ = true;
    // iint g dmu dmu by Gauss-Legendre of the exact inner convolution
    static const double gp[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                 -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
    static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    double s = 0;
    for (const auto& cell : mu.support.cells) {
      int reps = d == 2 ? 6 : 4; // panels per axis for accuracy
      double vol = cell.volume();
      (void)vol;
      for (int px = 0; px < reps; ++px)
        for (int py = 0; py < reps; ++py)
          for (int pz = 0; pz < (d == 3 ? reps : 1); ++pz) {
            double wx = cell.side(0) / reps, wy = cell.side(1) / reps,
                   wz = d == 3 ? cell.side(2) / reps : 1.0;
            for (int a = 0; a < 8; ++a)
              for (int b = 0; b < 8; ++b)
                for (int c = 0; c < (d == 3 ? 8 : 1); ++c) {
                  Vec x;
                  x[0] = cell.lo[0] + (px + 0.5 * (1 + gp[a])) * wx;
                  x[1] = cell.lo[1] + (py + 0.5 * (1 + gp[b])) * wy;
                  if (d == 3) x[2] = cell.lo[2] + (pz + 0.5 * (1 + gp[c])) * wz;
                  double w = gw[a] * gw[b] * (d == 3 ? gw[c] : 1.0) / std::pow(2.0, d) * wx * wy * wz;
                  double inner = 0;
                  for (const auto& cj : mu.support.cells) inner += g_conv_box(x, cj, d);
                  s += w * inner;
                }
          }
    }
    mu_self_ = s * mu.value * mu.value;
  } else if (mu.kind == Density::Kind::Grid) {
    GridField f = mu.field;
    gstar_ = coulomb_convolve(f);
    double s = 0;
    for (size_t i = 0; i < f.v.size(); ++i)
      if (f.grid.active(i)) s += gstar_.v[i] * f.v[i];
    mu_self_ = s * f.grid.cell_volume();
  } else {
    throw std::invalid_argument("PairSumContext: unbounded constant density not supported");
  }
  (void)opts;
}

double PairSumContext::g_star_mu(const Vec& x) const {
  if (closed_form_) {
    double s = 0;
    for (const auto& cell : mu_.support.cells) s += g_conv_box(x, cell, mu_.dim());
    return s * mu_.value;
  }
  return interpolate(gstar_, x);
}

EnergyValue pair_sum_F(const Configuration& X, const PairSumContext& ctx) {
  int d = X.d;
  size_t n = X.size();
  if (std::abs(ctx.mu().mass - double(n)) > 1e-6 * std::max(1.0, double(n)))
    throw std::invalid_argument("pair_sum_F: mu mass must equal the number of points");
  double pair = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < i; ++j) {
      double r = dist(X.points[i], X.points[j], d);
      if (r <= 0) throw std::invalid_argument("pair_sum_F: coincident points");
      pair += coulomb_g(r, d);
    }
  double cross = 0;
  for (size_t i = 0; i < n; ++i) cross += ctx.g_star_mu(X.points[i]);
  EnergyValue e;
  e.variant = RadiiVariant::Plain;
  e.gradient_term = pair; // pair interactions reported in the gradient slot
  e.mu_interaction = -cross + 0.5 * ctx.mu_self_energy();
  e.minus_sum_g_eta = 0;
  e.boundary_penalty = 0;
  e.total = e.gradient_term + e.mu_interaction;
  return e;
}

// --- grid electric forms -------------------------------------------------

namespace {

struct GridAssembly {
  FieldSolution sol;
  Grid grid;
};

EnergyValue assemble_energy(const Configuration& X, const Density& mu, const Grid& grid,
                            const std::vector<double>& eta, FieldSolution sol,
                            const std::vector<size_t>& counted_points,
                            const std::function<bool(const Vec&)>& energy_region,
                            const DomainUnion* penalty_domain, RadiiVariant variant) {
  int d = X.d;
  double cd = cd_constant(d);
  double grad = dirichlet_energy_if(sol, energy_region) / (2.0 * cd);
  double msge = 0, muint = 0, pen = 0;
  for (size_t i : counted_points) {
    msge -= 0.5 * coulomb_g(eta[i], d);
    bool inside_const = mu.kind == Density::Kind::Constant &&
                        boundary_distance(X.points[i], mu.support) >= eta[i] &&
                        mu.support.contains(X.points[i]) &&
                        boundary_distance(X.points[i], DomainUnion::box(grid.box())) >= eta[i];
    muint -= trunc_mu_integral(X.points[i], eta[i], mu, grid, inside_const);
    if (penalty_domain) pen += boundary_penalty(X.points[i], *penalty_domain, d);
  }
  return EnergyValue::assemble(grad, msge, muint, pen, variant, sol.residual_abs);
}

} // namespace

EnergyValue electric_F_radii(const Configuration& X, const Density& mu, const DomainUnion& U,
                             const std::vector<double>& eta, const EnergyOptions& opts) {
  int d = X.d;
  double cd = cd_constant(d);
  Grid grid = Grid::over_domain(U, opts.grid_n);
  double mass = total_active_mass(mu, grid);
  if (std::abs(mass - double(X.size())) > 1e-5 * std::max(1.0, double(X.size())))
    throw std::invalid_argument("electric_F: mu(U) must equal the number of points (got " +
                                std::to_string(mass) + ")");
  for (const auto& p : X.points)
    if (!U.contains(p, 1e-12)) throw std::invalid_argument("electric_F: point outside U");

  SmearedCharge sc = smear(X.points, eta, grid, SmearMode::Strict);
  GridField mus = mu.sample(grid);
  GridField rhs(grid);
  for (size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = cd * (sc.density.v[i] - mus.v[i]);
  FieldSolution sol = solve_neumann(rhs, opts.solver);

  std::vector<size_t> all(X.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  return assemble_energy(X, mu, grid, eta, std::move(sol), all,
                         [](const Vec&) { return true; }, &U, RadiiVariant::Hat);
}

EnergyValue electric_F(const Configuration& X, const Density& mu, const DomainUnion& U,
                       const EnergyOptions& opts) {
  auto fam = compute_radii(X.points, X.d, RadiiVariant::Hat, nullptr, &U);
  return electric_F_radii(X, mu, U, fam.r, opts);
}

EnergyValue localized_F(const Configuration& X, const Density& mu, const DomainUnion& U,
                        const DomainUnion& omega, const EnergyOptions& opts) {
  int d = X.d;
  double cd = cd_constant(d);
  auto fam = compute_radii(X.points, d, RadiiVariant::Tilde, &omega, &U);
  Grid grid = Grid::over_domain(U, opts.grid_n);

  SmearedCharge sc = smear(X.points, fam.r, grid, SmearMode::Clip);
  GridField mus = mu.sample(grid);
  GridField rhs(grid);
  for (size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = cd * (sc.density.v[i] - mus.v[i]);
  // truncation balls crossing the boundary carry Neumann flux for u_r
  {
    std::vector<Vec> crossing;
    std::vector<double> ceta;
    for (size_t i = 0; i < X.size(); ++i)
      if (boundary_distance(X.points[i], U) < fam.r[i]) {
        crossing.push_back(X.points[i]);
        ceta.push_back(fam.r[i]);
      }
    if (!crossing.empty()) {
      GridField extra(grid);
      add_ball_boundary_flux(extra, crossing, ceta);
      for (size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] += extra.v[i];
    }
  }
  // balance the residual compatibility defect
  {
    double defect = rhs.integral();
    double per = defect / (double(grid.active_count()) * grid.cell_volume());
    for (size_t i = 0; i < rhs.v.size(); ++i)
      if (grid.active(i)) rhs.v[i] -= per;
  }
  FieldSolution sol = solve_neumann(rhs, opts.solver);

  std::vector<size_t> in_omega;
  for (size_t i = 0; i < X.size(); ++i)
    if (omega.contains(X.points[i])) in_omega.push_back(i);
  return assemble_energy(X, mu, grid, fam.r, std::move(sol), in_omega,
                         [&omega](const Vec& c) { return omega.contains(c); }, &U,
                         RadiiVariant::Tilde);
}

EnergyValue dirichlet_G(const Configuration& X, const Density& mu, const DomainUnion& U,
                        const EnergyOptions& opts) {
  int d = X.d;
  double cd = cd_constant(d);
  auto fam = compute_radii(X.points, d, RadiiVariant::GDirichlet, nullptr, &U);
  Grid grid = Grid::over_domain(U, opts.grid_n);
  SmearedCharge sc = smear(X.points, fam.r, grid, SmearMode::Clip);
  GridField mus = mu.sample(grid);
  GridField rhs(grid);
  for (size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = cd * (sc.density.v[i] - mus.v[i]);
  FieldSolution sol = solve_dirichlet(rhs, opts.solver);
  std::vector<size_t> all(X.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  return assemble_energy(X, mu, grid, fam.r, std::move(sol), all,
                         [](const Vec&) { return true; }, nullptr, RadiiVariant::GDirichlet);
}

EnergyValue mixed_H(const Configuration& X, const Density& mu, const DomainUnion& omega,
                    const DomainUnion& U, const EnergyOptions& opts) {
  int d = X.d;
  double cd = cd_constant(d);
  auto fam = compute_radii(X.points, d, RadiiVariant::Tilde, &omega, &U);
  // solve domain Omega cap U
  DomainUnion solve_dom = omega;
  if (!U.whole_space_flag && !omega.whole_space_flag) {
    std::vector<HyperRectangle> cells;
    for (const auto& oc : omega.cells)
      for (const auto& uc : U.cells) {
        if (U.complement_flag) continue;
        if (oc.intersects(uc)) cells.push_back(oc.intersection(uc));
      }
    if (U.complement_flag) cells = omega.cells; // interiors assumed disjoint from U cells
    if (cells.empty()) throw std::invalid_argument("mixed_H: empty Omega cap U");
    solve_dom = DomainUnion::of_cells(std::move(cells));
  }
  Grid grid = Grid::over_domain(solve_dom, opts.grid_n);
  SmearedCharge sc = smear(X.points, fam.r, grid, SmearMode::Clip);
  GridField mus = mu.sample(grid);
  GridField rhs(grid);
  for (size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = cd * (sc.density.v[i] - mus.v[i]);
  FieldSolution sol = solve_mixed(rhs, U, opts.solver);
  std::vector<size_t> all(X.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  return assemble_energy(X, mu, grid, fam.r, std::move(sol), all,
                         [](const Vec&) { return true; }, nullptr, RadiiVariant::Tilde);
}

// --- closed-form rectangle models ----------------------------------------

RectEnergyModel::RectEnergyModel(const HyperRectangle& box,
                                 const std::array<std::array<EndBC, 2>, 2>& bc, const Density& mu,
                                 int phi_grid_n)
    : box_(box), green_(box, bc) {
  all_neumann_ = green_.all_neumann;
  with_penalty_ = all_neumann_;
  domain_ = DomainUnion::box(box);
  // uniform fast path only when the constant density covers the whole box
  bool covers = mu.kind == Density::Kind::Constant && mu.support.is_single_box() &&
                mu.support.as_box().contains(box.lo, 1e-9) && mu.support.as_box().contains(box.hi, 1e-9);
  mu_constant_ = covers;
  if (mu_constant_) {
    mu_value_ = mu.value;
    const_term_ = all_neumann_ ? 0.0 : 0.5 * mu_value_ * mu_value_ * green_.uniform_self_energy();
  } else {
    if (!all_neumann_)
      throw std::invalid_argument("RectEnergyModel: non-uniform densities supported for the Neumann model only");
    Grid g = Grid::over_box(box, phi_grid_n);
    GridField mus = mu.sample(g);
    double mass = mus.integral();
    double bg = mass / box.volume();
    double cd = cd_constant(2);
    GridField rhs(g);
    for (size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = cd * (mus.v[i] - bg);
    FieldSolution sol = solve_neumann(rhs);
    phi_mu_ = sol.u;
    double q = 0;
    for (size_t i = 0; i < mus.v.size(); ++i) q += phi_mu_.v[i] * mus.v[i];
    const_term_ = 0.5 * q * g.cell_volume();
  }
}

RectEnergyModel RectEnergyModel::neumann_F(const HyperRectangle& box, const Density& mu, int phi_grid_n) {
  std::array<std::array<EndBC, 2>, 2> bc{};
  for (auto& a : bc) a = {EndBC::Neumann, EndBC::Neumann};
  return RectEnergyModel(box, bc, mu, phi_grid_n);
}

RectEnergyModel RectEnergyModel::dirichlet_G_model(const HyperRectangle& box, const Density& mu) {
  std::array<std::array<EndBC, 2>, 2> bc{};
  for (auto& a : bc) a = {EndBC::Dirichlet, EndBC::Dirichlet};
  RectEnergyModel m(box, bc, mu);
  m.with_penalty_ = false;
  return m;
}

RectEnergyModel RectEnergyModel::mixed_H_model(const HyperRectangle& box, const DomainUnion& U,
                                               const Density& mu) {
  std::array<std::array<EndBC, 2>, 2> bc{};
  for (int axis = 0; axis < 2; ++axis)
    for (int end = 0; end < 2; ++end) {
      Vec c = box.center();
      c[axis] = end == 0 ? box.lo[axis] : box.hi[axis];
      double bd = boundary_distance(c, U);
      bc[size_t(axis)][size_t(end)] = bd < 1e-9 ? EndBC::Neumann : EndBC::Dirichlet;
    }
  RectEnergyModel m(box, bc, mu);
  m.with_penalty_ = false;
  m.domain_ = U;
  return m;
}

double RectEnergyModel::one_body(const Vec& x) const {
  double s = 0.5 * green_.H(x);
  if (mu_constant_) {
    if (!all_neumann_) s -= mu_value_ * green_.potential_uniform(x);
  } else {
    s -= interpolate(phi_mu_, x);
  }
  if (with_penalty_) s += boundary_penalty(x, DomainUnion::box(box_), 2);
  return s;
}

double RectEnergyModel::energy(const std::vector<Vec>& pts) const {
  double s = const_term_;
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = 0; j < i; ++j) s += green_.G(pts[i], pts[j]);
    s += one_body(pts[i]);
  }
  return s;
}

double RectEnergyModel::delta_move(const std::vector<Vec>& pts, size_t i, const Vec& xnew) const {
  double s = one_body(xnew) - one_body(pts[i]);
  for (size_t j = 0; j < pts.size(); ++j) {
    if (j == i) continue;
    s += green_.G(xnew, pts[j]) - green_.G(pts[i], pts[j]);
  }
  return s;
}

Vec RectEnergyModel::gradient(const std::vector<Vec>& pts, size_t i) const {
  Vec g{0, 0};
  for (size_t j = 0; j < pts.size(); ++j) {
    if (j == i) continue;
    Vec gg = green_.grad_G_x(pts[i], pts[j]);
    g[0] += gg[0];
    g[1] += gg[1];
  }
  Vec gh = green_.grad_H(pts[i]);
  g[0] += 0.5 * gh[0];
  g[1] += 0.5 * gh[1];
  if (!mu_constant_) {
    double step = 0.5 * phi_mu_.grid.h[0];
    for (int a = 0; a < 2; ++a) {
      Vec xp = pts[i], xm = pts[i];
      xp[a] += step;
      xm[a] -= step;
      g[a] += -(interpolate(phi_mu_, xp) - interpolate(phi_mu_, xm)) / (2 * step);
    }
  } else if (!all_neumann_) {
    double step = 1e-6 * std::min(box_.side(0), box_.side(1));
    for (int a = 0; a < 2; ++a) {
      Vec xp = pts[i], xm = pts[i];
      xp[a] += step;
      xm[a] -= step;
      g[a] += -mu_value_ * (green_.potential_uniform(xp) - green_.potential_uniform(xm)) / (2 * step);
    }
  }
  if (with_penalty_) {
    double bd = box_.boundary_dist(pts[i]);
    if (bd < 1.0 && bd > 0) {
      // locate the nearest face and push away from it
      int axis = 0;
      double best = std::numeric_limits<double>::infinity();
      double sign = 1;
      for (int a = 0; a < 2; ++a) {
        if (pts[i][a] - box_.lo[a] < best) {
          best = pts[i][a] - box_.lo[a];
          axis = a;
          sign = 1;
        }
        if (box_.hi[a] - pts[i][a] < best) {
          best = box_.hi[a] - pts[i][a];
          axis = a;
          sign = -1;
        }
      }
      g[axis] += -sign / bd; // d/d(dist) of (g(dist/4)-g(1/4)) is -1/dist in d=2
    }
  }
  return g;
}

bool RectEnergyModel::balls_ok(const std::vector<Vec>& pts) const {
  if (all_neumann_) return true;
  RadiiFamily fam;
  if (!with_penalty_ && domain_.is_single_box() && domain_.as_box().lo[0] == box_.lo[0] &&
      domain_.as_box().hi[0] == box_.hi[0]) {
    fam = compute_radii(pts, 2, RadiiVariant::GDirichlet, nullptr, &domain_);
  } else {
    DomainUnion ob = DomainUnion::box(box_);
    fam = compute_radii(pts, 2, RadiiVariant::Tilde, &ob, &domain_);
  }
  for (size_t i = 0; i < pts.size(); ++i)
    if (box_.boundary_dist(pts[i]) < fam.r[i]) return false;
  return true;
}

// --- monotonicity ---------------------------------------------------------

MonotonicityResult monotonicity_in_truncation(const Configuration& X, const Density& mu,
                                              const HyperRectangle& U,
                                              const std::vector<double>& eta_small,
                                              const std::vector<double>& eta_large) {
  if (X.d != 2) throw std::invalid_argument("monotonicity_in_truncation: d=2 rectangles only");
  if (mu.kind != Density::Kind::Constant)
    throw std::invalid_argument("monotonicity_in_truncation: constant background only");
  size_t n = X.size();
  if (std::abs(mu.box_mass(U) - double(n)) > 1e-9 * std::max(1.0, double(n)))
    throw std::invalid_argument("monotonicity_in_truncation: neutrality mu(U) = N required");
  if (eta_small.size() != n || eta_large.size() != n)
    throw std::invalid_argument("monotonicity_in_truncation: radii size mismatch");
  for (size_t i = 0; i < n; ++i) {
    if (eta_small[i] > eta_large[i] + 1e-15)
      throw std::invalid_argument("monotonicity_in_truncation: eta_small must be <= eta_large");
    if (eta_small[i] != eta_large[i] && U.boundary_dist(X.points[i]) < eta_large[i])
      throw std::invalid_argument("monotonicity_in_truncation: enlarged ball exits U");
  }
  RectGreen green = RectGreen::neumann(U);
  double cd = cd_constant(2);

  auto assembled = [&](const std::vector<double>& eta, int quad_n) {
    // (1/2c_d)(int |grad u_eta|^2 - c_d sum g(eta)) - sum int f_eta dmu
    double s = 0;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < i; ++j) {
        double gpart = circle_pair_log_energy(X.points[i], eta[i], X.points[j], eta[j]);
        double smooth = green.smooth_circle_avg(X.points[i], eta[i], X.points[j], eta[j], quad_n);
        s += gpart + smooth;
      }
      // self term: the circle-circle g energy is -log(eta)
      double self = -std::log(eta[i]) +
                    green.smooth_circle_avg(X.points[i], eta[i], X.points[i], eta[i], quad_n);
      s += 0.5 * (self - coulomb_g(eta[i], 2));
      s -= mu.value * cd * eta[i] * eta[i] / 4.0;
    }
    return s;
  };

  MonotonicityResult res;
  double a32 = assembled(eta_small, 32), a64 = assembled(eta_small, 64);
  double b32 = assembled(eta_large, 32), b64 = assembled(eta_large, 64);
  res.value_small = a64;
  res.value_large = b64;
  res.tolerance = 3.0 * (std::abs(a64 - a32) + std::abs(b64 - b32)) + 1e-11;

  // equality iff every enlarged ball avoids all the others
  bool disjoint = true;
  for (size_t i = 0; i < n && disjoint; ++i)
    for (size_t j = 0; j < i && disjoint; ++j) {
      bool changed = eta_large[i] != eta_small[i] || eta_large[j] != eta_small[j];
      if (changed && dist(X.points[i], X.points[j], 2) < eta_large[i] + eta_large[j]) disjoint = false;
    }
  res.disjoint_equality_case = disjoint;
  return res;
}

// --- control inequalities -------------------------------------------------

ControlReport control_inequalities(const Configuration& X, const Density& mu, const DomainUnion& U,
                                   const DomainUnion& omega, const EnergyOptions& opts) {
  int d = X.d;
  double cd = cd_constant(d);
  ControlReport rep;
  EnergyValue F = localized_F(X, mu, U, omega, opts);
  rep.F_omega = F.total;

  auto fam = compute_radii(X.points, d, RadiiVariant::DoubleTilde, &omega, &U);
  Grid grid = Grid::over_domain(U, opts.grid_n);
  SmearedCharge sc = smear(X.points, fam.r, grid, SmearMode::Clip);
  GridField mus = mu.sample(grid);
  GridField rhs(grid);
  for (size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = cd * (sc.density.v[i] - mus.v[i]);
  double defect = rhs.integral();
  double per = defect / (double(grid.active_count()) * grid.cell_volume());
  for (size_t i = 0; i < rhs.v.size(); ++i)
    if (grid.active(i)) rhs.v[i] -= per;
  FieldSolution sol = solve_neumann(rhs, opts.solver);
  rep.grad_sq = dirichlet_energy_if(sol, [&omega](const Vec& c) { return omega.contains(c); });

  for (size_t i = 0; i < X.size(); ++i)
    if (omega.contains(X.points[i])) {
      rep.sum_g_dbtilde += coulomb_g(fam.r[i], d);
      ++rep.n_points_omega;
    }
  double np = std::max<double>(1.0, double(rep.n_points_omega));
  rep.fitted_C_sum_g = std::max(0.0, (rep.sum_g_dbtilde - 2.0 * rep.F_omega) / np);
  rep.fitted_C_grad = std::max(0.0, (rep.grad_sq - 4.0 * cd * rep.F_omega) / np);
  return rep;
}

LowerBoundReport lower_bound_check(const std::vector<Configuration>& batch, const Density& mu,
                                   const DomainUnion& U, const EnergyOptions& opts) {
  LowerBoundReport rep;
  rep.min_F_over_N = std::numeric_limits<double>::infinity();
  for (const auto& X : batch) {
    double F;
    if (X.d == 2 && U.is_single_box() && mu.kind == Density::Kind::Constant) {
      RectEnergyModel m = RectEnergyModel::neumann_F(U.as_box(), mu);
      F = m.energy(X.points);
    } else {
      F = electric_F(X, mu, U, opts).total;
    }
    double fn = F / std::max<double>(1.0, double(X.size()));
    rep.per_config_F_over_N.push_back(fn);
    rep.min_F_over_N = std::min(rep.min_F_over_N, fn);
  }
  rep.fitted_C = std::max(0.0, -rep.min_F_over_N);
  return rep;
}

// --- discrepancy bounds ----------------------------------------------------

namespace {

FieldSolution dbtilde_field(const Configuration& X, const Density& mu, const DomainUnion& U,
                            const EnergyOptions& opts, Grid& grid_out) {
  int d = X.d;
  double cd = cd_constant(d);
  auto fam = compute_radii(X.points, d, RadiiVariant::DoubleTilde, &U, &U);
  Grid grid = Grid::over_domain(U, opts.grid_n);
  SmearedCharge sc = smear(X.points, fam.r, grid, SmearMode::Clip);
  GridField mus = mu.sample(grid);
  GridField rhs(grid);
  for (size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = cd * (sc.density.v[i] - mus.v[i]);
  double defect = rhs.integral();
  double per = defect / (double(grid.active_count()) * grid.cell_volume());
  for (size_t i = 0; i < rhs.v.size(); ++i)
    if (grid.active(i)) rhs.v[i] -= per;
  grid_out = grid;
  return solve_neumann(rhs, opts.solver);
}

} // namespace

DiscrepancyReport discrepancy_bounds_box(const Configuration& X, const Density& mu, const DomainUnion& U,
                                         const HyperRectangle& region, const EnergyOptions& opts) {
  Grid grid;
  FieldSolution sol = dbtilde_field(X, mu, U, opts, grid);
  long long count = 0;
  for (const auto& p : X.points)
    if (region.contains(p)) ++count;
  double D = double(count) - mu.box_mass(region);
  DiscrepancyReport rep;
  rep.D = D;
  rep.variant = D < 0 ? DiscrepancyVariant::BoxDeficit : DiscrepancyVariant::BoxExcess;
  double per = 0;
  for (int a = 0; a < X.d; ++a) {
    double face = 1;
    for (int b = 0; b < X.d; ++b)
      if (b != a) face *= region.side(b);
    per += 2 * face;
  }
  bool deficit = D < 0;
  auto in_shell = [&](const Vec& c) {
    double bd = region.boundary_dist(c);
    if (bd > 1.0) return false;
    bool inside = region.contains(c);
    return deficit ? inside : !inside;
  };
  if (!deficit && boundary_distance(region.center(), U) < region.boundary_dist(region.center()) + 1.0) {
    // excess case needs Omega at distance >= 1 from the boundary of U
    double dmin = std::numeric_limits<double>::infinity();
    for (int a = 0; a < X.d; ++a) {
      Vec c = region.center();
      c[a] = region.lo[a];
      dmin = std::min(dmin, boundary_distance(c, U));
      c[a] = region.hi[a];
      dmin = std::min(dmin, boundary_distance(c, U));
    }
    if (dmin < 1.0)
      throw std::invalid_argument("discrepancy_bounds_box: excess case needs dist(region, dU) >= 1");
  }
  double grad_l2 = std::sqrt(dirichlet_energy_if(sol, in_shell));
  rep.lhs = std::abs(deficit ? std::min(D, 0.0) : std::max(D, 0.0));
  rep.rhs_energy = mu.upper_L * per + std::sqrt(per) * grad_l2;
  rep.fitted_C = rep.rhs_energy > 0 ? rep.lhs / rep.rhs_energy : 0.0;
  rep.margin = 0.0;
  return rep;
}

DiscrepancyReport discrepancy_bounds_ball(const Configuration& X, const Density& mu, const DomainUnion& U,
                                          const Vec& center, double R, const EnergyOptions& opts) {
  Grid grid;
  FieldSolution sol = dbtilde_field(X, mu, U, opts, grid);
  int d = X.d;
  long long count = 0;
  for (const auto& p : X.points)
    if (dist(p, center, d) <= R) ++count;
  // ball mass by cell quadrature
  GridField mus = mu.sample(grid);
  double mass = 0;
  for (int k = 0; k < grid.n[2]; ++k)
    for (int j = 0; j < grid.n[1]; ++j)
      for (int i = 0; i < grid.n[0]; ++i)
        if (grid.active(grid.index(i, j, k)) && dist(grid.cell_center(i, j, k), center, d) <= R)
          mass += mus.v[grid.index(i, j, k)];
  mass *= grid.cell_volume();
  double D = double(count) - mass;
  DiscrepancyReport rep;
  rep.D = D;
  rep.variant = D <= 0 ? DiscrepancyVariant::BallDeficit : DiscrepancyVariant::BallExcess;
  double outer_R = D <= 0 ? R : 2 * R;
  if (D > 0) {
    // B_{2R} must be inside U
    for (int a = 0; a < d; ++a) {
      Vec probe = center;
      probe[a] += 2 * R;
      Vec probe2 = center;
      probe2[a] -= 2 * R;
      if (!U.contains(probe) || !U.contains(probe2))
        throw std::invalid_argument("discrepancy_bounds_ball: B_{2R} not inside U");
    }
  }
  auto in_ball = [&](const Vec& c) { return dist(c, center, d) <= outer_R; };
  double grad_sq = dirichlet_energy_if(sol, in_ball);
  double lam = mu.upper_L;
  rep.lhs = D * D / std::pow(R, double(d - 2)) * std::min(1.0, std::abs(D) / (lam * std::pow(R, double(d))));
  rep.rhs_energy = grad_sq;
  rep.fitted_C = grad_sq > 0 ? rep.lhs / grad_sq : 0.0;
  return rep;
}

FluctuationReport fluctuation_bound(const Configuration& X, const Density& mu, const DomainUnion& U,
                                    const GridField& phi, const DomainUnion& omega,
                                    const EnergyOptions& opts) {
  int d = X.d;
  // Omega must contain a 1-neighborhood of supp(phi)
  const Grid& pg = phi.grid;
  double grad_inf = 0;
  for (int k = 0; k < pg.n[2]; ++k)
    for (int j = 0; j < pg.n[1]; ++j)
      for (int i = 0; i < pg.n[0]; ++i) {
        size_t idx = pg.index(i, j, k);
        if (phi.v[idx] != 0.0) {
          Vec c = pg.cell_center(i, j, k);
          if (boundary_distance(c, omega) < 1.0 - 1e-9 || !omega.contains(c))
            throw std::invalid_argument("fluctuation_bound: Omega must contain a 1-neighborhood of supp phi");
        }
        for (int a = 0; a < d; ++a) {
          int ni = i + (a == 0), nj = j + (a == 1), nk = k + (a == 2);
          if (ni >= pg.n[0] || nj >= pg.n[1] || nk >= pg.n[2]) continue;
          grad_inf = std::max(grad_inf, std::abs(phi.v[pg.index(ni, nj, nk)] - phi.v[idx]) / pg.h[a]);
        }
      }
  double lhs = 0;
  for (const auto& p : X.points) lhs += interpolate(phi, p);
  GridField mus = mu.sample(pg);
  for (size_t i = 0; i < phi.v.size(); ++i) lhs -= phi.v[i] * mus.v[i] * pg.cell_volume();
  lhs = std::abs(lhs);

  Grid grid;
  FieldSolution sol = dbtilde_field(X, mu, U, opts, grid);
  double grad_l2 = std::sqrt(dirichlet_energy_if(sol, [&omega](const Vec& c) { return omega.contains(c); }));
  double per = boundary_measure(omega), vol = omega.volume();
  FluctuationReport rep;
  rep.lhs = lhs;
  rep.rhs_form = grad_inf * ((std::sqrt(per) + std::sqrt(vol)) * grad_l2 + vol * mu.upper_L);
  rep.fitted_C = rep.rhs_form > 0 ? lhs / rep.rhs_form : 0.0;
  return rep;
}

} // namespace coulomb
