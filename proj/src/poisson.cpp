#include "coulomb/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "coulomb/kernels.hpp"

namespace coulomb {

namespace {

constexpr int kNeighborDirs[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

// Per-cell-face boundary handling for the masked operator.
enum class FaceBC : uint8_t { Interior, Neumann, Dirichlet };

struct MaskedOperator {
  const Grid* g;
  // bc_of(face axis, boundary face center) decides Neumann vs Dirichlet.
  std::function<FaceBC(const Vec&, int axis)> classify;

  FaceBC face_type(int i, int j, int k, int dir) const {
    int ni = i + kNeighborDirs[dir][0], nj = j + kNeighborDirs[dir][1], nk = k + kNeighborDirs[dir][2];
    bool inside = ni >= 0 && ni < g->n[0] && nj >= 0 && nj < g->n[1] && nk >= 0 && nk < g->n[2];
    if (inside && g->active(g->index(ni, nj, nk))) return FaceBC::Interior;
    int axis = dir / 2;
    Vec c = g->cell_center(i, j, k);
    c[axis] += (dir % 2 == 0 ? -0.5 : 0.5) * g->h[axis];
    return classify(c, axis);
  }

  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    const Grid& gr = *g;
    int ndirs = gr.d * 2;
    for (int k = 0; k < gr.n[2]; ++k)
      for (int j = 0; j < gr.n[1]; ++j)
        for (int i = 0; i < gr.n[0]; ++i) {
          size_t idx = gr.index(i, j, k);
          if (!gr.active(idx)) { out[idx] = 0; continue; }
          double s = 0;
          for (int dir = 0; dir < ndirs; ++dir) {
            int axis = dir / 2;
            double inv_h2 = 1.0 / (gr.h[axis] * gr.h[axis]);
            int ni = i + kNeighborDirs[dir][0], nj = j + kNeighborDirs[dir][1], nk = k + kNeighborDirs[dir][2];
            bool inside = ni >= 0 && ni < gr.n[0] && nj >= 0 && nj < gr.n[1] && nk >= 0 && nk < gr.n[2];
            if (inside && gr.active(gr.index(ni, nj, nk))) {
              s += (u[idx] - u[gr.index(ni, nj, nk)]) * inv_h2;
            } else {
              FaceBC f = face_type(i, j, k, dir);
              if (f == FaceBC::Dirichlet) s += 2.0 * u[idx] * inv_h2; // ghost = -u
              // Neumann ghost = u: zero contribution
            }
          }
          out[idx] = s;
        }
  }

  double diag(int i, int j, int k) const {
    const Grid& gr = *g;
    double s = 0;
    for (int dir = 0; dir < gr.d * 2; ++dir) {
      int axis = dir / 2;
      double inv_h2 = 1.0 / (gr.h[axis] * gr.h[axis]);
      FaceBC f = face_type(i, j, k, dir);
      if (f == FaceBC::Interior) s += inv_h2;
      else if (f == FaceBC::Dirichlet) s += 2.0 * inv_h2;
    }
    return s > 0 ? s : 1.0;
  }
};

void project_mean_zero(const Grid& g, std::vector<double>& v) {
  double mean = 0;
  size_t cnt = 0;
  for (size_t i = 0; i < v.size(); ++i)
    if (g.active(i)) { mean += v[i]; ++cnt; }
  mean /= double(cnt);
  for (size_t i = 0; i < v.size(); ++i)
    if (g.active(i)) v[i] -= mean;
    else v[i] = 0;
}

FieldSolution cg_solve(const GridField& rhs, const MaskedOperator& op, bool singular,
                       BCKind tag, const SolveOptions& opts) {
  const Grid& g = rhs.grid;
  std::vector<double> b = rhs.v;
  for (size_t i = 0; i < b.size(); ++i)
    if (!g.active(i)) b[i] = 0;
  if (singular) project_mean_zero(g, b);

  std::vector<double> idiag(g.size(), 1.0);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        size_t idx = g.index(i, j, k);
        if (g.active(idx)) idiag[idx] = 1.0 / op.diag(i, j, k);
      }

  size_t nn = g.size();
  std::vector<double> x(nn, 0.0), r = b, z(nn, 0.0), p(nn, 0.0), Ap(nn, 0.0);
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0;
    for (size_t i = 0; i < nn; ++i)
      if (g.active(i)) s += a[i] * c[i];
    return s;
  };
  double bnorm = std::sqrt(dot(b, b));
  FieldSolution sol;
  sol.bc = tag;
  if (bnorm == 0) {
    sol.u = GridField(g);
    return sol;
  }
  for (size_t i = 0; i < nn; ++i) z[i] = g.active(i) ? idiag[i] * r[i] : 0.0;
  if (singular) project_mean_zero(g, z);
  p = z;
  double rz = dot(r, z);
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    op.apply(p, Ap);
    double pAp = dot(p, Ap);
    if (pAp <= 0) break;
    double alpha = rz / pAp;
    for (size_t i = 0; i < nn; ++i)
      if (g.active(i)) { x[i] += alpha * p[i]; r[i] -= alpha * Ap[i]; }
    if (std::sqrt(dot(r, r)) <= opts.cg_tol * bnorm) { ++it; break; }
    for (size_t i = 0; i < nn; ++i) z[i] = g.active(i) ? idiag[i] * r[i] : 0.0;
    if (singular) project_mean_zero(g, z);
    double rz_new = dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (size_t i = 0; i < nn; ++i)
      if (g.active(i)) p[i] = z[i] + beta * p[i];
  }
  if (singular) project_mean_zero(g, x);
  sol.u = GridField(g);
  sol.u.v = std::move(x);
  sol.iterations = it;
  return sol;
}

void fill_residual(FieldSolution& sol, const GridField& rhs, const MaskedOperator& op) {
  std::vector<double> Au(sol.u.v.size(), 0.0);
  op.apply(sol.u.v, Au);
  const Grid& g = rhs.grid;
  double b_adj_mean = 0;
  if (sol.bc == BCKind::Neumann) {
    // residual measured against the mean-projected rhs (compatibility defect excluded)
    size_t cnt = 0;
    for (size_t i = 0; i < Au.size(); ++i)
      if (g.active(i)) { b_adj_mean += rhs.v[i]; ++cnt; }
    b_adj_mean /= double(cnt);
  }
  double mx = 0, scale = 0;
  for (size_t i = 0; i < Au.size(); ++i)
    if (g.active(i)) {
      mx = std::max(mx, std::abs(Au[i] - (rhs.v[i] - b_adj_mean)));
      scale = std::max(scale, std::abs(rhs.v[i]));
    }
  sol.residual_abs = mx;
  sol.residual_rel = scale > 0 ? mx / scale : 0.0;
}

MaskedOperator uniform_op(const Grid& g, FaceBC kind) {
  MaskedOperator op;
  op.g = &g;
  op.classify = [kind](const Vec&, int) { return kind; };
  return op;
}

} // namespace

FieldSolution solve_neumann(const GridField& rhs, const SolveOptions& opts) {
  const Grid& g = rhs.grid;
  double total = rhs.integral();
  double scale = rhs.max_abs() * g.cell_volume() * double(g.active_count());
  if (std::abs(total) > 1e-6 * std::max(scale, 1.0)) {
    std::ostringstream os;
    os << "solve_neumann: incompatible rhs, mass defect " << total;
    throw std::invalid_argument(os.str());
  }
  MaskedOperator op = uniform_op(g, FaceBC::Neumann);
  FieldSolution sol;
  if (g.full() && !opts.force_cg) {
    std::array<std::array<EndBC, 2>, 3> bc{};
    for (auto& a : bc) a = {EndBC::Neumann, EndBC::Neumann};
    GridField b = rhs;
    project_mean_zero(g, b.v);
    sol.u = trig_poisson_solve(b, bc);
    sol.bc = BCKind::Neumann;
  } else {
    sol = cg_solve(rhs, op, /*singular=*/true, BCKind::Neumann, opts);
  }
  fill_residual(sol, rhs, op);
  return sol;
}

FieldSolution solve_dirichlet(const GridField& rhs, const SolveOptions& opts) {
  const Grid& g = rhs.grid;
  MaskedOperator op = uniform_op(g, FaceBC::Dirichlet);
  FieldSolution sol;
  if (g.full() && !opts.force_cg) {
    std::array<std::array<EndBC, 2>, 3> bc{};
    for (auto& a : bc) a = {EndBC::Dirichlet, EndBC::Dirichlet};
    sol.u = trig_poisson_solve(rhs, bc);
    sol.bc = BCKind::Dirichlet;
  } else {
    sol = cg_solve(rhs, op, /*singular=*/false, BCKind::Dirichlet, opts);
  }
  fill_residual(sol, rhs, op);
  return sol;
}

FieldSolution solve_mixed(const GridField& rhs, const DomainUnion& U, const SolveOptions& opts) {
  const Grid& g = rhs.grid;
  double band = 0.25 * std::min({g.h[0], g.h[1], g.d == 3 ? g.h[2] : g.h[0]});
  auto classify = [&U, band](const Vec& c, int) {
    double dist = boundary_distance(c, U);
    if (dist <= band) return FaceBC::Neumann;
    if (dist < 2 * band)
      throw std::runtime_error("solve_mixed: ambiguous face classification (boundary not grid-aligned)");
    return FaceBC::Dirichlet;
  };
  MaskedOperator op;
  op.g = &g;
  op.classify = classify;

  // Transform fast path when the grid is full and each axis end is uniform.
  if (g.full() && !opts.force_cg) {
    std::array<std::array<EndBC, 2>, 3> bc{};
    bool uniform = true;
    bool any_dirichlet = false;
    for (int axis = 0; axis < g.d && uniform; ++axis) {
      for (int end = 0; end < 2 && uniform; ++end) {
        // sample a few face centers along this axis end
        FaceBC seen = FaceBC::Interior;
        int probes = 5;
        for (int t = 0; t < probes; ++t) {
          Vec c = g.origin;
          for (int a = 0; a < g.d; ++a) c[a] += (0.5 + (g.n[a] - 1) * (t + 0.5) / probes) * g.h[a];
          c[axis] = end == 0 ? g.origin[axis] : g.origin[axis] + g.n[axis] * g.h[axis];
          FaceBC f = classify(c, axis);
          if (seen == FaceBC::Interior) seen = f;
          else if (seen != f) { uniform = false; break; }
        }
        if (!uniform) break;
        bc[size_t(axis)][size_t(end)] = seen == FaceBC::Neumann ? EndBC::Neumann : EndBC::Dirichlet;
        any_dirichlet |= (seen == FaceBC::Dirichlet);
      }
    }
    if (uniform) {
      FieldSolution sol;
      GridField b = rhs;
      if (!any_dirichlet) project_mean_zero(g, b.v);
      sol.u = trig_poisson_solve(b, bc);
      sol.bc = any_dirichlet ? BCKind::Mixed : BCKind::Neumann;
      fill_residual(sol, rhs, op);
      sol.bc = BCKind::Mixed;
      sol.mixed_neumann_domain = std::make_shared<DomainUnion>(U);
      return sol;
    }
  }
  // Singular only if every boundary face is Neumann; detect cheaply.
  bool any_d = false;
  for (int k = 0; k < g.n[2] && !any_d; ++k)
    for (int j = 0; j < g.n[1] && !any_d; ++j)
      for (int i = 0; i < g.n[0] && !any_d; ++i) {
        size_t idx = g.index(i, j, k);
        if (!g.active(idx)) continue;
        for (int dir = 0; dir < g.d * 2; ++dir)
          if (op.face_type(i, j, k, dir) == FaceBC::Dirichlet) { any_d = true; break; }
      }
  FieldSolution sol = cg_solve(rhs, op, /*singular=*/!any_d, BCKind::Mixed, opts);
  fill_residual(sol, rhs, op);
  sol.mixed_neumann_domain = std::make_shared<DomainUnion>(U);
  return sol;
}

SmearedCharge smear(const std::vector<Vec>& points, const std::vector<double>& radii,
                    const Grid& g, SmearMode mode) {
  if (points.size() != radii.size()) throw std::invalid_argument("smear: size mismatch");
  SmearedCharge sc;
  sc.density = GridField(g);
  sc.centers = points;
  sc.radii = radii;
  sc.single_cell_fallback.assign(points.size(), 0);
  double hmax = std::max({g.h[0], g.h[1], g.d == 3 ? g.h[2] : 0.0});
  double cellvol = g.cell_volume();

  for (size_t p = 0; p < points.size(); ++p) {
    const Vec& x = points[p];
    double eta = radii[p];
    if (eta <= 0) throw std::invalid_argument("smear: nonpositive radius");
    int ci, cj, ck;
    if (eta < hmax) {
      if (!g.locate(x, ci, cj, ck) || !g.active(g.index(ci, cj, ck)))
        throw std::runtime_error("smear: point outside active region");
      sc.density.v[g.index(ci, cj, ck)] += 1.0 / cellvol;
      sc.single_cell_fallback[p] = 1;
      continue;
    }
    int K;
    std::vector<Vec> samples;
    if (g.d == 2) {
      K = std::max(64, int(std::ceil(16.0 * eta / std::min(g.h[0], g.h[1]))));
      samples.reserve(size_t(K));
      for (int m = 0; m < K; ++m) {
        double th = 2 * M_PI * (m + 0.5) / K;
        samples.push_back(Vec{x[0] + eta * std::cos(th), x[1] + eta * std::sin(th)});
      }
    } else {
      double hm = std::min({g.h[0], g.h[1], g.h[2]});
      K = std::max(512, int(std::ceil(40.0 * eta * eta / (hm * hm))));
      samples.reserve(size_t(K));
      const double ga = M_PI * (3.0 - std::sqrt(5.0)); // Fibonacci sphere
      for (int m = 0; m < K; ++m) {
        double z = 1.0 - 2.0 * (m + 0.5) / K;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double th = ga * m;
        samples.push_back(Vec{x[0] + eta * r * std::cos(th), x[1] + eta * r * std::sin(th), x[2] + eta * z});
      }
    }
    // cloud-in-cell deposit: each sphere sample spreads bilinearly over the
    // 2^d neighboring cells, removing grid-alignment noise in the shell
    std::vector<std::pair<size_t, double>> dep;
    dep.reserve(samples.size() * (g.d == 2 ? 4 : 8));
    double kept = 0;
    for (const auto& s : samples) {
      int base[3] = {0, 0, 0};
      double w[3] = {0, 0, 0};
      bool ok = true;
      for (int a = 0; a < g.d; ++a) {
        double t = (s[a] - g.origin[a]) / g.h[a] - 0.5;
        double fl = std::floor(t);
        base[a] = int(fl);
        w[a] = t - fl;
        if (base[a] < 0 || base[a] + 1 >= g.n[a]) ok = false;
      }
      if (!ok) {
        if (mode == SmearMode::Strict) throw std::runtime_error("smear: smeared ball exits the active region");
        continue;
      }
      int kz = g.d == 3 ? 2 : 1;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < kz; ++c) {
            double wt = (a ? w[0] : 1 - w[0]) * (b ? w[1] : 1 - w[1]) *
                        (g.d == 3 ? (c ? w[2] : 1 - w[2]) : 1.0);
            if (wt == 0.0) continue;
            size_t idx = g.index(base[0] + a, base[1] + b, g.d == 3 ? base[2] + c : 0);
            if (!g.active(idx)) {
              if (mode == SmearMode::Strict)
                throw std::runtime_error("smear: smeared ball exits the active region");
              continue;
            }
            dep.emplace_back(idx, wt);
            kept += wt;
          }
    }
    if (dep.empty()) continue;
    // Strict: renormalize to exactly unit mass; Clip: keep sphere-measure weights
    double scale = (mode == SmearMode::Strict) ? 1.0 / (kept * cellvol) : 1.0 / (double(K) * cellvol);
    for (const auto& [idx, wt] : dep) sc.density.v[idx] += wt * scale;
  }
  return sc;
}

FieldSolution free_space_potential(const std::vector<Vec>& points, const std::vector<double>& radii,
                                   const GridField& mu) {
  const Grid& g = mu.grid;
  SmearedCharge sc = smear(points, radii, g, SmearMode::Strict);
  GridField charge(g);
  for (size_t i = 0; i < charge.v.size(); ++i) charge.v[i] = sc.density.v[i] - mu.v[i];
  double total = charge.integral();
  if (std::abs(total) > 1e-8 * std::max<double>(double(points.size()), 1.0))
    throw std::invalid_argument("free_space_potential: neutrality violated, defect " + std::to_string(total));
  FieldSolution sol;
  sol.u = coulomb_convolve(charge);
  sol.bc = BCKind::FreeSpace;
  // Discretization residual away from the smeared shells.
  MaskedOperator op = uniform_op(g, FaceBC::Neumann);
  std::vector<double> Au(g.size(), 0.0);
  op.apply(sol.u.v, Au);
  double cd = cd_constant(g.d);
  double mx = 0;
  for (int k = 1; k + 1 < std::max(g.n[2], 2) - (g.d == 2 ? -1 : 0) && k < g.n[2]; ++k)
    for (int j = 1; j + 1 < g.n[1]; ++j)
      for (int i = 1; i + 1 < g.n[0]; ++i) {
        if (g.d == 2 && k > 0) continue;
        Vec c = g.cell_center(i, j, k);
        bool near = false;
        for (size_t p = 0; p < points.size() && !near; ++p) {
          double dr = std::abs(dist(c, points[p], g.d) - radii[p]);
          if (dr < 2.5 * std::max({g.h[0], g.h[1], g.d == 3 ? g.h[2] : 0.0})) near = true;
        }
        if (near) continue;
        mx = std::max(mx, std::abs(Au[g.index(i, j, k)] - cd * charge.v[g.index(i, j, k)]));
      }
  sol.residual_abs = mx;
  sol.residual_rel = charge.max_abs() > 0 ? mx / (cd * charge.max_abs()) : 0;
  return sol;
}

double dirichlet_energy(const FieldSolution& sol, const HyperRectangle& region) {
  return dirichlet_energy_if(sol, [&region](const Vec& c) { return region.contains(c); });
}

double dirichlet_energy_if(const FieldSolution& sol, const std::function<bool(const Vec&)>& keep_face) {
  const Grid& g = sol.u.grid;
  const auto& u = sol.u.v;
  double cellvol = g.cell_volume();
  double E = 0;
  bool dirichlet_bdry = sol.bc == BCKind::Dirichlet || sol.bc == BCKind::Mixed;
  double band = 0.25 * std::min({g.h[0], g.h[1], g.d == 3 ? g.h[2] : g.h[0]});
  auto face_is_dirichlet = [&](const Vec& fc) {
    if (sol.bc == BCKind::Dirichlet) return true;
    if (sol.bc != BCKind::Mixed || !sol.mixed_neumann_domain) return false;
    return boundary_distance(fc, *sol.mixed_neumann_domain) > band;
  };
  auto cell_active = [&](int i, int j, int k) {
    if (i < 0 || i >= g.n[0] || j < 0 || j >= g.n[1] || k < 0 || k >= g.n[2]) return false;
    return g.active(g.index(i, j, k));
  };
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        size_t idx = g.index(i, j, k);
        if (!g.active(idx)) continue;
        Vec c = g.cell_center(i, j, k);
        for (int axis = 0; axis < g.d; ++axis) {
          int di = axis == 0, dj = axis == 1, dk = axis == 2;
          // +axis face: interior faces counted once (from the low cell)
          Vec fhi = c;
          fhi[axis] += 0.5 * g.h[axis];
          if (cell_active(i + di, j + dj, k + dk)) {
            if (keep_face(fhi)) {
              double du = (u[g.index(i + di, j + dj, k + dk)] - u[idx]) / g.h[axis];
              E += du * du * cellvol;
            }
          } else if (dirichlet_bdry && keep_face(fhi) && face_is_dirichlet(fhi)) {
            double du = u[idx] / (0.5 * g.h[axis]);
            E += du * du * cellvol * 0.5;
          }
          // -axis boundary face
          if (!cell_active(i - di, j - dj, k - dk) && dirichlet_bdry) {
            Vec flo = c;
            flo[axis] -= 0.5 * g.h[axis];
            if (keep_face(flo) && face_is_dirichlet(flo)) {
              double du = u[idx] / (0.5 * g.h[axis]);
              E += du * du * cellvol * 0.5;
            }
          }
        }
      }
  return E;
}

double dirichlet_energy_full(const FieldSolution& sol) {
  HyperRectangle all = sol.u.grid.box();
  return dirichlet_energy(sol, enlarge(all, 1.0));
}

double boundary_flux(const FieldSolution& sol) {
  // Outward flux of -grad u across the active-region boundary; for the
  // discrete operator this equals -sum of (-Lap u) * cellvol.
  const Grid& g = sol.u.grid;
  MaskedOperator op;
  op.g = &g;
  FaceBC kind = sol.bc == BCKind::Dirichlet ? FaceBC::Dirichlet : FaceBC::Neumann;
  op.classify = [kind](const Vec&, int) { return kind; };
  std::vector<double> Au(g.size(), 0.0);
  op.apply(sol.u.v, Au);
  double s = 0;
  for (size_t i = 0; i < Au.size(); ++i)
    if (g.active(i)) s += Au[i];
  return -s * g.cell_volume();
}

GreenCheckReport neumann_green_check(const HyperRectangle& U, const Vec& y,
                                     const GridField& mu_bar, int cells_longest_axis) {
  Grid g = Grid::over_box(U, cells_longest_axis);
  int d = g.d;
  double cd = cd_constant(d);
  double hmax = std::max({g.h[0], g.h[1], d == 3 ? g.h[2] : 0.0});
  double eta = 2.0 * hmax;

  // resample mu_bar on this grid and normalize to mass 1
  GridField mu(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        mu.v[g.index(i, j, k)] = interpolate(mu_bar, g.cell_center(i, j, k));
  double mass = mu.integral();
  if (mass <= 0) throw std::invalid_argument("neumann_green_check: mu_bar must have positive mass");
  for (auto& v : mu.v) v /= mass;

  auto green_at = [&](const Vec& src) {
    SmearedCharge sc = smear({src}, {eta}, g, SmearMode::Strict);
    GridField rhs(g);
    for (size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = cd * (sc.density.v[i] - mu.v[i]);
    return solve_neumann(rhs);
  };

  FieldSolution G = green_at(y);
  GridField gconv = coulomb_convolve(mu);

  GreenCheckReport rep;
  rep.residual = G.residual_abs;
  double dist_y = U.boundary_dist(y);
  rep.denom_far = std::max(coulomb_g(std::max(dist_y, 1e-12), d), 1.0);
  double worst_ratio = 0, supT = 0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        Vec x = g.cell_center(i, j, k);
        double r = dist(x, y, d);
        if (r < 4 * hmax) continue; // inside the smeared core
        double T = G.u.v[g.index(i, j, k)] - coulomb_g(r, d) + gconv.v[g.index(i, j, k)];
        double denom = std::min(rep.denom_far, std::max(coulomb_g(r, d), 1.0));
        supT = std::max(supT, std::abs(T));
        worst_ratio = std::max(worst_ratio, std::abs(T) / denom);
      }
  rep.sup_T = supT;
  rep.fitted_C = worst_ratio;

  // symmetry probe: G_y(x0) vs G_{x0}(y)
  Vec x0 = U.center();
  for (int i = 0; i < d; ++i) x0[i] += 0.21 * U.side(i) * (i == 0 ? 1 : -1) * 0.5;
  if (dist(x0, y, d) > 6 * hmax) {
    FieldSolution G2 = green_at(x0);
    int ia, ja, ka, ib, jb, kb;
    g.locate(x0, ia, ja, ka);
    g.locate(y, ib, jb, kb);
    double gxy = G.u.v[g.index(ia, ja, ka)];
    double gyx = G2.u.v[g.index(ib, jb, kb)];
    rep.symmetry_error = std::abs(gxy - gyx) / std::max({std::abs(gxy), std::abs(gyx), 1e-12});
  }
  return rep;
}

} // namespace coulomb
