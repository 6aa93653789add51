#include "coulomb/radii.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "coulomb/kernels.hpp"

namespace coulomb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Nearest-neighbor distances capped at 1, via unit cell lists.
std::vector<double> nn_distances(const std::vector<Vec>& pts, int d) {
  size_t n = pts.size();
  std::vector<double> nn(n, kInf);
  if (n < 2) return nn;
  std::map<std::array<long long, 3>, std::vector<size_t>> cells;
  auto key = [&](const Vec& p) {
    std::array<long long, 3> k{0, 0, 0};
    for (int a = 0; a < d; ++a) k[size_t(a)] = (long long)std::floor(p[a]);
    return k;
  };
  for (size_t i = 0; i < n; ++i) cells[key(pts[i])].push_back(i);
  for (size_t i = 0; i < n; ++i) {
    auto k0 = key(pts[i]);
    long long zlo = d == 3 ? -1 : 0, zhi = d == 3 ? 1 : 0;
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = zlo; dz <= zhi; ++dz) {
          auto it = cells.find({k0[0] + dx, k0[1] + dy, k0[2] + dz});
          if (it == cells.end()) continue;
          for (size_t j : it->second) {
            if (j == i) continue;
            nn[i] = std::min(nn[i], dist(pts[i], pts[j], d));
          }
        }
  }
  return nn;
}

double dist_to_faces(const Vec& x, const std::vector<BoundaryFace>& faces, int d) {
  double best = kInf;
  for (const auto& f : faces) {
    double s = (x[f.axis] - f.coord) * (x[f.axis] - f.coord);
    for (int i = 0; i < d; ++i) {
      if (i == f.axis) continue;
      double e = std::max({f.patch.lo[i] - x[i], x[i] - f.patch.hi[i], 0.0});
      s += e * e;
    }
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

// Clip a boundary face patch to the closure of omega (per-cell intersections).
std::vector<BoundaryFace> clip_faces_to(const std::vector<BoundaryFace>& faces, const DomainUnion& omega) {
  if (omega.whole_space_flag) return faces;
  std::vector<BoundaryFace> out;
  for (const auto& f : faces) {
    for (const auto& c : omega.cells) {
      if (f.coord < c.lo[f.axis] - 1e-12 || f.coord > c.hi[f.axis] + 1e-12) continue;
      BoundaryFace g = f;
      bool ok = true;
      for (int i = 0; i < omega.d; ++i) {
        if (i == f.axis) continue;
        g.patch.lo[i] = std::max(g.patch.lo[i], c.lo[i]);
        g.patch.hi[i] = std::min(g.patch.hi[i], c.hi[i]);
        if (g.patch.hi[i] < g.patch.lo[i]) ok = false;
      }
      if (ok) out.push_back(g);
    }
    if (omega.complement_flag) {
      // keep parts outside the cells: approximate by keeping the whole face
      // when its center is in the complement
      Vec c = f.patch.center();
      c[f.axis] = f.coord;
      if (omega.contains(c)) out.push_back(f);
    }
  }
  return out;
}

// Parts of the faces of omega that are not co-planar with faces of U.
std::vector<BoundaryFace> faces_omega_minus_U(const DomainUnion& omega, const DomainUnion& U) {
  auto fo = exposed_faces(omega);
  auto fu = exposed_faces(U);
  std::vector<BoundaryFace> out;
  const double tol = 1e-12;
  for (const auto& f : fo) {
    std::vector<HyperRectangle> pieces = {f.patch};
    for (const auto& g : fu) {
      if (g.axis != f.axis || std::abs(g.coord - f.coord) > tol) continue;
      std::vector<HyperRectangle> next;
      for (const auto& p : pieces) {
        // subtract g.patch from p within the face plane
        HyperRectangle cur = p;
        bool overlap = true;
        for (int i = 0; i < omega.d && overlap; ++i) {
          if (i == f.axis) continue;
          if (g.patch.hi[i] <= cur.lo[i] + tol || g.patch.lo[i] >= cur.hi[i] - tol) overlap = false;
        }
        if (!overlap) {
          next.push_back(p);
          continue;
        }
        for (int i = 0; i < omega.d; ++i) {
          if (i == f.axis) continue;
          if (g.patch.lo[i] > cur.lo[i] + tol) {
            HyperRectangle piece = cur;
            piece.hi[i] = g.patch.lo[i];
            next.push_back(piece);
            cur.lo[i] = g.patch.lo[i];
          }
          if (g.patch.hi[i] < cur.hi[i] - tol) {
            HyperRectangle piece = cur;
            piece.lo[i] = g.patch.hi[i];
            next.push_back(piece);
            cur.hi[i] = g.patch.hi[i];
          }
        }
      }
      pieces.swap(next);
    }
    for (const auto& p : pieces) {
      bool nonempty = true;
      for (int i = 0; i < omega.d; ++i)
        if (i != f.axis && !(p.hi[i] > p.lo[i] + tol)) nonempty = false;
      if (nonempty) out.push_back(BoundaryFace{f.axis, f.coord, p});
    }
  }
  return out;
}

} // namespace

double dist_boundary_U_in_omega(const Vec& x, const DomainUnion& U, const DomainUnion& omega) {
  if (U.whole_space_flag) return kInf;
  auto clipped = clip_faces_to(exposed_faces(U), omega);
  return dist_to_faces(x, clipped, U.d);
}

double dist_boundary_omega_minus_U(const Vec& x, const DomainUnion& omega, const DomainUnion& U) {
  if (omega.whole_space_flag) return kInf;
  return dist_to_faces(x, faces_omega_minus_U(omega, U), omega.d);
}

RadiiFamily compute_radii(const std::vector<Vec>& pts, int d, RadiiVariant variant,
                          const DomainUnion* omega, const DomainUnion* U) {
  RadiiFamily fam;
  fam.variant = variant;
  size_t n = pts.size();
  fam.r.resize(n);
  if (n == 0) return fam;
  auto nn = nn_distances(pts, d);

  switch (variant) {
    case RadiiVariant::Plain: {
      for (size_t i = 0; i < n; ++i) fam.r[i] = 0.25 * std::min(nn[i], 1.0);
      break;
    }
    case RadiiVariant::Hat: {
      if (!U) throw std::invalid_argument("compute_radii: Hat needs U");
      for (size_t i = 0; i < n; ++i) {
        double bd = boundary_distance(pts[i], *U);
        fam.r[i] = 0.25 * std::min({nn[i], bd, 1.0});
      }
      break;
    }
    case RadiiVariant::Tilde:
    case RadiiVariant::DoubleTilde: {
      if (!omega) throw std::invalid_argument("compute_radii: Tilde needs omega");
      double threshold = variant == RadiiVariant::Tilde ? 0.5 : 1.0;
      for (size_t i = 0; i < n; ++i) {
        double d_U_in_omega = U ? dist_boundary_U_in_omega(pts[i], *U, *omega) : kInf;
        double d_omega_not_U;
        if (U)
          d_omega_not_U = dist_boundary_omega_minus_U(pts[i], *omega, *U);
        else
          d_omega_not_U = boundary_distance(pts[i], *omega);
        if (d_omega_not_U >= threshold)
          fam.r[i] = 0.25 * std::min({nn[i], d_U_in_omega, 1.0});
        else
          fam.r[i] = 0.25 * std::min(1.0, d_U_in_omega);
      }
      break;
    }
    case RadiiVariant::GDirichlet: {
      if (!U) throw std::invalid_argument("compute_radii: GDirichlet needs U");
      for (size_t i = 0; i < n; ++i) {
        double bd = boundary_distance(pts[i], *U);
        fam.r[i] = bd >= 0.5 ? 0.25 * std::min(nn[i], 1.0) : 0.25;
      }
      break;
    }
  }
  return fam;
}

} // namespace coulomb
