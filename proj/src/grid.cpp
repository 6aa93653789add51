#include "coulomb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coulomb {

bool Grid::full() const {
  if (mask.empty()) return true;
  for (auto m : mask)
    if (!m) return false;
  return true;
}

size_t Grid::active_count() const {
  if (mask.empty()) return size();
  size_t c = 0;
  for (auto m : mask) c += m ? 1 : 0;
  return c;
}

HyperRectangle Grid::box() const {
  Vec hi = origin;
  for (int i = 0; i < d; ++i) hi[i] = origin[i] + n[i] * h[i];
  return HyperRectangle(origin, hi, d);
}

bool Grid::locate(const Vec& x, int& i, int& j, int& k) const {
  i = int(std::floor((x[0] - origin[0]) / h[0]));
  j = int(std::floor((x[1] - origin[1]) / h[1]));
  k = d == 3 ? int(std::floor((x[2] - origin[2]) / h[2])) : 0;
  return i >= 0 && i < n[0] && j >= 0 && j < n[1] && k >= 0 && k < n[2];
}

Grid Grid::over_box(const HyperRectangle& b, int cells_longest_axis) {
  if (cells_longest_axis < 2) throw std::invalid_argument("Grid::over_box: too few cells");
  Grid g;
  g.d = b.d;
  g.origin = b.lo;
  double longest = 0;
  for (int i = 0; i < b.d; ++i) longest = std::max(longest, b.side(i));
  double ht = longest / cells_longest_axis;
  for (int i = 0; i < b.d; ++i) {
    g.n[i] = std::max(2, int(std::lround(b.side(i) / ht)));
    g.h[i] = b.side(i) / g.n[i];
  }
  return g;
}

Grid Grid::over_domain(const DomainUnion& U, int cells_longest_axis, double complement_padding) {
  if (U.whole_space_flag)
    throw std::invalid_argument("Grid::over_domain: whole space cannot be gridded");
  HyperRectangle hb = U.hull();
  if (U.complement_flag) {
    double diam = 0;
    for (int i = 0; i < U.d; ++i) diam += hb.side(i) * hb.side(i);
    diam = std::sqrt(diam);
    hb = enlarge(hb, complement_padding * diam);
  }
  Grid g = over_box(hb, cells_longest_axis);
  if (!U.is_single_box() || U.complement_flag) {
    g.mask.assign(g.size(), 0);
    for (int k = 0; k < g.n[2]; ++k)
      for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i)
          g.mask[g.index(i, j, k)] = U.contains(g.cell_center(i, j, k)) ? 1 : 0;
  }
  return g;
}

double GridField::integral() const {
  double s = 0;
  for (size_t i = 0; i < v.size(); ++i)
    if (grid.active(i)) s += v[i];
  return s * grid.cell_volume();
}

double GridField::max_abs() const {
  double m = 0;
  for (size_t i = 0; i < v.size(); ++i)
    if (grid.active(i)) m = std::max(m, std::abs(v[i]));
  return m;
}

double interpolate(const GridField& f, const Vec& x) {
  const Grid& g = f.grid;
  std::array<int, 3> i0{0, 0, 0};
  std::array<double, 3> w{0, 0, 0};
  for (int a = 0; a < g.d; ++a) {
    double t = (x[a] - g.origin[a]) / g.h[a] - 0.5;
    double fl = std::floor(t);
    int i = int(fl);
    double frac = t - fl;
    if (i < 0) { i = 0; frac = 0; }
    if (i > g.n[a] - 2) { i = g.n[a] - 2; frac = 1; }
    i0[size_t(a)] = i;
    w[size_t(a)] = frac;
  }
  if (g.d == 2) {
    auto val = [&](int di, int dj) { return f.v[g.index(i0[0] + di, i0[1] + dj)]; };
    return (1 - w[0]) * (1 - w[1]) * val(0, 0) + w[0] * (1 - w[1]) * val(1, 0) +
           (1 - w[0]) * w[1] * val(0, 1) + w[0] * w[1] * val(1, 1);
  }
  auto val = [&](int di, int dj, int dk) { return f.v[g.index(i0[0] + di, i0[1] + dj, i0[2] + dk)]; };
  double c00 = (1 - w[0]) * val(0, 0, 0) + w[0] * val(1, 0, 0);
  double c10 = (1 - w[0]) * val(0, 1, 0) + w[0] * val(1, 1, 0);
  double c01 = (1 - w[0]) * val(0, 0, 1) + w[0] * val(1, 0, 1);
  double c11 = (1 - w[0]) * val(0, 1, 1) + w[0] * val(1, 1, 1);
  double c0 = (1 - w[1]) * c00 + w[1] * c10;
  double c1 = (1 - w[1]) * c01 + w[1] * c11;
  return (1 - w[2]) * c0 + w[2] * c1;
}

} // namespace coulomb
