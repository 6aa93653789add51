#pragma once
// Cell-centered uniform grids over boxes and domain unions.

#include <cstdint>
#include <vector>

#include "coulomb/geometry.hpp"

namespace coulomb {

struct Grid {
  int d = 2;
  std::array<int, 3> n{1, 1, 1};      // cells per axis (n[2] == 1 for d == 2)
  std::array<double, 3> h{1, 1, 1};   // spacing per axis
  Vec origin;                         // lower corner of the covered box
  std::vector<uint8_t> mask;          // per-cell activity; empty = all active

  size_t size() const { return size_t(n[0]) * size_t(n[1]) * size_t(n[2]); }
  size_t index(int i, int j, int k = 0) const {
    return (size_t(k) * size_t(n[1]) + size_t(j)) * size_t(n[0]) + size_t(i);
  }
  Vec cell_center(int i, int j, int k = 0) const {
    Vec x;
    x[0] = origin[0] + (i + 0.5) * h[0];
    x[1] = origin[1] + (j + 0.5) * h[1];
    if (d == 3) x[2] = origin[2] + (k + 0.5) * h[2];
    return x;
  }
  bool active(size_t idx) const { return mask.empty() || mask[idx]; }
  bool full() const;
  double cell_volume() const { return d == 2 ? h[0] * h[1] : h[0] * h[1] * h[2]; }
  size_t active_count() const;
  HyperRectangle box() const;
  // Cell containing x; returns false if outside the covered box.
  bool locate(const Vec& x, int& i, int& j, int& k) const;

  // Grid with ~cells_per_axis cells along the longest side of `b`, spacing
  // matched per axis so the box is covered exactly.
  static Grid over_box(const HyperRectangle& b, int cells_longest_axis);
  // Grid over the hull of U masked to U; complements are embedded in a padded
  // bounding box (padding as a multiple of the union diameter).
  static Grid over_domain(const DomainUnion& U, int cells_longest_axis, double complement_padding = 2.0);
};

struct GridField {
  Grid grid;
  std::vector<double> v;

  GridField() = default;
  explicit GridField(const Grid& g) : grid(g), v(g.size(), 0.0) {}
  double integral() const; // cell-sum quadrature over active cells
  double max_abs() const;
};

// Bilinear / trilinear interpolation of cell-centered data (clamped at edges).
double interpolate(const GridField& f, const Vec& x);

} // namespace coulomb
