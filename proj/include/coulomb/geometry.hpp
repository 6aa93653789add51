#pragma once
// Axis-parallel hyperrectangles, finite unions / complements, and
// mass-quantized partitions built by strip splitting.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "coulomb/kernels.hpp"

namespace coulomb {

struct HyperRectangle {
  Vec lo, hi;
  int d = 2;

  HyperRectangle() = default;
  HyperRectangle(const Vec& lo_, const Vec& hi_, int dim);

  double side(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const;
  Vec center() const;
  bool contains(const Vec& x, double tol = 0.0) const;
  // Distance from x to the boundary surface of this rectangle (0 on a face).
  double boundary_dist(const Vec& x) const;
  // Distance from x to the closed rectangle (0 inside).
  double outer_dist(const Vec& x) const;
  bool intersects(const HyperRectangle& o) const;         // positive-volume overlap
  HyperRectangle intersection(const HyperRectangle& o) const; // may be degenerate
};

// Q_{R+t}: componentwise offset by t outward (t>0) or inward (t<0).
HyperRectangle enlarge(const HyperRectangle& q, double t);

// Domain = union of interior-disjoint cells, the complement of such a union,
// or the whole space.
struct DomainUnion {
  std::vector<HyperRectangle> cells;
  bool complement_flag = false;
  bool whole_space_flag = false;
  int d = 2;

  static DomainUnion whole_space(int d);
  static DomainUnion box(const HyperRectangle& q);
  static DomainUnion of_cells(std::vector<HyperRectangle> cells, bool complement = false);

  bool is_single_box() const { return !whole_space_flag && !complement_flag && cells.size() == 1; }
  const HyperRectangle& as_box() const;
  bool contains(const Vec& x, double tol = 0.0) const;
  double volume() const; // +inf for whole space / complements
  // Bounding box of the cell union (throws for whole space).
  HyperRectangle hull() const;
};

// Euclidean distance from x to the boundary of U; +inf for the whole space.
// Shared faces of adjacent cells are interior and do not count.
double boundary_distance(const Vec& x, const DomainUnion& U);

// Surface measure |boundary U| (sum of exposed face areas; 0 for whole space).
double boundary_measure(const DomainUnion& U);

// Exposed boundary faces of the cell union, as degenerate rectangles
// (collapsed along `axis` at coordinate `coord`).
struct BoundaryFace {
  int axis;
  double coord;
  HyperRectangle patch; // patch.lo[axis] == patch.hi[axis] == coord
};
std::vector<BoundaryFace> exposed_faces(const DomainUnion& U);

// Mass oracle: integral of the background measure over an axis box.
using BoxMassFn = std::function<double(const HyperRectangle&)>;

struct QuantizedPartition {
  std::vector<HyperRectangle> pieces;
  std::vector<long long> masses;
  double scale_R = 0.0;
};

struct PartitionOptions {
  double mass_tol = 1e-9;   // integrality tolerance on the total mass
  double cut_rel_tol = 1e-12; // bisection tolerance on cut coordinates
  double min_density = 0.0;   // known lower bound m (0 = unknown)
};

// Splits U into hyperrectangles with sidelengths in [R, 2R] and integer
// mu-mass each.  A single rectangle is tiled exactly (requires integer total
// mass); for unions the pieces keep distance >= R from the boundary and cover
// everything farther than 2R from it.
QuantizedPartition quantized_partition(const DomainUnion& U, const BoxMassFn& mass,
                                       double R, const PartitionOptions& opts = {});

// Root-find the axis cut t in [a,b] with mass(slab up to t) == target.
double find_mass_cut(const HyperRectangle& box, int axis, const BoxMassFn& mass,
                     double target, double a, double b, double rel_tol = 1e-12);

// Structured-text (de)serialization used inside experiment configs.
std::string domain_to_text(const DomainUnion& U);
DomainUnion domain_from_text(const std::string& text);

} // namespace coulomb
