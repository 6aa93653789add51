#include "coulomb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace coulomb {

HyperRectangle::HyperRectangle(const Vec& lo_, const Vec& hi_, int dim) : lo(lo_), hi(hi_), d(dim) {
  for (int i = 0; i < d; ++i)
    if (!(hi[i] > lo[i])) throw std::invalid_argument("HyperRectangle: upper must exceed lower componentwise");
}

double HyperRectangle::volume() const {
  double v = 1;
  for (int i = 0; i < d; ++i) v *= side(i);
  return v;
}

Vec HyperRectangle::center() const {
  Vec c;
  for (int i = 0; i < d; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

bool HyperRectangle::contains(const Vec& x, double tol) const {
  for (int i = 0; i < d; ++i)
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  return true;
}

double HyperRectangle::boundary_dist(const Vec& x) const {
  if (contains(x)) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) m = std::min({m, x[i] - lo[i], hi[i] - x[i]});
    return m;
  }
  return outer_dist(x);
}

double HyperRectangle::outer_dist(const Vec& x) const {
  double s = 0;
  for (int i = 0; i < d; ++i) {
    double e = std::max({lo[i] - x[i], x[i] - hi[i], 0.0});
    s += e * e;
  }
  return std::sqrt(s);
}

bool HyperRectangle::intersects(const HyperRectangle& o) const {
  for (int i = 0; i < d; ++i)
    if (hi[i] <= o.lo[i] || o.hi[i] <= lo[i]) return false;
  return true;
}

HyperRectangle HyperRectangle::intersection(const HyperRectangle& o) const {
  HyperRectangle r;
  r.d = d;
  for (int i = 0; i < d; ++i) {
    r.lo[i] = std::max(lo[i], o.lo[i]);
    r.hi[i] = std::min(hi[i], o.hi[i]);
  }
  return r;
}

HyperRectangle enlarge(const HyperRectangle& q, double t) {
  HyperRectangle r;
  r.d = q.d;
  for (int i = 0; i < q.d; ++i) {
    r.lo[i] = q.lo[i] - t;
    r.hi[i] = q.hi[i] + t;
    if (!(r.hi[i] > r.lo[i])) throw std::invalid_argument("enlarge: shrink produces a degenerate rectangle");
  }
  return r;
}

DomainUnion DomainUnion::whole_space(int d) {
  DomainUnion u;
  u.whole_space_flag = true;
  u.d = d;
  return u;
}

DomainUnion DomainUnion::box(const HyperRectangle& q) {
  DomainUnion u;
  u.cells = {q};
  u.d = q.d;
  return u;
}

DomainUnion DomainUnion::of_cells(std::vector<HyperRectangle> cells, bool complement) {
  if (cells.empty()) throw std::invalid_argument("DomainUnion: empty cell list");
  DomainUnion u;
  u.d = cells.front().d;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].d != u.d) throw std::invalid_argument("DomainUnion: mixed dimensions");
    for (size_t j = i + 1; j < cells.size(); ++j)
      if (cells[i].intersects(cells[j]))
        throw std::invalid_argument("DomainUnion: cells must be pairwise interior-disjoint");
  }
  u.cells = std::move(cells);
  u.complement_flag = complement;
  return u;
}

const HyperRectangle& DomainUnion::as_box() const {
  if (!is_single_box()) throw std::logic_error("DomainUnion: not a single box");
  return cells.front();
}

bool DomainUnion::contains(const Vec& x, double tol) const {
  if (whole_space_flag) return true;
  bool in = false;
  for (const auto& c : cells)
    if (c.contains(x, tol)) { in = true; break; }
  return complement_flag ? !in : in;
}

double DomainUnion::volume() const {
  if (whole_space_flag || complement_flag) return std::numeric_limits<double>::infinity();
  double v = 0;
  for (const auto& c : cells) v += c.volume();
  return v;
}

HyperRectangle DomainUnion::hull() const {
  if (whole_space_flag) throw std::logic_error("hull: whole space");
  HyperRectangle h = cells.front();
  for (const auto& c : cells)
    for (int i = 0; i < d; ++i) {
      h.lo[i] = std::min(h.lo[i], c.lo[i]);
      h.hi[i] = std::max(h.hi[i], c.hi[i]);
    }
  return h;
}

namespace {

// Subtract `cut` from `r` within the (d-1) dims of a face plane (axis `skip`
// collapsed); appends the disjoint remainder pieces.
void subtract_rect(const HyperRectangle& r, const HyperRectangle& cut, int skip, int d,
                   std::vector<HyperRectangle>& out) {
  HyperRectangle cur = r;
  bool overlap = true;
  for (int i = 0; i < d && overlap; ++i) {
    if (i == skip) continue;
    if (cut.hi[i] <= cur.lo[i] || cut.lo[i] >= cur.hi[i]) overlap = false;
  }
  if (!overlap) {
    out.push_back(r);
    return;
  }
  for (int i = 0; i < d; ++i) {
    if (i == skip) continue;
    if (cut.lo[i] > cur.lo[i]) {
      HyperRectangle piece = cur;
      piece.hi[i] = cut.lo[i];
      out.push_back(piece);
      cur.lo[i] = cut.lo[i];
    }
    if (cut.hi[i] < cur.hi[i]) {
      HyperRectangle piece = cur;
      piece.lo[i] = cut.hi[i];
      out.push_back(piece);
      cur.hi[i] = cut.hi[i];
    }
  }
  // cur is now inside cut: dropped.
}

double face_dist(const Vec& x, const BoundaryFace& f, int d) {
  double s = (x[f.axis] - f.coord) * (x[f.axis] - f.coord);
  for (int i = 0; i < d; ++i) {
    if (i == f.axis) continue;
    double e = std::max({f.patch.lo[i] - x[i], x[i] - f.patch.hi[i], 0.0});
    s += e * e;
  }
  return std::sqrt(s);
}

} // namespace

std::vector<BoundaryFace> exposed_faces(const DomainUnion& U) {
  if (U.whole_space_flag) return {};
  const double tol = 1e-12;
  std::vector<BoundaryFace> out;
  int d = U.d;
  for (size_t i = 0; i < U.cells.size(); ++i) {
    const auto& c = U.cells[i];
    for (int a = 0; a < d; ++a) {
      for (int side = 0; side < 2; ++side) {
        double coord = side == 0 ? c.lo[a] : c.hi[a];
        HyperRectangle face = c;
        face.lo[a] = face.hi[a] = coord;
        // A neighbor cell sitting flush on the other side covers part of this face.
        std::vector<HyperRectangle> pieces = {face};
        for (size_t j = 0; j < U.cells.size() && !pieces.empty(); ++j) {
          if (j == i) continue;
          const auto& o = U.cells[j];
          double flush = side == 0 ? o.hi[a] : o.lo[a];
          if (std::abs(flush - coord) > tol) continue;
          std::vector<HyperRectangle> next;
          for (const auto& p : pieces) subtract_rect(p, o, a, d, next);
          pieces.swap(next);
        }
        for (auto& p : pieces) {
          bool nonempty = true;
          for (int k = 0; k < d; ++k)
            if (k != a && !(p.hi[k] > p.lo[k] + tol)) nonempty = false;
          if (nonempty) out.push_back(BoundaryFace{a, coord, p});
        }
      }
    }
  }
  return out;
}

double boundary_distance(const Vec& x, const DomainUnion& U) {
  if (U.whole_space_flag) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : exposed_faces(U)) best = std::min(best, face_dist(x, f, U.d));
  return best;
}

double boundary_measure(const DomainUnion& U) {
  if (U.whole_space_flag) return 0.0;
  double s = 0;
  for (const auto& f : exposed_faces(U)) {
    double a = 1;
    for (int i = 0; i < U.d; ++i)
      if (i != f.axis) a *= f.patch.side(i);
    s += a;
  }
  return s;
}

double find_mass_cut(const HyperRectangle& box, int axis, const BoxMassFn& mass,
                     double target, double a, double b, double rel_tol) {
  auto slab_mass = [&](double t) {
    if (t <= a) return 0.0;
    HyperRectangle s = box;
    s.lo[axis] = a;
    s.hi[axis] = t;
    return mass(s);
  };
  double loT = a, hiT = b;
  double span = std::max(b - a, 1.0);
  for (int it = 0; it < 200 && (hiT - loT) > rel_tol * span; ++it) {
    double mid = 0.5 * (loT + hiT);
    if (slab_mass(mid) < target)
      loT = mid;
    else
      hiT = mid;
  }
  return 0.5 * (loT + hiT);
}

namespace {

// Split `box` along `axis` into strips of width in [R,2R], each of integer
// cumulative mass; snaps near-equal cuts from the ideal equal-width layout.
std::vector<HyperRectangle> strip_split(const HyperRectangle& box, int axis, const BoxMassFn& mass,
                                        double R, const PartitionOptions& opts) {
  double len = box.side(axis);
  if (len < R * (1 - 1e-9))
    throw std::runtime_error("quantized_partition: side shorter than R (partition infeasible)");
  double total = mass(box);

  // Finest admissible strip count first; back off if integer snapping pushes
  // a cut out of the [R,2R] window.
  for (long long k = (long long)std::floor(len / R * (1 + 1e-12)); k >= 1; --k) {
    double w = len / double(k);
    if (w > 2 * R * (1 + 1e-9)) break;
    std::vector<double> cuts(size_t(k) + 1);
    cuts.front() = box.lo[axis];
    cuts.back() = box.hi[axis];
    double prev_target = 0.0;
    bool ok = true;
    for (long long j = 1; j < k && ok; ++j) {
      double ideal = total * double(j) / double(k);
      double target = std::max(std::round(ideal), std::floor(prev_target) + 1.0);
      if (target >= total) { ok = false; break; }
      double t = find_mass_cut(box, axis, mass, target, box.lo[axis], box.hi[axis], opts.cut_rel_tol);
      cuts[size_t(j)] = t;
      prev_target = target;
    }
    if (!ok) continue;
    std::vector<HyperRectangle> strips;
    for (long long j = 0; j < k && ok; ++j) {
      HyperRectangle s = box;
      s.lo[axis] = cuts[size_t(j)];
      s.hi[axis] = cuts[size_t(j) + 1];
      double sw = s.side(axis);
      if (sw < R * (1 - 1e-9) || sw > 2 * R * (1 + 1e-9)) { ok = false; break; }
      strips.push_back(s);
    }
    if (ok) return strips;
  }
  throw std::runtime_error("quantized_partition: no strip layout fits [R,2R] (partition infeasible)");
}

void tile_box(const HyperRectangle& box, const BoxMassFn& mass, double R,
              const PartitionOptions& opts, QuantizedPartition& out) {
  std::vector<HyperRectangle> pieces = {box};
  for (int axis = 0; axis < box.d; ++axis) {
    std::vector<HyperRectangle> next;
    for (const auto& p : pieces) {
      auto strips = strip_split(p, axis, mass, R, opts);
      next.insert(next.end(), strips.begin(), strips.end());
    }
    pieces.swap(next);
  }
  for (const auto& p : pieces) {
    double m = mass(p);
    long long im = std::llround(m);
    if (std::abs(m - double(im)) > opts.mass_tol * std::max(1.0, std::abs(m)))
      throw std::runtime_error("quantized_partition: piece mass not integer within tolerance");
    out.pieces.push_back(p);
    out.masses.push_back(im);
  }
}

} // namespace

QuantizedPartition quantized_partition(const DomainUnion& U, const BoxMassFn& mass,
                                       double R, const PartitionOptions& opts) {
  if (U.whole_space_flag || U.complement_flag)
    throw std::invalid_argument("quantized_partition: bounded unions only");
  QuantizedPartition out;
  out.scale_R = R;
  if (U.is_single_box()) {
    double total = mass(U.as_box());
    if (std::abs(total - std::round(total)) > opts.mass_tol * std::max(1.0, std::abs(total)))
      throw std::invalid_argument("quantized_partition: total mass is not an integer");
    tile_box(U.as_box(), mass, R, opts, out);
    return out;
  }
  // Union case: tile the R-inset of each cell; integrality of each piece is
  // arranged by dropping a trailing sliver per axis (inclusion property of
  // the partition lemma, not an exact tiling).
  for (const auto& c : U.cells) {
    HyperRectangle inner;
    try {
      inner = enlarge(c, -R);
    } catch (const std::invalid_argument&) {
      continue; // cell too small to contribute interior pieces
    }
    bool ok = true;
    for (int i = 0; i < inner.d; ++i)
      if (inner.side(i) < R) ok = false;
    if (!ok) continue;
    // Trim each axis so that every strip ends on an integer-mass cut.
    HyperRectangle work = inner;
    for (int axis = 0; axis < work.d; ++axis) {
      double m = mass(work);
      double keep = std::floor(m + opts.mass_tol);
      if (keep < 1) { ok = false; break; }
      if (m - keep > opts.mass_tol) {
        double t = find_mass_cut(work, axis, mass, keep, work.lo[axis], work.hi[axis], opts.cut_rel_tol);
        work.hi[axis] = t;
      }
      if (work.side(axis) < R) { ok = false; break; }
    }
    if (!ok) continue;
    tile_box(work, mass, R, opts, out);
  }
  return out;
}

std::string domain_to_text(const DomainUnion& U) {
  std::ostringstream os;
  os.precision(17);
  if (U.whole_space_flag) {
    os << "domain whole_space d=" << U.d << "\n";
    return os.str();
  }
  os << "domain " << (U.complement_flag ? "complement" : "union") << " d=" << U.d
     << " cells=" << U.cells.size() << "\n";
  for (const auto& c : U.cells) {
    os << "cell";
    for (int i = 0; i < U.d; ++i) os << " " << c.lo[i];
    for (int i = 0; i < U.d; ++i) os << " " << c.hi[i];
    os << "\n";
  }
  return os.str();
}

DomainUnion domain_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string tag, kind;
  is >> tag >> kind;
  if (tag != "domain") throw std::invalid_argument("domain_from_text: missing 'domain' tag");
  std::string kv;
  int d = 0;
  size_t ncells = 0;
  while (is >> kv) {
    if (kv.rfind("d=", 0) == 0) d = std::stoi(kv.substr(2));
    if (kv.rfind("cells=", 0) == 0) ncells = std::stoul(kv.substr(6));
    if (kv == "cell") break;
  }
  if (d < 2) throw std::invalid_argument("domain_from_text: bad dimension");
  if (kind == "whole_space") return DomainUnion::whole_space(d);
  std::vector<HyperRectangle> cells;
  // First 'cell' token may already be consumed above.
  bool pending = (kv == "cell");
  while (pending || (is >> kv && kv == "cell")) {
    pending = false;
    Vec lo, hi;
    for (int i = 0; i < d; ++i) is >> lo[i];
    for (int i = 0; i < d; ++i) is >> hi[i];
    cells.emplace_back(lo, hi, d);
  }
  if (cells.size() != ncells) throw std::invalid_argument("domain_from_text: cell count mismatch");
  return DomainUnion::of_cells(std::move(cells), kind == "complement");
}

} // namespace coulomb
