#pragma once
// Truncation-radius families: plain, hat (Neumann), tilde / double-tilde
// (localized, with boundary-layer rules switching at 1/2 resp. 1), and the
// Dirichlet-problem variant.

#include <vector>

#include "coulomb/geometry.hpp"

namespace coulomb {

enum class RadiiVariant : uint8_t {
  Plain,       // r_i = (1/4) min(nn distance, 1)
  Hat,         // additionally capped by dist(x_i, boundary of U)
  Tilde,       // localized rule, boundary-layer threshold 1/2
  DoubleTilde, // localized rule, boundary-layer threshold 1
  GDirichlet   // plain away from the boundary of U, 1/4 within distance 1/2
};

struct RadiiFamily {
  RadiiVariant variant = RadiiVariant::Plain;
  std::vector<double> r;
};

// omega/U may be null where the variant ignores them (see each rule); for
// Tilde/DoubleTilde a null U means the empty set (distance +inf).
RadiiFamily compute_radii(const std::vector<Vec>& pts, int d, RadiiVariant variant,
                          const DomainUnion* omega = nullptr, const DomainUnion* U = nullptr);

// Distance from x to the part of the boundary of U inside closure(omega).
double dist_boundary_U_in_omega(const Vec& x, const DomainUnion& U, const DomainUnion& omega);
// Distance from x to boundary(omega) \ boundary(U).
double dist_boundary_omega_minus_U(const Vec& x, const DomainUnion& omega, const DomainUnion& U);

} // namespace coulomb
