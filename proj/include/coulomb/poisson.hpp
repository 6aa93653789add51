#pragma once
// Grid Poisson solvers (Neumann / Dirichlet / mixed), smeared point charges,
// free-space potentials and discrete Dirichlet energies.

#include <memory>
#include <optional>

#include "coulomb/fft.hpp"
#include "coulomb/grid.hpp"

namespace coulomb {

enum class BCKind : uint8_t { Neumann, Dirichlet, Mixed, FreeSpace };

struct FieldSolution {
  GridField u;
  BCKind bc = BCKind::Neumann;
  double residual_abs = 0;  // Linf of (-Lap_h u - rhs) over active cells
  double residual_rel = 0;
  int iterations = 0;       // 0 for direct (transform) solves
  // for mixed solves: the domain whose boundary carries the Neumann condition
  std::shared_ptr<DomainUnion> mixed_neumann_domain;
};

struct SolveOptions {
  double cg_tol = 1e-10;    // relative l2 residual
  int max_iter = 50000;
  bool force_cg = false;    // bypass the transform fast path
};

// -Lap u = rhs with zero Neumann data on the active-region boundary.
// Requires a compatible rhs (mean zero over active cells); the returned
// potential is mean-zero.
FieldSolution solve_neumann(const GridField& rhs, const SolveOptions& opts = {});

// -Lap u = rhs, u = 0 on the active-region boundary (ghost reflection).
FieldSolution solve_dirichlet(const GridField& rhs, const SolveOptions& opts = {});

// Mixed problem on the active region of rhs.grid: Neumann on boundary faces
// lying on the boundary of U, Dirichlet on the rest.  Throws if a face
// cannot be classified unambiguously.
FieldSolution solve_mixed(const GridField& rhs, const DomainUnion& U, const SolveOptions& opts = {});

// How smeared spheres interact with the active region.
enum class SmearMode : uint8_t {
  Strict, // any sample outside the active region is an error
  Clip    // keep only inside samples (charge on the sphere part inside)
};

struct SmearedCharge {
  GridField density;            // sums to (#points) * mass-per-point over active cells
  std::vector<Vec> centers;
  std::vector<double> radii;
  std::vector<uint8_t> single_cell_fallback; // eta < h fell back to one cell
};

// Unit charge per point, deposited on the discrete sphere shell.
SmearedCharge smear(const std::vector<Vec>& points, const std::vector<double>& radii,
                    const Grid& g, SmearMode mode = SmearMode::Strict);

// h = g * (sum of smeared deltas - mu) by zero-padded convolution.
// Requires neutrality |total charge| <= 1e-8 * n.
FieldSolution free_space_potential(const std::vector<Vec>& points, const std::vector<double>& radii,
                                   const GridField& mu);

// Midpoint-face quadrature of int_region |grad u|^2.  Boundary faces use the
// half-cell one-sided gradient for Dirichlet ends and vanish for Neumann.
double dirichlet_energy(const FieldSolution& sol, const HyperRectangle& region);
double dirichlet_energy_full(const FieldSolution& sol);
// Restriction by an arbitrary face-center predicate.
double dirichlet_energy_if(const FieldSolution& sol, const std::function<bool(const Vec&)>& keep_face);

// Boundary flux integral of the discrete field (outward), for Gauss checks.
double boundary_flux(const FieldSolution& sol);

struct GreenCheckReport {
  double fitted_C = 0;          // sup |G - g + g*mu| / min(max(g(dist),1), max(g(|x-y|),1))
  double sup_T = 0;             // sup |G - g + g*mu|
  double denom_far = 0;         // max(g(dist(y, boundary)), 1)
  double symmetry_error = 0;    // |G(x,y) - G(y,x)| at a probe pair
  double residual = 0;
};

// Numerical test of the Neumann Green function bound on a rectangle.
GreenCheckReport neumann_green_check(const HyperRectangle& U, const Vec& y,
                                     const GridField& mu_bar, int cells_longest_axis);

} // namespace coulomb
