#pragma once
// Background measures: constant and grid densities, the thermal equilibrium
// measure mu_theta and its blow-up rescaling.

#include <functional>
#include <string>
#include <vector>

#include "coulomb/grid.hpp"

namespace coulomb {

struct Density {
  enum class Kind : uint8_t { Constant, Grid };
  Kind kind = Kind::Constant;
  double value = 1.0;       // Constant
  GridField field;          // Grid: cell-centered samples
  DomainUnion support;      // Constant: support; Grid: informational
  double mass = 0;          // cached total
  double lower_m = 0;       // declared bounds on the support
  double upper_L = 0;

  static Density constant(double value, const DomainUnion& support);
  static Density from_grid(GridField f);

  int dim() const;
  double value_at(const Vec& x) const;
  double box_mass(const HyperRectangle& b) const;
  BoxMassFn mass_fn() const;
  // Samples onto a grid (cell centers; constant densities use exact cell overlap).
  GridField sample(const Grid& g) const;
};

// mu'(x) = mu(N^{-1/d} x): mass N, bounds preserved.
Density blow_up(const Density& mu, long long N);

struct ConfiningPotential {
  enum class Kind : uint8_t { Quadratic, CustomGrid };
  Kind kind = Kind::Quadratic;
  double quadratic_coeff = 1.0; // V(x) = coeff * |x|^2
  GridField grid;               // CustomGrid samples

  static ConfiningPotential quadratic(double coeff = 1.0);
  static ConfiningPotential custom(GridField v);
  double operator()(const Vec& x) const;
  // exp(-min(1,theta) V) integrable over the box and V + g growing: checked
  // numerically on the computational box.
  bool admissible_on(const HyperRectangle& box, double theta) const;
};

struct ThermalEquilibrium {
  Density mu_theta;        // grid density, mass 1
  GridField zeta_theta;    // -(1/theta) log mu_theta
  double constant_C = 0;   // the Euler-Lagrange constant
  double residual = 0;     // Linf of g*mu + V + (1/theta) log mu - C
  double theta = 0;
  double free_energy = 0;  // E_theta(mu_theta)
  std::vector<double> residual_history;
};

struct ThermalSolveOptions {
  int max_iter = 4000;
  double tol = 1e-8;            // Linf residual target
  double damping = 0.5;         // initial lambda
  double min_damping = 1e-4;
  bool check_boundary_mass = true; // boundary density < 1e-8 * max
};

// Damped fixed point mu <- normalize(exp(-theta (g*mu + V))) with the free
// energy non-increasing across accepted iterates.
ThermalEquilibrium solve_thermal_equilibrium(const ConfiningPotential& V, double theta,
                                             const HyperRectangle& box, int cells,
                                             const ThermalSolveOptions& opts = {});

// zeta'(x) = -(1/beta) log mu'_theta(x) on the blown-up grid.
GridField effective_potential_zeta(const ThermalEquilibrium& te, long long N, double beta);

// Mean-field energy E_theta(mu) = E(mu) + (1/theta) int mu log mu for a grid
// density (used by the solver and by the splitting-formula checks).
double thermal_free_energy(const GridField& mu, const ConfiningPotential& V, double theta);

} // namespace coulomb
