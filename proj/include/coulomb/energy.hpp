#pragma once
// Next-order Coulomb energies: the pair-sum form F(X,mu), the electric
// Neumann form F(X,mu,U), the localized F^Omega, the Dirichlet G and mixed
// H_U, together with the monotonicity / control / discrepancy / fluctuation
// checks they support.

#include <memory>
#include <optional>
#include <string>

#include "coulomb/density.hpp"
#include "coulomb/green_rect.hpp"
#include "coulomb/poisson.hpp"
#include "coulomb/radii.hpp"

namespace coulomb {

struct Configuration {
  std::vector<Vec> points;
  int d = 2;

  size_t size() const { return points.size(); }
  // Enforces pairwise distinctness (min separation 1e-12); colliding points
  // are perturbed and the fact is reported through the return value.
  static Configuration make(std::vector<Vec> pts, int d, bool* perturbed = nullptr);
};

struct EnergyValue {
  double total = 0;
  double gradient_term = 0;    // (1/2 c_d) int |grad u_eta|^2
  double minus_sum_g_eta = 0;  // -(1/2) sum g(eta_i)
  double mu_interaction = 0;   // -sum int f_{eta_i}(x - x_i) dmu
  double boundary_penalty = 0; // sum h(x_i)
  RadiiVariant variant = RadiiVariant::Plain;
  double solver_residual = 0;

  static EnergyValue assemble(double grad, double msge, double muint, double pen,
                              RadiiVariant v, double resid) {
    EnergyValue e;
    e.gradient_term = grad;
    e.minus_sum_g_eta = msge;
    e.mu_interaction = muint;
    e.boundary_penalty = pen;
    e.total = grad + msge + muint + pen;
    e.variant = v;
    e.solver_residual = resid;
    return e;
  }
};

// (g(dist(x, boundary U)/4) - g(1/4))_+
double boundary_penalty(const Vec& x, const DomainUnion& U, int d);

struct EnergyOptions {
  int grid_n = 128;        // cells along the longest axis for grid solves
  SolveOptions solver;
  int mu_quad_grid_n = 256; // resolution for cached g*mu fields
};

// --- pair-sum form -------------------------------------------------------

// Precomputed g*mu data for the whole-space pair energy.
class PairSumContext {
 public:
  PairSumContext(const Density& mu, const EnergyOptions& opts = {});
  double g_star_mu(const Vec& x) const;
  double mu_self_energy() const { return mu_self_; }
  const Density& mu() const { return mu_; }

 private:
  Density mu_;
  GridField gstar_;     // grid-sampled g*mu when no closed form applies
  bool closed_form_ = false;
  double mu_self_ = 0;  // iint g dmu dmu
};

// F(X, mu) = 1/2 sum_{i != j} g(x_i - x_j) - sum_i (g*mu)(x_i) + 1/2 iint g dmu dmu.
EnergyValue pair_sum_F(const Configuration& X, const PairSumContext& ctx);

// --- grid electric forms -------------------------------------------------

// Neumann electric energy with hat radii (the subadditive F).
EnergyValue electric_F(const Configuration& X, const Density& mu, const DomainUnion& U,
                       const EnergyOptions& opts = {});
// Same value computed with caller-supplied truncation radii (eta_i <= hat r_i
// leaves the value unchanged; larger radii can only decrease it).
EnergyValue electric_F_radii(const Configuration& X, const Density& mu, const DomainUnion& U,
                             const std::vector<double>& eta, const EnergyOptions& opts = {});

// Localized F^Omega with tilde radii relative to (Omega, U).
EnergyValue localized_F(const Configuration& X, const Density& mu, const DomainUnion& U,
                        const DomainUnion& omega, const EnergyOptions& opts = {});

// Dirichlet energy G(X, mu, U); no neutrality requirement, no penalty.
EnergyValue dirichlet_G(const Configuration& X, const Density& mu, const DomainUnion& U,
                        const EnergyOptions& opts = {});

// Mixed energy H_U(X, Omega).
EnergyValue mixed_H(const Configuration& X, const Density& mu, const DomainUnion& omega,
                    const DomainUnion& U, const EnergyOptions& opts = {});

// --- closed-form rectangle models (d = 2) --------------------------------

// Exact Green-function evaluation of F / G / H_U on rectangles.  The
// all-Neumann model (F) is exact for any configuration; Dirichlet/mixed
// models are exact when every smearing ball stays inside the domain
// (balls_ok reports this).
class RectEnergyModel {
 public:
  // bc per axis end; mu either constant (value) or a grid density on the box
  RectEnergyModel(const HyperRectangle& box, const std::array<std::array<EndBC, 2>, 2>& bc,
                  const Density& mu, int phi_grid_n = 256);
  static RectEnergyModel neumann_F(const HyperRectangle& box, const Density& mu, int phi_grid_n = 256);
  static RectEnergyModel dirichlet_G_model(const HyperRectangle& box, const Density& mu);
  // Neumann exactly on the faces shared with U, Dirichlet elsewhere.
  static RectEnergyModel mixed_H_model(const HyperRectangle& box, const DomainUnion& U, const Density& mu);

  double energy(const std::vector<Vec>& pts) const;
  double one_body(const Vec& x) const;
  double pair(const Vec& x, const Vec& y) const { return green_.G(x, y); }
  double constant_term() const { return const_term_; }
  // O(N) energy change when point i moves to xnew.
  double delta_move(const std::vector<Vec>& pts, size_t i, const Vec& xnew) const;
  Vec gradient(const std::vector<Vec>& pts, size_t i) const;
  bool balls_ok(const std::vector<Vec>& pts) const; // smearing balls inside the domain
  bool with_penalty() const { return with_penalty_; }
  const RectGreen& green() const { return green_; }
  const HyperRectangle& box() const { return box_; }

 private:
  HyperRectangle box_;
  RectGreen green_;
  bool with_penalty_ = false; // the all-Neumann F carries the boundary penalty
  bool all_neumann_ = true;
  double mu_value_ = 0;       // constant-mu fast path
  bool mu_constant_ = true;
  GridField phi_mu_;          // int G(x,y) dmu(y) for grid mu
  double const_term_ = 0;     // (1/2) iint G dmu dmu
  DomainUnion domain_;
};

// --- inequality / control reports ----------------------------------------

struct MonotonicityResult {
  double value_small = 0; // assembled value at the smaller radii
  double value_large = 0;
  bool disjoint_equality_case = false;
  double tolerance = 0;
};

// Lemma-B.1 check: the assembled quantity is non-increasing in the
// truncation radii, with equality when the enlarged balls stay disjoint.
// Closed-form path for d=2 all-Neumann rectangles with constant mu.
MonotonicityResult monotonicity_in_truncation(const Configuration& X, const Density& mu,
                                              const HyperRectangle& U,
                                              const std::vector<double>& eta_small,
                                              const std::vector<double>& eta_large);

struct ControlReport {
  double sum_g_dbtilde = 0;
  double grad_sq = 0;
  double F_omega = 0;
  long long n_points_omega = 0;
  double fitted_C_sum_g = 0;  // smallest C with sum g <= 2F + C #
  double fitted_C_grad = 0;   // smallest C with int|grad u|^2 <= 4 c_d F + C #
};
ControlReport control_inequalities(const Configuration& X, const Density& mu, const DomainUnion& U,
                                   const DomainUnion& omega, const EnergyOptions& opts = {});

struct LowerBoundReport {
  double min_F_over_N = 0;
  double fitted_C = 0; // smallest C with F >= -C N across the batch
  std::vector<double> per_config_F_over_N;
};
LowerBoundReport lower_bound_check(const std::vector<Configuration>& batch, const Density& mu,
                                   const DomainUnion& U, const EnergyOptions& opts = {});

enum class DiscrepancyVariant : uint8_t { BoxDeficit, BoxExcess, BallDeficit, BallExcess };
struct DiscrepancyReport {
  DiscrepancyVariant variant;
  double D = 0;          // point count minus mass
  double lhs = 0;        // the controlled quantity
  double rhs_energy = 0; // the energy side (without the constant)
  double fitted_C = 0;   // smallest C making the inequality hold
  double margin = 0;     // rhs(C=fitted) - lhs, zero by construction
};
// region is a box (disc10/disc1) or a ball given by center/radius (disc30/disc3).
DiscrepancyReport discrepancy_bounds_box(const Configuration& X, const Density& mu, const DomainUnion& U,
                                         const HyperRectangle& region, const EnergyOptions& opts = {});
DiscrepancyReport discrepancy_bounds_ball(const Configuration& X, const Density& mu, const DomainUnion& U,
                                          const Vec& center, double R, const EnergyOptions& opts = {});

struct FluctuationReport {
  double lhs = 0;     // |int phi d(sum delta - mu)|
  double rhs_form = 0; // ||grad phi||_inf ((|dOmega|^{1/2}+|Omega|^{1/2}) ||grad u|| + |Omega| ||mu||)
  double fitted_C = 0;
};
FluctuationReport fluctuation_bound(const Configuration& X, const Density& mu, const DomainUnion& U,
                                    const GridField& phi, const DomainUnion& omega,
                                    const EnergyOptions& opts = {});

} // namespace coulomb
