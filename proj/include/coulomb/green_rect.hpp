#pragma once
// Closed-form Green functions of rectangles in d=2 via Jacobi theta images:
// Neumann, Dirichlet and per-axis mixed boundary conditions.  These back the
// fast exact energy evaluations and the small-N quadrature oracles.

#include <array>
#include <complex>
#include <vector>

#include "coulomb/fft.hpp"
#include "coulomb/geometry.hpp"

namespace coulomb {

// Green function of the Laplacian on a flat torus (periods a x b) for the
// -log kernel: -Lap phi = 2 pi (delta_0 - 1/(ab)).
struct TorusLogGreen {
  double a = 1, b = 1;   // canonical: b >= a so q = exp(-pi b / a) is small
  bool swapped = false;  // true if input axes were exchanged
  double q = 0;
  double log_sin_coeff = 0; // -log(pi |theta1'(0,q)| / a)
  double mean = 0;          // torus average of phi

  TorusLogGreen() = default;
  TorusLogGreen(double period_x, double period_y);
  double operator()(double zx, double zy) const;
  // gradient of phi at (zx, zy), undefined at the lattice points
  std::array<double, 2> grad(double zx, double zy) const;
};

// Rectangle Green function with per-axis-end boundary conditions, normalized
// (in the all-Neumann case) so that the integral over the rectangle is zero.
struct RectGreen {
  HyperRectangle box;
  std::array<std::array<EndBC, 2>, 2> bc{};
  bool all_neumann = true;

  RectGreen() = default;
  RectGreen(const HyperRectangle& rect, const std::array<std::array<EndBC, 2>, 2>& bc_);
  static RectGreen neumann(const HyperRectangle& rect);
  static RectGreen dirichlet(const HyperRectangle& rect);

  double G(const Vec& x, const Vec& y) const;
  // H(x) = lim_{y->x} G(x,y) - g(x-y)
  double H(const Vec& x) const;
  Vec grad_G_x(const Vec& x, const Vec& y) const;
  Vec grad_H(const Vec& x) const;

  // Circle-average of the smooth part G - g(identity image) over spheres
  // dB(xi,ri) x dB(xj,rj); for i == j pass the same center/radius.
  // quad_n is the per-circle quadrature order.
  double smooth_circle_avg(const Vec& xi, double ri, const Vec& xj, double rj, int quad_n = 48) const;

  // int_box G(x, y) dy for unit density (0 for all-Neumann; series otherwise).
  double potential_uniform(const Vec& x) const;
  // double integral of G over box x box for unit density.
  double uniform_self_energy() const;

 private:
  struct AxisImage {
    double scale;
    double shift;
    int sign;
  };
  std::array<std::vector<AxisImage>, 2> images_;
  TorusLogGreen torus_;
  double cshift_ = 0;
  // series data for the mixed/Dirichlet uniform potential
  mutable std::vector<double> mode_coef_;
  void axis_images(int axis);
};

// Full-circle pair interaction of the pure -log kernel between uniform unit
// charges on dB(xi,ri) and dB(xj,rj) (closed form for separated circles,
// quadrature when they overlap; self term for xi == xj is -log max(ri,rj)).
double circle_pair_log_energy(const Vec& xi, double ri, const Vec& xj, double rj, int quad_n = 2048);

} // namespace coulomb
