#pragma once
// Dimension-parametric Coulomb kernels, truncations and the temperature
// scale functions chi(beta), rho_beta, theta.

#include <array>
#include <cmath>
#include <stdexcept>

namespace coulomb {

// Point in R^d, d in {2,3}. The third coordinate is ignored when d == 2.
struct Vec {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  Vec() = default;
  Vec(double x, double y) : c{x, y, 0.0} {}
  Vec(double x, double y, double z) : c{x, y, z} {}

  double& operator[](int i) { return c[size_t(i)]; }
  double operator[](int i) const { return c[size_t(i)]; }

  Vec operator+(const Vec& o) const { return {c[0] + o.c[0], c[1] + o.c[1], c[2] + o.c[2]}; }
  Vec operator-(const Vec& o) const { return {c[0] - o.c[0], c[1] - o.c[1], c[2] - o.c[2]}; }
  Vec operator*(double s) const { return {c[0] * s, c[1] * s, c[2] * s}; }
};

inline double norm2(const Vec& v, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += v[i] * v[i];
  return s;
}
inline double norm(const Vec& v, int d) { return std::sqrt(norm2(v, d)); }
inline double dist(const Vec& a, const Vec& b, int d) { return norm(a - b, d); }

// Runtime dimension; solver paths accept only d = 2 or 3.
struct Dimension {
  int d = 2;
  explicit Dimension(int dim) : d(dim) {
    if (d < 2) throw std::invalid_argument("dimension must be >= 2");
  }
  void require_solver_dim() const {
    if (d != 2 && d != 3) throw std::invalid_argument("solver paths require d in {2,3}");
  }
};

// Coulomb kernel g(r): -log r in d=2, r^{2-d} for d >= 3.
double coulomb_g(double r, int d);

// g evaluated at a displacement; throws on the zero vector.
double coulomb_kernel(const Vec& x, int d);

// Truncation f_eta(r) = (g(r) - g(eta))_+ , supported in [0, eta].
double truncated_kernel_radial(double r, double eta, int d);
double truncated_kernel(const Vec& x, double eta, int d);

// c_d with -Lap g = c_d delta_0: 2*pi (d=2), 4*pi (d=3).
double cd_constant(int d);

// Integral of f_eta over the full ball B(0,eta): c_d eta^2 / (2d).
double truncated_kernel_ball_integral(double eta, int d);

// chi(beta): 1 for d >= 3, 1 + max(-log beta, 0) for d = 2.
double chi(double beta, int d);

// rho_beta = C * max(1, beta^{-1/2} chi^{1/2}, beta^{1/(d-2)-1} [d>=5]).
double rho_beta(double beta, int d, double C = 1.0);

// Minimal bulk distance scale: C * max(chi N^{1/(d+2)},
//   chi beta^{-1-1/d} rho_beta^{-d}, N^{1/(3d)} beta^{-1/3}, beta^{-1/2} [d=2]).
// Diagnostic/reporting only.
double min_scale_distance(double beta, double n_points, int d, double C = 1.0);

// Derived temperature scales for a run at inverse temperature beta with N points.
struct ScaleParams {
  double beta = 1.0;
  long long n_points = 1;
  double theta = 1.0;     // beta * N^{2/d}, exact
  double chi_value = 1.0; // chi(beta)
  double rho = 1.0;       // rho_beta with constant C

  ScaleParams(double beta_, long long n, int d, double C = 1.0);
};

} // namespace coulomb
