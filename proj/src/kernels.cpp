#include "coulomb/kernels.hpp"

#include <algorithm>

namespace coulomb {

double coulomb_g(double r, int d) {
  if (r <= 0) throw std::domain_error("coulomb_g: r must be positive");
  if (d == 2) return -std::log(r);
  return std::pow(r, 2.0 - double(d));
}

double coulomb_kernel(const Vec& x, int d) {
  double r = norm(x, d);
  if (r == 0) throw std::domain_error("coulomb_kernel: zero vector");
  return coulomb_g(r, d);
}

double truncated_kernel_radial(double r, double eta, int d) {
  if (eta <= 0) throw std::domain_error("truncated_kernel: eta must be positive");
  if (r >= eta) return 0.0;
  if (r <= 0) throw std::domain_error("truncated_kernel: r must be positive");
  return std::max(coulomb_g(r, d) - coulomb_g(eta, d), 0.0);
}

double truncated_kernel(const Vec& x, double eta, int d) {
  return truncated_kernel_radial(norm(x, d), eta, d);
}

double cd_constant(int d) {
  if (d == 2) return 2.0 * M_PI;
  if (d == 3) return 4.0 * M_PI;
  throw std::invalid_argument("cd_constant: only d in {2,3} supported");
}

double truncated_kernel_ball_integral(double eta, int d) {
  // int_{B(0,eta)} (g(r)-g(eta))_+ dx = c_d eta^2 / (2d), valid for d = 2, 3.
  return cd_constant(d) * eta * eta / (2.0 * double(d));
}

double chi(double beta, int d) {
  if (beta <= 0) throw std::domain_error("chi: beta must be positive");
  if (d >= 3) return 1.0;
  return 1.0 + std::max(-std::log(beta), 0.0);
}

double rho_beta(double beta, int d, double C) {
  if (beta <= 0) throw std::domain_error("rho_beta: beta must be positive");
  double t1 = 1.0;
  double t2 = std::sqrt(chi(beta, d) / beta);
  double t3 = (d >= 5) ? std::pow(beta, 1.0 / double(d - 2) - 1.0) : 0.0;
  return C * std::max({t1, t2, t3});
}

double min_scale_distance(double beta, double n_points, int d, double C) {
  if (beta <= 0 || n_points <= 0) throw std::domain_error("min_scale_distance: positive inputs required");
  double ch = chi(beta, d);
  double rho = rho_beta(beta, d, C);
  double t1 = ch * std::pow(n_points, 1.0 / double(d + 2));
  double t2 = ch * std::pow(beta, -1.0 - 1.0 / double(d)) * std::pow(rho, -double(d));
  double t3 = std::pow(n_points, 1.0 / (3.0 * double(d))) * std::pow(beta, -1.0 / 3.0);
  double t4 = (d == 2) ? 1.0 / std::sqrt(beta) : 0.0;
  return C * std::max({t1, t2, t3, t4});
}

ScaleParams::ScaleParams(double beta_, long long n, int d, double C) : beta(beta_), n_points(n) {
  if (beta <= 0) throw std::domain_error("ScaleParams: beta must be positive");
  if (n <= 0) throw std::domain_error("ScaleParams: n_points must be positive");
  theta = beta * std::pow(double(n), 2.0 / double(d));
  chi_value = chi(beta, d);
  rho = rho_beta(beta, d, C);
}

} // namespace coulomb
