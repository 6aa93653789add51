#include <doctest.h>

#include <cmath>

#include "coulomb/density.hpp"
#include "coulomb/fft.hpp"
#include "coulomb/kernels.hpp"

using namespace coulomb;

TEST_CASE("blow up: constant density") {
  auto box = HyperRectangle(Vec{0, 0}, Vec{1, 1}, 2);
  Density mu = Density::constant(1.0, DomainUnion::box(box));
  Density b = blow_up(mu, 16);
  CHECK(b.mass == doctest::Approx(16.0));
  CHECK(b.support.as_box().side(0) == doctest::Approx(4.0));
  CHECK(b.value_at(Vec{2, 2}) == doctest::Approx(1.0));
  CHECK(b.lower_m == doctest::Approx(mu.lower_m));
  CHECK(b.upper_L == doctest::Approx(mu.upper_L));
}

TEST_CASE("blow up: grid density pointwise identity") {
  Grid g = Grid::over_box(HyperRectangle(Vec{-1, -1}, Vec{1, 1}, 2), 64);
  GridField f(g);
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      Vec c = g.cell_center(i, j);
      f.v[g.index(i, j)] = std::exp(-norm2(c, 2));
    }
  double mass = f.integral();
  for (auto& v : f.v) v /= mass;
  Density mu = Density::from_grid(f);
  long long N = 25;
  Density b = blow_up(mu, N);
  CHECK(b.mass == doctest::Approx(double(N)).epsilon(1e-9));
  double s = std::pow(double(N), 0.5);
  Vec x{0.3, -0.2};
  CHECK(b.value_at(x * s) == doctest::Approx(mu.value_at(x)).epsilon(1e-9));
}

TEST_CASE("thermal equilibrium: small theta perturbative oracle") {
  double theta = 0.01;
  auto V = ConfiningPotential::quadratic(1.0);
  HyperRectangle box(Vec{-50, -50}, Vec{50, 50}, 2);
  ThermalSolveOptions o;
  o.tol = 1e-9;
  auto te = solve_thermal_equilibrium(V, theta, box, 256, o);
  CHECK(te.residual < 1e-9);
  CHECK(std::abs(te.mu_theta.mass - 1.0) < 1e-9);
  const Grid& g = te.mu_theta.field.grid;
  GridField ref(g);
  double z = 0;
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      Vec c = g.cell_center(i, j);
      ref.v[g.index(i, j)] = std::exp(-theta * V(c));
      z += ref.v[g.index(i, j)];
    }
  z *= g.cell_volume();
  for (auto& v : ref.v) v /= z;
  GridField conv = coulomb_convolve(te.mu_theta.field);
  double sup_conv = conv.max_abs();
  double worst = 0;
  for (size_t i = 0; i < ref.v.size(); ++i)
    worst = std::max(worst, std::abs(te.mu_theta.field.v[i] / ref.v[i] - 1.0));
  CHECK(worst <= 3.0 * theta * sup_conv + 1e-6);
}

TEST_CASE("thermal equilibrium: obstacle-problem oracle at large theta, symmetry, optimality") {
  double theta = 100.0;
  auto V = ConfiningPotential::quadratic(1.0);
  HyperRectangle box(Vec{-2, -2}, Vec{2, 2}, 2);
  ThermalSolveOptions o;
  o.tol = 1e-7;
  o.max_iter = 20000;
  auto te = solve_thermal_equilibrium(V, theta, box, 256, o);
  // equilibrium measure for V=|x|^2: density Delta V / c_2 = 2/pi on the disk
  // of radius 1/sqrt(2) (mass 1)
  double target = 2.0 / M_PI;
  const Grid& g = te.mu_theta.field.grid;
  double worst = 0;
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      Vec c = g.cell_center(i, j);
      if (norm(c, 2) < 0.5)
        worst = std::max(worst, std::abs(te.mu_theta.field.v[g.index(i, j)] - target) / target);
    }
  CHECK(worst < 0.05);

  double asym = 0;
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      size_t a = g.index(i, j);
      size_t b = g.index(g.n[0] - 1 - i, j);
      asym = std::max(asym, std::abs(te.mu_theta.field.v[a] - te.mu_theta.field.v[b]));
    }
  CHECK(asym < 1e-8 * te.mu_theta.field.max_abs() + 1e-12);

  GridField probe(g);
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      Vec c = g.cell_center(i, j);
      probe.v[g.index(i, j)] = std::exp(-8 * norm2(c, 2));
    }
  double pz = probe.integral();
  for (auto& v : probe.v) v /= pz;
  double eps = 1e-3;
  GridField mixed(g);
  for (size_t i = 0; i < mixed.v.size(); ++i)
    mixed.v[i] = te.mu_theta.field.v[i] + eps * (probe.v[i] - te.mu_theta.field.v[i]);
  CHECK(thermal_free_energy(te.mu_theta.field, V, theta) <=
        thermal_free_energy(mixed, V, theta) + 1e-10);

  for (size_t i = 0; i < te.zeta_theta.v.size(); ++i) {
    if (te.mu_theta.field.v[i] <= 1.0) CHECK(te.zeta_theta.v[i] >= -1e-12);
  }
}

TEST_CASE("thermal equilibrium: tail mass decreases with theta") {
  auto V = ConfiningPotential::quadratic(1.0);
  HyperRectangle box(Vec{-3, -3}, Vec{3, 3}, 2);
  double prev_tail = 1e9;
  for (double theta : {5.0, 20.0, 80.0}) {
    ThermalSolveOptions o;
    o.tol = 1e-7;
    o.max_iter = 20000;
    o.check_boundary_mass = theta > 10;
    auto te = solve_thermal_equilibrium(V, theta, box, 192, o);
    const Grid& g = te.mu_theta.field.grid;
    double tail = 0;
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        if (norm(g.cell_center(i, j), 2) > M_SQRT1_2) tail += te.mu_theta.field.v[g.index(i, j)];
    tail *= g.cell_volume();
    CHECK(tail < prev_tail);
    prev_tail = tail;
  }
}

TEST_CASE("effective potential zeta identities") {
  auto V = ConfiningPotential::quadratic(1.0);
  double beta = 2.0;
  long long N = 16;
  double theta = beta * std::pow(double(N), 1.0);
  HyperRectangle box(Vec{-2.5, -2.5}, Vec{2.5, 2.5}, 2);
  ThermalSolveOptions o;
  o.tol = 1e-7;
  o.max_iter = 20000;
  auto te = solve_thermal_equilibrium(V, theta, box, 192, o);
  GridField zp = effective_potential_zeta(te, N, beta);
  Density blown = blow_up(te.mu_theta, N);
  const Grid& g = zp.grid;
  size_t idx = g.index(g.n[0] / 2, g.n[1] / 2);
  CHECK(zp.v[idx] == doctest::Approx(-std::log(blown.field.v[idx]) / beta).epsilon(1e-12));
  // scaling: zeta'(x) = N^{2/d} zeta(N^{-1/d} x)
  Vec xb = g.cell_center(g.n[0] / 3, g.n[1] / 3);
  double lhs = interpolate(zp, xb);
  double rhs = double(N) * interpolate(te.zeta_theta, xb * std::pow(double(N), -0.5));
  CHECK(lhs == doctest::Approx(rhs).epsilon(5e-3));
}

TEST_CASE("density box_mass consistency between kinds") {
  auto box = HyperRectangle(Vec{0, 0}, Vec{2, 2}, 2);
  Density c = Density::constant(1.5, DomainUnion::box(box));
  Grid g = Grid::over_box(box, 128);
  Density gr = Density::from_grid(c.sample(g));
  HyperRectangle probe(Vec{0.3, 0.7}, Vec{1.1, 1.9}, 2);
  CHECK(c.box_mass(probe) == doctest::Approx(gr.box_mass(probe)).epsilon(1e-9));
}
