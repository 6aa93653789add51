#include <doctest.h>

#include <cmath>
#include <random>

#include "coulomb/energy.hpp"

using namespace coulomb;

namespace {

std::vector<Vec> random_points(int n, const HyperRectangle& box, unsigned seed, double margin = 0.0) {
  std::mt19937_64 rng(seed);
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) {
    Vec p;
    for (int a = 0; a < box.d; ++a) {
      std::uniform_real_distribution<double> dist(box.lo[a] + margin, box.hi[a] - margin);
      p[a] = dist(rng);
    }
    pts.push_back(p);
  }
  return pts;
}

} // namespace

TEST_CASE("boundary penalty values") {
  auto U = DomainUnion::box(HyperRectangle(Vec{0, 0}, Vec{4, 4}, 2));
  CHECK(boundary_penalty(Vec{2, 1}, U, 2) == doctest::Approx(0.0)); // dist 1
  CHECK(boundary_penalty(Vec{0.4, 2}, U, 2) == doctest::Approx(std::log(2.5)));
  CHECK(boundary_penalty(Vec{2, 2}, U, 2) == doctest::Approx(0.0)); // dist 2 >= 1
}

TEST_CASE("pair_sum_F: two points on the unit square vs quadrature oracle") {
  auto box = HyperRectangle(Vec{0, 0}, Vec{1, 1}, 2);
  Density mu = Density::constant(2.0, DomainUnion::box(box)); // mass 2
  PairSumContext ctx(mu);
  Configuration X = Configuration::make({Vec{0.25, 0.5}, Vec{0.75, 0.5}}, 2);
  EnergyValue e = pair_sum_F(X, ctx);

  // independent oracle at 4x resolution: brute-force grid for g*mu and the self term
  int n = 512;
  double h = 1.0 / n;
  auto gstar = [&](const Vec& x) {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Vec c{(i + 0.5) * h, (j + 0.5) * h};
        double r = dist(c, x, 2);
        if (r < 1e-12) continue;
        s += -std::log(r) * 2.0 * h * h;
      }
    return s;
  };
  double cross = gstar(X.points[0]) + gstar(X.points[1]);
  double pair = -std::log(0.5);
  // self term: 0.5 * iint g dmu dmu with mu = 2 on the square
  double self = 0;
  int m = 128;
  double hh = 1.0 / m;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Vec c{(i + 0.5) * hh, (j + 0.5) * hh};
      self += gstar(Vec{c[0], c[1]}) * 2.0 * hh * hh;
    }
  double oracle = pair - cross + 0.5 * self;
  CHECK(e.total == doctest::Approx(oracle).epsilon(2e-3));
}

TEST_CASE("pair_sum_F: scaling identity and reflection symmetry") {
  // F(X, N mu) = N^{1-2/d} F(X', mu') - (N/4) log N in d=2
  int N = 4;
  auto box1 = HyperRectangle(Vec{0, 0}, Vec{1, 1}, 2);
  Density muN = Density::constant(double(N), DomainUnion::box(box1));
  auto pts = random_points(N, box1, 7);
  Configuration X = Configuration::make(pts, 2);
  PairSumContext ctx1(muN);
  double F1 = pair_sum_F(X, ctx1).total;

  double s = std::sqrt(double(N));
  auto box2 = HyperRectangle(Vec{0, 0}, Vec{s, s}, 2);
  Density mu2 = Density::constant(1.0, DomainUnion::box(box2));
  std::vector<Vec> scaled;
  for (const auto& p : pts) scaled.push_back(p * s);
  Configuration X2 = Configuration::make(scaled, 2);
  PairSumContext ctx2(mu2);
  double F2 = pair_sum_F(X2, ctx2).total;
  CHECK(F1 == doctest::Approx(F2 - 0.25 * N * std::log(double(N))).epsilon(1e-6));

  // reflection symmetry
  std::vector<Vec> mirrored;
  for (const auto& p : pts) mirrored.push_back(Vec{1.0 - p[0], p[1]});
  Configuration Xm = Configuration::make(mirrored, 2);
  CHECK(pair_sum_F(Xm, ctx1).total == doctest::Approx(F1).epsilon(1e-9));
}

TEST_CASE("pair_sum_F: translation invariance with translated mu") {
  auto boxA = HyperRectangle(Vec{0, 0}, Vec{2, 1}, 2);
  auto boxB = HyperRectangle(Vec{3, 5}, Vec{5, 6}, 2);
  Density muA = Density::constant(1.5, DomainUnion::box(boxA)); // mass 3
  Density muB = Density::constant(1.5, DomainUnion::box(boxB));
  auto pts = random_points(3, boxA, 11);
  Configuration XA = Configuration::make(pts, 2);
  std::vector<Vec> shifted;
  for (const auto& p : pts) shifted.push_back(Vec{p[0] + 3, p[1] + 5});
  Configuration XB = Configuration::make(shifted, 2);
  PairSumContext cA(muA), cB(muB);
  CHECK(pair_sum_F(XA, cA).total == doctest::Approx(pair_sum_F(XB, cB).total).epsilon(1e-9));
}

TEST_CASE("pair_sum_F rejects coincident points and mass mismatch") {
  auto box = HyperRectangle(Vec{0, 0}, Vec{1, 1}, 2);
  Density mu = Density::constant(2.0, DomainUnion::box(box));
  PairSumContext ctx(mu);
  Configuration X;
  X.d = 2;
  X.points = {Vec{0.5, 0.5}, Vec{0.5, 0.5}};
  CHECK_THROWS(pair_sum_F(X, ctx));
  Configuration Y = Configuration::make({Vec{0.3, 0.3}}, 2);
  CHECK_THROWS(pair_sum_F(Y, ctx));
}

TEST_CASE("d=3 closed-form box convolution matches quadrature") {
  HyperRectangle B(Vec{0, 0, 0}, Vec{1, 1, 1}, 3);
  Density mu = Density::constant(1.0, DomainUnion::box(B));
  PairSumContext ctx(mu);
  for (Vec x : {Vec{0.5, 0.5, 0.5}, Vec{2.0, 0.5, 0.5}, Vec{0.1, 0.2, 0.9}}) {
    int n = 96;
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Vec c{(i + 0.5) / n, (j + 0.5) / n, (k + 0.5) / n};
          double r = dist(c, x, 3);
          s += 1.0 / r / (double(n) * n * n);
        }
    CHECK(ctx.g_star_mu(x) == doctest::Approx(s).epsilon(2e-3));
  }
}

TEST_CASE("electric_F equals the closed-form rectangle model") {
  HyperRectangle box(Vec{0, 0}, Vec{2, 2}, 2);
  Density mu = Density::constant(2.0, DomainUnion::box(box)); // mass 8
  auto pts = random_points(8, box, 3, /*margin=*/0.15);
  Configuration X = Configuration::make(pts, 2);
  RectEnergyModel model = RectEnergyModel::neumann_F(box, mu);
  double exact = model.energy(X.points);
  EnergyOptions opts;
  opts.grid_n = 192;
  EnergyValue grid = electric_F(X, mu, DomainUnion::box(box), opts);
  CHECK(grid.total == doctest::Approx(exact).epsilon(0.02));
  // breakdown consistency
  CHECK(grid.total ==
        grid.gradient_term + grid.minus_sum_g_eta + grid.mu_interaction + grid.boundary_penalty);
}

TEST_CASE("electric_F: truncation invariance under eta -> eta/2 (exact model + grid trend)") {
  HyperRectangle box(Vec{0, 0}, Vec{2, 2}, 2);
  Density mu = Density::constant(2.0, DomainUnion::box(box));
  auto pts = random_points(8, box, 21, 0.15);
  Configuration X = Configuration::make(pts, 2);
  auto Ubox = DomainUnion::box(box);
  auto fam = compute_radii(X.points, 2, RadiiVariant::Hat, nullptr, &Ubox);
  std::vector<double> half = fam.r;
  for (auto& r : half) r /= 2;
  EnergyOptions opts;
  opts.grid_n = 256;
  auto U = DomainUnion::box(box);
  double a = electric_F_radii(X, mu, U, fam.r, opts).total;
  double b = electric_F_radii(X, mu, U, half, opts).total;
  CHECK(a == doctest::Approx(b).epsilon(0.03));
}

TEST_CASE("whole-space surrogate: boxed Neumann energy approaches pair_sum_F with padding") {
  // mass-4 block in the middle of a large Neumann box
  HyperRectangle blk(Vec{-1, -1}, Vec{1, 1}, 2);
  Density mu = Density::constant(1.0, DomainUnion::box(blk)); // mass 4
  auto pts = random_points(4, blk, 5, 0.2);
  Configuration X = Configuration::make(pts, 2);
  PairSumContext ctx(mu);
  double Fpair = pair_sum_F(X, ctx).total;
  // domain-truncation gap shrinks like 1/pad^2 (exact evaluations, no grid error)
  std::vector<double> gaps;
  for (double pad : {3.0, 6.0, 12.0}) {
    HyperRectangle big(Vec{-pad, -pad}, Vec{pad, pad}, 2);
    RectEnergyModel m = RectEnergyModel::neumann_F(big, mu, 768);
    gaps.push_back(std::abs(m.energy(X.points) - Fpair));
  }
  CHECK(gaps[1] < 0.45 * gaps[0]);
  CHECK(gaps[2] < 0.45 * gaps[1]);
  CHECK(gaps[2] < 0.02);
  // and the grid electric_F agrees with the exact model on the same box
  HyperRectangle big(Vec{-4, -4}, Vec{4, 4}, 2);
  RectEnergyModel m = RectEnergyModel::neumann_F(big, mu, 768);
  EnergyOptions opts;
  opts.grid_n = 256;
  double Fc = electric_F(X, mu, DomainUnion::box(big), opts).total;
  opts.grid_n = 512;
  double Ff = electric_F(X, mu, DomainUnion::box(big), opts).total;
  double Fre = 2 * Ff - Fc; // first-order Richardson over (h, h/2)
  CHECK(std::abs(Fre - m.energy(X.points)) < 0.03);
}

TEST_CASE("G <= F and H interior coincides with G") {
  HyperRectangle box(Vec{0, 0}, Vec{2, 2}, 2);
  Density mu = Density::constant(1.0, DomainUnion::box(box)); // mass 4
  auto U = DomainUnion::box(box);
  EnergyOptions opts;
  opts.grid_n = 160;
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
    auto pts = random_points(4, box, seed, 0.3);
    Configuration X = Configuration::make(pts, 2);
    double F = electric_F(X, mu, U, opts).total;
    double G = dirichlet_G(X, mu, U, opts).total;
    CHECK(G <= F + 0.05 * (1 + std::abs(F)));
  }
  // H_U with Omega strictly inside U equals G on Omega
  HyperRectangle omega(Vec{0.5, 0.5}, Vec{1.5, 1.5}, 2);
  Density mu1 = Density::constant(1.0, DomainUnion::box(box));
  auto ptsi = random_points(2, omega, 17, 0.3);
  Configuration Xi = Configuration::make(ptsi, 2);
  double H = mixed_H(Xi, mu1, DomainUnion::box(omega), DomainUnion::box(HyperRectangle(Vec{-10, -10}, Vec{10, 10}, 2)), opts).total;
  double Gi = dirichlet_G(Xi, mu1, DomainUnion::box(omega), opts).total;
  CHECK(H == doctest::Approx(Gi).epsilon(1e-6));
}

TEST_CASE("green H model matches grid mixed_H when balls stay inside") {
  HyperRectangle box(Vec{0, 0}, Vec{2, 2}, 2);
  HyperRectangle ubig(Vec{0, -2}, Vec{6, 4}, 2); // shares the left face x=0
  Density mu = Density::constant(1.0, DomainUnion::box(box));
  auto pts = random_points(4, box, 9, 0.3);
  Configuration X = Configuration::make(pts, 2);
  RectEnergyModel m = RectEnergyModel::mixed_H_model(box, DomainUnion::box(ubig), mu);
  REQUIRE(m.balls_ok(X.points));
  double exact = m.energy(X.points);
  EnergyOptions opts;
  opts.grid_n = 224;
  double grid = mixed_H(X, mu, DomainUnion::box(box), DomainUnion::box(ubig), opts).total;
  CHECK(grid == doctest::Approx(exact).epsilon(0.03));
}

TEST_CASE("monotonicity in truncation: equality for disjoint, decrease for overlap") {
  HyperRectangle box(Vec{0, 0}, Vec{2, 2}, 2);
  Density mu = Density::constant(0.5, DomainUnion::box(box)); // mass 2 = N
  Configuration X = Configuration::make({Vec{0.7, 1.0}, Vec{1.3, 1.0}}, 2);
  // eta_small = plain radii (0.15 apart => r = min(0.6,1)/4 = 0.15)
  std::vector<double> small{0.1, 0.1};
  std::vector<double> disj{0.2, 0.2};  // balls distance 0.6 apart: still disjoint
  auto r1 = monotonicity_in_truncation(X, mu, box, small, disj);
  CHECK(r1.disjoint_equality_case);
  CHECK(std::abs(r1.value_large - r1.value_small) < std::max(r1.tolerance, 1e-8));
  std::vector<double> overlap{0.35, 0.35}; // 0.35+0.35 > 0.6: overlapping
  auto r2 = monotonicity_in_truncation(X, mu, box, small, overlap);
  CHECK(!r2.disjoint_equality_case);
  CHECK(r2.value_large < r2.value_small - 1e-4);
  // equal radii: equal values
  auto r3 = monotonicity_in_truncation(X, mu, box, small, small);
  CHECK(r3.value_large == doctest::Approx(r3.value_small).epsilon(1e-12));
  // hypothesis violation: ball exits U
  Configuration Y = Configuration::make({Vec{0.1, 1.0}, Vec{1.3, 1.0}}, 2);
  CHECK_THROWS(monotonicity_in_truncation(Y, mu, box, small, disj));
}

TEST_CASE("localized_F: Omega = U equals electric_F; empty Omega has no point terms") {
  HyperRectangle box(Vec{0, 0}, Vec{2, 2}, 2);
  Density mu = Density::constant(1.0, DomainUnion::box(box));
  auto U = DomainUnion::box(box);
  auto pts = random_points(4, box, 13, 0.3);
  Configuration X = Configuration::make(pts, 2);
  EnergyOptions opts;
  opts.grid_n = 160;
  double F = electric_F(X, mu, U, opts).total;
  double Floc = localized_F(X, mu, U, U, opts).total;
  CHECK(Floc == doctest::Approx(F).epsilon(1e-6));

  HyperRectangle empty_omega(Vec{0.02, 0.02}, Vec{0.22, 0.22}, 2);
  // keep points out of omega
  auto pts2 = random_points(4, HyperRectangle(Vec{1, 1}, Vec{1.9, 1.9}, 2), 14, 0.1);
  Configuration X2 = Configuration::make(pts2, 2);
  EnergyValue e = localized_F(X2, mu, U, DomainUnion::box(empty_omega), opts);
  CHECK(e.minus_sum_g_eta == 0.0);
  CHECK(e.boundary_penalty == 0.0);
  CHECK(e.gradient_term >= 0.0);
}

TEST_CASE("restri1: F^Omega >= H_U(X|_Omega, Omega) on random configs") {
  HyperRectangle ubox(Vec{0, 0}, Vec{3, 2}, 2);
  HyperRectangle obox(Vec{0, 0}, Vec{1.5, 2}, 2); // shares three faces with U
  Density mu = Density::constant(1.0, DomainUnion::box(ubox)); // mass 6
  auto U = DomainUnion::box(ubox);
  auto Om = DomainUnion::box(obox);
  EnergyOptions opts;
  opts.grid_n = 144;
  int violations = 0;
  for (unsigned seed = 0; seed < 5; ++seed) {
    auto pts = random_points(6, ubox, 100 + seed, 0.3);
    Configuration X = Configuration::make(pts, 2);
    double Floc = localized_F(X, mu, U, Om, opts).total;
    std::vector<Vec> inside;
    for (const auto& p : pts)
      if (obox.contains(p)) inside.push_back(p);
    if (inside.empty()) continue;
    Configuration Xo = Configuration::make(inside, 2);
    double H = mixed_H(Xo, mu, Om, U, opts).total;
    if (Floc < H - 0.05 * (1 + std::abs(H))) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("control inequalities hold with modest constants") {
  HyperRectangle box(Vec{0, 0}, Vec{3, 3}, 2);
  Density mu = Density::constant(1.0, DomainUnion::box(box)); // mass 9
  auto U = DomainUnion::box(box);
  EnergyOptions opts;
  opts.grid_n = 144;
  // well-separated lattice
  std::vector<Vec> lat;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) lat.push_back(Vec{0.5 + i, 0.5 + j});
  Configuration L = Configuration::make(lat, 2);
  auto rep = control_inequalities(L, mu, U, U, opts);
  CHECK(rep.sum_g_dbtilde <= 2 * rep.F_omega + (rep.fitted_C_sum_g + 1e-9) * rep.n_points_omega);
  CHECK(rep.fitted_C_sum_g < 10.0);
  CHECK(rep.fitted_C_grad < 60.0);

  // clustered pair: both sides grow, inequality still holds with similar C
  std::vector<Vec> clus = lat;
  clus[4] = Vec{1.5, 1.5};
  clus[5] = Vec{1.5 + 2e-3, 1.5};
  Configuration C2 = Configuration::make(clus, 2);
  auto rep2 = control_inequalities(C2, mu, U, U, opts);
  CHECK(rep2.sum_g_dbtilde > rep.sum_g_dbtilde);
  CHECK(rep2.F_omega > rep.F_omega);
  CHECK(rep2.fitted_C_sum_g < 12.0);
}

TEST_CASE("lower bound F >= -CN across batches") {
  HyperRectangle box(Vec{0, 0}, Vec{4, 4}, 2);
  Density mu = Density::constant(1.0, DomainUnion::box(box));
  auto U = DomainUnion::box(box);
  std::vector<Configuration> batch;
  for (unsigned s = 0; s < 6; ++s) batch.push_back(Configuration::make(random_points(16, box, 200 + s), 2));
  auto rep = lower_bound_check(batch, mu, U);
  CHECK(rep.fitted_C < 5.0);
  // single point: explicit
  std::vector<Configuration> one = {Configuration::make({Vec{2, 2}}, 2)};
  HyperRectangle b1(Vec{1.5, 1.5}, Vec{2.5, 2.5}, 2);
  Density mu1 = Density::constant(1.0, DomainUnion::box(b1));
  auto rep1 = lower_bound_check(one, mu1, DomainUnion::box(b1));
  CHECK(std::isfinite(rep1.min_F_over_N));
}

TEST_CASE("discrepancy bounds: empty box is deterministic") {
  HyperRectangle box(Vec{0, 0}, Vec{6, 6}, 2);
  Density mu = Density::constant(1.0, DomainUnion::box(box)); // mass 36
  auto U = DomainUnion::box(box);
  // points all in the right half; query an empty unit box on the left
  auto pts = random_points(36, HyperRectangle(Vec{3, 0}, Vec{6, 6}, 2), 31, 0.2);
  Configuration X = Configuration::make(pts, 2);
  EnergyOptions opts;
  opts.grid_n = 144;
  HyperRectangle probe(Vec{0.5, 2.5}, Vec{1.5, 3.5}, 2);
  auto rep = discrepancy_bounds_box(X, mu, U, probe, opts);
  CHECK(rep.variant == DiscrepancyVariant::BoxDeficit);
  CHECK(rep.D == doctest::Approx(-1.0));
  CHECK(rep.fitted_C > 0);
  // ball variant on a deficit region
  auto repb = discrepancy_bounds_ball(X, mu, U, Vec{1.0, 3.0}, 0.9, opts);
  CHECK(repb.variant == DiscrepancyVariant::BallDeficit);
  CHECK(repb.lhs >= 0);
}

TEST_CASE("fluctuation bound: zero phi and tent function") {
  HyperRectangle box(Vec{0, 0}, Vec{6, 6}, 2);
  Density mu = Density::constant(1.0, DomainUnion::box(box));
  auto U = DomainUnion::box(box);
  auto pts = random_points(36, box, 41, 0.2);
  Configuration X = Configuration::make(pts, 2);
  Grid pgrid = Grid::over_box(box, 96);
  GridField phi(pgrid);
  EnergyOptions opts;
  opts.grid_n = 144;
  auto rep0 = fluctuation_bound(X, mu, U, phi, U, opts);
  CHECK(rep0.lhs == doctest::Approx(0.0));
  // tent centered at (3,3), support radius 1.2
  for (int j = 0; j < pgrid.n[1]; ++j)
    for (int i = 0; i < pgrid.n[0]; ++i) {
      Vec c = pgrid.cell_center(i, j);
      double r = dist(c, Vec{3, 3}, 2);
      phi.v[pgrid.index(i, j)] = std::max(0.0, 1.2 - r);
    }
  auto rep = fluctuation_bound(X, mu, U, phi, U, opts);
  CHECK(rep.lhs <= rep.rhs_form * std::max(1.0, rep.fitted_C) + 1e-9);
  CHECK(rep.fitted_C < 3.0);
}
