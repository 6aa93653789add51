#include "coulomb/green_rect.hpp"

#include <cmath>
#include <stdexcept>

#include "coulomb/kernels.hpp"

namespace coulomb {

namespace {

constexpr int kThetaTerms = 16;

std::complex<double> theta1(std::complex<double> u, double q) {
  std::complex<double> s{0, 0};
  double qpow;
  for (int n = 0; n < kThetaTerms; ++n) {
    qpow = std::pow(q, (n + 0.5) * (n + 0.5));
    if (qpow < 1e-300) break;
    double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    s += sgn * qpow * std::sin(double(2 * n + 1) * u);
  }
  return 2.0 * s;
}

std::complex<double> theta1_prime(std::complex<double> u, double q) {
  std::complex<double> s{0, 0};
  for (int n = 0; n < kThetaTerms; ++n) {
    double qpow = std::pow(q, (n + 0.5) * (n + 0.5));
    if (qpow < 1e-300) break;
    double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    s += sgn * qpow * double(2 * n + 1) * std::cos(double(2 * n + 1) * u);
  }
  return 2.0 * s;
}

double reduce_periodic(double z, double period) {
  z = std::fmod(z, period);
  if (z < -period / 2) z += period;
  if (z >= period / 2) z -= period;
  return z;
}

} // namespace

TorusLogGreen::TorusLogGreen(double period_x, double period_y) {
  if (period_y >= period_x) {
    a = period_x;
    b = period_y;
    swapped = false;
  } else {
    a = period_y;
    b = period_x;
    swapped = true;
  }
  q = std::exp(-M_PI * b / a);
  double tp0 = std::abs(theta1_prime(std::complex<double>{0, 0}, q).real());
  log_sin_coeff = -std::log(M_PI * tp0 / a);
  // torus mean of phi: pi b/(12 a) - sum log(1 - q^{2n})
  double s = 0;
  for (int n = 1; n < 200; ++n) {
    double t = std::pow(q, 2.0 * n);
    if (t < 1e-18) break;
    s += std::log1p(-t);
  }
  mean = M_PI * b / (12.0 * a) - s;
}

double TorusLogGreen::operator()(double zx, double zy) const {
  if (swapped) std::swap(zx, zy);
  zx = reduce_periodic(zx, a);
  zy = reduce_periodic(zy, b);
  std::complex<double> u{M_PI * zx / a, M_PI * zy / a};
  double t = std::abs(theta1(u, q));
  if (t == 0) return std::numeric_limits<double>::infinity();
  return -std::log(t) + M_PI * zy * zy / (a * b);
}

std::array<double, 2> TorusLogGreen::grad(double zx, double zy) const {
  double sx = zx, sy = zy;
  if (swapped) std::swap(sx, sy);
  sx = reduce_periodic(sx, a);
  sy = reduce_periodic(sy, b);
  std::complex<double> u{M_PI * sx / a, M_PI * sy / a};
  std::complex<double> rat = theta1_prime(u, q) / theta1(u, q);
  double gx = -(M_PI / a) * rat.real();
  double gy = (M_PI / a) * rat.imag() + 2 * M_PI * sy / (a * b);
  if (swapped) std::swap(gx, gy);
  return {gx, gy};
}

void RectGreen::axis_images(int axis) {
  double L = box.side(axis);
  EndBC lo = bc[size_t(axis)][0], hi = bc[size_t(axis)][1];
  auto& im = images_[size_t(axis)];
  im.clear();
  if (lo == EndBC::Neumann && hi == EndBC::Neumann) {
    im.push_back({1.0, 0.0, +1});
    im.push_back({-1.0, 0.0, +1});
  } else if (lo == EndBC::Dirichlet && hi == EndBC::Dirichlet) {
    im.push_back({1.0, 0.0, +1});
    im.push_back({-1.0, 0.0, -1});
  } else if (lo == EndBC::Neumann && hi == EndBC::Dirichlet) {
    im.push_back({1.0, 0.0, +1});
    im.push_back({-1.0, 0.0, +1});
    im.push_back({-1.0, 2 * L, -1});
    im.push_back({1.0, 2 * L, -1});
  } else {
    im.push_back({1.0, 0.0, +1});
    im.push_back({-1.0, 0.0, -1});
    im.push_back({-1.0, 2 * L, +1});
    im.push_back({1.0, 2 * L, -1});
  }
}

RectGreen::RectGreen(const HyperRectangle& rect, const std::array<std::array<EndBC, 2>, 2>& bc_)
    : box(rect), bc(bc_) {
  if (rect.d != 2) throw std::invalid_argument("RectGreen: d=2 rectangles only");
  all_neumann = true;
  for (int a = 0; a < 2; ++a)
    for (int e = 0; e < 2; ++e)
      if (bc[size_t(a)][size_t(e)] != EndBC::Neumann) all_neumann = false;
  axis_images(0);
  axis_images(1);
  double p0 = (images_[0].size() == 2 ? 2 : 4) * box.side(0);
  double p1 = (images_[1].size() == 2 ? 2 : 4) * box.side(1);
  torus_ = TorusLogGreen(p0, p1);
  cshift_ = all_neumann ? -4.0 * torus_.mean : 0.0;
}

RectGreen RectGreen::neumann(const HyperRectangle& rect) {
  std::array<std::array<EndBC, 2>, 2> b{};
  for (auto& a : b) a = {EndBC::Neumann, EndBC::Neumann};
  return RectGreen(rect, b);
}

RectGreen RectGreen::dirichlet(const HyperRectangle& rect) {
  std::array<std::array<EndBC, 2>, 2> b{};
  for (auto& a : b) a = {EndBC::Dirichlet, EndBC::Dirichlet};
  return RectGreen(rect, b);
}

double RectGreen::G(const Vec& x, const Vec& y) const {
  double x0 = x[0] - box.lo[0], x1 = x[1] - box.lo[1];
  double y0 = y[0] - box.lo[0], y1 = y[1] - box.lo[1];
  double s = cshift_;
  for (const auto& i0 : images_[0])
    for (const auto& i1 : images_[1]) {
      double z0 = x0 - (i0.scale * y0 + i0.shift);
      double z1 = x1 - (i1.scale * y1 + i1.shift);
      s += i0.sign * i1.sign * torus_(z0, z1);
    }
  return s;
}

double RectGreen::H(const Vec& x) const {
  double x0 = x[0] - box.lo[0], x1 = x[1] - box.lo[1];
  double s = cshift_ + torus_.log_sin_coeff;
  for (const auto& i0 : images_[0])
    for (const auto& i1 : images_[1]) {
      bool identity = i0.scale == 1.0 && i0.shift == 0.0 && i1.scale == 1.0 && i1.shift == 0.0;
      if (identity) continue;
      double z0 = x0 - (i0.scale * x0 + i0.shift);
      double z1 = x1 - (i1.scale * x1 + i1.shift);
      s += i0.sign * i1.sign * torus_(z0, z1);
    }
  return s;
}

Vec RectGreen::grad_G_x(const Vec& x, const Vec& y) const {
  double x0 = x[0] - box.lo[0], x1 = x[1] - box.lo[1];
  double y0 = y[0] - box.lo[0], y1 = y[1] - box.lo[1];
  Vec g{0, 0};
  for (const auto& i0 : images_[0])
    for (const auto& i1 : images_[1]) {
      double z0 = x0 - (i0.scale * y0 + i0.shift);
      double z1 = x1 - (i1.scale * y1 + i1.shift);
      auto gr = torus_.grad(z0, z1);
      g[0] += i0.sign * i1.sign * gr[0];
      g[1] += i0.sign * i1.sign * gr[1];
    }
  return g;
}

Vec RectGreen::grad_H(const Vec& x) const {
  double x0 = x[0] - box.lo[0], x1 = x[1] - box.lo[1];
  Vec g{0, 0};
  for (const auto& i0 : images_[0])
    for (const auto& i1 : images_[1]) {
      bool identity = i0.scale == 1.0 && i0.shift == 0.0 && i1.scale == 1.0 && i1.shift == 0.0;
      if (identity) continue;
      double z0 = x0 - (i0.scale * x0 + i0.shift);
      double z1 = x1 - (i1.scale * x1 + i1.shift);
      auto gr = torus_.grad(z0, z1);
      double sgn = i0.sign * i1.sign;
      g[0] += sgn * (1.0 - i0.scale) * gr[0];
      g[1] += sgn * (1.0 - i1.scale) * gr[1];
    }
  return g;
}

double RectGreen::smooth_circle_avg(const Vec& xi, double ri, const Vec& xj, double rj, int quad_n) const {
  double s = 0;
  for (int m = 0; m < quad_n; ++m) {
    double tha = 2 * M_PI * (m + 0.25) / quad_n;
    Vec a{xi[0] + ri * std::cos(tha), xi[1] + ri * std::sin(tha)};
    for (int l = 0; l < quad_n; ++l) {
      double thb = 2 * M_PI * (l + 0.75) / quad_n;
      Vec b{xj[0] + rj * std::cos(thb), xj[1] + rj * std::sin(thb)};
      double r = dist(a, b, 2);
      s += G(a, b) + std::log(std::max(r, 1e-300));
    }
  }
  return s / (double(quad_n) * quad_n);
}

double RectGreen::potential_uniform(const Vec& x) const {
  if (all_neumann) return 0.0;
  const int M = 96;
  double L0 = box.side(0), L1 = box.side(1);
  double x0 = x[0] - box.lo[0], x1 = x[1] - box.lo[1];
  auto axis_freq = [&](int axis, int m) {
    EndBC lo = bc[size_t(axis)][0], hi = bc[size_t(axis)][1];
    double L = axis == 0 ? L0 : L1;
    if (lo == EndBC::Neumann && hi == EndBC::Neumann) return m * M_PI / L;
    if (lo == EndBC::Dirichlet && hi == EndBC::Dirichlet) return (m + 1) * M_PI / L;
    return (m + 0.5) * M_PI / L;
  };
  auto axis_mode = [&](int axis, int m, double t) {
    EndBC lo = bc[size_t(axis)][0], hi = bc[size_t(axis)][1];
    double f = axis_freq(axis, m);
    if (lo == EndBC::Neumann && hi == EndBC::Neumann) return std::cos(f * t);
    if (lo == EndBC::Dirichlet && hi == EndBC::Dirichlet) return std::sin(f * t);
    if (lo == EndBC::Neumann) return std::cos(f * t);
    return std::sin(f * t);
  };
  auto axis_inner_one = [&](int axis, int m) {
    // <1, e_m> over [0, L]
    EndBC lo = bc[size_t(axis)][0], hi = bc[size_t(axis)][1];
    double L = axis == 0 ? L0 : L1;
    if (lo == EndBC::Neumann && hi == EndBC::Neumann) return m == 0 ? L : 0.0;
    if (lo == EndBC::Dirichlet && hi == EndBC::Dirichlet)
      return (m + 1) % 2 == 1 ? 2.0 * L / ((m + 1) * M_PI) : 0.0;
    if (lo == EndBC::Neumann) return L * (m % 2 == 0 ? 1.0 : -1.0) / ((m + 0.5) * M_PI);
    return L / ((m + 0.5) * M_PI);
  };
  auto axis_norm2 = [&](int axis, int m) {
    double L = axis == 0 ? L0 : L1;
    EndBC lo = bc[size_t(axis)][0], hi = bc[size_t(axis)][1];
    if (lo == EndBC::Neumann && hi == EndBC::Neumann && m == 0) return L;
    return L / 2;
  };
  double cd = cd_constant(2);
  double s = 0;
  for (int m0 = 0; m0 < M; ++m0) {
    double c0 = axis_inner_one(0, m0);
    if (c0 == 0.0) continue;
    double f0 = axis_freq(0, m0);
    for (int m1 = 0; m1 < M; ++m1) {
      double c1 = axis_inner_one(1, m1);
      if (c1 == 0.0) continue;
      double f1 = axis_freq(1, m1);
      double lam = f0 * f0 + f1 * f1;
      if (lam == 0.0) continue;
      double a = cd * c0 * c1 / (lam * axis_norm2(0, m0) * axis_norm2(1, m1));
      s += a * axis_mode(0, m0, x0) * axis_mode(1, m1, x1);
    }
  }
  return s;
}

double RectGreen::uniform_self_energy() const {
  if (all_neumann) return 0.0;
  const int M = 96;
  double L0 = box.side(0), L1 = box.side(1);
  auto axis_freq = [&](int axis, int m) {
    EndBC lo = bc[size_t(axis)][0], hi = bc[size_t(axis)][1];
    double L = axis == 0 ? L0 : L1;
    if (lo == EndBC::Neumann && hi == EndBC::Neumann) return m * M_PI / L;
    if (lo == EndBC::Dirichlet && hi == EndBC::Dirichlet) return (m + 1) * M_PI / L;
    return (m + 0.5) * M_PI / L;
  };
  auto axis_inner_one = [&](int axis, int m) {
    EndBC lo = bc[size_t(axis)][0], hi = bc[size_t(axis)][1];
    double L = axis == 0 ? L0 : L1;
    if (lo == EndBC::Neumann && hi == EndBC::Neumann) return m == 0 ? L : 0.0;
    if (lo == EndBC::Dirichlet && hi == EndBC::Dirichlet)
      return (m + 1) % 2 == 1 ? 2.0 * L / ((m + 1) * M_PI) : 0.0;
    if (lo == EndBC::Neumann) return L * (m % 2 == 0 ? 1.0 : -1.0) / ((m + 0.5) * M_PI);
    return L / ((m + 0.5) * M_PI);
  };
  auto axis_norm2 = [&](int axis, int m) {
    double L = axis == 0 ? L0 : L1;
    EndBC lo = bc[size_t(axis)][0], hi = bc[size_t(axis)][1];
    if (lo == EndBC::Neumann && hi == EndBC::Neumann && m == 0) return L;
    return L / 2;
  };
  double cd = cd_constant(2);
  double s = 0;
  for (int m0 = 0; m0 < M; ++m0) {
    double c0 = axis_inner_one(0, m0);
    if (c0 == 0.0) continue;
    double f0 = axis_freq(0, m0);
    for (int m1 = 0; m1 < M; ++m1) {
      double c1 = axis_inner_one(1, m1);
      if (c1 == 0.0) continue;
      double f1 = axis_freq(1, m1);
      double lam = f0 * f0 + f1 * f1;
      if (lam == 0.0) continue;
      s += cd * c0 * c0 * c1 * c1 / (lam * axis_norm2(0, m0) * axis_norm2(1, m1));
    }
  }
  return s;
}

double circle_pair_log_energy(const Vec& xi, double ri, const Vec& xj, double rj, int quad_n) {
  quad_n = std::max(quad_n, 2048);
  double D = dist(xi, xj, 2);
  if (D < 1e-15) return -std::log(std::max(ri, rj));
  if (D >= ri + rj) return -std::log(D);
  // overlapping distinct circles: average over circle i of the circle-j potential
  double s = 0;
  for (int m = 0; m < quad_n; ++m) {
    double th = 2 * M_PI * (m + 0.5) / quad_n;
    Vec a{xi[0] + ri * std::cos(th), xi[1] + ri * std::sin(th)};
    double r = dist(a, xj, 2);
    s += -std::log(std::max(r, rj));
  }
  return s / quad_n;
}

} // namespace coulomb
