#include "coulomb/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <stdexcept>

#include "coulomb/kernels.hpp"

namespace coulomb {

namespace {

std::mutex fftw_plan_mutex; // FFTW planning is not thread-safe

// Antiderivative of log(x^2+y^2): d2F/dxdy = log(x^2+y^2).
double log_antideriv(double x, double y) {
  if (x == 0.0 || y == 0.0) return 0.0;
  return x * y * (std::log(x * x + y * y) - 3.0) + x * x * std::atan(y / x) + y * y * std::atan(x / y);
}

// Recursive cell average of 1/r over a box with one corner at the origin.
double inv_r_box_integral(double ax, double ay, double az, int depth) {
  // integral over [0,ax]x[0,ay]x[0,az] of 1/|x|
  double cx = ax / 2, cy = ay / 2, cz = az / 2;
  std::function<double(double, double, double, double, double, double, int)> quad =
      [&](double lx, double ly, double lz, double sx, double sy, double sz, int dep) -> double {
    double d0 = std::sqrt(lx * lx + ly * ly + lz * lz);
    double dd = std::sqrt(sx * sx + sy * sy + sz * sz);
    if (dep <= 0 || d0 > 0.8 * dd) {
      static const double gp[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
      static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
      double s = 0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 4; ++c) {
            double x = lx + sx * 0.5 * (1 + gp[a]);
            double y = ly + sy * 0.5 * (1 + gp[b]);
            double z = lz + sz * 0.5 * (1 + gp[c]);
            s += gw[a] * gw[b] * gw[c] / std::sqrt(x * x + y * y + z * z);
          }
      return s * (sx * sy * sz) / 8.0;
    }
    double s = 0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          s += quad(lx + a * sx / 2, ly + b * sy / 2, lz + c * sz / 2, sx / 2, sy / 2, sz / 2, dep - 1);
    return s;
  };
  // I(B) = sum of the 7 children away from the origin + (1/4) I(B)
  // (the origin child is B scaled by 1/2 and int 1/r scales as s^2).
  double far = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        far += quad(a * cx, b * cy, c * cz, cx, cy, cz, depth);
      }
  return far / (1.0 - 0.25);
}

} // namespace

double singular_cell_average(const std::array<double, 3>& h, int d) {
  if (d == 2) {
    double a = h[0] / 2, b = h[1] / 2;
    // mean of -log r over the cell; int log(x^2+y^2) over cell = 4 F(a,b)
    double integral_log_r2 = 4.0 * log_antideriv(a, b);
    double mean_log_r = 0.5 * integral_log_r2 / (h[0] * h[1]);
    return -mean_log_r;
  }
  if (d == 3) {
    // 8 corner octants of the cell
    double I = 8.0 * inv_r_box_integral(h[0] / 2, h[1] / 2, h[2] / 2, 8);
    return I / (h[0] * h[1] * h[2]);
  }
  throw std::invalid_argument("singular_cell_average: d in {2,3}");
}

GridField coulomb_convolve(const GridField& charge) {
  const Grid& g = charge.grid;
  int d = g.d;
  int pn[3] = {2 * g.n[0], 2 * g.n[1], d == 3 ? 2 * g.n[2] : 1};
  size_t psize = size_t(pn[0]) * size_t(pn[1]) * size_t(pn[2]);
  std::vector<double> src(psize, 0.0), ker(psize, 0.0);

  auto pidx = [&](int i, int j, int k) {
    return (size_t(k) * size_t(pn[1]) + size_t(j)) * size_t(pn[0]) + size_t(i);
  };
  double cellvol = g.cell_volume();
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        src[pidx(i, j, k)] = charge.v[g.index(i, j, k)] * cellvol;

  double sing = singular_cell_average(g.h, d);
  for (int k = 0; k < pn[2]; ++k)
    for (int j = 0; j < pn[1]; ++j)
      for (int i = 0; i < pn[0]; ++i) {
        int di = i <= pn[0] / 2 ? i : i - pn[0];
        int dj = j <= pn[1] / 2 ? j : j - pn[1];
        int dk = d == 3 ? (k <= pn[2] / 2 ? k : k - pn[2]) : 0;
        double r2 = di * g.h[0] * di * g.h[0] + dj * g.h[1] * dj * g.h[1] + dk * g.h[2] * dk * g.h[2];
        ker[pidx(i, j, k)] = (r2 == 0.0) ? sing : coulomb_g(std::sqrt(r2), d);
      }

  int rank = d;
  int dims[3] = {pn[2], pn[1], pn[0]}; // FFTW row-major: last index fastest
  int* dims_used = d == 3 ? dims : dims + 1;
  // complex size: product of all but last dim times (last/2+1)
  size_t clast = size_t(pn[0] / 2 + 1);
  size_t cprod = (d == 3 ? size_t(pn[2]) * size_t(pn[1]) : size_t(pn[1])) * clast;

  std::vector<std::complex<double>> fsrc(cprod), fker(cprod);
  {
    std::lock_guard<std::mutex> lk(fftw_plan_mutex);
    fftw_plan p1 = fftw_plan_dft_r2c(rank, dims_used, src.data(),
                                     reinterpret_cast<fftw_complex*>(fsrc.data()), FFTW_ESTIMATE);
    fftw_plan p2 = fftw_plan_dft_r2c(rank, dims_used, ker.data(),
                                     reinterpret_cast<fftw_complex*>(fker.data()), FFTW_ESTIMATE);
    fftw_execute(p1);
    fftw_execute(p2);
    fftw_destroy_plan(p1);
    fftw_destroy_plan(p2);
  }
  for (size_t i = 0; i < cprod; ++i) fsrc[i] *= fker[i] / double(psize);
  {
    std::lock_guard<std::mutex> lk(fftw_plan_mutex);
    fftw_plan p3 = fftw_plan_dft_c2r(rank, dims_used, reinterpret_cast<fftw_complex*>(fsrc.data()),
                                     src.data(), FFTW_ESTIMATE);
    fftw_execute(p3);
    fftw_destroy_plan(p3);
  }

  GridField out(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        out.v[g.index(i, j, k)] = src[pidx(i, j, k)];
  return out;
}

namespace {

fftw_r2r_kind fwd_kind(EndBC a, EndBC b) {
  if (a == EndBC::Neumann && b == EndBC::Neumann) return FFTW_REDFT10;
  if (a == EndBC::Dirichlet && b == EndBC::Dirichlet) return FFTW_RODFT10;
  if (a == EndBC::Neumann && b == EndBC::Dirichlet) return FFTW_REDFT11;
  return FFTW_RODFT11; // Dirichlet left, Neumann right
}
fftw_r2r_kind inv_kind(EndBC a, EndBC b) {
  if (a == EndBC::Neumann && b == EndBC::Neumann) return FFTW_REDFT01;
  if (a == EndBC::Dirichlet && b == EndBC::Dirichlet) return FFTW_RODFT01;
  if (a == EndBC::Neumann && b == EndBC::Dirichlet) return FFTW_REDFT11;
  return FFTW_RODFT11;
}

// Symbol of the 1D second-difference operator for mode k under the given BCs.
double mode_eigenvalue(EndBC a, EndBC b, int k, int n, double h) {
  double ang;
  if (a == EndBC::Neumann && b == EndBC::Neumann)
    ang = M_PI * k / double(n);
  else if (a == EndBC::Dirichlet && b == EndBC::Dirichlet)
    ang = M_PI * (k + 1) / double(n);
  else
    ang = M_PI * (k + 0.5) / double(n);
  double s = std::sin(0.5 * ang);
  return 4.0 * s * s / (h * h);
}

} // namespace

GridField trig_poisson_solve(const GridField& rhs, const std::array<std::array<EndBC, 2>, 3>& bc) {
  const Grid& g = rhs.grid;
  if (!g.mask.empty() && !g.full())
    throw std::invalid_argument("trig_poisson_solve: full rectangle grids only");
  int d = g.d;
  bool all_neumann = true;
  for (int a = 0; a < d; ++a)
    for (int e = 0; e < 2; ++e)
      if (bc[size_t(a)][size_t(e)] != EndBC::Neumann) all_neumann = false;

  std::vector<double> work = rhs.v;
  fftw_r2r_kind kinds_f[3], kinds_i[3];
  // FFTW dims are row-major: axis order (z, y, x) maps to (k, j, i).
  int dims[3] = {g.n[2], g.n[1], g.n[0]};
  int rank = d;
  int* dims_used = d == 3 ? dims : dims + 1;
  if (d == 3) {
    kinds_f[0] = fwd_kind(bc[2][0], bc[2][1]);
    kinds_f[1] = fwd_kind(bc[1][0], bc[1][1]);
    kinds_f[2] = fwd_kind(bc[0][0], bc[0][1]);
    kinds_i[0] = inv_kind(bc[2][0], bc[2][1]);
    kinds_i[1] = inv_kind(bc[1][0], bc[1][1]);
    kinds_i[2] = inv_kind(bc[0][0], bc[0][1]);
  } else {
    kinds_f[0] = fwd_kind(bc[1][0], bc[1][1]);
    kinds_f[1] = fwd_kind(bc[0][0], bc[0][1]);
    kinds_i[0] = inv_kind(bc[1][0], bc[1][1]);
    kinds_i[1] = inv_kind(bc[0][0], bc[0][1]);
  }

  {
    std::lock_guard<std::mutex> lk(fftw_plan_mutex);
    fftw_plan pf = fftw_plan_r2r(rank, dims_used, work.data(), work.data(), kinds_f, FFTW_ESTIMATE);
    fftw_execute(pf);
    fftw_destroy_plan(pf);
  }

  double norm = 1.0;
  for (int a = 0; a < d; ++a) norm *= 2.0 * g.n[a];

  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        double lam = mode_eigenvalue(bc[0][0], bc[0][1], i, g.n[0], g.h[0]) +
                     mode_eigenvalue(bc[1][0], bc[1][1], j, g.n[1], g.h[1]);
        if (d == 3) lam += mode_eigenvalue(bc[2][0], bc[2][1], k, g.n[2], g.h[2]);
        size_t idx = g.index(i, j, k);
        if (lam == 0.0) {
          work[idx] = 0.0; // zero mode: mean-zero convention
        } else {
          work[idx] /= lam * norm;
        }
      }

  {
    std::lock_guard<std::mutex> lk(fftw_plan_mutex);
    fftw_plan pi = fftw_plan_r2r(rank, dims_used, work.data(), work.data(), kinds_i, FFTW_ESTIMATE);
    fftw_execute(pi);
    fftw_destroy_plan(pi);
  }

  GridField out(g);
  out.v = std::move(work);
  if (all_neumann) {
    double mean = 0;
    for (double x : out.v) mean += x;
    mean /= double(out.v.size());
    for (double& x : out.v) x -= mean;
  }
  return out;
}

} // namespace coulomb
