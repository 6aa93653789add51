#pragma once
// FFTW-backed building blocks: free-space Coulomb convolution on grids and
// direct trigonometric Poisson solves on full rectangles.

#include "coulomb/grid.hpp"

namespace coulomb {

// Exact cell average of g over the origin cell (hx x hy [x hz]).
double singular_cell_average(const std::array<double, 3>& h, int d);

// (g * q)(cell centers) by zero-padded FFT; source cells act as point charges
// at their centers except the self cell, which uses the exact cell average.
GridField coulomb_convolve(const GridField& charge);

// Boundary condition of one axis end for the trig solvers.
enum class EndBC : uint8_t { Neumann, Dirichlet };

// Direct solve of the cell-centered 5/7-point -Lap u = rhs on a full
// rectangle grid with per-axis-end conditions (ghost reflection).  For the
// all-Neumann case the rhs must have zero mean; the returned u is mean-zero.
GridField trig_poisson_solve(const GridField& rhs, const std::array<std::array<EndBC, 2>, 3>& bc);

} // namespace coulomb
