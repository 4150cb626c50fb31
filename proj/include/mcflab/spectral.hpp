#pragma once

#include <vector>

#include "mcflab/axial_grid.hpp"
#include "mcflab/cylinder.hpp"

namespace mcflab {

// Graph over the round cylinder S^{n-1}(sqrt(2(n-1))) x R, truncated to the
// rotational modes 0 and 1:
//   u(z, omega) = u0(z) + sum_{i=1..n} u1[i](z) <omega, e_i>.
// u is the normal deviation from the cylinder radius; the represented
// surface has radius sqrt(2(n-1)) + u in direction omega at height z.
struct CylinderGraph {
  int n = 0;
  AxialGrid grid;               // uniform or Gauss-Legendre axial grid
  std::vector<double> u0;       // mode-0 samples on grid
  std::vector<std::vector<double>> u1;  // empty, or n vectors of samples

  // Structural validation (sizes, dimensions, grid uniformity).  With
  // geometric=true additionally requires |u| < sqrt(2(n-1)) so the graph
  // describes a positive radius; spectral test fields (eigenfunctions grow
  // polynomially in z) are exempt from the geometric band.
  void validate(bool geometric = false) const;
  bool has_mode1() const { return !u1.empty(); }
};

// Gaussian-weighted inner product of two graphs over the same grid.  The
// angular integrals are done in closed form (modes 0 and 1 are orthogonal,
// and \int <omega,e_i><omega,e_j> = delta_ij |S^{n-1}|/n); the axial
// integral uses the grid's quadrature rule against e^{-z^2/4}.
//
// Throws GridMismatchError if the grids differ and TruncationRiskError if
// the grid covers less than |z| <= 8.
double gaussian_inner(const CylinderGraph& f, const CylinderGraph& g);

// Axial one-dimensional piece: \int f g e^{-z^2/4} dz by the grid rule.
double axial_gaussian_integral(const AxialGrid& grid, const std::vector<double>& f,
                               const std::vector<double>& g);

// The linearized rescaled-flow operator on the cylinder,
//   L f = Delta f - (z/2) d_z f + f,
// restricted to a single rotational mode of a field sampled on a uniform
// grid.  For mode 0 this is f'' - (z/2) f' + f; for mode 1 the angular
// Laplacian contributes -(n-1)/R^2 f = -f/2, giving f'' - (z/2) f' + f/2.
// Derivatives are 4th-order central differences; the returned field lives
// on the interior sub-grid (two boundary layers dropped on each side).
//
// Throws StencilError on non-uniform grids or grids shorter than 5 nodes.
struct ModeField {
  AxialGrid grid;
  std::vector<double> v;
};
ModeField eval_L(const AxialGrid& grid, const std::vector<double>& f, int mode, int n);

// Spectral content of a cut-off graph \hat u = u * chi(z / rho) against the
// plus/neutral basis of L:
//   plus modes:    1 (eigenvalue 1), x_{n+1} and x_i (eigenvalue 1/2)
//   neutral modes: psi_0 ~ x_{n+1}^2 - 2, psi_i ~ x_i x_{n+1} (eigenvalue 0)
// a, b_i, c are raw expansion coefficients (component / squared norm), so
// the perpendicular recentering offset is sqrt(2(n-1)) * b_i; alpha_0,
// alpha_i are coefficients against the unit-norm psi's.  U_plus is the
// quadrature norm of the explicit plus-mode projection, U_zero = alpha_0^2
// + sum alpha_i^2, and U_minus is the complement ||\hat u||^2 - U_plus -
// U_zero (clamped at zero; a substantially negative complement signals a
// quadrature failure).
struct SpectralCoefficients {
  int n = 0;
  double rho = 0;
  double a = 0;
  std::vector<double> b;      // size n (zeros when the graph has no mode 1)
  double c = 0;
  double alpha0 = 0;
  std::vector<double> alpha;  // size n
  double U_plus = 0;
  double U_zero = 0;
  double U_minus = 0;
};

SpectralCoefficients project_modes(const CylinderGraph& u, double rho);

// Closed form for the plus-mode energy in terms of the raw coefficients:
//   U_plus = ||x_{n+1}||^2 ( a^2 + (1 - 1/n) sum_i b_i^2 + c^2 / 2 ).
double closed_form_U_plus(const SpectralCoefficients& sc, const CylinderConstants& cc);

}  // namespace mcflab
