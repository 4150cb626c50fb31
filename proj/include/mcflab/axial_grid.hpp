#pragma once

#include <cstddef>
#include <vector>

#include "mcflab/common.hpp"

namespace mcflab {

// One-dimensional axial grid with attached quadrature weights.
//
// Two rules are provided:
//  * Uniform: equispaced nodes with trapezoid weights.  For integrands with
//    Gaussian decay inside the window the trapezoid rule converges
//    spectrally, so uniform PDE grids double as accurate quadrature grids.
//  * GaussLegendre: Gauss-Legendre nodes on a symmetric interval [-w, w];
//    the default rule for standalone spectral computations.
struct AxialGrid {
  enum class Rule { Uniform, GaussLegendre };

  Rule rule = Rule::Uniform;
  std::vector<double> z;  // nodes, strictly increasing
  std::vector<double> w;  // quadrature weights (plain dz weights, no density)
  double spacing = 0.0;   // node spacing for Uniform, 0 otherwise
  double extent = 0.0;    // nominal half-width of the covered interval

  static AxialGrid uniform(double z_lo, double z_hi, double dz);
  static AxialGrid gauss_legendre(double half_width, int node_count);

  std::size_t size() const { return z.size(); }
  double z_lo() const { return z.front(); }
  double z_hi() const { return z.back(); }
  // Half-width of the covered interval.  Gauss-Legendre nodes sit strictly
  // inside the nominal window, so this is the window, not max |z_i|.
  double half_width() const { return extent; }

  // Nodewise agreement within tol; used to detect mismatched fields.
  bool matches(const AxialGrid& other, double tol = 1e-12) const;

  // Sub-grid over the closed index range [i_lo, i_hi] (Uniform only).
  AxialGrid slice(std::size_t i_lo, std::size_t i_hi) const;

  // \int f g dz by the grid's quadrature rule.
  double integrate(const std::vector<double>& f) const;
};

}  // namespace mcflab
