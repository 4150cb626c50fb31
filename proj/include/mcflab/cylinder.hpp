#pragma once

#include <cmath>

#include "mcflab/common.hpp"

namespace mcflab {

// Constants attached to the round cylinder S^{n-1}(sqrt(2(n-1))) x R sitting
// in R^{n+1}, with the Gaussian weight (4 pi)^{-n/2} e^{-|x|^2/4} on it.
//
// Inner products of fields u(z, omega) = u0(z) + sum_i u1_i(z) <omega, e_i>
// decompose into axial integrals against e^{-z^2/4}:
//   <f, g> = prefactor * ( |S^{n-1}| * I(f0 g0)
//                          + |S^{n-1}|/n * sum_i I(f1_i g1_i) ),
// with I(h) = \int h e^{-z^2/4} dz and
// prefactor = (4 pi)^{-n/2} e^{-R^2/4} R^{n-1}.
struct CylinderConstants {
  int n = 0;                  // cylinder S^{n-1} x R in R^{n+1}, n >= 2
  double radius = 0;          // R = sqrt(2(n-1))
  double sphere_factor = 0;   // |S^{n-1}|
  double prefactor = 0;       // (4 pi)^{-n/2} e^{-R^2/4} R^{n-1}
  double norm1_sq = 0;        // ||1||^2
  double normz_sq = 0;        // ||x_{n+1}||^2 (= 2 ||1||^2)
  double normxi_sq = 0;       // ||x_i||^2 (= (1 - 1/n) ||x_{n+1}||^2)
  double psi0_prefactor = 0;  // psi_0 = N0 (x_{n+1}^2 - 2), unit norm
  double psi1_prefactor = 0;  // psi_i = N1 x_i x_{n+1}, unit norm
  double neutral_A = 0;       // interaction constant of the neutral-mode ODEs
  double rotation_constant = 0;  // -1/A, the displayed slow-decay constant

  static CylinderConstants make(int n);
};

inline CylinderConstants CylinderConstants::make(int n) {
  if (n < 2) throw std::invalid_argument("CylinderConstants: need n >= 2");
  CylinderConstants c;
  c.n = n;
  c.radius = std::sqrt(2.0 * (n - 1));
  c.sphere_factor = sphere_area(n - 1);
  c.prefactor = std::pow(4.0 * M_PI, -0.5 * n) * std::exp(-0.25 * c.radius * c.radius) *
                std::pow(c.radius, n - 1);
  const double m0 = 2.0 * std::sqrt(M_PI);  // \int e^{-z^2/4} dz
  c.norm1_sq = c.prefactor * c.sphere_factor * m0;
  c.normz_sq = 2.0 * c.norm1_sq;  // \int z^2 e^{-z^2/4} dz = 2 m0
  c.normxi_sq = (1.0 - 1.0 / n) * c.normz_sq;
  const double base = std::pow(M_E * M_PI / (n - 1), 0.25 * (n - 1)) /
                      std::sqrt(c.sphere_factor);
  c.psi0_prefactor = std::pow(2.0, 0.25 * (n - 7)) * base;
  c.psi1_prefactor = std::pow(2.0, 0.25 * (n - 5)) * base / std::sqrt(1.0 - 1.0 / n);
  c.neutral_A = std::pow(2.0 * M_E * M_PI / (n - 1), 0.25 * (n - 1)) /
                (2.0 * std::sqrt(static_cast<double>(n - 1)) * std::sqrt(c.sphere_factor));
  c.rotation_constant = -1.0 / c.neutral_A;
  return c;
}

}  // namespace mcflab
