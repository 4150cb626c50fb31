#pragma once

#include <vector>

#include "mcflab/common.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/solitons.hpp"

namespace mcflab {

// ---------------------------------------------------------------------------
// Gaussian-weighted area
// ---------------------------------------------------------------------------

// Exponentially scaled cross-section integral of the off-axis Gaussian
// weight over the S^{n-1} orbit of a profile point:
//   K_n(c) = |S^{n-2}| \int_0^pi exp(-c (1 - cos t)) sin^{n-2} t dt,
// with K_1(c) = 1 + e^{-2c} (the two-point cross-section).  The peak value
// is factored out, so K_n stays O(1) for every c >= 0; the full angular
// factor is K_n(c) times the Gaussian of the distance to the nearest orbit
// point.  Closed forms used by the tests: K_2(c) = 2 pi I_0(c) e^{-c},
// K_3(c) = 2 pi (1 - e^{-2c}) / c.
double scaled_angular_kernel(int n, double c);

struct GaussianArea {
  double value = 0.0;       // (4 pi lambda)^{-n/2} \int_S e^{-|x-x0|^2/(4 lambda)} dA
  double end_weight = 0.0;  // integrand density summed over the two profile ends
};

// Gaussian-weighted area of the surface of revolution with polyline profile
// (z_i, r_i) (z strictly increasing, r >= 0), n the surface dimension.
// The center sits at axis position z0, distance rho0 >= 0 from the axis.
// Polyline segments are subdivided so each quadrature cell is a fraction of
// the Gaussian width.  end_weight is the area the Gaussian would collect per
// unit length of profile continued past the two ends; it bounds the
// sensitivity to window truncation and vanishes where the profile closes on
// the axis (zero cross-section, n >= 2).
GaussianArea gaussian_area(const std::vector<double>& z, const std::vector<double>& r,
                           int n, double z0, double rho0, double lambda);

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

// Entropy of the closed-form models at their shrinking scale:
// plane -> 1, n-sphere -> |S^n| (n / 2 pi)^{n/2} e^{-n/2},
// cylinder R x S^{n-1} -> the (n-1)-sphere value.
double entropy_of_model(ModelKind kind, int n);

struct EntropyResult {
  double value = 0.0;
  double z0 = 0.0;      // optimal axis center
  double lambda = 0.0;  // optimal Gaussian scale
  bool lambda_on_boundary = false;  // grid argmax sat on the scale-range edge
  double end_weight = 0.0;          // window-coverage certificate at the optimum
};

// sup over centers and scales of the Gaussian area.  Centers are restricted
// to the axis (rotational symmetry; the profiles this laboratory produces
// attain their supremum there), scanned on a 41-point grid over the window
// crossed with 41 points of log2(lambda) in [-6, 6], then refined by
// alternating golden-section passes.
EntropyResult entropy_of_profile(const std::vector<double>& z,
                                 const std::vector<double>& r, int n);

// ---------------------------------------------------------------------------
// Gaussian density of a trajectory
// ---------------------------------------------------------------------------

struct DensitySeries {
  std::vector<double> t;      // snapshot times, strictly increasing
  std::vector<double> theta;  // density at backward scale lambda = t0 - t
  double limit = 0.0;         // extrapolation of theta to lambda -> 0
  double max_step_increase = 0.0;  // worst monotonicity violation, >= 0
};

// theta(t) = F[M_t; (z0, rho0), t0 - t] for every stored snapshot; t0 must
// exceed all snapshot times.  Cap ends are closed off by a sample at the cap
// position, so closed surfaces are integrated in full.  The limit is the
// intercept of a line fit of theta against lambda over the last decade of
// lambda (falls back to the final value when fewer than three samples land
// there).  theta is nonincreasing along exact flows; max_step_increase
// reports the largest observed increase between consecutive snapshots.
DensitySeries huisken_density(const FlowTrajectory& traj, double z0, double rho0,
                              double t0);

// ---------------------------------------------------------------------------
// Cylindrical scale
// ---------------------------------------------------------------------------

struct CylindricalScale {
  bool decided = false;  // some evaluable scale passed
  int j = 0;             // largest passing dyadic exponent (valid iff decided)
  double Z = 0.0;        // 2^j
  bool have_evaluable = false;
  int j_evaluable_max = 0;  // largest exponent with usable data (iff have_evaluable)
  bool saturated = false;   // the largest evaluable scale passed
};

// Largest dyadic scale Z = 2^j on which the trajectory matches the exact
// shrinking cylinder about (z_star, t_star).  For each of the backward times
// t_star + s Z^2, s in {-2, -3/2, -1}, the nearest snapshot (within 5% of
// Z^2) must satisfy, over |z - z_star| <= Z:
//   |r / r_cyl(t) - 1| <= eps,  |r'| <= eps,  |Z r''| <= eps,
// where r_cyl(t) = sqrt(2(n-1)(t_star - t)).  A scale is evaluable only when
// all three snapshots exist and their active windows cover |z - z_star| <= Z.
// Scales are scanned from the largest evaluable downward; the first pass
// wins.
CylindricalScale cylindrical_scale(const FlowTrajectory& traj, double z_star,
                                   double t_star, double eps = 0.05);

}  // namespace mcflab
