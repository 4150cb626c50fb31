#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mcflab/flow.hpp"

namespace mcflab {

// ---------------------------------------------------------------------------
// Translating bowl
// ---------------------------------------------------------------------------

// Graph height u(x) of the rotationally symmetric translator over the radial
// distance x from the symmetry axis, normalized to unit speed along the
// axis.  u satisfies
//   u'' / (1 + u'^2) + (n-1) u' / x = 1,   u(0) = tip height, u'(0) = 0,
// is strictly convex, and grows like x^2 / (2(n-1)) in the far field.
struct SolitonProfile {
  int n = 0;
  std::vector<double> x;   // radial samples, x[0] = 0, strictly increasing
  std::vector<double> u;   // height samples
  std::vector<double> du;  // u' samples (stored alongside the integration)
  double speed = 1.0;      // translation speed (normalization)
  double residual = 0.0;   // max ODE defect measured on the stored samples
};

// Integrates the translator ODE outward from the regular axis expansion
//   u = x^2/(2n) + x^4/(4 n^3 (n+2)) + O(x^6)
// seeded at x = 1e-3, with fixed-step classical RK4 (dx = 1e-3 up to x = 1,
// then coarsened tenfold per decade) so identical inputs give bit-identical
// profiles.  The residual is evaluated a posteriori with five-point
// finite-difference derivatives on the stored samples; a residual above tol
// raises NumericalFailure.  Requires n >= 2 and x_max >= 10.
SolitonProfile solve_bowl(int n, double x_max, double tol,
                          double tip_height = 0.0);

// Height at radius x by monotone cubic (Hermite) interpolation of the
// stored samples; x must lie in [0, x_max].
double bowl_height(const SolitonProfile& bowl, double x);

// Inverse graph: the radius at height z, i.e. the solution of
// bowl_height(x) = z; z must lie in [u(0), u(x_max)].
double bowl_radius(const SolitonProfile& bowl, double z);

// Radius-graph snapshot of the bowl translated to time t (the tip sits at
// height u(0) + t), sampled on the uniform grid over [z_lo, z_hi].  When
// the tip lies inside the window the left end is a cap; otherwise both ends
// are Dirichlet.  Throws InapplicableError when the window lies entirely
// below the tip.
ProfileCurve bowl_as_profile(const SolitonProfile& bowl, double t, double z_lo,
                             double z_hi, double dz);

// Exact translating trajectory built from the solved profile: one snapshot
// per entry of `times` (strictly increasing), all on the common grid.
// Termination is TimeLimit and no singular estimate is attached.
FlowTrajectory bowl_trajectory(const SolitonProfile& bowl,
                               const std::vector<double>& times, double z_lo,
                               double z_hi, double dz);

// ---------------------------------------------------------------------------
// Self-shrinkers
// ---------------------------------------------------------------------------

enum class ShrinkerKind { Cylinder, Sphere, CapClosed };

// Rotationally symmetric self-shrinker profile r(z) satisfying
//   (n-1)/r - r'' / (1 + r'^2) = (r - z r') / 2.
// Cylinder and sphere are returned in closed form.  CapClosed is the
// one-parameter family of shrinkers-with-boundary: the profile runs from a
// boundary circle on the plane z = 0 (generally not meeting it orthogonally)
// up to a smooth cap on the axis at the prescribed closure height a.  Tall
// members hug the cylinder radius, staying slightly outside it near the
// equator and dipping inside beyond |z| ~ sqrt(2) before closing; at
// a = sqrt(2n) the member is the round sphere.
struct ShrinkerProfile {
  ShrinkerKind kind = ShrinkerKind::Cylinder;
  int n = 0;
  std::vector<double> z;  // strictly increasing
  std::vector<double> r;
  double residual = 0.0;        // max ODE defect over checkable samples
  double closure_height = 0.0;  // CapClosed: z where the profile meets the axis
  double equator_radius = 0.0;  // r at z = 0
};

// Raised when the requested closure height falls outside the range the
// construction is validated for; the message reports the usable span.
class ShootingBracketError : public std::runtime_error {
 public:
  explicit ShootingBracketError(const std::string& what)
      : std::runtime_error("shooting bracket: " + what) {}
};

// kind == Cylinder / Sphere: closed forms (parameter ignored), residual
// evaluated with analytic derivatives.  kind == CapClosed: cap closure is
// built into the data — at a smooth axis point the equation forces the cap
// curvature a/(2n), so the member is seeded just below its tip and integrated
// down to the equatorial plane, in arclength so the cap, where the radius
// graph degenerates, stays regular.  All branches raise NumericalFailure if
// the achieved residual exceeds tol.
ShrinkerProfile solve_shrinker_profile(int n, ShrinkerKind kind, double tol,
                                       double closure_height = 0.0);

// ---------------------------------------------------------------------------
// Canonical exact models
// ---------------------------------------------------------------------------

enum class ModelKind { Plane, Sphere, Cylinder };

// Closed-form self-similar flows: radius sqrt(-2 k t) for t < 0 with k = n
// (sphere), k = n-1 (cylinder), and the static plane (infinite radius).
struct ExactModel {
  ModelKind kind = ModelKind::Plane;
  int n = 0;
  double shrink_rate = 0.0;  // k in radius(t) = sqrt(-2 k t)

  // Radius at time t (< 0 for shrinking models; the plane returns infinity
  // for every t).
  double radius_at(double t) const {
    if (kind == ModelKind::Plane) return std::numeric_limits<double>::infinity();
    if (!(t < 0.0))
      throw std::invalid_argument("ExactModel: shrinking models need t < 0");
    return std::sqrt(-2.0 * shrink_rate * t);
  }
  // Radius at t = -1, the standard normalization: sqrt(2k).
  double unit_radius() const { return radius_at(-1.0); }
};

ExactModel exact_model(ModelKind kind, int n);

}  // namespace mcflab
