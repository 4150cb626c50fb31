#pragma once

#include <optional>
#include <vector>

#include "mcflab/axial_grid.hpp"
#include "mcflab/common.hpp"

namespace mcflab {

// Rotationally symmetric mean curvature flow of a radius graph r(z):
//   r_t = r_zz / (1 + r_z^2) - (n-1)/r.
// Surfaces may close off at caps (r -> 0); the cap position is tracked as a
// continuous coordinate between grid nodes.

enum class EndCondition { Cap, Neumann, Dirichlet };

class RejectedStepError : public std::invalid_argument {
 public:
  explicit RejectedStepError(const std::string& what)
      : std::invalid_argument("rejected step: " + what) {}
};

// Raised by the stepper when the radius drops below the resolvability
// threshold; the driver turns it into a neck-pinch termination.
class NeckPinchError : public std::runtime_error {
 public:
  NeckPinchError(const std::string& what, double z_at_min, double r_min)
      : std::runtime_error("neck pinch: " + what), z_at_min(z_at_min), r_min(r_min) {}
  double z_at_min;
  double r_min;
};

struct ProfileCurve {
  int n = 0;
  AxialGrid grid;  // uniform; shared by all snapshots of a run
  std::vector<double> r;  // radius per node; 0 outside the active range
  std::size_t i_lo = 0, i_hi = 0;  // active index range, inclusive
  EndCondition left = EndCondition::Neumann;
  EndCondition right = EndCondition::Neumann;
  double cap_left = 0.0;   // continuous cap position (only when left == Cap)
  double cap_right = 0.0;

  void validate() const;
  std::size_t active_count() const { return i_hi - i_lo + 1; }
  double min_radius() const;
  double max_radius() const;
  double z_left() const;   // cap position, or the active end node
  double z_right() const;
};

ProfileCurve make_cylinder(int n, double radius, double z_lo, double z_hi, double dz,
                           EndCondition ends = EndCondition::Neumann);
ProfileCurve make_sphere(int n, double radius, double center_z, double dz,
                         double window_margin = 0.5);
// Two bulges joined by a neck,
//   r(z) = neck + bulge (1 - cos(pi z / halflength))^2 / 4  on |z| <= halflength,
// closed by hemispherical caps matching the end radius and slope.
ProfileCurve make_dumbbell(int n, double dz, double neck = 0.35, double bulge = 0.65,
                           double halflength = 4.0);

// Largest stable step for the semi-implicit scheme:
//   dt = min(0.2 dz^2, 0.1 (min r)^2 / (n-1)),
// the radius minimum taken away from cap bands (where r -> 0 by design).
double stable_dt(const ProfileCurve& p);

// One step: the reaction -(n-1)/r is integrated exactly node-by-node
// (r* = sqrt(r^2 - 2(n-1) dt), the shrinking-cylinder law), then the
// diffusion r_zz/(1+r_z^2) implicitly with frozen coefficient (tridiagonal
// solve).  The few nodes nearest each cap evolve explicitly in y = r^2,
//   y_t = (4 y y_zz - 2 y_z^2)/(4 y + y_z^2) - 2(n-1),
// which is regular at y = 0 (the axis limit of the curvature terms) and
// exact for spherical caps.  Cap positions are re-extrapolated from the
// updated y each step.
ProfileCurve step_profile_flow(const ProfileCurve& p, double dt);

struct StepStats {
  double t = 0.0;          // time after the step
  double dt = 0.0;
  double min_r = 0.0;      // guarded minimum (away from cap bands)
  double max_r = 0.0;
  double max_curvature = 0.0;  // proxy: max of (n-1)/r + |r_zz|/(1+r_z^2)
};

enum class Termination { TimeLimit, NeckRadiusThreshold, CapCollapse };

struct Snapshot {
  double t = 0.0;
  ProfileCurve curve;
};

struct SingularEstimate {
  double z_star = 0.0;
  double t_star = 0.0;
};

struct FlowTrajectory {
  std::vector<Snapshot> snapshots;
  std::vector<StepStats> steps;
  Termination termination = Termination::TimeLimit;
  std::optional<SingularEstimate> singular;
  double final_time = 0.0;
};

struct FlowConfig {
  double t_max = 1.0;
  double dt_min = 1e-12;
  int snapshot_every = 50;        // steps between stored snapshots
  double pinch_node_factor = 10;  // pinch threshold = factor * dz
  int cap_guard = 8;              // nodes next to a cap excluded from pinch tests
  int min_active = 20;            // fewer active nodes => cap collapse
};

class NonconvergenceError : public std::runtime_error {
 public:
  explicit NonconvergenceError(const std::string& what)
      : std::runtime_error("nonconvergence: " + what) {}
  FlowTrajectory partial;  // progress up to the failure
};

// Integrate until a termination condition fires.  On neck-radius-threshold
// the singular estimate holds the parabolically refined argmin z* and a t*
// extrapolated by fitting (min r)^2 against t (square-root pinch law) on
// the tail of the step log; on cap-collapse the same fit is applied to
// (max r)^2 (shrinking-sphere law).
FlowTrajectory run_to_singularity(const ProfileCurve& p0, const FlowConfig& cfg);

}  // namespace mcflab
