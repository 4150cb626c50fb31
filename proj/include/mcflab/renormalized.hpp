#pragma once

#include <vector>

#include "mcflab/flow.hpp"
#include "mcflab/spectral.hpp"

namespace mcflab {

// Parabolic rescaling of a flow about a spacetime center and the evolution
// of the rescaled deviation from the round cylinder.  With center (x0, t0)
// and tau = -log(t0 - t), the rescaled surface is e^{tau/2} (M_t - x0); a
// radius graph becomes w(z, tau) = sqrt(2(n-1)) + u0(z, tau).

class NotYetCylindricalError : public std::runtime_error {
 public:
  explicit NotYetCylindricalError(const std::string& what)
      : std::runtime_error("not yet cylindrical: " + what) {}
};

struct SpacetimeCenter {
  double z0 = 0.0;            // axial coordinate of the center
  double t0 = 0.0;            // center time (>= final trajectory time)
  std::vector<double> perp;   // perpendicular offset, size n or empty
};

struct RenormalizedSlice {
  double tau = 0.0;
  double t = 0.0;             // t0 - exp(-tau), for cross-checks
  CylinderGraph graph;        // on the maximal available contiguous window
  double rho_achieved = 0.0;  // largest |z| with |u0| and |u0'| below 0.1
};

struct RenormalizedTrajectory {
  int n = 0;
  SpacetimeCenter center;
  std::vector<RenormalizedSlice> slices;
};

// Extract renormalized slices at tau = tau_lo, tau_lo + dtau, ..., tau_hi.
// Profiles are interpolated linearly in t between snapshots and cubically
// in z; a perpendicular center offset is converted into mode-1 components
// through the exact directional-radius formula.  Requested times outside
// the trajectory raise std::out_of_range; a slice that is not a graph over
// the cylinder for |z| <= 1 raises NotYetCylindricalError.
RenormalizedTrajectory rescale_about(const FlowTrajectory& traj, const SpacetimeCenter& X0,
                                     double tau_lo, double tau_hi, double dtau,
                                     const AxialGrid& out_grid);

// Advance the renormalized graph by dtau:
//   mode 0:  u_tau = u_zz/(1+u_z^2) - (n-1)/(R+u) + (R+u)/2 - (z/2) u_z,
//   mode 1:  linearized evolution u_tau = u_zz - (z/2) u_z + u/2.
// Crank-Nicolson in the diffusion and drift terms (coefficient frozen per
// substep), midpoint-predictor for the mode-0 reaction, boundary values
// held fixed.  Long steps are subdivided into substeps of at most
// max_substep.  The reaction term is evaluated as u (2R+u) / (2(R+u)), an
// algebraically equivalent form that vanishes identically at u = 0, so the
// round cylinder is an exact fixed point of the discrete scheme.  Leaving
// the graph band |u0| < R/2 raises BlowUpError.
CylinderGraph step_renormalized(const CylinderGraph& u, double dtau,
                                double max_substep = 1e-3);

}  // namespace mcflab
