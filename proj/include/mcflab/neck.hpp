#pragma once

#include <string>
#include <vector>

#include "mcflab/common.hpp"
#include "mcflab/flow.hpp"

namespace mcflab {

// Too few samples, or too short a window, for an asymptotic verdict.
class InsufficientDataError : public std::invalid_argument {
 public:
  explicit InsufficientDataError(const std::string& what)
      : std::invalid_argument("insufficient data: " + what) {}
};

// Mode-energy history of a renormalized flow: per tau, the squared Gaussian
// norms of the projections onto the expanding (+), neutral (0) and
// contracting (-) parts of the linearized spectrum.
struct ModeEnergyTrack {
  std::vector<double> tau;  // strictly increasing
  std::vector<double> U_plus;
  std::vector<double> U_zero;
  std::vector<double> U_minus;

  void validate() const;  // matched sizes, increasing tau, energies >= 0
};

enum class DichotomyVerdict { PlusDominant, NeutralDominant, Undecided };

// Outcome of the dominance test, with the fitted inequality constants that
// justify it.  kappa bounds (U0+U-)/U+, eta bounds (U+ + U-)/U0; the _early
// and _late values are the same sups over the first and second half of the
// tau window.
struct DichotomyResult {
  DichotomyVerdict verdict = DichotomyVerdict::Undecided;
  double kappa = 0.0;
  double kappa_early = 0.0;
  double kappa_late = 0.0;
  double eta = 0.0;
  double eta_early = 0.0;
  double eta_late = 0.0;

  // One-line machine-readable form, e.g. "verdict=plus-dominant kappa=...".
  std::string summary() const;
};

// Decide which mode dominates an ancient track.  A mode certifies dominance
// when its ratio stays below 1/2 on the whole window and does not degrade
// toward the early (asymptotic) half by more than a factor 2; exactly one
// certifying mode yields a verdict, anything else is undecided.  Requires
// at least 20 samples spanning at least 3 units of tau.
DichotomyResult classify_dichotomy(const ModeEnergyTrack& track);

// Log-linear fit of an exponentially decaying coefficient series on the
// window [tau_lo, tau_hi]: coefficient ~ constant * e^{rate * tau}.
// rms_log_residual is the fit residual in log space.  Throws
// NonexponentialError on sign changes or zeros, and when the log-space
// residual exceeds max_log_residual (a pure power law 1/|tau| leaves a
// curvature residual ~0.05 on a half-decade window, an exponential ~0).
struct ModeDecayFit {
  double rate = 0.0;
  double constant = 0.0;
  double rms_log_residual = 0.0;
};
ModeDecayFit fit_mode_decay(const std::vector<double>& tau,
                            const std::vector<double>& coefficient,
                            double tau_lo, double tau_hi,
                            double max_log_residual = 0.01);

// The interaction constant of the neutral-mode coefficient system,
//   A = (1/(2 sqrt(n-1))) (2 e pi / (n-1))^{(n-1)/4} |S^{n-1}|^{-1/2}.
double neutral_ode_A(int n);

// The inwards-quadratic-neck constant as displayed by the classification
// theorem: -2 sqrt(n-1) (2 e pi/(n-1))^{-(n-1)/4} |S^{n-1}|^{1/2}.
// Algebraically equal to -1/A, i.e. twice the truncated system's
// tau*alpha_0 limit of -1/(2A); both are reported side by side because the
// factor-2 discrepancy between the two conventions is left open.
double rotation_theorem_constant(int n);

// Coefficients (alpha_0, alpha_1..alpha_n) of the neutral-mode expansion,
// together with the interaction constant.
struct NeutralODEState {
  int n = 0;
  double A = 0.0;  // must equal neutral_ode_A(n) to 1e-12 relative
  double alpha0 = 0.0;
  std::vector<double> alpha;  // size n

  void validate() const;
};
NeutralODEState make_neutral_ode_state(int n, double alpha0,
                                       std::vector<double> alpha = {});

// Fixed-step RK4 trajectory of the truncated coefficient system
//   d alpha_0 / d tau = -2 A alpha_0^2 - A sum_i alpha_i^2,
//   d alpha_i / d tau = -A alpha_0 alpha_i,
// from tau0 to tau1 > tau0, states stored every step.  The truncation
// errors of the derivation are dropped by design; callers measure the
// PDE-vs-ODE gap instead of modeling it.
//
// Throws std::invalid_argument when |dtau * A * alpha| >= 0.1 for the
// initial state, and BlowUpError (with a blow-up time estimate from the
// closed-form tail) when the solution leaves that accuracy regime inside
// the span, which happens exactly near the finite-time blow-up of the
// quadratic system.
struct NeutralODETrajectory {
  int n = 0;
  double A = 0.0;
  std::vector<double> tau;
  std::vector<double> alpha0;
  std::vector<std::vector<double>> alpha;  // n component tracks
};
NeutralODETrajectory integrate_neutral_ode(const NeutralODEState& s0,
                                           double tau0, double tau1,
                                           double dtau);

// Height of the tip: psi(t) = min over the surface of direction * z, i.e.
// the cap position at the end the direction points away from.  direction
// +1 reads the low-z cap, -1 reads the high-z cap (so that inward motion
// increases psi on both sides).  Reports strict monotonicity, the
// least-squares speed, and the smallest C with psi(t) - psi(t') <=
// C (t - t' + 1) over all snapshot pairs (macroscopic speed limit).
//
// Throws InapplicableError when the selected end is not capped (the
// surface continues past the window, so it has no tip there).
struct TipTrack {
  std::vector<double> t;
  std::vector<double> psi;
  bool strictly_increasing = false;
  double slope = 0.0;
  double speed_limit_C = 0.0;
};
TipTrack tip_height(const FlowTrajectory& traj, int direction);

// Mean curvature of the profile on the axial region [z_lo, z_hi]:
//   H = (n-1)/(r sqrt(1+r'^2)) - r'' / (1+r'^2)^{3/2},
// positive for the shrinking sphere with outward normal.  Derivatives are
// second-order finite differences; at cap-adjacent nodes one-sided stencils
// are used and cap_note is set.  The region is clamped to the active
// window (clamping also sets cap_note).
struct MeanConvexity {
  double min_H = 0.0;
  double argmin_z = 0.0;
  bool positive = false;
  bool cap_note = false;
};
MeanConvexity mean_convexity_check(const ProfileCurve& p, double z_lo,
                                   double z_hi);

}  // namespace mcflab
