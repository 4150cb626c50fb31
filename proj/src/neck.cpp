#include "mcflab/neck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcflab {

void ModeEnergyTrack::validate() const {
  if (tau.size() != U_plus.size() || tau.size() != U_zero.size() ||
      tau.size() != U_minus.size())
    throw std::invalid_argument("ModeEnergyTrack: mismatched column lengths");
  for (std::size_t k = 0; k < tau.size(); ++k) {
    if (k > 0 && !(tau[k] > tau[k - 1]))
      throw std::invalid_argument("ModeEnergyTrack: tau must be strictly increasing");
    if (!(U_plus[k] >= 0.0) || !(U_zero[k] >= 0.0) || !(U_minus[k] >= 0.0))
      throw std::invalid_argument("ModeEnergyTrack: energies must be nonnegative");
  }
}

namespace {

double dominance_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

// The ratio must certify dominance on the whole window and must not be
// worse on the early (asymptotically relevant) half than twice the late
// half; ratios below 0.1 early are accepted outright.
bool certifies(double sup, double early, double late) {
  return sup <= 0.5 && (early <= 2.0 * late || early <= 0.1);
}

}  // namespace

DichotomyResult classify_dichotomy(const ModeEnergyTrack& track) {
  track.validate();
  if (track.tau.size() < 20)
    throw InsufficientDataError("classify_dichotomy: need at least 20 samples, got " +
                                std::to_string(track.tau.size()));
  const double span = track.tau.back() - track.tau.front();
  if (!(span >= 3.0))
    throw InsufficientDataError("classify_dichotomy: window spans " + fmt17(span) +
                                " < 3 in tau");

  DichotomyResult out;
  double peak = 0.0;
  for (std::size_t k = 0; k < track.tau.size(); ++k)
    peak = std::max({peak, track.U_plus[k], track.U_zero[k], track.U_minus[k]});
  if (peak == 0.0) return out;  // degenerate all-zero track

  const double mid = 0.5 * (track.tau.front() + track.tau.back());
  double k_all = 0.0, k_early = 0.0, k_late = 0.0;
  double e_all = 0.0, e_early = 0.0, e_late = 0.0;
  for (std::size_t k = 0; k < track.tau.size(); ++k) {
    const double q_plus =
        dominance_ratio(track.U_zero[k] + track.U_minus[k], track.U_plus[k]);
    const double q_zero =
        dominance_ratio(track.U_plus[k] + track.U_minus[k], track.U_zero[k]);
    k_all = std::max(k_all, q_plus);
    e_all = std::max(e_all, q_zero);
    if (track.tau[k] <= mid) {
      k_early = std::max(k_early, q_plus);
      e_early = std::max(e_early, q_zero);
    } else {
      k_late = std::max(k_late, q_plus);
      e_late = std::max(e_late, q_zero);
    }
  }
  out.kappa = k_all;
  out.kappa_early = k_early;
  out.kappa_late = k_late;
  out.eta = e_all;
  out.eta_early = e_early;
  out.eta_late = e_late;

  const bool plus = certifies(k_all, k_early, k_late);
  const bool zero = certifies(e_all, e_early, e_late);
  if (plus && !zero)
    out.verdict = DichotomyVerdict::PlusDominant;
  else if (zero && !plus)
    out.verdict = DichotomyVerdict::NeutralDominant;
  return out;
}

std::string DichotomyResult::summary() const {
  switch (verdict) {
    case DichotomyVerdict::PlusDominant:
      return "verdict=plus-dominant kappa=" + fmt17(kappa) +
             " kappa_early=" + fmt17(kappa_early) +
             " kappa_late=" + fmt17(kappa_late);
    case DichotomyVerdict::NeutralDominant:
      return "verdict=neutral-dominant eta=" + fmt17(eta) +
             " eta_early=" + fmt17(eta_early) + " eta_late=" + fmt17(eta_late);
    default:
      return "verdict=undecided kappa=" + fmt17(kappa) + " eta=" + fmt17(eta);
  }
}

ModeDecayFit fit_mode_decay(const std::vector<double>& tau,
                            const std::vector<double>& coefficient,
                            double tau_lo, double tau_hi,
                            double max_log_residual) {
  if (tau.size() != coefficient.size())
    throw std::invalid_argument("fit_mode_decay: mismatched series lengths");
  if (!(tau_lo < tau_hi))
    throw std::invalid_argument("fit_mode_decay: empty window");
  std::vector<double> x, y;
  double sign = 0.0;
  for (std::size_t k = 0; k < tau.size(); ++k) {
    if (tau[k] < tau_lo || tau[k] > tau_hi) continue;
    const double c = coefficient[k];
    if (c == 0.0)
      throw NonexponentialError("coefficient vanishes at tau = " + fmt17(tau[k]));
    if (sign == 0.0) sign = c > 0.0 ? 1.0 : -1.0;
    if (c * sign < 0.0)
      throw NonexponentialError("coefficient changes sign at tau = " + fmt17(tau[k]));
    x.push_back(tau[k]);
    y.push_back(std::log(std::abs(c)));
  }
  if (x.size() < 3)
    throw InsufficientDataError("fit_mode_decay: window holds " +
                                std::to_string(x.size()) + " samples, need 3");
  const LineFit fit = fit_line(x, y);
  if (fit.rms_residual > max_log_residual)
    throw NonexponentialError("log-linear residual " + fmt17(fit.rms_residual) +
                              " exceeds " + fmt17(max_log_residual) +
                              " (power-law-like series)");
  ModeDecayFit out;
  out.rate = fit.slope;
  out.constant = sign * std::exp(fit.intercept);
  out.rms_log_residual = fit.rms_residual;
  return out;
}

double neutral_ode_A(int n) {
  if (n < 2) throw std::invalid_argument("neutral_ode_A: need n >= 2");
  return 0.5 / std::sqrt(n - 1.0) *
         std::pow(2.0 * M_E * M_PI / (n - 1.0), 0.25 * (n - 1.0)) /
         std::sqrt(sphere_area(n - 1));
}

double rotation_theorem_constant(int n) {
  if (n < 2) throw std::invalid_argument("rotation_theorem_constant: need n >= 2");
  return -2.0 * std::sqrt(n - 1.0) *
         std::pow(2.0 * M_E * M_PI / (n - 1.0), -0.25 * (n - 1.0)) *
         std::sqrt(sphere_area(n - 1));
}

void NeutralODEState::validate() const {
  if (n < 2) throw std::invalid_argument("NeutralODEState: need n >= 2");
  const double want = neutral_ode_A(n);
  if (!(std::abs(A - want) <= 1e-12 * want))
    throw std::invalid_argument("NeutralODEState: stored A does not match the closed form");
  if (alpha.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("NeutralODEState: need n rotation coefficients");
  if (!std::isfinite(alpha0))
    throw std::invalid_argument("NeutralODEState: nonfinite alpha0");
  for (double a : alpha)
    if (!std::isfinite(a)) throw std::invalid_argument("NeutralODEState: nonfinite alpha");
}

NeutralODEState make_neutral_ode_state(int n, double alpha0,
                                       std::vector<double> alpha) {
  NeutralODEState s;
  s.n = n;
  s.A = neutral_ode_A(n);
  s.alpha0 = alpha0;
  if (alpha.empty()) alpha.assign(std::max(n, 0), 0.0);
  s.alpha = std::move(alpha);
  s.validate();
  return s;
}

namespace {

// y[0] = alpha_0, y[1..n] = alpha_i
void neutral_rhs(double A, const std::vector<double>& y, std::vector<double>& dy) {
  double sq = 0.0;
  for (std::size_t i = 1; i < y.size(); ++i) sq += y[i] * y[i];
  dy[0] = -2.0 * A * y[0] * y[0] - A * sq;
  for (std::size_t i = 1; i < y.size(); ++i) dy[i] = -A * y[0] * y[i];
}

double max_abs(const std::vector<double>& y) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

NeutralODETrajectory integrate_neutral_ode(const NeutralODEState& s0, double tau0,
                                           double tau1, double dtau) {
  s0.validate();
  if (!(tau1 > tau0))
    throw std::invalid_argument("integrate_neutral_ode: need tau1 > tau0");
  if (!(dtau > 0.0))
    throw std::invalid_argument("integrate_neutral_ode: need dtau > 0");
  const double A = s0.A;
  std::vector<double> y(s0.n + 1);
  y[0] = s0.alpha0;
  std::copy(s0.alpha.begin(), s0.alpha.end(), y.begin() + 1);
  if (!(dtau * A * max_abs(y) < 0.1))
    throw std::invalid_argument(
        "integrate_neutral_ode: dtau too large for the initial state "
        "(|dtau A alpha| >= 0.1)");

  NeutralODETrajectory out;
  out.n = s0.n;
  out.A = A;
  const std::size_t steps =
      static_cast<std::size_t>(std::ceil((tau1 - tau0) / dtau - 1e-12));
  out.tau.reserve(steps + 1);
  out.alpha0.reserve(steps + 1);
  out.alpha.assign(s0.n, {});
  for (auto& col : out.alpha) col.reserve(steps + 1);

  auto store = [&](double t) {
    out.tau.push_back(t);
    out.alpha0.push_back(y[0]);
    for (int i = 0; i < s0.n; ++i) out.alpha[i].push_back(y[i + 1]);
  };
  store(tau0);

  std::vector<double> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()),
      tmp(y.size());
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = tau0 + step * dtau;
    const double h = std::min(dtau, tau1 - t);
    neutral_rhs(A, y, k1);
    for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    neutral_rhs(A, tmp, k2);
    for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    neutral_rhs(A, tmp, k3);
    for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + h * k3[j];
    neutral_rhs(A, tmp, k4);
    for (std::size_t j = 0; j < y.size(); ++j)
      y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    const double t_next = step + 1 == steps ? tau1 : t + h;
    if (!(dtau * A * max_abs(y) < 0.1) || !std::isfinite(y[0])) {
      // The quadratic system leaves the integrator's accuracy regime only
      // on its way to finite-time blow-up; estimate the blow-up time from
      // the closed-form tail of d alpha_0/d tau = -2 A alpha_0^2.
      const double est =
          y[0] < 0.0 && std::isfinite(y[0]) ? t_next + 1.0 / (2.0 * A * -y[0]) : t_next;
      throw BlowUpError("neutral-mode system at tau = " + fmt17(t_next), est);
    }
    store(t_next);
  }
  return out;
}

TipTrack tip_height(const FlowTrajectory& traj, int direction) {
  if (direction != 1 && direction != -1)
    throw std::invalid_argument("tip_height: direction must be +1 or -1");
  if (traj.snapshots.size() < 2)
    throw std::invalid_argument("tip_height: need at least two snapshots");
  TipTrack out;
  for (const Snapshot& s : traj.snapshots) {
    if (!out.t.empty() && !(s.t > out.t.back()))
      throw std::invalid_argument("tip_height: snapshot times must increase");
    const EndCondition end = direction > 0 ? s.curve.left : s.curve.right;
    if (end != EndCondition::Cap)
      throw InapplicableError(
          "tip_height: the surface is not capped at the selected end, so it "
          "has no tip there");
    out.t.push_back(s.t);
    out.psi.push_back(direction > 0 ? s.curve.cap_left : -s.curve.cap_right);
  }

  out.strictly_increasing = true;
  for (std::size_t k = 1; k < out.psi.size(); ++k)
    if (!(out.psi[k] > out.psi[k - 1])) out.strictly_increasing = false;
  out.slope = fit_line(out.t, out.psi).slope;

  // Macroscopic speed limit: smallest C with psi(t)-psi(t') <= C(t-t'+1).
  const std::size_t m = out.t.size();
  const std::size_t stride = m > 4000 ? m / 4000 + 1 : 1;
  double C = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; i += stride)
    for (std::size_t j = i + 1; j < m; j += stride)
      C = std::max(C, (out.psi[j] - out.psi[i]) / (out.t[j] - out.t[i] + 1.0));
  out.speed_limit_C = C;
  return out;
}

MeanConvexity mean_convexity_check(const ProfileCurve& p, double z_lo, double z_hi) {
  p.validate();
  if (!(z_lo <= z_hi))
    throw std::invalid_argument("mean_convexity_check: empty region");
  const double h = p.grid.spacing;
  std::size_t a = p.i_lo, b = p.i_hi;
  while (a <= b && p.grid.z[a] < z_lo - 1e-12 * std::max(1.0, std::abs(z_lo))) ++a;
  while (b > a && p.grid.z[b] > z_hi + 1e-12 * std::max(1.0, std::abs(z_hi))) --b;
  if (a > b || b - a + 1 < 3)
    throw std::invalid_argument(
        "mean_convexity_check: region covers fewer than three profile nodes");

  MeanConvexity out;
  out.cap_note = z_lo < p.grid.z[p.i_lo] || z_hi > p.grid.z[p.i_hi];
  out.min_H = std::numeric_limits<double>::infinity();
  for (std::size_t i = a; i <= b; ++i) {
    double d1, d2;
    if (i == p.i_lo || i == p.i_hi) {
      // window end: one-sided 4-point stencil (second order for both
      // derivatives)
      out.cap_note = true;
      if (p.active_count() < 4)
        throw std::invalid_argument(
            "mean_convexity_check: need four active nodes for the one-sided "
            "stencil");
      const std::ptrdiff_t s = i == p.i_lo ? 1 : -1;
      const double r0 = p.r[i], r1 = p.r[i + s], r2 = p.r[i + 2 * s],
                   r3 = p.r[i + 3 * s];
      d1 = s * (-11.0 * r0 + 18.0 * r1 - 9.0 * r2 + 2.0 * r3) / (6.0 * h);
      d2 = (2.0 * r0 - 5.0 * r1 + 4.0 * r2 - r3) / (h * h);
    } else {
      d1 = (p.r[i + 1] - p.r[i - 1]) / (2.0 * h);
      d2 = (p.r[i + 1] - 2.0 * p.r[i] + p.r[i - 1]) / (h * h);
    }
    const double w = 1.0 + d1 * d1;
    const double H = (p.n - 1) / (p.r[i] * std::sqrt(w)) - d2 / (w * std::sqrt(w));
    if (H < out.min_H) {
      out.min_H = H;
      out.argmin_z = p.grid.z[i];
    }
  }
  out.positive = out.min_H > 0.0;
  return out;
}

}  // namespace mcflab
