#include "mcflab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace mcflab {

namespace {

constexpr int kCapBand = 4;  // nodes next to a cap stepped explicitly in y = r^2

int band_width(const ProfileCurve& p, EndCondition end) {
  if (end != EndCondition::Cap) return 0;
  const int m = static_cast<int>(p.active_count());
  return std::min(kCapBand, std::max(0, (m - 3) / 2));
}

// Guarded radius scan: minimum and maximum over active nodes at least
// `guard` indices away from cap ends.  `interior_min` reports whether the
// minimum sits strictly inside the guarded window (a genuine neck rather
// than the flank of a shrinking cap).
struct RadiusScan {
  double r_min = std::numeric_limits<double>::infinity();
  double r_max = 0.0;
  std::size_t argmin = 0, argmax = 0;
  bool interior_min = false;
  bool window_empty = true;
};

RadiusScan scan_radius(const ProfileCurve& p, int guard) {
  RadiusScan s;
  const int gl = p.left == EndCondition::Cap ? guard : 0;
  const int gr = p.right == EndCondition::Cap ? guard : 0;
  if (p.i_lo + gl > p.i_hi || p.i_hi - p.i_lo < static_cast<std::size_t>(gl + gr)) return s;
  const std::size_t lo = p.i_lo + gl, hi = p.i_hi - gr;
  if (lo > hi) return s;
  s.window_empty = false;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (p.r[i] < s.r_min) { s.r_min = p.r[i]; s.argmin = i; }
    if (p.r[i] > s.r_max) { s.r_max = p.r[i]; s.argmax = i; }
  }
  s.interior_min = (s.argmin >= lo + 2 && s.argmin + 2 <= hi);
  return s;
}

// Non-uniform 3-point first and second derivative at the middle node.
void stencil3(double h_l, double h_r, double f_prev, double f_mid, double f_next,
              double& d1, double& d2) {
  d1 = -h_r / (h_l * (h_l + h_r)) * f_prev + (h_r - h_l) / (h_l * h_r) * f_mid +
       h_l / (h_r * (h_l + h_r)) * f_next;
  d2 = 2.0 * (f_prev / (h_l * (h_l + h_r)) - f_mid / (h_l * h_r) +
              f_next / (h_r * (h_l + h_r)));
}

double cap_rhs_y(int n, double y, double y_z, double y_zz) {
  const double denom = 4.0 * y + y_z * y_z;
  if (denom <= 0.0)
    throw NumericalFailure("cap update: degenerate profile (flat touch of the axis)");
  return (4.0 * y * y_zz - 2.0 * y_z * y_z) / denom - 2.0 * (n - 1);
}

// Continuous cap position: root of the quadratic through the three nearest
// active samples of y = r^2, taken just outside the window (exact for
// spherical caps, where y is a parabola).  Falls back to the linear
// extrapolation when the quadratic has no usable root.
double extrapolate_cap(double z1, double y1, double y2, double y3, double dz,
                       int direction /* -1 left cap, +1 right cap */) {
  // Work in the coordinate s measuring displacement from z1 toward the
  // interior (s = dz at the second sample); the cap is the root at s < 0.
  const double d1 = (y2 - y1) / dz;                    // toward the interior
  const double d2 = ((y3 - y2) / dz - d1) / (2.0 * dz);
  double s_lin = (d1 > 0.0) ? -y1 / d1 : -0.5 * dz;
  double s = s_lin;
  const double a = d2, b = d1 - d2 * dz, c = y1;
  const double disc = b * b - 4.0 * a * c;
  if (std::abs(a) > 1e-14 * std::max(1.0, std::abs(d1) / dz) && disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double root1 = (-b + sq) / (2.0 * a);
    const double root2 = (-b - sq) / (2.0 * a);
    double best = s_lin;
    bool found = false;
    for (double rt : {root1, root2}) {
      if (rt < 0.0 && (!found || rt > best)) { best = rt; found = true; }
    }
    if (found) s = best;
  }
  s = std::min(-1e-9 * dz, std::max(s, -2.0 * dz));
  // For a left cap the interior lies at z > z1, so z = z1 + s; mirrored on
  // the right.
  return direction < 0 ? z1 + s : z1 - s;
}

}  // namespace

void ProfileCurve::validate() const {
  if (n < 2) throw std::invalid_argument("ProfileCurve: dimension n must be >= 2");
  if (grid.rule != AxialGrid::Rule::Uniform)
    throw std::invalid_argument("ProfileCurve: requires a uniform grid");
  if (r.size() != grid.size())
    throw GridMismatchError("ProfileCurve: radius array does not match the grid");
  if (i_hi >= grid.size() || i_lo > i_hi)
    throw std::invalid_argument("ProfileCurve: bad active range");
  for (std::size_t i = i_lo; i <= i_hi; ++i)
    if (!(r[i] > 0.0))
      throw std::invalid_argument("ProfileCurve: nonpositive radius inside the active range");
  const std::size_t m = active_count();
  const std::size_t probe = std::min<std::size_t>(5, m >= 2 ? m - 1 : 0);
  if (left == EndCondition::Cap) {
    if (!(cap_left < grid.z[i_lo]))
      throw std::invalid_argument("ProfileCurve: left cap must sit left of the active range");
    for (std::size_t k = 0; k + 1 < probe; ++k)
      if (!(r[i_lo + k] < r[i_lo + k + 1]))
        throw std::invalid_argument(
            "ProfileCurve: radius must decrease monotonically into the left cap");
  }
  if (right == EndCondition::Cap) {
    if (!(cap_right > grid.z[i_hi]))
      throw std::invalid_argument("ProfileCurve: right cap must sit right of the active range");
    for (std::size_t k = 0; k + 1 < probe; ++k)
      if (!(r[i_hi - k] < r[i_hi - k - 1]))
        throw std::invalid_argument(
            "ProfileCurve: radius must decrease monotonically into the right cap");
  }
}

double ProfileCurve::min_radius() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = i_lo; i <= i_hi; ++i) m = std::min(m, r[i]);
  return m;
}

double ProfileCurve::max_radius() const {
  double m = 0.0;
  for (std::size_t i = i_lo; i <= i_hi; ++i) m = std::max(m, r[i]);
  return m;
}

double ProfileCurve::z_left() const {
  return left == EndCondition::Cap ? cap_left : grid.z[i_lo];
}

double ProfileCurve::z_right() const {
  return right == EndCondition::Cap ? cap_right : grid.z[i_hi];
}

ProfileCurve make_cylinder(int n, double radius, double z_lo, double z_hi, double dz,
                           EndCondition ends) {
  if (!(radius > 0.0)) throw std::invalid_argument("make_cylinder: radius must be positive");
  if (ends == EndCondition::Cap)
    throw std::invalid_argument("make_cylinder: a cylinder segment has open ends");
  ProfileCurve p;
  p.n = n;
  p.grid = AxialGrid::uniform(z_lo, z_hi, dz);
  p.r.assign(p.grid.size(), radius);
  p.i_lo = 0;
  p.i_hi = p.grid.size() - 1;
  p.left = p.right = ends;
  p.validate();
  return p;
}

ProfileCurve make_sphere(int n, double radius, double center_z, double dz,
                         double window_margin) {
  if (!(radius > 0.0)) throw std::invalid_argument("make_sphere: radius must be positive");
  ProfileCurve p;
  p.n = n;
  // snap the window outward to a whole number of grid cells
  const double half = std::ceil((radius + window_margin) / dz - 1e-9) * dz;
  p.grid = AxialGrid::uniform(center_z - half, center_z + half, dz);
  p.r.assign(p.grid.size(), 0.0);
  p.left = p.right = EndCondition::Cap;
  p.cap_left = center_z - radius;
  p.cap_right = center_z + radius;
  bool first = true;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const double u = p.grid.z[i] - center_z;
    if (u >= -radius + 0.5 * dz && u <= radius - 0.5 * dz) {
      p.r[i] = std::sqrt(std::max(0.0, radius * radius - u * u));
      if (first) { p.i_lo = i; first = false; }
      p.i_hi = i;
    }
  }
  p.validate();
  return p;
}

ProfileCurve make_dumbbell(int n, double dz, double neck, double bulge, double halflength) {
  if (!(neck > 0.0) || !(bulge > 0.0) || !(halflength > 0.0))
    throw std::invalid_argument("make_dumbbell: parameters must be positive");
  const double rc = neck + bulge;  // end radius, matched by the spherical caps
  ProfileCurve p;
  p.n = n;
  const double half = halflength + rc + 0.5;
  p.grid = AxialGrid::uniform(-half, half, dz);
  p.r.assign(p.grid.size(), 0.0);
  p.left = p.right = EndCondition::Cap;
  p.cap_left = -halflength - rc;
  p.cap_right = halflength + rc;
  bool first = true;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const double z = p.grid.z[i];
    double r = 0.0;
    if (std::abs(z) <= halflength) {
      const double osc = 1.0 - std::cos(M_PI * z / halflength);
      r = neck + bulge * osc * osc / 4.0;
    } else if (std::abs(z) < halflength + rc - 0.5 * dz) {
      const double u = std::abs(z) - halflength;
      r = std::sqrt(std::max(0.0, rc * rc - u * u));
    } else {
      continue;
    }
    p.r[i] = r;
    if (first) { p.i_lo = i; first = false; }
    p.i_hi = i;
  }
  p.validate();
  return p;
}

double stable_dt(const ProfileCurve& p) {
  const double dz = p.grid.spacing;
  const int guard = std::max(band_width(p, p.left), band_width(p, p.right));
  RadiusScan s = scan_radius(p, guard);
  double dt = 0.2 * dz * dz;
  if (!s.window_empty) dt = std::min(dt, 0.1 * s.r_min * s.r_min / (p.n - 1));
  return dt;
}

ProfileCurve step_profile_flow(const ProfileCurve& p, double dt) {
  p.validate();
  if (!(dt > 0.0)) throw RejectedStepError("step size must be positive");
  const double dt_cap = stable_dt(p);
  if (dt > dt_cap * (1.0 + 1e-9))
    throw RejectedStepError("step size " + fmt17(dt) + " exceeds the stability bound " +
                            fmt17(dt_cap));
  const double dz = p.grid.spacing;
  const int BL = band_width(p, p.left);
  const int BR = band_width(p, p.right);
  {
    RadiusScan s = scan_radius(p, std::max(BL, BR));
    const bool has_cap = p.left == EndCondition::Cap || p.right == EndCondition::Cap;
    if (!s.window_empty && s.r_min < 10.0 * dz && (s.interior_min || !has_cap))
      throw NeckPinchError("radius below the resolvability threshold",
                           p.grid.z[s.argmin], s.r_min);
  }

  ProfileCurve q = p;
  const std::size_t lo = p.i_lo, hi = p.i_hi;

  // Explicit y = r^2 update on the cap bands, using old values throughout.
  auto band_update = [&](int count, int direction) {
    for (int k = 0; k < count; ++k) {
      const std::size_t j = direction < 0 ? lo + k : hi - k;
      const double y = p.r[j] * p.r[j];
      double z_out, y_out;  // neighbor toward the cap
      if (k == 0) {
        z_out = direction < 0 ? p.cap_left : p.cap_right;
        y_out = 0.0;
      } else {
        const std::size_t jo = direction < 0 ? j - 1 : j + 1;
        z_out = p.grid.z[jo];
        y_out = p.r[jo] * p.r[jo];
      }
      const std::size_t ji = direction < 0 ? j + 1 : j - 1;  // toward the interior
      const double y_in = p.r[ji] * p.r[ji];
      const double h_out = std::abs(p.grid.z[j] - z_out);
      double d1, d2;
      // stencil3 orders arguments left to right regardless of cap side.
      if (direction < 0)
        stencil3(h_out, dz, y_out, y, y_in, d1, d2);
      else
        stencil3(dz, h_out, y_in, y, y_out, d1, d2);
      const double y_new = y + dt * cap_rhs_y(p.n, y, d1, d2);
      q.r[j] = y_new > 0.0 ? std::sqrt(y_new) : 0.0;
    }
  };
  band_update(BL, -1);
  band_update(BR, +1);

  // Interior range for the split reaction/diffusion step.
  std::size_t s_lo = lo, s_hi = hi;
  if (p.left == EndCondition::Cap) s_lo = lo + BL;
  else if (p.left == EndCondition::Dirichlet) s_lo = lo + 1;
  if (p.right == EndCondition::Cap) s_hi = hi - BR;
  else if (p.right == EndCondition::Dirichlet) s_hi = hi - 1;
  if (s_lo > s_hi || s_hi - s_lo + 1 < 3)
    throw NumericalFailure("step_profile_flow: active window too small to step");

  const std::size_t m = s_hi - s_lo + 1;
  std::vector<double> sub(m, 0.0), diag(m, 0.0), sup(m, 0.0), rhs(m, 0.0);
  const double shrink = 2.0 * (p.n - 1) * dt;
  for (std::size_t i = s_lo; i <= s_hi; ++i) {
    const double y = p.r[i] * p.r[i] - shrink;
    if (y <= 0.0)
      throw NumericalFailure("step_profile_flow: reaction step pinched an interior node");
    rhs[i - s_lo] = std::sqrt(y);
  }
  for (std::size_t i = s_lo; i <= s_hi; ++i) {
    double rz;
    if (i == lo)       rz = p.left == EndCondition::Neumann ? 0.0 : (p.r[i + 1] - p.r[i]) / dz;
    else if (i == hi)  rz = p.right == EndCondition::Neumann ? 0.0 : (p.r[i] - p.r[i - 1]) / dz;
    else               rz = (p.r[i + 1] - p.r[i - 1]) / (2.0 * dz);
    const double a = dt / (dz * dz) / (1.0 + rz * rz);
    const std::size_t k = i - s_lo;
    diag[k] = 1.0 + 2.0 * a;
    sub[k] = sup[k] = -a;
    if (i == s_lo) {
      if (p.left == EndCondition::Neumann) {
        sup[k] = -2.0 * a;
      } else {
        const double known = p.left == EndCondition::Cap ? q.r[i - 1] : p.r[i - 1];
        rhs[k] += a * known;
      }
      sub[k] = 0.0;
    }
    if (i == s_hi) {
      if (p.right == EndCondition::Neumann) {
        sub[k] = -2.0 * a;
      } else {
        const double known = p.right == EndCondition::Cap ? q.r[i + 1] : p.r[i + 1];
        rhs[k] += a * known;
      }
      sup[k] = 0.0;
    }
  }
  solve_tridiagonal(sub, diag, sup, rhs);
  for (std::size_t i = s_lo; i <= s_hi; ++i) q.r[i] = rhs[i - s_lo];

  // Re-extrapolate cap positions from the updated y and rebuild the active
  // window so the first active node stays between 0.5 dz and 1.5 dz from
  // the cap (keeps the one-sided stencils well conditioned).
  auto rebuild_cap = [&](int direction) {
    std::size_t& edge = direction < 0 ? q.i_lo : q.i_hi;
    // Drop nodes the cap swept over (update may have produced zeros).
    while (q.i_hi > q.i_lo && q.r[edge] <= 0.0) {
      q.r[edge] = 0.0;
      edge = direction < 0 ? edge + 1 : edge - 1;
    }
    if (q.i_hi - q.i_lo + 1 < 3)
      throw NumericalFailure("step_profile_flow: cap swept the active window");
    const std::size_t j1 = edge;
    const std::size_t j2 = direction < 0 ? j1 + 1 : j1 - 1;
    const std::size_t j3 = direction < 0 ? j1 + 2 : j1 - 2;
    const double cap =
        extrapolate_cap(p.grid.z[j1], q.r[j1] * q.r[j1], q.r[j2] * q.r[j2],
                        q.r[j3] * q.r[j3], dz, direction);
    double& cap_field = direction < 0 ? q.cap_left : q.cap_right;
    cap_field = cap;
    // Deactivate nodes closer than 0.5 dz to the cap.
    while (q.i_hi > q.i_lo + 2) {
      const double gap = direction < 0 ? p.grid.z[edge] - cap : cap - p.grid.z[edge];
      if (gap >= 0.5 * dz) break;
      q.r[edge] = 0.0;
      edge = direction < 0 ? edge + 1 : edge - 1;
    }
    // Reactivate a node if the cap retreated more than 1.5 dz from the edge.
    while (edge > 0 && edge + 1 < q.grid.size()) {
      const std::size_t cand = direction < 0 ? edge - 1 : edge + 1;
      const double gap = direction < 0 ? p.grid.z[cand] - cap : cap - p.grid.z[cand];
      if (gap < 0.5 * dz) break;
      const std::size_t n1 = edge, n2 = direction < 0 ? edge + 1 : edge - 1;
      const double slope = (q.r[n2] * q.r[n2] - q.r[n1] * q.r[n1]) /
                           (p.grid.z[n2] - p.grid.z[n1]);
      const double y = q.r[n1] * q.r[n1] + slope * (p.grid.z[cand] - p.grid.z[n1]);
      if (y <= 0.0) break;
      q.r[cand] = std::sqrt(y);
      edge = cand;
    }
  };
  if (p.left == EndCondition::Cap) rebuild_cap(-1);
  if (p.right == EndCondition::Cap) rebuild_cap(+1);

  q.validate();
  return q;
}

namespace {

double max_curvature_proxy(const ProfileCurve& p) {
  const double dz = p.grid.spacing;
  double worst = 0.0;
  for (std::size_t i = p.i_lo + 1; i < p.i_hi; ++i) {
    const double rz = (p.r[i + 1] - p.r[i - 1]) / (2.0 * dz);
    const double rzz = (p.r[i + 1] - 2.0 * p.r[i] + p.r[i - 1]) / (dz * dz);
    worst = std::max(worst, (p.n - 1) / p.r[i] + std::abs(rzz) / (1.0 + rz * rz));
  }
  return worst;
}

double refine_arg_extremum(const ProfileCurve& p, std::size_t i) {
  if (i <= p.i_lo || i >= p.i_hi) return p.grid.z[i];
  const double a = p.r[i - 1], b = p.r[i], c = p.r[i + 1];
  const double denom = a - 2.0 * b + c;
  if (std::abs(denom) < 1e-300) return p.grid.z[i];
  const double shift = 0.5 * (a - c) / denom;
  if (std::abs(shift) > 1.0) return p.grid.z[i];
  return p.grid.z[i] + shift * p.grid.spacing;
}

// Extrapolated singular time: fit v^2 linearly in t over the tail of the
// step log and take the root (square-root law near the singular time).
double extrapolate_t_star(const std::vector<StepStats>& log, bool use_min, double fallback) {
  const std::size_t n = log.size();
  if (n < 4) return fallback;
  const std::size_t k = std::max<std::size_t>(20, n / 5);
  const std::size_t start = n > k ? n - k : 0;
  std::vector<double> ts, v2;
  for (std::size_t i = start; i < n; ++i) {
    ts.push_back(log[i].t);
    const double v = use_min ? log[i].min_r : log[i].max_r;
    v2.push_back(v * v);
  }
  const LineFit fit = fit_line(ts, v2);
  if (!(fit.slope < 0.0)) return fallback;
  return -fit.intercept / fit.slope;
}

}  // namespace

FlowTrajectory run_to_singularity(const ProfileCurve& p0, const FlowConfig& cfg) {
  p0.validate();
  FlowTrajectory traj;
  ProfileCurve p = p0;
  double t = 0.0;
  traj.snapshots.push_back({t, p});
  const double dz = p.grid.spacing;
  const double pinch_radius = cfg.pinch_node_factor * dz;
  long step_index = 0;

  auto finish = [&](Termination why, std::optional<SingularEstimate> est) {
    traj.termination = why;
    traj.singular = est;
    traj.final_time = t;
    if (traj.snapshots.empty() || traj.snapshots.back().t != t)
      traj.snapshots.push_back({t, p});
  };

  while (true) {
    const bool has_cap = p.left == EndCondition::Cap || p.right == EndCondition::Cap;
    const bool both_caps = p.left == EndCondition::Cap && p.right == EndCondition::Cap;
    if (static_cast<int>(p.active_count()) < cfg.min_active ||
        (both_caps && p.cap_right - p.cap_left < cfg.min_active * dz)) {
      RadiusScan s = scan_radius(p, 0);
      SingularEstimate est;
      est.z_star = refine_arg_extremum(p, s.argmax);
      est.t_star = extrapolate_t_star(traj.steps, /*use_min=*/false, t);
      finish(Termination::CapCollapse, est);
      break;
    }
    RadiusScan s = scan_radius(p, cfg.cap_guard);
    if (!s.window_empty && s.r_min < pinch_radius && (s.interior_min || !has_cap)) {
      SingularEstimate est;
      est.z_star = refine_arg_extremum(p, s.argmin);
      est.t_star = extrapolate_t_star(traj.steps, /*use_min=*/true, t);
      finish(Termination::NeckRadiusThreshold, est);
      break;
    }
    if (t >= cfg.t_max * (1.0 - 1e-15)) {
      finish(Termination::TimeLimit, std::nullopt);
      break;
    }
    double dt = stable_dt(p);
    if (dt < cfg.dt_min) {
      NonconvergenceError err("step size collapsed below dt_min at t = " + fmt17(t));
      traj.final_time = t;
      err.partial = traj;
      throw err;
    }
    dt = std::min(dt, cfg.t_max - t);
    try {
      p = step_profile_flow(p, dt);
    } catch (const NeckPinchError& e) {
      SingularEstimate est;
      est.z_star = e.z_at_min;
      est.t_star = extrapolate_t_star(traj.steps, /*use_min=*/true, t);
      finish(Termination::NeckRadiusThreshold, est);
      break;
    }
    t += dt;
    ++step_index;
    StepStats st;
    st.t = t;
    st.dt = dt;
    RadiusScan g = scan_radius(p, cfg.cap_guard);
    st.min_r = g.window_empty ? p.min_radius() : g.r_min;
    st.max_r = g.window_empty ? p.max_radius() : g.r_max;
    st.max_curvature = max_curvature_proxy(p);
    traj.steps.push_back(st);
    if (cfg.snapshot_every > 0 && step_index % cfg.snapshot_every == 0)
      traj.snapshots.push_back({t, p});
  }
  return traj;
}

}  // namespace mcflab
