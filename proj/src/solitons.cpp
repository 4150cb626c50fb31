#include "mcflab/solitons.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mcflab {

namespace {

// Tip expansion coefficients of the translator graph: u = a2 x^2 + a4 x^4.
double bowl_a2(int n) { return 1.0 / (2.0 * n); }
double bowl_a4(int n) { return 1.0 / (4.0 * std::pow(n, 3) * (n + 2.0)); }

// Translator ODE as a first-order system in (u, v = u'):
//   v' = (1 + v^2) (1 - (n-1) v / x).
void bowl_rhs(int n, double x, double v, double& du, double& dv) {
  du = v;
  dv = (1.0 + v * v) * (1.0 - (n - 1) * v / x);
}

void bowl_rk4_step(int n, double x, double dx, double& u, double& v) {
  double du1, dv1, du2, dv2, du3, dv3, du4, dv4;
  bowl_rhs(n, x, v, du1, dv1);
  bowl_rhs(n, x + 0.5 * dx, v + 0.5 * dx * dv1, du2, dv2);
  bowl_rhs(n, x + 0.5 * dx, v + 0.5 * dx * dv2, du3, dv3);
  bowl_rhs(n, x + dx, v + dx * dv3, du4, dv4);
  u += dx / 6.0 * (du1 + 2.0 * du2 + 2.0 * du3 + du4);
  v += dx / 6.0 * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4);
}

// Hermite cubic through (x0,f0,d0), (x1,f1,d1) evaluated at x.
double hermite(double x0, double f0, double d0, double x1, double f1, double d1,
               double x) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return f0 * (2.0 * s3 - 3.0 * s2 + 1.0) + h * d0 * (s3 - 2.0 * s2 + s) +
         f1 * (-2.0 * s3 + 3.0 * s2) + h * d1 * (s3 - s2);
}

double bowl_ode_defect(int n, double x, double d1, double d2) {
  return d2 / (1.0 + d1 * d1) + (n - 1) * d1 / x - 1.0;
}

// Max ODE defect of stored samples by five-point finite differences; the
// axis sample (x = 0) is skipped, the term (n-1) u'/x being singular there.
double bowl_fd_residual(const SolitonProfile& p) {
  const std::size_t m = p.x.size();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const std::size_t lo = i >= 2 ? (i + 2 < m ? i - 2 : m - 5) : 0;
    std::vector<double> nodes(p.x.begin() + lo, p.x.begin() + lo + 5);
    const auto w = fd_weights(p.x[i], nodes, 2);
    double d1 = 0.0, d2 = 0.0;
    for (int j = 0; j < 5; ++j) {
      d1 += w[1][j] * p.u[lo + j];
      d2 += w[2][j] * p.u[lo + j];
    }
    worst = std::max(worst, std::abs(bowl_ode_defect(p.n, p.x[i], d1, d2)));
  }
  return worst;
}

}  // namespace

SolitonProfile solve_bowl(int n, double x_max, double tol, double tip_height) {
  if (n < 2) throw std::invalid_argument("solve_bowl: need n >= 2");
  if (!(x_max >= 10.0)) throw std::invalid_argument("solve_bowl: need x_max >= 10");
  const double a2 = bowl_a2(n), a4 = bowl_a4(n);

  SolitonProfile p;
  p.n = n;
  p.speed = 1.0;
  p.x.push_back(0.0);
  p.u.push_back(tip_height);
  p.du.push_back(0.0);

  const double x_seed = 1e-3;
  double u = tip_height + a2 * x_seed * x_seed + a4 * std::pow(x_seed, 4);
  double v = 2.0 * a2 * x_seed + 4.0 * a4 * std::pow(x_seed, 3);
  p.x.push_back(x_seed);
  p.u.push_back(u);
  p.du.push_back(v);

  // Fixed step schedule: dx = 1e-3 on [1e-3, 1], doubled at every octave
  // (so dx/x stays near 1e-3 and the a-posteriori finite-difference
  // residual stays below 1e-8 out to x = 1e3 and beyond).  The slope
  // relaxes to its far-field law at rate ~ x/(n-1), so the step is also
  // capped to keep the RK4 step times that rate near one.
  double x = x_seed;
  double band_end = 1.0, dx = 1e-3;
  while (x < x_max - 1e-12) {
    const double stab = 1.2 * (n - 1) / std::max(x, 1.0);
    double step = std::min(std::min(dx, stab), x_max - x);
    if (x + step > band_end + 1e-12) step = band_end - x;
    bowl_rk4_step(n, x, step, u, v);
    x += step;
    if (!std::isfinite(u) || !std::isfinite(v))
      throw NumericalFailure("solve_bowl: integration failed at x = " + fmt17(p.x.back()));
    p.x.push_back(x);
    p.u.push_back(u);
    p.du.push_back(v);
    if (x >= band_end - 1e-12) {
      band_end *= 2.0;
      dx *= 2.0;
    }
  }

  p.residual = bowl_fd_residual(p);
  if (!(p.residual <= tol))
    throw NumericalFailure("solve_bowl: residual " + fmt17(p.residual) +
                           " exceeds tolerance " + fmt17(tol));
  return p;
}

double bowl_height(const SolitonProfile& bowl, double x) {
  if (!(x >= 0.0) || x > bowl.x.back())
    throw std::invalid_argument("bowl_height: radius outside the sampled range");
  const auto it = std::upper_bound(bowl.x.begin(), bowl.x.end(), x);
  std::size_t k = it == bowl.x.begin() ? 0 : (it - bowl.x.begin() - 1);
  if (k + 1 >= bowl.x.size()) k = bowl.x.size() - 2;
  return hermite(bowl.x[k], bowl.u[k], bowl.du[k], bowl.x[k + 1], bowl.u[k + 1],
                 bowl.du[k + 1], x);
}

double bowl_radius(const SolitonProfile& bowl, double z) {
  if (!(z >= bowl.u.front()) || z > bowl.u.back())
    throw std::invalid_argument("bowl_radius: height outside the solved range");
  if (z == bowl.u.front()) return 0.0;  // the tip
  // u is strictly increasing; find the bracketing samples, then bisect the
  // monotone Hermite interpolant (fixed count, deterministic).
  const auto it = std::upper_bound(bowl.u.begin(), bowl.u.end(), z);
  std::size_t k = it == bowl.u.begin() ? 0 : (it - bowl.u.begin() - 1);
  if (k + 1 >= bowl.u.size()) k = bowl.u.size() - 2;
  double lo = bowl.x[k], hi = bowl.x[k + 1];
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double val = hermite(bowl.x[k], bowl.u[k], bowl.du[k], bowl.x[k + 1],
                               bowl.u[k + 1], bowl.du[k + 1], mid);
    if (val < z)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ProfileCurve bowl_as_profile(const SolitonProfile& bowl, double t, double z_lo,
                             double z_hi, double dz) {
  const double tip = bowl.u.front() + t;
  if (!(tip < z_hi - 5.0 * dz))
    throw InapplicableError("bowl_as_profile: window lies below the bowl tip");
  if (z_hi - t > bowl.u.back())
    throw std::invalid_argument("bowl_as_profile: profile not solved up to the window top");

  ProfileCurve p;
  p.n = bowl.n;
  p.grid = AxialGrid::uniform(z_lo, z_hi, dz);
  p.r.assign(p.grid.size(), 0.0);
  p.right = EndCondition::Dirichlet;
  if (tip >= z_lo) {
    p.left = EndCondition::Cap;
    p.cap_left = tip;
    std::size_t i = 0;
    while (i < p.grid.size() && p.grid.z[i] < tip + 0.5 * dz) ++i;
    p.i_lo = i;
  } else {
    p.left = EndCondition::Dirichlet;
    p.i_lo = 0;
  }
  p.i_hi = p.grid.size() - 1;
  if (p.i_lo + 5 > p.i_hi)
    throw InapplicableError("bowl_as_profile: too few nodes above the tip");
  for (std::size_t i = p.i_lo; i <= p.i_hi; ++i)
    p.r[i] = bowl_radius(bowl, p.grid.z[i] - t);
  p.validate();
  return p;
}

FlowTrajectory bowl_trajectory(const SolitonProfile& bowl,
                               const std::vector<double>& times, double z_lo,
                               double z_hi, double dz) {
  if (times.empty()) throw std::invalid_argument("bowl_trajectory: no times");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw std::invalid_argument("bowl_trajectory: times must increase strictly");
  FlowTrajectory traj;
  for (double t : times)
    traj.snapshots.push_back({t, bowl_as_profile(bowl, t, z_lo, z_hi, dz)});
  traj.termination = Termination::TimeLimit;
  traj.final_time = times.back();
  return traj;
}

// ---------------------------------------------------------------------------
// Self-shrinkers
// ---------------------------------------------------------------------------

namespace {

double shrinker_defect(int n, double z, double r, double d1, double d2) {
  return (n - 1) / r - d2 / (1.0 + d1 * d1) - (r - z * d1) / 2.0;
}

// Arclength form of the shrinker profile equation.  theta is the tangent
// angle of the curve s -> (z(s), r(s)):
//   z' = cos(theta), r' = sin(theta),
//   theta' = (z sin(theta) - r cos(theta))/2 + (n-1) cos(theta)/r.
struct ShooterState {
  double z = 0, r = 0, theta = 0;
};

void shooter_rhs(int n, const ShooterState& y, ShooterState& d) {
  const double c = std::cos(y.theta), s = std::sin(y.theta);
  d.z = c;
  d.r = s;
  d.theta = 0.5 * (y.z * s - y.r * c) + (n - 1) * c / y.r;
}

void shooter_rk4(int n, double ds, ShooterState& y) {
  ShooterState k1, k2, k3, k4, t;
  shooter_rhs(n, y, k1);
  t = {y.z + 0.5 * ds * k1.z, y.r + 0.5 * ds * k1.r, y.theta + 0.5 * ds * k1.theta};
  shooter_rhs(n, t, k2);
  t = {y.z + 0.5 * ds * k2.z, y.r + 0.5 * ds * k2.r, y.theta + 0.5 * ds * k2.theta};
  shooter_rhs(n, t, k3);
  t = {y.z + ds * k3.z, y.r + ds * k3.r, y.theta + ds * k3.theta};
  shooter_rhs(n, t, k4);
  y.z += ds / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
  y.r += ds / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
  y.theta += ds / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
}

}  // namespace

ShrinkerProfile solve_shrinker_profile(int n, ShrinkerKind kind, double tol,
                                       double closure_height) {
  if (n < 2) throw std::invalid_argument("solve_shrinker_profile: need n >= 2");
  ShrinkerProfile p;
  p.kind = kind;
  p.n = n;

  if (kind == ShrinkerKind::Cylinder) {
    const double R = std::sqrt(2.0 * (n - 1));
    const double dz = 0.01;
    for (int k = 0; k <= 1600; ++k) {
      p.z.push_back(-8.0 + k * dz);
      p.r.push_back(R);
    }
    p.equator_radius = R;
    for (std::size_t i = 0; i < p.z.size(); ++i)
      p.residual = std::max(p.residual,
                            std::abs(shrinker_defect(n, p.z[i], p.r[i], 0.0, 0.0)));
  } else if (kind == ShrinkerKind::Sphere) {
    const double rho = std::sqrt(2.0 * n);
    const int m = 2000;
    for (int k = 0; k <= m; ++k) {
      const double z = rho * (-0.99 + 1.98 * k / m);
      const double r = std::sqrt(rho * rho - z * z);
      p.z.push_back(z);
      p.r.push_back(r);
      // analytic derivatives of the closed form
      const double d1 = -z / r;
      const double d2 = -rho * rho / (r * r * r);
      p.residual = std::max(p.residual, std::abs(shrinker_defect(n, z, r, d1, d2)));
    }
    p.equator_radius = rho;
  } else {
    // Cap-closed members are shrinkers with boundary in the equatorial plane.
    // They cannot be reached by shooting from slope-free equatorial data: a
    // scan of starting radii on either side of the cylinder radius shows every
    // such shot either grazes the axis and reopens or escapes outward, and the
    // round sphere is the only one that meets the axis (as the classification
    // of complete rotationally symmetric shrinkers demands).  Closure is
    // instead built into the data.  At a smooth axis point the profile is
    // umbilic, so the equation pins the cap curvature to -a/(2n); seed a local
    // sphere of that curvature just below the tip and integrate down to the
    // equatorial plane.  Backward integration relaxes toward the cylinder, so
    // tall members hug the cylinder radius automatically.
    const double a = closure_height;
    if (!std::isfinite(a) || !(a > 0.0))
      throw std::invalid_argument(
          "solve_shrinker_profile: closure height must be positive");
    const double a_lo = 0.5, a_hi = 60.0;  // validated integration range
    if (a < a_lo || a > a_hi) {
      std::ostringstream msg;
      msg << "cap-closed profiles are built for closure heights in ["
          << fmt17(a_lo) << ", " << fmt17(a_hi) << "]; requested " << fmt17(a);
      throw ShootingBracketError(msg.str());
    }

    // Local sphere seed at arclength delta below the tip; errors O(delta^3).
    const double kappa = -a / (2.0 * n);
    const double delta = 1e-4;
    ShooterState y;
    y.z = a + 0.5 * kappa * delta * delta;
    y.r = delta;
    y.theta = -0.5 * M_PI - kappa * delta;

    std::vector<double> zs{y.z}, rs{y.r}, ths{y.theta};
    long step = 0;
    while (y.z > 0.0) {
      const double ds = y.r < 0.05 ? 1e-5 : 1e-3;
      shooter_rk4(n, -ds, y);
      ++step;
      if (!std::isfinite(y.r) || !std::isfinite(y.theta) || y.r <= 0.0 ||
          std::cos(y.theta) <= 0.0 || step > 2'000'000)
        throw NumericalFailure("solve_shrinker_profile: cap integration failed at height " +
                               fmt17(a));
      if (y.z > 0.0) {
        zs.push_back(y.z);
        rs.push_back(y.r);
        ths.push_back(y.theta);
      }
    }
    // Corrective partial steps land the last sample on the plane z = 0.
    for (int it = 0; it < 3; ++it) shooter_rk4(n, -y.z / std::cos(y.theta), y);
    zs.push_back(y.z);
    rs.push_back(y.r);
    ths.push_back(y.theta);

    std::reverse(zs.begin(), zs.end());
    std::reverse(rs.begin(), rs.end());
    std::reverse(ths.begin(), ths.end());
    p.z = std::move(zs);
    p.r = std::move(rs);
    p.closure_height = a;
    p.equator_radius = p.r.front();
    // Residual on the graph part (tangent bounded away from vertical, radius
    // away from the axis) by five-point finite differences.
    const std::size_t m = p.z.size();
    for (std::size_t i = 2; i + 2 < m; ++i) {
      if (std::abs(std::tan(ths[i])) > 1.5 || p.r[i] < 0.25) continue;
      std::vector<double> nodes(p.z.begin() + i - 2, p.z.begin() + i + 3);
      const auto w = fd_weights(p.z[i], nodes, 2);
      double d1 = 0.0, d2 = 0.0;
      for (int j = 0; j < 5; ++j) {
        d1 += w[1][j] * p.r[i - 2 + j];
        d2 += w[2][j] * p.r[i - 2 + j];
      }
      p.residual =
          std::max(p.residual, std::abs(shrinker_defect(n, p.z[i], p.r[i], d1, d2)));
    }
  }

  if (!(p.residual <= tol))
    throw NumericalFailure("solve_shrinker_profile: residual " + fmt17(p.residual) +
                           " exceeds tolerance " + fmt17(tol));
  return p;
}

ExactModel exact_model(ModelKind kind, int n) {
  if (n < 1) throw std::invalid_argument("exact_model: need n >= 1");
  if (kind == ModelKind::Cylinder && n < 2)
    throw std::invalid_argument("exact_model: cylinder needs n >= 2");
  ExactModel m;
  m.kind = kind;
  m.n = n;
  m.shrink_rate = kind == ModelKind::Plane ? 0.0
                  : kind == ModelKind::Sphere ? static_cast<double>(n)
                                              : static_cast<double>(n - 1);
  return m;
}

}  // namespace mcflab
