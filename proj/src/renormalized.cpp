#include "mcflab/renormalized.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "mcflab/cylinder.hpp"

namespace mcflab {

namespace {

// Reaction term of the renormalized mode-0 equation in a form that is
// exactly zero at u = 0 (uses R^2 = 2(n-1)):
//   (R+u)/2 - (n-1)/(R+u) = u (2R+u) / (2 (R+u)).
double reaction(double u, double R) {
  return u * (2.0 * R + u) / (2.0 * (R + u));
}

void substep_mode0(std::vector<double>& u, const AxialGrid& g, double R, double h) {
  const std::size_t N = g.size();
  const double dz = g.spacing;
  const double bc_lo = u.front(), bc_hi = u.back();
  std::vector<double> c(N, 1.0), Lu(N, 0.0);
  std::vector<double> sub(N - 2), diag(N - 2), sup(N - 2), rhs(N - 2);
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double uz = (u[i + 1] - u[i - 1]) / (2.0 * dz);
    const double uzz = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dz * dz);
    c[i] = 1.0 / (1.0 + uz * uz);
    Lu[i] = c[i] * uzz - 0.5 * g.z[i] * uz;
  }
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double u_star = u[i] + 0.5 * h * (Lu[i] + reaction(u[i], R));
    rhs[i - 1] = u[i] + 0.5 * h * Lu[i] + h * reaction(u_star, R);
  }
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const std::size_t k = i - 1;
    const double dcoef = c[i] / (dz * dz);
    const double acoef = g.z[i] / (4.0 * dz);
    diag[k] = 1.0 + h * dcoef;
    sub[k] = -0.5 * h * (dcoef + acoef);
    sup[k] = -0.5 * h * (dcoef - acoef);
    if (i == 1) { rhs[k] -= sub[k] * bc_lo; sub[k] = 0.0; }
    if (i + 2 == N) { rhs[k] -= sup[k] * bc_hi; sup[k] = 0.0; }
  }
  solve_tridiagonal(sub, diag, sup, rhs);
  for (std::size_t i = 1; i + 1 < N; ++i) u[i] = rhs[i - 1];
}

void substep_mode1(std::vector<double>& u, const AxialGrid& g, double h) {
  const std::size_t N = g.size();
  const double dz = g.spacing;
  const double bc_lo = u.front(), bc_hi = u.back();
  std::vector<double> sub(N - 2), diag(N - 2), sup(N - 2), rhs(N - 2);
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double uz = (u[i + 1] - u[i - 1]) / (2.0 * dz);
    const double uzz = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dz * dz);
    const double L1 = uzz - 0.5 * g.z[i] * uz + 0.5 * u[i];
    rhs[i - 1] = u[i] + 0.5 * h * L1;
  }
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const std::size_t k = i - 1;
    const double dcoef = 1.0 / (dz * dz);
    const double acoef = g.z[i] / (4.0 * dz);
    diag[k] = 1.0 + h * dcoef - 0.25 * h;
    sub[k] = -0.5 * h * (dcoef + acoef);
    sup[k] = -0.5 * h * (dcoef - acoef);
    if (i == 1) { rhs[k] -= sub[k] * bc_lo; sub[k] = 0.0; }
    if (i + 2 == N) { rhs[k] -= sup[k] * bc_hi; sup[k] = 0.0; }
  }
  solve_tridiagonal(sub, diag, sup, rhs);
  for (std::size_t i = 1; i + 1 < N; ++i) u[i] = rhs[i - 1];
}

}  // namespace

CylinderGraph step_renormalized(const CylinderGraph& u, double dtau, double max_substep) {
  u.validate();
  if (u.grid.rule != AxialGrid::Rule::Uniform)
    throw StencilError("step_renormalized: requires a uniform grid");
  if (u.grid.size() < 5)
    throw StencilError("step_renormalized: grid too small for the stencils");
  if (!(dtau > 0.0) || !(max_substep > 0.0))
    throw std::invalid_argument("step_renormalized: step sizes must be positive");
  const double R = CylinderConstants::make(u.n).radius;
  const int nsub = std::max(1, static_cast<int>(std::ceil(dtau / max_substep - 1e-9)));
  const double h = dtau / nsub;
  CylinderGraph q = u;
  auto check_band = [&](double tau_elapsed) {
    for (double v : q.u0)
      if (!(std::abs(v) < 0.5 * R))
        throw BlowUpError("renormalized graph left the validity band |u| < R/2",
                          tau_elapsed);
  };
  check_band(0.0);
  for (int k = 0; k < nsub; ++k) {
    substep_mode0(q.u0, q.grid, R, h);
    check_band((k + 1) * h);
    for (auto& u1 : q.u1) substep_mode1(u1, q.grid, h);
  }
  return q;
}

namespace {

// Sample a snapshot's radius at axial position z; ok reports whether the
// point lies inside the active window with a positive interpolated radius.
double sample_radius(const ProfileCurve& p, double z, bool& ok) {
  ok = false;
  const double dz = p.grid.spacing;
  const double pos = (z - p.grid.z_lo()) / dz;
  if (!(pos >= 0.0)) return 0.0;
  std::size_t i = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(i);
  if (frac > 1.0 - 1e-9 && i + 1 < p.grid.size()) { ++i; frac = 0.0; }
  if (i < p.i_lo || i > p.i_hi) return 0.0;
  double r;
  if (frac < 1e-9) {
    r = p.r[i];
  } else {
    if (i + 1 > p.i_hi) return 0.0;
    if (i >= p.i_lo + 1 && i + 2 <= p.i_hi)
      r = catmull_rom(p.r[i - 1], p.r[i], p.r[i + 1], p.r[i + 2], frac);
    else
      r = (1.0 - frac) * p.r[i] + frac * p.r[i + 1];
  }
  if (!(r > 0.0)) return 0.0;
  ok = true;
  return r;
}

}  // namespace

RenormalizedTrajectory rescale_about(const FlowTrajectory& traj, const SpacetimeCenter& X0,
                                     double tau_lo, double tau_hi, double dtau,
                                     const AxialGrid& out_grid) {
  if (traj.snapshots.empty())
    throw std::invalid_argument("rescale_about: empty trajectory");
  if (out_grid.rule != AxialGrid::Rule::Uniform)
    throw std::invalid_argument("rescale_about: output grid must be uniform");
  if (out_grid.z_lo() > -1.0 || out_grid.z_hi() < 1.0)
    throw std::invalid_argument("rescale_about: output grid must cover |z| <= 1");
  if (!(dtau > 0.0) || !(tau_hi >= tau_lo))
    throw std::invalid_argument("rescale_about: bad tau range");
  const int n = traj.snapshots.front().curve.n;
  if (!X0.perp.empty() && static_cast<int>(X0.perp.size()) != n)
    throw std::invalid_argument("rescale_about: perpendicular offset must have size n");
  if (X0.t0 < traj.snapshots.back().t - 1e-12)
    throw std::invalid_argument("rescale_about: center time precedes the end of the trajectory");
  const double R = CylinderConstants::make(n).radius;

  RenormalizedTrajectory out;
  out.n = n;
  out.center = X0;
  const std::size_t M = out_grid.size();
  std::size_t j0 = 0;
  for (std::size_t j = 1; j < M; ++j)
    if (std::abs(out_grid.z[j]) < std::abs(out_grid.z[j0])) j0 = j;

  const int n_tau = static_cast<int>(std::floor((tau_hi - tau_lo) / dtau + 1e-9)) + 1;
  for (int k = 0; k < n_tau; ++k) {
    const double tau = tau_lo + k * dtau;
    const double t = X0.t0 - std::exp(-tau);
    if (t < traj.snapshots.front().t - 1e-12 || t > traj.snapshots.back().t + 1e-12)
      throw std::out_of_range("rescale_about: tau = " + fmt17(tau) +
                              " needs flow data at t = " + fmt17(t) +
                              " outside the trajectory");
    std::size_t a = 0;
    while (a + 2 < traj.snapshots.size() && traj.snapshots[a + 1].t <= t) ++a;
    const Snapshot& A = traj.snapshots[a];
    const Snapshot& B = traj.snapshots[std::min(a + 1, traj.snapshots.size() - 1)];
    double theta = 0.0;
    if (B.t > A.t) theta = std::clamp((t - A.t) / (B.t - A.t), 0.0, 1.0);
    const double scale = std::exp(0.5 * tau);
    const double inv_scale = std::exp(-0.5 * tau);

    std::vector<double> q(n, 0.0);
    double q_norm_sq = 0.0;
    bool have_perp = false;
    for (std::size_t i = 0; i < X0.perp.size(); ++i) {
      q[i] = -scale * X0.perp[i];
      q_norm_sq += q[i] * q[i];
      if (X0.perp[i] != 0.0) have_perp = true;
    }

    std::vector<double> rbar(M, 0.0);
    std::vector<char> avail(M, 0);
    for (std::size_t j = 0; j < M; ++j) {
      const double z = X0.z0 + out_grid.z[j] * inv_scale;
      bool ok_a = false, ok_b = false;
      double r = 0.0;
      if (theta <= 0.0) {
        r = sample_radius(A.curve, z, ok_a);
        ok_b = ok_a;
      } else if (theta >= 1.0) {
        r = sample_radius(B.curve, z, ok_b);
        ok_a = ok_b;
      } else {
        const double ra = sample_radius(A.curve, z, ok_a);
        const double rb = sample_radius(B.curve, z, ok_b);
        r = (1.0 - theta) * ra + theta * rb;
      }
      if (!ok_a || !ok_b || !(r > 0.0)) continue;
      const double rb_scaled = scale * r;
      if (have_perp) {
        // every axis direction must see the surface wrap the shifted axis
        double disc_min = 1e300;
        for (int i = 0; i < n; ++i)
          disc_min = std::min(disc_min, q[i] * q[i] + rb_scaled * rb_scaled - q_norm_sq);
        if (disc_min < 0.0) continue;
      }
      rbar[j] = rb_scaled;
      avail[j] = 1;
    }

    if (!avail[j0])
      throw NotYetCylindricalError("slice at tau = " + fmt17(tau) +
                                   " is not a graph at the center");
    std::size_t lo = j0, hi = j0;
    while (lo > 0 && avail[lo - 1]) --lo;
    while (hi + 1 < M && avail[hi + 1]) ++hi;
    if (out_grid.z[lo] > -1.0 + 1e-12 || out_grid.z[hi] < 1.0 - 1e-12)
      throw NotYetCylindricalError("slice at tau = " + fmt17(tau) +
                                   " is not a graph over |z| <= 1");

    RenormalizedSlice slice;
    slice.tau = tau;
    slice.t = t;
    CylinderGraph& g = slice.graph;
    g.n = n;
    g.grid = out_grid.slice(lo, hi);
    const std::size_t m = hi - lo + 1;
    g.u0.resize(m);
    g.u1.assign(n, std::vector<double>(m, 0.0));
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t jj = j - lo;
      if (have_perp) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) {
          mean += std::sqrt(q[i] * q[i] + rbar[j] * rbar[j] - q_norm_sq);
          g.u1[i][jj] = q[i];
        }
        g.u0[jj] = mean / n - R;
      } else {
        g.u0[jj] = rbar[j] - R;
      }
    }

    // largest |z| window around the center on which the deviation and its
    // first derivative stay below 0.1
    const double dz = out_grid.spacing;
    auto du = [&](std::size_t jj) {
      if (jj == 0) return (g.u0[1] - g.u0[0]) / dz;
      if (jj + 1 == m) return (g.u0[m - 1] - g.u0[m - 2]) / dz;
      return (g.u0[jj + 1] - g.u0[jj - 1]) / (2.0 * dz);
    };
    auto good = [&](std::size_t j) {
      const std::size_t jj = j - lo;
      return std::abs(g.u0[jj]) < 0.1 && std::abs(du(jj)) < 0.1;
    };
    double rho = 0.0;
    if (good(j0)) {
      std::size_t jr = j0;
      while (jr + 1 <= hi && good(jr + 1)) ++jr;
      std::size_t jl = j0;
      while (jl > lo && good(jl - 1)) --jl;
      rho = std::min(std::abs(out_grid.z[jl]), std::abs(out_grid.z[jr]));
    }
    slice.rho_achieved = rho;
    out.slices.push_back(std::move(slice));
  }
  return out;
}

}  // namespace mcflab
