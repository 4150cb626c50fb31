#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mcflab/cylinder.hpp"
#include "mcflab/renormalized.hpp"

using namespace mcflab;

namespace {

// Trajectory of an exact shrinking cylinder assembled from the closed-form
// law (isolates the rescaling from the simulator).
FlowTrajectory law_cylinder_trajectory(int n, double r0, double z_half, double dz,
                                       const std::vector<double>& times) {
  FlowTrajectory traj;
  for (double t : times) {
    const double r = std::sqrt(r0 * r0 - 2.0 * (n - 1) * t);
    traj.snapshots.push_back({t, make_cylinder(n, r, -z_half, z_half, dz)});
  }
  traj.final_time = times.back();
  return traj;
}

CylinderGraph flat_graph(int n, const AxialGrid& g) {
  CylinderGraph u;
  u.n = n;
  u.grid = g;
  u.u0.assign(g.size(), 0.0);
  u.u1.assign(n, std::vector<double>(g.size(), 0.0));
  return u;
}

}  // namespace

TEST_CASE("rescaling the exact shrinking cylinder gives u identically zero") {
  const int n = 3;
  const double R = CylinderConstants::make(n).radius;
  const double t0 = 1.0;  // extinction time of the r0 = R cylinder
  std::vector<double> taus, times;
  for (int k = 0; k <= 12; ++k) {
    taus.push_back(0.25 * k);
    times.push_back(t0 - std::exp(-taus.back()));
  }
  FlowTrajectory traj = law_cylinder_trajectory(n, R, 12.5, 0.05, times);
  const AxialGrid out = AxialGrid::uniform(-12.0, 12.0, 0.05);
  SpacetimeCenter X0{0.0, t0, {}};
  RenormalizedTrajectory rt = rescale_about(traj, X0, 0.0, 3.0, 0.25, out);
  REQUIRE(rt.slices.size() == 13);
  for (const RenormalizedSlice& s : rt.slices) {
    CHECK(std::abs(-std::log(t0 - s.t) - s.tau) <= 1e-12);
    double sup = 0.0;
    for (double v : s.graph.u0) sup = std::max(sup, std::abs(v));
    CHECK(sup <= 1e-12);
    CHECK(s.rho_achieved == doctest::Approx(12.0));
  }
}

TEST_CASE("linear-in-time interpolation between snapshots stays accurate") {
  const int n = 3;
  const double R = CylinderConstants::make(n).radius;
  const double t0 = 1.0;
  std::vector<double> times;
  for (double t = 0.0; t <= 0.96 + 1e-12; t += 2e-3) times.push_back(t);
  FlowTrajectory traj = law_cylinder_trajectory(n, R, 12.5, 0.05, times);
  const AxialGrid out = AxialGrid::uniform(-12.0, 12.0, 0.05);
  RenormalizedTrajectory rt = rescale_about(traj, {0.0, t0, {}}, 0.5, 2.5, 0.13, out);
  for (const RenormalizedSlice& s : rt.slices) {
    double sup = 0.0;
    for (double v : s.graph.u0) sup = std::max(sup, std::abs(v));
    // linear-in-t interpolation error bound: (dt^2/8) |r_tt| e^{tau/2} with
    // r(t) = 2 sqrt(1-t), evaluated at the slice time
    const double bound =
        2e-3 * 2e-3 / 8.0 * 0.5 * std::pow(t0 - s.t, -1.5) * std::exp(0.5 * s.tau);
    CHECK(sup <= 2.0 * bound + 1e-12);
  }
}

TEST_CASE("round cylinder is a machine-exact fixed point of the stepper") {
  const int n = 3;
  CylinderGraph u = flat_graph(n, AxialGrid::uniform(-12.0, 12.0, 0.05));
  for (int k = 0; k < 10000; ++k) u = step_renormalized(u, 1e-3);
  double sup = 0.0;
  for (double v : u.u0) sup = std::max(sup, std::abs(v));
  for (const auto& f : u.u1)
    for (double v : f) sup = std::max(sup, std::abs(v));
  CHECK(sup <= 1e-9);
}

TEST_CASE("translation modes grow at the linear rate 1/2") {
  const int n = 3;
  const double eps = 1e-4;
  const CylinderConstants cc = CylinderConstants::make(n);
  CylinderGraph u = flat_graph(n, AxialGrid::uniform(-12.0, 12.0, 0.05));
  for (std::size_t i = 0; i < u.grid.size(); ++i) u.u0[i] = eps * u.grid.z[i];
  for (std::size_t i = 0; i < u.grid.size(); ++i) u.u1[0][i] = eps * cc.radius;
  const SpectralCoefficients before = project_modes(u, 12.0);
  const double dtau = 0.1;
  CylinderGraph v = step_renormalized(u, dtau);
  const SpectralCoefficients after = project_modes(v, 12.0);
  const double want = std::exp(0.5 * dtau);
  CAPTURE(after.a / before.a);
  CAPTURE(after.b[0] / before.b[0]);
  CHECK(std::abs(after.a / before.a - want) <= 1e-5 * want);
  CHECK(std::abs(after.b[0] / before.b[0] - want) <= 1e-5 * want);
}

TEST_CASE("neutral deformation drifts only at the quadratic rate") {
  const int n = 3;
  const double eps = 1e-4;
  const CylinderConstants cc = CylinderConstants::make(n);
  CylinderGraph u = flat_graph(n, AxialGrid::uniform(-12.0, 12.0, 0.05));
  for (std::size_t i = 0; i < u.grid.size(); ++i) {
    const double z = u.grid.z[i];
    u.u0[i] = eps * (z * z - 2.0);
  }
  const double a0 = project_modes(u, 12.0).alpha0;
  const double dtau = 0.1;
  CylinderGraph v = step_renormalized(u, dtau);
  const double a1 = project_modes(v, 12.0).alpha0;
  const double budget = 2.0 * cc.neutral_A * a0 * a0 * dtau;
  CAPTURE(a1 - a0);
  CAPTURE(budget);
  CHECK(std::abs(a1 - a0) <= 1.05 * budget + 1e-11);
  CHECK(a1 - a0 <= 1e-11);  // alpha0 > 0 must decrease
}

TEST_CASE("perpendicular center offset becomes the exact mode-1 field") {
  const int n = 3;
  const double R = CylinderConstants::make(n).radius;
  const double t0 = 1.0, delta = 1e-3;
  std::vector<double> taus, times;
  for (int k = 0; k <= 8; ++k) {
    taus.push_back(0.25 * k);
    times.push_back(t0 - std::exp(-taus.back()));
  }
  FlowTrajectory traj = law_cylinder_trajectory(n, R, 12.5, 0.05, times);
  const AxialGrid out = AxialGrid::uniform(-12.0, 12.0, 0.05);
  RenormalizedTrajectory base = rescale_about(traj, {0.0, t0, {}}, 0.0, 2.0, 0.25, out);
  RenormalizedTrajectory off =
      rescale_about(traj, {0.0, t0, {-delta, 0.0, 0.0}}, 0.0, 2.0, 0.25, out);
  REQUIRE(base.slices.size() == off.slices.size());
  for (std::size_t k = 0; k < base.slices.size(); ++k) {
    const auto& gb = base.slices[k].graph;
    const auto& go = off.slices[k].graph;
    const double tau = off.slices[k].tau;
    const double want = delta * std::exp(0.5 * tau);
    for (std::size_t j = 0; j < go.u0.size(); ++j) {
      CHECK(std::abs(go.u1[0][j] - want) <= 1e-14);
      CHECK(go.u1[1][j] == 0.0);
      CHECK(go.u1[2][j] == 0.0);
      // the mode-0 part changes only at second order in the offset
      CHECK(std::abs(go.u0[j] - gb.u0[j]) <= 3e-6);
    }
  }
}

TEST_CASE("dumbbell neck slices become cylindrical near the pinch") {
  const int n = 3;
  FlowConfig cfg;
  cfg.t_max = 1.0;
  cfg.snapshot_every = 5;
  FlowTrajectory traj = run_to_singularity(make_dumbbell(n, 0.02), cfg);
  REQUIRE(traj.termination == Termination::NeckRadiusThreshold);
  const double t_star = traj.singular->t_star;
  const double tau_end = -std::log(t_star - traj.snapshots.back().t);
  // stay inside the recorded time range: e^{-tau} <= t_star - t_first
  const double tau_begin =
      std::max(tau_end - 1.2, -std::log(t_star - traj.snapshots.front().t) + 0.05);
  const AxialGrid out = AxialGrid::uniform(-12.0, 12.0, 0.05);
  RenormalizedTrajectory rt = rescale_about(traj, {traj.singular->z_star, t_star, {}},
                                            tau_begin, tau_end - 0.4, 0.2, out);
  REQUIRE(rt.slices.size() >= 4);
  for (const RenormalizedSlice& s : rt.slices) {
    const std::size_t mid = s.graph.u0.size() / 2;
    CHECK(std::abs(s.graph.u0[mid]) < 0.1);
    CHECK(s.rho_achieved >= 1.0);
  }
}

TEST_CASE("renormalized error paths") {
  const int n = 3;
  const double R = CylinderConstants::make(n).radius;
  const double t0 = 1.0;
  std::vector<double> times;
  for (double t = 0.0; t <= 0.9 + 1e-12; t += 0.05) times.push_back(t);
  FlowTrajectory traj = law_cylinder_trajectory(n, R, 12.5, 0.05, times);
  const AxialGrid out = AxialGrid::uniform(-12.0, 12.0, 0.05);
  // tau outside the covered time range
  CHECK_THROWS_AS(rescale_about(traj, {0.0, t0, {}}, -1.0, -1.0, 0.1, out),
                  std::out_of_range);
  // center time before the end of the trajectory
  CHECK_THROWS_AS(rescale_about(traj, {0.0, 0.5, {}}, 1.0, 1.0, 0.1, out),
                  std::invalid_argument);
  // bad perpendicular offset size
  CHECK_THROWS_AS(rescale_about(traj, {0.0, t0, {1.0}}, 1.0, 1.0, 0.1, out),
                  std::invalid_argument);
  // a center beyond the end of the surface is not graphical
  {
    FlowConfig cfg;
    cfg.t_max = 1.0;
    cfg.snapshot_every = 5;
    FlowTrajectory dumb = run_to_singularity(make_dumbbell(n, 0.02), cfg);
    const double ts = dumb.singular->t_star;
    CHECK_THROWS_AS(
        rescale_about(dumb, {5.2, ts, {}}, 4.0, 4.0, 0.1, out),
        NotYetCylindricalError);
  }
  // stepper validity band
  {
    CylinderGraph u = flat_graph(n, AxialGrid::uniform(-12.0, 12.0, 0.1));
    for (double& v : u.u0) v = 0.4999 * R;
    CHECK_THROWS_AS(step_renormalized(u, 2.0), BlowUpError);
  }
  // stepper needs a uniform grid
  {
    CylinderGraph u = flat_graph(n, AxialGrid::gauss_legendre(12.0, 64));
    CHECK_THROWS_AS(step_renormalized(u, 0.1), StencilError);
  }
}
