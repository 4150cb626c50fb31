#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "mcflab/flow.hpp"

using namespace mcflab;

namespace {

double cylinder_law(double r0, int n, double t) {
  return std::sqrt(r0 * r0 - 2.0 * (n - 1) * t);
}

}  // namespace

TEST_CASE("neumann cylinder follows the shrinking law exactly") {
  const int n = 3;
  const double r0 = 1.0;
  ProfileCurve p = make_cylinder(n, r0, -1.0, 1.0, 0.02);
  double t = 0.0;
  for (int k = 0; k < 1200; ++k) {
    const double dt = stable_dt(p);
    p = step_profile_flow(p, dt);
    t += dt;
  }
  const double want = cylinder_law(r0, n, t);
  for (std::size_t i = p.i_lo; i <= p.i_hi; ++i)
    CHECK(p.r[i] == doctest::Approx(want).epsilon(0.0).scale(0.0).epsilon(1e-10));
  // and the profile stays flat to roundoff
  CHECK(p.max_radius() - p.min_radius() <= 1e-13);
}

TEST_CASE("neumann cylinder run terminates at the exact pinch time") {
  const int n = 3;
  const double r0 = 1.0;
  ProfileCurve p = make_cylinder(n, r0, -1.0, 1.0, 0.01);
  FlowConfig cfg;
  cfg.t_max = 1.0;
  FlowTrajectory traj = run_to_singularity(p, cfg);
  CHECK(traj.termination == Termination::NeckRadiusThreshold);
  REQUIRE(traj.singular.has_value());
  const double t_star = r0 * r0 / (2.0 * (n - 1));
  CHECK(std::abs(traj.singular->t_star - t_star) <= 0.005 * t_star);
  // the uniform profile terminates once r < 10 dz
  const double r_end = traj.snapshots.back().curve.max_radius();
  CHECK(r_end <= 10 * 0.01 + 1e-6);
  CHECK(r_end >= 10 * 0.01 - 2e-3);
}

TEST_CASE("shrinking spheres reach extinction at R^2/(2n) within 0.5%") {
  for (int n : {2, 3}) {
    CAPTURE(n);
    ProfileCurve p = make_sphere(n, 1.0, 0.0, 0.01);
    FlowConfig cfg;
    cfg.t_max = 1.0;
    FlowTrajectory traj = run_to_singularity(p, cfg);
    CHECK(traj.termination == Termination::CapCollapse);
    REQUIRE(traj.singular.has_value());
    const double t_star = 1.0 / (2.0 * n);
    CAPTURE(traj.singular->t_star);
    CHECK(std::abs(traj.singular->t_star - t_star) <= 0.005 * t_star);
    CHECK(std::abs(traj.singular->z_star) <= 0.05);
  }
}

TEST_CASE("sphere profile and cap positions track the exact solution") {
  const int n = 3;
  ProfileCurve p = make_sphere(n, 1.0, 0.0, 0.01);
  double t = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double dt = stable_dt(p);
    p = step_profile_flow(p, dt);
    t += dt;
  }
  const double R = std::sqrt(1.0 - 2.0 * n * t);
  double sup = 0.0;
  for (std::size_t i = p.i_lo; i <= p.i_hi; ++i) {
    const double z = p.grid.z[i];
    if (std::abs(z) > 0.8 * R) continue;
    sup = std::max(sup, std::abs(p.r[i] - std::sqrt(R * R - z * z)));
  }
  CAPTURE(sup);
  CHECK(sup <= 2e-5);
  CAPTURE(p.cap_left);
  CHECK(std::abs(p.cap_left + R) <= 2e-4);
  CHECK(std::abs(p.cap_right - R) <= 2e-4);
}

TEST_CASE("dumbbell pinches at the neck center") {
  const int n = 3;
  ProfileCurve p = make_dumbbell(n, 0.01);
  // spot-check the datum
  CHECK(p.r[p.grid.size() / 2] == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(p.cap_left == doctest::Approx(-5.0));
  CHECK(p.cap_right == doctest::Approx(5.0));
  FlowConfig cfg;
  cfg.t_max = 1.0;
  cfg.snapshot_every = 25;
  FlowTrajectory traj = run_to_singularity(p, cfg);
  CHECK(traj.termination == Termination::NeckRadiusThreshold);
  REQUIRE(traj.singular.has_value());
  CAPTURE(traj.singular->z_star);
  CAPTURE(traj.singular->t_star);
  CHECK(std::abs(traj.singular->z_star) <= 0.01);
  CHECK(traj.singular->t_star > traj.final_time);
  CHECK(traj.singular->t_star < traj.final_time + 0.01);
  // the bulges survive the neck pinch
  const ProfileCurve& last = traj.snapshots.back().curve;
  auto radius_at = [&](double z) {
    const std::size_t i =
        static_cast<std::size_t>(std::lround((z - last.grid.z_lo()) / last.grid.spacing));
    return last.r[i];
  };
  CHECK(radius_at(3.0) > 0.5);
  CHECK(radius_at(-3.0) > 0.5);
}

TEST_CASE("flow runs are bit-deterministic") {
  const int n = 3;
  FlowConfig cfg;
  cfg.t_max = 1.0;
  FlowTrajectory a = run_to_singularity(make_dumbbell(n, 0.02), cfg);
  FlowTrajectory b = run_to_singularity(make_dumbbell(n, 0.02), cfg);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  CHECK(a.singular->t_star == b.singular->t_star);
  CHECK(a.singular->z_star == b.singular->z_star);
  const auto& ra = a.snapshots.back().curve.r;
  const auto& rb = b.snapshots.back().curve.r;
  CHECK(std::memcmp(ra.data(), rb.data(), ra.size() * sizeof(double)) == 0);
}

TEST_CASE("halving the resolution quarters the error") {
  // Wavy cylinder with compatible Neumann ends; convergence measured by
  // Richardson differences between successive resolutions (dt follows the
  // dz^2 step law, so halving dz also quarters dt).
  const int n = 3;
  const double T = 0.02;
  auto solve = [&](double dz) {
    ProfileCurve p = make_cylinder(n, 1.0, -1.0, 1.0, dz);
    for (std::size_t i = 0; i < p.grid.size(); ++i)
      p.r[i] = 1.0 + 0.1 * std::cos(M_PI * p.grid.z[i]);
    double t = 0.0;
    while (t < T * (1.0 - 1e-12)) {
      const double dt = std::min(stable_dt(p), T - t);
      p = step_profile_flow(p, dt);
      t += dt;
    }
    return p;
  };
  const ProfileCurve p1 = solve(0.08), p2 = solve(0.04), p3 = solve(0.02);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < p1.grid.size(); ++i)
    e1 = std::max(e1, std::abs(p1.r[i] - p2.r[2 * i]));
  for (std::size_t i = 0; i < p2.grid.size(); ++i)
    e2 = std::max(e2, std::abs(p2.r[i] - p3.r[2 * i]));
  CAPTURE(e1);
  CAPTURE(e2);
  CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("a profile inside a shrinking sphere barrier stays inside") {
  const int n = 3;
  // Sphere inside a concentric larger sphere: the margin must stay positive
  // at every step until the inner flow's window collapses.
  {
    ProfileCurve p = make_sphere(n, 1.0, 0.0, 0.02);
    const double Rb0_sq = 1.21;
    double t = 0.0;
    while (p.active_count() >= 30) {
      const double dt = stable_dt(p);
      p = step_profile_flow(p, dt);
      t += dt;
      const double Rb = std::sqrt(Rb0_sq - 2.0 * n * t);
      CHECK(p.cap_left > -Rb);
      CHECK(p.cap_right < Rb);
      double margin = 1e300;
      for (std::size_t i = p.i_lo; i <= p.i_hi; ++i) {
        const double z = p.grid.z[i];
        margin = std::min(margin, std::sqrt(Rb * Rb - z * z) - p.r[i]);
      }
      REQUIRE(margin > 0.0);
    }
  }
  // Dumbbell inside a tight enclosing sphere, checked on snapshots.
  {
    FlowConfig cfg;
    cfg.t_max = 1.0;
    cfg.snapshot_every = 10;
    FlowTrajectory traj = run_to_singularity(make_dumbbell(n, 0.02), cfg);
    const double Rb0_sq = 5.2 * 5.2;
    for (const Snapshot& s : traj.snapshots) {
      const double Rb = std::sqrt(Rb0_sq - 2.0 * n * s.t);
      const ProfileCurve& c = s.curve;
      CHECK(c.z_left() > -Rb);
      CHECK(c.z_right() < Rb);
      double margin = 1e300;
      for (std::size_t i = c.i_lo; i <= c.i_hi; ++i) {
        const double z = c.grid.z[i];
        margin = std::min(margin, std::sqrt(Rb * Rb - z * z) - c.r[i]);
      }
      REQUIRE(margin > 0.0);
    }
  }
}

TEST_CASE("flow error paths") {
  const int n = 3;
  ProfileCurve p = make_cylinder(n, 1.0, -1.0, 1.0, 0.02);
  CHECK_THROWS_AS(step_profile_flow(p, 10.0 * stable_dt(p)), RejectedStepError);
  CHECK_THROWS_AS(step_profile_flow(p, -1.0), RejectedStepError);
  CHECK_THROWS_AS(make_cylinder(n, 1.0, -1.0, 1.0, 0.02, EndCondition::Cap),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_cylinder(n, -1.0, -1.0, 1.0, 0.02), std::invalid_argument);
  // nonpositive radius inside the active range
  ProfileCurve bad = p;
  bad.r[5] = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  // cap without monotone closure
  ProfileCurve badcap = make_sphere(n, 1.0, 0.0, 0.02);
  badcap.r[badcap.i_lo] = badcap.r[badcap.i_lo + 1] + 0.1;
  CHECK_THROWS_AS(badcap.validate(), std::invalid_argument);
  // absurd dt_min reports nonconvergence and carries the partial trajectory
  FlowConfig cfg;
  cfg.dt_min = 1.0;
  try {
    run_to_singularity(make_sphere(n, 1.0, 0.0, 0.02), cfg);
    FAIL("expected NonconvergenceError");
  } catch (const NonconvergenceError& e) {
    CHECK(e.partial.snapshots.size() >= 1);
  }
}
