#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mcflab/solitons.hpp"

using namespace mcflab;

namespace {

// Axis expansion of the translator graph, derived by balancing the ODE
// u''/(1+u'^2) + (n-1) u'/x = 1 order by order at x = 0:
//   a2 = 1/(2n), a4 = 1/(4 n^3 (n+2)),
//   a6 = (80 a2^2 a4 - 32 a2^5) / (6 (n+4))   (zero at n = 3).
double tip_series6(int n, double x) {
  const double a2 = 1.0 / (2.0 * n);
  const double a4 = 1.0 / (4.0 * std::pow(n, 3) * (n + 2.0));
  const double a6 =
      (80.0 * a2 * a2 * a4 - 32.0 * std::pow(a2, 5)) / (6.0 * (n + 4.0));
  return a2 * x * x + a4 * std::pow(x, 4) + a6 * std::pow(x, 6);
}

std::size_t index_of(const std::vector<double>& xs, double x) {
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i] - x) < 1e-12) return i;
  REQUIRE(false);
  return 0;
}

}  // namespace

TEST_CASE("finite-difference weights reproduce the classic uniform stencils") {
  const double h = 0.37;
  const std::vector<double> nodes = {-2 * h, -h, 0.0, h, 2 * h};
  const auto w = fd_weights(0.0, nodes, 2);
  const double d1[5] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
  const double d2[5] = {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
  for (int j = 0; j < 5; ++j) {
    CHECK(w[1][j] == doctest::Approx(d1[j] / h).epsilon(1e-13));
    CHECK(w[2][j] == doctest::Approx(d2[j] / (h * h)).epsilon(1e-13));
    CHECK(w[0][j] == (j == 2 ? 1.0 : 0.0));
  }
  // interpolation weights at an off-node point must sum to one
  const auto wi = fd_weights(0.4 * h, nodes, 1);
  double s = 0;
  for (int j = 0; j < 5; ++j) s += wi[0][j];
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(fd_weights(0.0, {1.0, 1.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(fd_weights(0.0, {1.0, 2.0}, 2), std::invalid_argument);
}

TEST_CASE("bowl tip matches the regular axis expansion") {
  for (int n : {2, 3}) {
    const SolitonProfile p = solve_bowl(n, 12.0, 1e-8);
    CHECK(p.residual <= 1e-8);
    // headline check at x = 0.01 against the leading parabola
    const std::size_t i01 = index_of(p.x, 0.01);
    CHECK(std::abs(p.u[i01] - 0.01 * 0.01 / (2.0 * n)) <= 1e-8);
    // the full sixth-order series at x = 0.1 and x = 0.2
    for (double x : {0.1, 0.2}) {
      const std::size_t i = index_of(p.x, x);
      CHECK(std::abs(p.u[i] - tip_series6(n, x)) <= 1e-10);
    }
    // convexity and monotone slope on the sampled range
    for (std::size_t i = 2; i < p.x.size(); ++i) CHECK(p.du[i] > p.du[i - 1]);
  }
}

TEST_CASE("bowl far field approaches the shallow paraboloid law") {
  for (int n : {2, 3}) {
    const SolitonProfile p = solve_bowl(n, 1000.0, 1e-8);
    const double u_end = p.u.back();
    const double ratio = u_end * 2.0 * (n - 1) / (1000.0 * 1000.0);
    CHECK(ratio >= 0.99);
    CHECK(ratio <= 1.01);
  }
}

TEST_CASE("bowl shape is invariant under tip translation") {
  const SolitonProfile base = solve_bowl(3, 12.0, 1e-8);
  const SolitonProfile shifted = solve_bowl(3, 12.0, 1e-8, 5.0);
  REQUIRE(base.x.size() == shifted.x.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < base.x.size(); ++i) {
    CHECK(base.x[i] == shifted.x[i]);
    sup = std::max(sup, std::abs(shifted.u[i] - 5.0 - base.u[i]));
    CHECK(shifted.du[i] == base.du[i]);  // slope dynamics never see u
  }
  CHECK(sup <= 1e-10);
}

TEST_CASE("bowl solves are bit-deterministic") {
  const SolitonProfile a = solve_bowl(3, 50.0, 1e-8);
  const SolitonProfile b = solve_bowl(3, 50.0, 1e-8);
  REQUIRE(a.u.size() == b.u.size());
  CHECK(std::memcmp(a.u.data(), b.u.data(), a.u.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.du.data(), b.du.data(), a.du.size() * sizeof(double)) == 0);
}

TEST_CASE("bowl height/radius interpolation invert each other") {
  const SolitonProfile p = solve_bowl(3, 100.0, 1e-8);
  for (double z : {0.001, 0.5, 3.0, 70.0, 1500.0}) {
    const double x = bowl_radius(p, z);
    CHECK(bowl_height(p, x) == doctest::Approx(z).epsilon(1e-12));
  }
  CHECK(bowl_radius(p, 0.0) == 0.0);
  CHECK_THROWS_AS(bowl_radius(p, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(bowl_radius(p, 1e9), std::invalid_argument);
  CHECK_THROWS_AS(bowl_height(p, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(bowl_height(p, 101.0), std::invalid_argument);
}

TEST_CASE("bowl snapshot tracks the simulator over many steps") {
  const int n = 3;
  const SolitonProfile bowl = solve_bowl(n, 14.0, 1e-8);
  const double dz = 0.01;
  ProfileCurve p = bowl_as_profile(bowl, 0.0, -1.0, 25.0, dz);
  REQUIRE(p.left == EndCondition::Cap);
  CHECK(p.cap_left == doctest::Approx(0.0).epsilon(1e-12));

  const double dt = stable_dt(p);
  const int steps = 200;
  for (int k = 0; k < steps; ++k) p = step_profile_flow(p, dt);
  const ProfileCurve exact = bowl_as_profile(bowl, steps * dt, -1.0, 25.0, dz);

  // compare away from the pinned far (Dirichlet) end and the cap band
  const double z_skip = std::max(p.cap_left, exact.cap_left) + 0.5;
  double sup = 0.0;
  for (std::size_t i = std::max(p.i_lo, exact.i_lo); i <= p.i_hi; ++i) {
    if (p.grid.z[i] < z_skip) continue;
    if (p.grid.z[i] > 24.0) break;
    sup = std::max(sup, std::abs(p.r[i] - exact.r[i]));
  }
  CHECK(sup <= 2e-6);
  // the tip advances at unit speed
  CHECK(p.cap_left == doctest::Approx(steps * dt).epsilon(0.02));
}

TEST_CASE("bowl trajectory snapshots are consistent translates") {
  const SolitonProfile bowl = solve_bowl(3, 30.0, 1e-8);
  const std::vector<double> times = {-3.0, -2.0, -1.0};
  const FlowTrajectory traj = bowl_trajectory(bowl, times, -6.0, 20.0, 0.05);
  REQUIRE(traj.snapshots.size() == 3);
  CHECK(traj.termination == Termination::TimeLimit);
  CHECK(!traj.singular.has_value());
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(traj.snapshots[k].t == times[k]);
    CHECK(traj.snapshots[k].curve.cap_left == doctest::Approx(times[k]).epsilon(1e-12));
  }
  // the tip moves at unit speed, so the last snapshot is the first one
  // shifted by the elapsed time: r(z, t2) = r(z - (t2 - t0), t0).  The first
  // snapshot is the analytic initial data, so the difference measures the
  // simulation error accumulated over two time units.
  const ProfileCurve& s0 = traj.snapshots[0].curve;
  const ProfileCurve& s2 = traj.snapshots[2].curve;
  const std::size_t shift = static_cast<std::size_t>(std::lround(2.0 / 0.05));
  double sup = 0.0;
  for (std::size_t i = s2.i_lo; i <= s2.i_hi && i - shift <= s0.i_hi; ++i) {
    if (s2.grid.z[i] < s2.cap_left + 0.5) continue;  // skip the cap band
    sup = std::max(sup, std::abs(s2.r[i] - s0.r[i - shift]));
  }
  CHECK(sup <= 2e-4);
  CHECK_THROWS_AS(bowl_trajectory(bowl, {}, -6.0, 20.0, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(bowl_trajectory(bowl, {0.0, 0.0}, -6.0, 20.0, 0.05),
                  std::invalid_argument);
}

TEST_CASE("cylinder and sphere shrinkers are exact") {
  for (int n : {2, 3, 4}) {
    const ShrinkerProfile cyl = solve_shrinker_profile(n, ShrinkerKind::Cylinder, 1e-12);
    const double R = std::sqrt(2.0 * (n - 1));
    for (double r : cyl.r) CHECK(r == R);
    CHECK(cyl.residual <= 1e-12);

    const ShrinkerProfile sph = solve_shrinker_profile(n, ShrinkerKind::Sphere, 1e-12);
    CHECK(sph.residual <= 1e-12);
    const std::size_t mid = sph.z.size() / 2;
    CHECK(sph.r[mid] == doctest::Approx(std::sqrt(2.0 * n)).epsilon(1e-12));
  }
  // n=3 cylinder radius is exactly 2
  const ShrinkerProfile c3 = solve_shrinker_profile(3, ShrinkerKind::Cylinder, 1e-12);
  CHECK(c3.r[0] == 2.0);
}

TEST_CASE("cap-closed shrinker family closes at the requested height") {
  const int n = 3;
  const double R = std::sqrt(2.0 * (n - 1));
  const double rho = std::sqrt(2.0 * n);
  const ShrinkerProfile p = solve_shrinker_profile(n, ShrinkerKind::CapClosed, 1e-6, 3.0);
  CHECK(p.closure_height == 3.0);
  CHECK(std::abs(p.z.front()) <= 1e-9);       // reaches the equatorial plane
  CHECK(std::abs(p.z.back() - 3.0) <= 1e-6);  // seed sits just below the tip
  CHECK(p.r.back() <= 2e-4);
  CHECK(p.equator_radius > R);    // boundary circle slightly outside the cylinder
  CHECK(p.equator_radius < rho);  // but inside the sphere radius
  CHECK(p.r[0] == doctest::Approx(p.equator_radius).epsilon(1e-12));
  // stays inside the sphere radius everywhere and dips inside the cylinder
  // radius beyond the equatorial band
  for (std::size_t i = 0; i < p.z.size(); ++i) {
    CHECK(p.r[i] < rho);
    if (p.z[i] >= 2.0) CHECK(p.r[i] < R);
  }
  // z strictly increasing (graphical profile all the way to the cap)
  for (std::size_t i = 1; i < p.z.size(); ++i) CHECK(p.z[i] > p.z[i - 1]);

  // a taller member hugs the cylinder tighter at the equator
  const ShrinkerProfile q = solve_shrinker_profile(n, ShrinkerKind::CapClosed, 1e-6, 4.5);
  CHECK(q.closure_height == 4.5);
  CHECK(q.equator_radius > R);
  CHECK(q.equator_radius - R < p.equator_radius - R);

  // at the sphere height the construction reproduces the round sphere
  const ShrinkerProfile s = solve_shrinker_profile(n, ShrinkerKind::CapClosed, 1e-6, rho);
  double sup = 0.0;
  for (std::size_t i = 0; i < s.z.size(); ++i) {
    const double exact = std::sqrt(std::max(0.0, rho * rho - s.z[i] * s.z[i]));
    sup = std::max(sup, std::abs(s.r[i] - exact));
  }
  CHECK(sup <= 1e-6);

  // determinism
  const ShrinkerProfile p2 = solve_shrinker_profile(n, ShrinkerKind::CapClosed, 1e-6, 3.0);
  REQUIRE(p2.r.size() == p.r.size());
  CHECK(std::memcmp(p2.r.data(), p.r.data(), p.r.size() * sizeof(double)) == 0);
}

TEST_CASE("cap-closed shrinker evolves self-similarly through the simulator") {
  const int n = 3;
  const ShrinkerProfile sh = solve_shrinker_profile(n, ShrinkerKind::CapClosed, 1e-6, 3.0);

  // Linear interpolation of the stored shrinker samples.  The arclength
  // integrator clusters samples where the profile turns, so this resolves the
  // cap, and the interpolation error cancels between the initial data and the
  // rescaled reference below (both read the same table at nearby arguments).
  auto sample = [&sh](double z) {
    auto it = std::upper_bound(sh.z.begin(), sh.z.end(), z);
    std::size_t k = (it == sh.z.begin()) ? 0 : static_cast<std::size_t>(it - sh.z.begin()) - 1;
    if (k + 1 >= sh.z.size()) k = sh.z.size() - 2;
    const double s = (z - sh.z[k]) / (sh.z[k + 1] - sh.z[k]);
    return sh.r[k] + s * (sh.r[k + 1] - sh.r[k]);
  };

  // One flow step from t = -1; the self-similar law predicts
  // r(z, -1+dt) = sqrt(1-dt) * u(z / sqrt(1-dt)).  Returns the sup deviation
  // away from the held boundary circle and the cap band.
  auto one_step_defect = [&](double dz) {
    const double z_top = dz * std::ceil((sh.closure_height + 0.25) / dz);
    ProfileCurve p;
    p.n = n;
    p.grid = AxialGrid::uniform(0.0, z_top, dz);
    p.r.assign(p.grid.size(), 0.0);
    // The member meets the plane z = 0 at a nonzero angle, so this is a
    // boundary circle held fixed, not a symmetry plane.
    p.left = EndCondition::Dirichlet;
    p.right = EndCondition::Cap;
    p.cap_right = sh.closure_height;
    p.i_lo = 0;
    std::size_t i = 0;
    for (; i < p.grid.size(); ++i) {
      if (p.grid.z[i] > sh.closure_height - 0.5 * dz) break;
      p.r[i] = sample(p.grid.z[i]);
    }
    p.i_hi = i - 1;
    p.validate();

    const double dt = stable_dt(p);
    const ProfileCurve stepped = step_profile_flow(p, dt);
    const double lam = std::sqrt(1.0 - dt);
    double sup = 0.0;
    for (std::size_t j = p.i_lo; j <= p.i_hi; ++j) {
      const double z = p.grid.z[j];
      if (z < 0.15 || z > sh.closure_height - 0.5) continue;
      sup = std::max(sup, std::abs(stepped.r[j] - lam * sample(z / lam)));
    }
    return sup;
  };

  const double coarse = one_step_defect(0.005);
  const double fine = one_step_defect(0.0025);
  // Both resolutions sit at the interpolation floor of the stored shrinker
  // table (the flow's own one-step error is below it), so the bound is
  // absolute rather than a refinement ratio.
  CHECK(coarse <= 3e-8);
  CHECK(fine <= 3e-8);
}

TEST_CASE("exact models carry the closed-form radius laws") {
  const ExactModel cyl = exact_model(ModelKind::Cylinder, 3);
  CHECK(cyl.unit_radius() == 2.0);
  CHECK(cyl.radius_at(-0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const ExactModel sph = exact_model(ModelKind::Sphere, 3);
  CHECK(sph.unit_radius() == doctest::Approx(std::sqrt(6.0)).epsilon(1e-15));
  const ExactModel pl = exact_model(ModelKind::Plane, 3);
  CHECK(std::isinf(pl.radius_at(-1.0)));
  CHECK(std::isinf(pl.radius_at(7.0)));
  CHECK_THROWS_AS(sph.radius_at(0.0), std::invalid_argument);
  CHECK_THROWS_AS(exact_model(ModelKind::Cylinder, 1), std::invalid_argument);
  CHECK_THROWS_AS(exact_model(ModelKind::Sphere, 0), std::invalid_argument);
}

TEST_CASE("soliton and shrinker error paths") {
  CHECK_THROWS_AS(solve_bowl(1, 100.0, 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(solve_bowl(3, 5.0, 1e-8), std::invalid_argument);
  // impossible tolerance -> numerical failure, not silence
  CHECK_THROWS_AS(solve_bowl(3, 12.0, 1e-30), NumericalFailure);

  CHECK_THROWS_AS(solve_shrinker_profile(1, ShrinkerKind::Cylinder, 1e-12),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_shrinker_profile(3, ShrinkerKind::CapClosed, 1e-6, -1.0),
                  std::invalid_argument);
  // closure beyond the validated range reports the usable span
  try {
    solve_shrinker_profile(3, ShrinkerKind::CapClosed, 1e-6, 500.0);
    CHECK(false);
  } catch (const ShootingBracketError& e) {
    CHECK(std::string(e.what()).find("closure heights") != std::string::npos);
  }
  CHECK_THROWS_AS(solve_shrinker_profile(3, ShrinkerKind::CapClosed, 1e-6, 0.1),
                  ShootingBracketError);

  const SolitonProfile bowl = solve_bowl(3, 12.0, 1e-8);
  CHECK_THROWS_AS(bowl_as_profile(bowl, 0.0, -10.0, -5.0, 0.01), InapplicableError);
  CHECK_THROWS_AS(bowl_as_profile(bowl, 0.0, -1.0, 1000.0, 0.01), std::invalid_argument);
}
