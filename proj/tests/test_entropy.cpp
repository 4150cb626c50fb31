#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mcflab/common.hpp"
#include "mcflab/entropy.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/solitons.hpp"

using namespace mcflab;

namespace {

// Half-circle profile of the n-sphere of radius R centered at (cz, 0),
// sampled uniformly in arc so the polyline error is uniform.
void circle_profile(double R, double cz, int m, std::vector<double>& z,
                    std::vector<double>& r) {
  z.clear();
  r.clear();
  for (int k = 0; k <= m; ++k) {
    const double phi = M_PI * k / m;  // 0 at the south pole
    z.push_back(cz - R * std::cos(phi));
    r.push_back(R * std::sin(phi));
  }
}

// Gaussian area of the round n-sphere of radius R about a center at distance
// d from its middle, in closed form: the spherical average of e^{zeta cos g}
// is I0 (n=1), sinh(zeta)/zeta (n=2), 2 I1(zeta)/zeta (n=3).
double shifted_sphere_area(int n, double R, double d, double lambda) {
  const double zeta = R * d / (2.0 * lambda);
  const double pre =
      std::pow(4.0 * M_PI * lambda, -0.5 * n) * sphere_area(n) * std::pow(R, n);
  if (n == 2 && zeta > 0.0) {
    // fold e^{zeta} into the Gaussian so large zeta cannot overflow:
    // e^{-(R^2+d^2)/4l} sinh(zeta)/zeta = (e^{-(R-d)^2/4l} - e^{-(R+d)^2/4l})/(2 zeta)
    const double em = std::exp(-(R - d) * (R - d) / (4.0 * lambda));
    const double ep = std::exp(-(R + d) * (R + d) / (4.0 * lambda));
    return pre * (em - ep) / (2.0 * zeta);
  }
  double avg = 0.0;
  if (n == 1)
    avg = zeta == 0.0 ? 1.0 : std::cyl_bessel_i(0.0, zeta);
  else if (n == 2)
    avg = 1.0;
  else if (n == 3)
    avg = zeta == 0.0 ? 1.0 : 2.0 * std::cyl_bessel_i(1.0, zeta) / zeta;
  else
    REQUIRE(false);
  return pre * std::exp(-(R * R + d * d) / (4.0 * lambda)) * avg;
}

}  // namespace

TEST_CASE("angular kernel matches its closed forms") {
  // n = 1: two-point cross-section, exact by construction
  CHECK(scaled_angular_kernel(1, 0.0) == 2.0);
  CHECK(scaled_angular_kernel(1, 3.0) == doctest::Approx(1.0 + std::exp(-6.0)).epsilon(1e-15));

  // c = 0 is the bare cross-section area |S^{n-1}|
  for (int n : {2, 3, 4}) CHECK(scaled_angular_kernel(n, 0.0) == sphere_area(n - 1));

  // n = 2: 2 pi I0(c) e^{-c}; reference values computed with 25-digit
  // arithmetic and frozen.
  CHECK(scaled_angular_kernel(2, 0.3) == doctest::Approx(4.7600194531509101).epsilon(1e-12));
  CHECK(scaled_angular_kernel(2, 2.0) == doctest::Approx(1.9384149594118465).epsilon(1e-12));
  CHECK(scaled_angular_kernel(2, 20.0) == doctest::Approx(0.56410633650873967).epsilon(1e-12));
  CHECK(scaled_angular_kernel(2, 80.0) == doctest::Approx(0.28069057054973859).epsilon(1e-12));

  // n = 3 collapses to an elementary integral: 2 pi (1 - e^{-2c}) / c.
  for (double c : {0.5, 7.0, 300.0, 2.0e4}) {
    const double exact = 2.0 * M_PI * (1.0 - std::exp(-2.0 * c)) / c;
    CHECK(scaled_angular_kernel(3, c) == doctest::Approx(exact).epsilon(1e-12));
  }

  CHECK_THROWS_AS(scaled_angular_kernel(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(scaled_angular_kernel(2, -0.1), std::invalid_argument);
}

TEST_CASE("gaussian area of round spheres matches the closed form") {
  // On-center at the shrinker scale the value is the sphere entropy;
  // reference values computed with 25-digit arithmetic and frozen.
  const double F_exact[5] = {0.0, 1.5203469010662808, 1.4715177646857693,
                             1.4531153743187190, 1.4435763545238687};
  std::vector<double> z, r;
  for (int n : {1, 2, 3}) {
    const double R = std::sqrt(2.0 * n);
    circle_profile(R, 0.0, 4000, z, r);
    const GaussianArea g = gaussian_area(z, r, n, 0.0, 0.0, 1.0);
    CHECK(std::abs(g.value - F_exact[n]) <= 2e-7);
    if (n == 1) {
      // both endpoints sit on the axis at distance R; each end carries the
      // two-point cross-section |S^0| = 2
      const double per_end = std::pow(4.0 * M_PI, -0.5) * 2.0 * std::exp(-0.5);
      CHECK(g.end_weight == doctest::Approx(2.0 * per_end).epsilon(1e-12));
    } else {
      // axis-closed ends have zero cross-section
      CHECK(g.end_weight <= 1e-12);
    }
  }

  // Axial center shift against the closed form (still rho0 = 0).
  circle_profile(2.0, 0.0, 4000, z, r);
  const double g_shift = gaussian_area(z, r, 2, 0.9, 0.0, 0.7).value;
  CHECK(std::abs(g_shift - shifted_sphere_area(2, 2.0, 0.9, 0.7)) <= 2e-7);

  // Perpendicular center shifts exercise the off-axis kernel across a range
  // of concentration parameters.  The polyline chord error scales like the
  // square of the sample count, so sample densely enough for the 2e-7 bar.
  for (int n : {1, 2, 3}) {
    const double R = 1.7;
    circle_profile(R, 0.0, 8000, z, r);
    for (double d : {0.3, 1.1}) {
      for (double lam : {1.0, 0.05}) {
        const double got = gaussian_area(z, r, n, 0.0, d, lam).value;
        const double want = shifted_sphere_area(n, R, d, lam);
        CHECK(std::abs(got - want) <= 2e-7 * std::max(1.0, want));
      }
    }
  }
}

TEST_CASE("gaussian area is scale and translation equivariant") {
  const ShrinkerProfile sh = solve_shrinker_profile(3, ShrinkerKind::CapClosed, 1e-6, 3.0);
  const double base = gaussian_area(sh.z, sh.r, 3, 0.4, 0.6, 0.8).value;

  for (double mu : {0.5, 3.0}) {
    std::vector<double> zs(sh.z.size()), rs(sh.r.size());
    for (std::size_t i = 0; i < sh.z.size(); ++i) {
      zs[i] = mu * sh.z[i];
      rs[i] = mu * sh.r[i];
    }
    const double scaled = gaussian_area(zs, rs, 3, mu * 0.4, mu * 0.6, mu * mu * 0.8).value;
    CHECK(scaled == doctest::Approx(base).epsilon(1e-12));
  }

  // translating profile and center together changes nothing
  std::vector<double> zt(sh.z.size());
  for (std::size_t i = 0; i < sh.z.size(); ++i) zt[i] = sh.z[i] + 5.25;
  const double moved = gaussian_area(zt, sh.r, 3, 0.4 + 5.25, 0.6, 0.8).value;
  CHECK(moved == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("model entropies take their closed-form values") {
  CHECK(entropy_of_model(ModelKind::Plane, 1) == 1.0);
  CHECK(entropy_of_model(ModelKind::Plane, 7) == 1.0);
  CHECK(entropy_of_model(ModelKind::Sphere, 1) ==
        doctest::Approx(1.5203469010662808).epsilon(1e-14));
  CHECK(entropy_of_model(ModelKind::Sphere, 2) ==
        doctest::Approx(1.4715177646857693).epsilon(1e-14));
  CHECK(entropy_of_model(ModelKind::Sphere, 3) ==
        doctest::Approx(1.4531153743187190).epsilon(1e-14));
  // the cylinder's entropy is its spherical factor's
  CHECK(entropy_of_model(ModelKind::Cylinder, 3) == entropy_of_model(ModelKind::Sphere, 2));
  // sphere entropies decrease toward the plane value as n grows
  CHECK(entropy_of_model(ModelKind::Sphere, 2) < entropy_of_model(ModelKind::Sphere, 1));
  CHECK(entropy_of_model(ModelKind::Sphere, 3) > 1.0);
  CHECK_THROWS_AS(entropy_of_model(ModelKind::Sphere, 0), std::invalid_argument);
  CHECK_THROWS_AS(entropy_of_model(ModelKind::Cylinder, 1), std::invalid_argument);
}

TEST_CASE("entropy optimizer recovers sphere and cylinder entropies") {
  std::vector<double> z, r;

  // n = 2 sphere at shrinker scale, centered off the origin to make the
  // center search do work
  circle_profile(2.0, 0.7, 3000, z, r);
  const EntropyResult es = entropy_of_profile(z, r, 2);
  CHECK(std::abs(es.value - 1.4715177646857693) <= 1e-3);
  CHECK(es.z0 == doctest::Approx(0.7).epsilon(1e-2));
  CHECK(es.lambda == doctest::Approx(1.0).epsilon(0.02));
  CHECK(!es.lambda_on_boundary);
  CHECK(es.end_weight <= 1e-12);

  // n = 1 circle
  circle_profile(std::sqrt(2.0), 0.0, 3000, z, r);
  const EntropyResult ec = entropy_of_profile(z, r, 1);
  CHECK(std::abs(ec.value - 1.5203469010662808) <= 1e-3);

  // n = 3 cylinder truncated to [-8, 8]: the scale optimum sits at the
  // shrinker scale, where the window truncation is negligible
  const ProfileCurve cyl = make_cylinder(3, 2.0, -8.0, 8.0, 0.01);
  std::vector<double> zc(cyl.grid.z.begin() + cyl.i_lo, cyl.grid.z.begin() + cyl.i_hi + 1);
  std::vector<double> rc(cyl.r.begin() + cyl.i_lo, cyl.r.begin() + cyl.i_hi + 1);
  const EntropyResult el = entropy_of_profile(zc, rc, 3);
  CHECK(std::abs(el.value - 1.4715177646857693) <= 1e-3);
  CHECK(el.lambda == doctest::Approx(1.0).epsilon(0.05));
  CHECK(!el.lambda_on_boundary);
  CHECK(el.end_weight <= 1e-6);  // the window ends are eight widths out

  CHECK_THROWS_AS(entropy_of_profile({0.0, 1.0}, {1.0}, 2), std::invalid_argument);
}

TEST_CASE("density about the extinction point of a shrinking sphere is constant") {
  // Exact solution: R(t) = sqrt(4 - 4t), extinction at t0 = 1 about the
  // origin.  Perfectly self-similar, so theta is the sphere entropy at all
  // scales.
  const int n = 2;
  FlowTrajectory traj;
  for (double lam : {1.0, 0.7, 0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001}) {
    Snapshot s;
    s.t = 1.0 - lam;
    const double R = 2.0 * std::sqrt(lam);
    s.curve = make_sphere(n, R, 0.0, R / 200.0);  // keep resolution scale-free
    traj.snapshots.push_back(s);
  }
  const DensitySeries d = huisken_density(traj, 0.0, 0.0, 1.0);
  REQUIRE(d.theta.size() == 12);
  for (double th : d.theta) CHECK(std::abs(th - 1.4715177646857693) <= 2e-4);
  CHECK(d.max_step_increase <= 1e-3);
  CHECK(std::abs(d.limit - 1.4715177646857693) <= 1e-3);
}

TEST_CASE("density about a smooth point tends to one") {
  // Same shrinking sphere, but centered at a regular spacetime point: the
  // point (z, rho) = (0, R(1/2)) on the surface at time t0 = 1/2.  The
  // closed form for spheres pins every sample; the limit is 1.
  const int n = 2;
  const double t0 = 0.5;
  const double rho0 = 2.0 * std::sqrt(1.0 - t0);  // on the surface at t0
  FlowTrajectory traj;
  std::vector<double> lams;
  for (int k = 0; k <= 26; ++k) lams.push_back(0.4 * std::pow(10.0, -3.0 * k / 26.0));
  for (std::size_t k = 0; k < lams.size(); ++k) {
    Snapshot s;
    s.t = t0 - lams[k];
    s.curve = make_sphere(n, 2.0 * std::sqrt(1.0 - s.t), 0.0, 0.005);
    traj.snapshots.push_back(s);
  }
  const DensitySeries d = huisken_density(traj, 0.0, rho0, t0);

  for (std::size_t k = 0; k < lams.size(); ++k) {
    const double R = 2.0 * std::sqrt(1.0 - d.t[k]);
    const double want = shifted_sphere_area(n, R, rho0, t0 - d.t[k]);
    CHECK(std::abs(d.theta[k] - want) <= 1e-5);
  }
  CHECK(d.max_step_increase <= 1e-3);
  CHECK(std::abs(d.limit - 1.0) <= 5e-3);

  CHECK_THROWS_AS(huisken_density(traj, 0.0, rho0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(huisken_density(FlowTrajectory{}, 0.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("cylindrical scale of an exact shrinking cylinder saturates") {
  // r(t) = sqrt(4 - 4t) on [-8, 8], extinction t* = 1.  The time span
  // supports j <= -1; the exact cylinder passes at the largest scale.
  const int n = 3;
  auto build = [&](const std::vector<double>& times) {
    FlowTrajectory traj;
    for (double t : times) {
      Snapshot s;
      s.t = t;
      s.curve = make_cylinder(n, std::sqrt(4.0 - 4.0 * t), -8.0, 8.0, 0.01);
      traj.snapshots.push_back(s);
    }
    return traj;
  };

  std::vector<double> times = {0.0};
  for (double s : {-2.0, -1.5, -1.0}) times.push_back(1.0 + s * 0.25);  // j = -1
  const FlowTrajectory traj = build(times);
  const CylindricalScale cs = cylindrical_scale(traj, 0.0, 1.0);
  CHECK(cs.decided);
  CHECK(cs.have_evaluable);
  CHECK(cs.j == -1);
  CHECK(cs.Z == 0.5);
  CHECK(cs.saturated);

  // missing snapshots near the needed times -> nothing evaluable
  const FlowTrajectory bare = build({0.0, 0.9});
  const CylindricalScale undecided = cylindrical_scale(bare, 0.0, 1.0);
  CHECK(!undecided.decided);
  CHECK(!undecided.have_evaluable);

  CHECK_THROWS_AS(cylindrical_scale(FlowTrajectory{}, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cylindrical_scale(traj, 0.0, -5.0), std::invalid_argument);
}

TEST_CASE("cylindrical scale drops below a scale-breaking perturbation") {
  // A ring bump of 7% relative amplitude supported on 0.35 < |z| < 0.75
  // (full strength over 0.45 <= |z| <= 0.65) spoils the j = -1 window but
  // leaves |z| <= 0.35 exactly cylindrical, so the scan settles at j = -2.
  const int n = 3;
  FlowTrajectory traj;
  std::vector<double> times = {0.0};
  for (double s : {-2.0, -1.5, -1.0}) {
    times.push_back(1.0 + s * 0.25);    // j = -1
    times.push_back(1.0 + s * 0.0625);  // j = -2
  }
  for (double t : times) {
    Snapshot s;
    s.t = t;
    s.curve = make_cylinder(n, 1.0, -8.0, 8.0, 0.01);
    const double rc = std::sqrt(4.0 - 4.0 * t);
    for (std::size_t i = 0; i < s.curve.r.size(); ++i) {
      const double z = s.curve.grid.z[i];
      const double bump = cutoff_plateau(std::abs(z) - 0.55, 0.2);
      s.curve.r[i] = rc * (1.0 + 0.07 * bump);
    }
    traj.snapshots.push_back(s);
  }
  const CylindricalScale cs = cylindrical_scale(traj, 0.0, 1.0);
  CHECK(cs.decided);
  CHECK(cs.j == -2);
  CHECK(cs.Z == 0.25);
  CHECK(cs.j_evaluable_max == -1);
  CHECK(!cs.saturated);
}

TEST_CASE("gaussian area input validation") {
  std::vector<double> z = {0.0, 1.0, 2.0}, r = {1.0, 1.5, 1.0};
  CHECK_THROWS_AS(gaussian_area(z, r, 0, 0.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_area(z, r, 2, 0.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_area(z, r, 2, 0.0, -0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_area({0.0, 0.0, 1.0}, r, 2, 0.0, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gaussian_area(z, {1.0, -0.1, 1.0}, 2, 0.0, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gaussian_area({0.0}, {1.0}, 2, 0.0, 0.0, 1.0), std::invalid_argument);
}
