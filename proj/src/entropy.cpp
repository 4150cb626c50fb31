#include "mcflab/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "mcflab/axial_grid.hpp"

namespace mcflab {

double scaled_angular_kernel(int n, double c) {
  if (n < 1) throw std::invalid_argument("scaled_angular_kernel: need n >= 1");
  if (!(c >= 0.0)) throw std::invalid_argument("scaled_angular_kernel: need c >= 0");
  if (n == 1) return 1.0 + std::exp(-2.0 * c);
  if (c == 0.0) return sphere_area(n - 1);
  // The integrand concentrates on a width ~ 1/sqrt(c) boundary layer, so
  // integrate only over it; Gauss-Legendre resolves the analytic layer to
  // near machine precision.
  static const AxialGrid base = AxialGrid::gauss_legendre(1.0, 64);
  const double cut = std::min(M_PI, 12.0 / std::sqrt(c));
  const double half = 0.5 * cut;
  double acc = 0.0;
  for (std::size_t k = 0; k < base.z.size(); ++k) {
    const double th = half * (base.z[k] + 1.0);
    const double s = std::sin(th);
    const double sp = n == 2 ? 1.0 : (n == 3 ? s : std::pow(s, n - 2));
    acc += base.w[k] * std::exp(-c * (1.0 - std::cos(th))) * sp;
  }
  return sphere_area(n - 2) * half * acc;
}

GaussianArea gaussian_area(const std::vector<double>& z, const std::vector<double>& r,
                           int n, double z0, double rho0, double lambda) {
  if (n < 1) throw std::invalid_argument("gaussian_area: need n >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("gaussian_area: lambda must be positive");
  if (!(rho0 >= 0.0)) throw std::invalid_argument("gaussian_area: rho0 must be nonnegative");
  if (z.size() != r.size() || z.size() < 2)
    throw std::invalid_argument("gaussian_area: need matched z/r with two samples or more");
  for (std::size_t i = 1; i < z.size(); ++i)
    if (!(z[i] > z[i - 1]))
      throw std::invalid_argument("gaussian_area: z must be strictly increasing");
  for (double ri : r)
    if (!(ri >= 0.0)) throw std::invalid_argument("gaussian_area: negative radius");

  const double inv4l = 0.25 / lambda;
  const double sub_h = 0.15 * std::sqrt(lambda);
  const double k_axis = sphere_area(n - 1);
  auto rpow = [n](double v) {
    return n == 1 ? 1.0 : (n == 2 ? v : (n == 3 ? v * v : std::pow(v, n - 1)));
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    const double dz = z[i + 1] - z[i], dr = r[i + 1] - r[i];
    const double ds = std::hypot(dz, dr);
    const int m = std::clamp(static_cast<int>(std::ceil(ds / sub_h)), 1, 64);
    const double w = ds / m;
    for (int k = 0; k < m; ++k) {
      const double s = (k + 0.5) / m;
      const double zm = z[i] + s * dz;
      const double rm = r[i] + s * dr;
      const double d2 = (zm - z0) * (zm - z0) + (rm - rho0) * (rm - rho0);
      const double kern =
          rho0 == 0.0 ? k_axis : scaled_angular_kernel(n, 2.0 * rm * rho0 * inv4l);
      acc += rpow(rm) * kern * std::exp(-d2 * inv4l) * w;
    }
  }
  GaussianArea out;
  const double norm = std::pow(4.0 * M_PI * lambda, -0.5 * n);
  out.value = norm * acc;
  // Truncation diagnostic: the integrand density at the two profile ends,
  // i.e. the Gaussian area a unit length of continuation would add there.
  // Ends that close on the axis carry no cross-section and contribute
  // nothing (for n >= 2).
  for (std::size_t e : {std::size_t{0}, z.size() - 1}) {
    const double d2 =
        (z[e] - z0) * (z[e] - z0) + (r[e] - rho0) * (r[e] - rho0);
    const double kern =
        rho0 == 0.0 ? k_axis : scaled_angular_kernel(n, 2.0 * r[e] * rho0 * inv4l);
    out.end_weight += norm * rpow(r[e]) * kern * std::exp(-d2 * inv4l);
  }
  return out;
}

double entropy_of_model(ModelKind kind, int n) {
  if (n < 1) throw std::invalid_argument("entropy_of_model: need n >= 1");
  if (kind == ModelKind::Plane) return 1.0;
  if (kind == ModelKind::Sphere)
    return sphere_area(n) * std::pow(n / (2.0 * M_PI), 0.5 * n) * std::exp(-0.5 * n);
  if (n < 2) throw std::invalid_argument("entropy_of_model: cylinder needs n >= 2");
  return sphere_area(n - 1) * std::pow((n - 1) / (2.0 * M_PI), 0.5 * (n - 1)) *
         std::exp(-0.5 * (n - 1));
}

EntropyResult entropy_of_profile(const std::vector<double>& z,
                                 const std::vector<double>& r, int n) {
  if (z.size() != r.size() || z.size() < 2)
    throw std::invalid_argument("entropy_of_profile: need matched z/r samples");
  const double l_lo = -6.0, l_hi = 6.0;
  auto F = [&](double z0, double l) {
    return gaussian_area(z, r, n, z0, 0.0, std::exp2(l)).value;
  };

  const int grid_n = 41;
  double best = -1.0, best_z0 = 0.0, best_l = 0.0;
  int best_il = 0;
  for (int iz = 0; iz < grid_n; ++iz) {
    const double z0 = z.front() + (z.back() - z.front()) * iz / (grid_n - 1.0);
    for (int il = 0; il < grid_n; ++il) {
      const double l = l_lo + (l_hi - l_lo) * il / (grid_n - 1.0);
      const double v = F(z0, l);
      if (v > best) {
        best = v;
        best_z0 = z0;
        best_l = l;
        best_il = il;
      }
    }
  }
  EntropyResult out;
  out.lambda_on_boundary = best_il == 0 || best_il == grid_n - 1;

  // Alternating golden-section refinement inside the bracketing grid cells.
  const double gz = (z.back() - z.front()) / (grid_n - 1.0);
  const double gl = (l_hi - l_lo) / (grid_n - 1.0);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  auto refine = [&](double center, double span, double lo, double hi, bool is_l) {
    double a = std::max(center - span, lo), b = std::min(center + span, hi);
    double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
    double f1 = is_l ? F(best_z0, c1) : F(c1, best_l);
    double f2 = is_l ? F(best_z0, c2) : F(c2, best_l);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        a = c1;
        c1 = c2;
        f1 = f2;
        c2 = a + phi * (b - a);
        f2 = is_l ? F(best_z0, c2) : F(c2, best_l);
      } else {
        b = c2;
        c2 = c1;
        f2 = f1;
        c1 = b - phi * (b - a);
        f1 = is_l ? F(best_z0, c1) : F(c1, best_l);
      }
    }
    return 0.5 * (a + b);
  };
  for (int round = 0; round < 2; ++round) {
    best_l = refine(best_l, gl, l_lo, l_hi, true);
    best_z0 = refine(best_z0, gz, z.front(), z.back(), false);
  }

  out.value = F(best_z0, best_l);
  out.z0 = best_z0;
  out.lambda = std::exp2(best_l);
  out.end_weight = gaussian_area(z, r, n, best_z0, 0.0, out.lambda).end_weight;
  return out;
}

namespace {

// Active window of a snapshot as a polyline, with cap ends closed off by a
// zero-radius sample at the cap position.
void window_polyline(const ProfileCurve& c, std::vector<double>& z,
                     std::vector<double>& r) {
  z.clear();
  r.clear();
  if (c.left == EndCondition::Cap) {
    z.push_back(c.cap_left);
    r.push_back(0.0);
  }
  for (std::size_t i = c.i_lo; i <= c.i_hi; ++i) {
    z.push_back(c.grid.z[i]);
    r.push_back(c.r[i]);
  }
  if (c.right == EndCondition::Cap) {
    z.push_back(c.cap_right);
    r.push_back(0.0);
  }
}

}  // namespace

DensitySeries huisken_density(const FlowTrajectory& traj, double z0, double rho0,
                              double t0) {
  if (traj.snapshots.empty())
    throw std::invalid_argument("huisken_density: empty trajectory");
  DensitySeries out;
  std::vector<double> zz, rr;
  for (const Snapshot& s : traj.snapshots) {
    if (!(s.t < t0))
      throw std::invalid_argument(
          "huisken_density: center time must lie after every snapshot");
    window_polyline(s.curve, zz, rr);
    out.t.push_back(s.t);
    out.theta.push_back(gaussian_area(zz, rr, s.curve.n, z0, rho0, t0 - s.t).value);
  }
  for (std::size_t k = 1; k < out.t.size(); ++k) {
    if (!(out.t[k] > out.t[k - 1]))
      throw std::invalid_argument("huisken_density: snapshot times must increase");
    out.max_step_increase =
        std::max(out.max_step_increase, out.theta[k] - out.theta[k - 1]);
  }
  const double lam_min = t0 - out.t.back();
  std::vector<double> ls, th;
  for (std::size_t k = 0; k < out.t.size(); ++k) {
    const double lam = t0 - out.t[k];
    if (lam <= 10.0 * lam_min) {
      ls.push_back(lam);
      th.push_back(out.theta[k]);
    }
  }
  out.limit = ls.size() >= 3 ? fit_line(ls, th).intercept : out.theta.back();
  return out;
}

CylindricalScale cylindrical_scale(const FlowTrajectory& traj, double z_star,
                                   double t_star, double eps) {
  if (traj.snapshots.empty())
    throw std::invalid_argument("cylindrical_scale: empty trajectory");
  if (!(eps > 0.0)) throw std::invalid_argument("cylindrical_scale: eps must be positive");
  const int n = traj.snapshots.front().curve.n;
  const double R2 = 2.0 * (n - 1);
  const double t_first = traj.snapshots.front().t;
  const double dz = traj.snapshots.front().curve.grid.spacing;
  if (!(t_star > t_first))
    throw std::invalid_argument("cylindrical_scale: t_star must follow the first snapshot");

  CylindricalScale out;
  // Largest scale the time span could support, smallest worth resolving.
  const int j_hi = static_cast<int>(std::floor(std::log2(std::sqrt((t_star - t_first) / 2.0))));
  const int j_lo = static_cast<int>(std::ceil(std::log2(8.0 * dz)));
  const double ss[3] = {-2.0, -1.5, -1.0};

  for (int j = j_hi; j >= j_lo; --j) {
    const double Z = std::exp2(j);
    const double Z2 = Z * Z;
    const ProfileCurve* snaps[3] = {nullptr, nullptr, nullptr};
    double times[3] = {0, 0, 0};
    bool evaluable = true;
    for (int q = 0; q < 3 && evaluable; ++q) {
      const double target = t_star + ss[q] * Z2;
      double best_gap = 0.05 * Z2;
      for (const Snapshot& s : traj.snapshots) {
        const double gap = std::abs(s.t - target);
        if (gap <= best_gap) {
          best_gap = gap;
          snaps[q] = &s.curve;
          times[q] = s.t;
        }
      }
      if (snaps[q] == nullptr) {
        evaluable = false;
        break;
      }
      const ProfileCurve& c = *snaps[q];
      if (c.grid.z[c.i_lo] > z_star - Z || c.grid.z[c.i_hi] < z_star + Z)
        evaluable = false;
    }
    if (!evaluable) continue;
    if (!out.have_evaluable) {
      out.have_evaluable = true;
      out.j_evaluable_max = j;
    }

    bool pass = true;
    for (int q = 0; q < 3 && pass; ++q) {
      const ProfileCurve& c = *snaps[q];
      const double r_cyl = std::sqrt(R2 * (t_star - times[q]));
      const double h = c.grid.spacing;
      for (std::size_t i = c.i_lo + 1; i < c.i_hi && pass; ++i) {
        const double zi = c.grid.z[i];
        if (std::abs(zi - z_star) > Z) continue;
        const double d1 = (c.r[i + 1] - c.r[i - 1]) / (2.0 * h);
        const double d2 = (c.r[i + 1] - 2.0 * c.r[i] + c.r[i - 1]) / (h * h);
        if (std::abs(c.r[i] / r_cyl - 1.0) > eps || std::abs(d1) > eps ||
            std::abs(Z * d2) > eps)
          pass = false;
      }
    }
    if (pass) {
      out.decided = true;
      out.j = j;
      out.Z = Z;
      out.saturated = j == out.j_evaluable_max;
      break;
    }
  }
  return out;
}

}  // namespace mcflab
