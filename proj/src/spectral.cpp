#include "mcflab/spectral.hpp"

#include <cmath>

namespace mcflab {

namespace {

// \int f g e^{-z^2/4} dz on a shared grid (no angular factors).
double weighted_axial(const AxialGrid& grid, const std::vector<double>& f,
                      const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    s += grid.w[i] * f[i] * g[i] * std::exp(-0.25 * grid.z[i] * grid.z[i]);
  return s;
}

void require_spectral_grid(const AxialGrid& grid) {
  if (grid.half_width() < 8.0)
    throw TruncationRiskError("axial window must cover |z| <= 8 for Gaussian inner products");
}

}  // namespace

void CylinderGraph::validate(bool geometric) const {
  if (n < 2) throw std::invalid_argument("CylinderGraph: need n >= 2");
  if (grid.size() < 2) throw std::invalid_argument("CylinderGraph: empty grid");
  if (u0.size() != grid.size())
    throw GridMismatchError("CylinderGraph: mode-0 samples do not match the grid");
  if (!u1.empty()) {
    if (static_cast<int>(u1.size()) != n)
      throw std::invalid_argument("CylinderGraph: mode-1 needs one field per sphere direction");
    for (const auto& f : u1)
      if (f.size() != grid.size())
        throw GridMismatchError("CylinderGraph: mode-1 samples do not match the grid");
  }
  if (grid.rule == AxialGrid::Rule::Uniform) {
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (std::abs(grid.z[i] - grid.z[i - 1] - grid.spacing) > 1e-12)
        throw GridMismatchError("CylinderGraph: uniform grid spacing drifts beyond 1e-12");
  }
  if (geometric) {
    const double band = std::sqrt(2.0 * (n - 1));
    auto check = [band](const std::vector<double>& f) {
      for (double v : f)
        if (!(std::abs(v) < band))
          throw std::invalid_argument("CylinderGraph: deviation leaves the positive-radius band");
    };
    check(u0);
    for (const auto& f : u1) check(f);
  }
}

double axial_gaussian_integral(const AxialGrid& grid, const std::vector<double>& f,
                               const std::vector<double>& g) {
  if (f.size() != grid.size() || g.size() != grid.size())
    throw GridMismatchError("axial_gaussian_integral: sample count != node count");
  return weighted_axial(grid, f, g);
}

double gaussian_inner(const CylinderGraph& f, const CylinderGraph& g) {
  f.validate();
  g.validate();
  if (f.n != g.n) throw GridMismatchError("gaussian_inner: dimension mismatch");
  if (!f.grid.matches(g.grid)) throw GridMismatchError("gaussian_inner: fields on different grids");
  require_spectral_grid(f.grid);
  const auto cc = CylinderConstants::make(f.n);
  double s = cc.sphere_factor * weighted_axial(f.grid, f.u0, g.u0);
  if (f.has_mode1() && g.has_mode1()) {
    const double angular = cc.sphere_factor / f.n;
    for (int i = 0; i < f.n; ++i) s += angular * weighted_axial(f.grid, f.u1[i], g.u1[i]);
  }
  return cc.prefactor * s;
}

ModeField eval_L(const AxialGrid& grid, const std::vector<double>& f, int mode, int n) {
  if (n < 2) throw std::invalid_argument("eval_L: need n >= 2");
  if (mode != 0 && mode != 1) throw std::invalid_argument("eval_L: mode must be 0 or 1");
  if (grid.rule != AxialGrid::Rule::Uniform)
    throw StencilError("eval_L: 4th-order stencil needs a uniform grid");
  if (grid.size() < 5) throw StencilError("eval_L: need at least 5 nodes");
  if (f.size() != grid.size()) throw GridMismatchError("eval_L: sample count != node count");
  const double h = grid.spacing;
  // Mode 1 picks up the angular Laplacian eigenvalue -(n-1) scaled by
  // 1/R^2 = 1/(2(n-1)), i.e. an extra -1/2 on the zeroth-order term.
  const double order0 = (mode == 0) ? 1.0 : 0.5;
  ModeField out;
  out.grid = grid.slice(2, grid.size() - 3);
  out.v.resize(grid.size() - 4);
  for (std::size_t i = 2; i + 2 < grid.size(); ++i) {
    const double d2 =
        (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * h * h);
    const double d1 = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    out.v[i - 2] = d2 - 0.5 * grid.z[i] * d1 + order0 * f[i];
  }
  return out;
}

SpectralCoefficients project_modes(const CylinderGraph& u, double rho) {
  u.validate();
  if (!(rho >= 1.0)) throw std::invalid_argument("project_modes: rho must be >= 1");
  require_spectral_grid(u.grid);
  if (rho > u.grid.half_width() + 1e-12)
    throw TruncationRiskError("project_modes: cutoff radius exceeds the grid extent");
  const auto cc = CylinderConstants::make(u.n);
  const AxialGrid& grid = u.grid;
  const std::size_t m = grid.size();

  std::vector<double> chi(m), one(m), zline(m), h2(m);
  for (std::size_t i = 0; i < m; ++i) {
    chi[i] = cutoff_plateau(grid.z[i], rho);
    one[i] = 1.0;
    zline[i] = grid.z[i];
    h2[i] = grid.z[i] * grid.z[i] - 2.0;
  }
  std::vector<double> hu0(m);
  for (std::size_t i = 0; i < m; ++i) hu0[i] = u.u0[i] * chi[i];
  std::vector<std::vector<double>> hu1;
  if (u.has_mode1()) {
    hu1.resize(u.n);
    for (int k = 0; k < u.n; ++k) {
      hu1[k].resize(m);
      for (std::size_t i = 0; i < m; ++i) hu1[k][i] = u.u1[k][i] * chi[i];
    }
  }

  SpectralCoefficients sc;
  sc.n = u.n;
  sc.rho = rho;
  sc.b.assign(u.n, 0.0);
  sc.alpha.assign(u.n, 0.0);

  const double S = cc.sphere_factor;
  const double angular1 = S / u.n;
  const double R = cc.radius;

  // Raw expansion coefficients: component over squared norm.
  sc.a = cc.prefactor * S * weighted_axial(grid, hu0, zline) / cc.normz_sq;
  sc.c = cc.prefactor * S * weighted_axial(grid, hu0, one) / cc.norm1_sq;
  sc.alpha0 = cc.prefactor * S * cc.psi0_prefactor * weighted_axial(grid, hu0, h2);
  if (u.has_mode1()) {
    for (int k = 0; k < u.n; ++k) {
      sc.b[k] = cc.prefactor * angular1 * R * weighted_axial(grid, hu1[k], one) / cc.normxi_sq;
      sc.alpha[k] =
          cc.prefactor * angular1 * cc.psi1_prefactor * R * weighted_axial(grid, hu1[k], zline);
    }
  }

  // U_plus by quadrature on the explicit plus-mode projection (the closed
  // form in terms of a, b, c is kept as an independent cross-check);
  // U_minus by complement of the total cut-off energy.
  std::vector<double> p0(m);
  for (std::size_t i = 0; i < m; ++i) p0[i] = sc.a * zline[i] + sc.c;
  double uplus = S * weighted_axial(grid, p0, p0);
  double total = S * weighted_axial(grid, hu0, hu0);
  if (u.has_mode1()) {
    std::vector<double> p1(m, 0.0);
    for (int k = 0; k < u.n; ++k) {
      for (std::size_t i = 0; i < m; ++i) p1[i] = sc.b[k] * R;
      uplus += angular1 * weighted_axial(grid, p1, p1);
      total += angular1 * weighted_axial(grid, hu1[k], hu1[k]);
    }
  }
  sc.U_plus = cc.prefactor * uplus;
  sc.U_zero = sc.alpha0 * sc.alpha0;
  for (int k = 0; k < u.n; ++k) sc.U_zero += sc.alpha[k] * sc.alpha[k];
  const double norm_sq = cc.prefactor * total;
  sc.U_minus = norm_sq - sc.U_plus - sc.U_zero;
  if (sc.U_minus < -1e-8 * std::max(norm_sq, 1e-300))
    throw NumericalFailure("project_modes: negative minus-mode energy beyond tolerance");
  if (sc.U_minus < 0.0) sc.U_minus = 0.0;
  return sc;
}

double closed_form_U_plus(const SpectralCoefficients& sc, const CylinderConstants& cc) {
  double bsq = 0.0;
  for (double bi : sc.b) bsq += bi * bi;
  return cc.normz_sq *
         (sc.a * sc.a + (1.0 - 1.0 / cc.n) * bsq + 0.5 * sc.c * sc.c);
}

}  // namespace mcflab
