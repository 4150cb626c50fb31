#include "mcflab/axial_grid.hpp"

#include <algorithm>
#include <cmath>

namespace mcflab {

AxialGrid AxialGrid::uniform(double z_lo, double z_hi, double dz) {
  if (!(dz > 0.0)) throw std::invalid_argument("AxialGrid::uniform: dz must be positive");
  if (!(z_hi > z_lo)) throw std::invalid_argument("AxialGrid::uniform: empty interval");
  const double steps = (z_hi - z_lo) / dz;
  const auto count = static_cast<std::size_t>(std::lround(steps)) + 1;
  if (count < 2 || std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument("AxialGrid::uniform: window not an integer number of steps");
  AxialGrid g;
  g.rule = Rule::Uniform;
  g.spacing = dz;
  g.extent = std::max(std::abs(z_lo), std::abs(z_hi));
  g.z.resize(count);
  g.w.assign(count, dz);
  for (std::size_t i = 0; i < count; ++i) g.z[i] = z_lo + static_cast<double>(i) * dz;
  g.z.back() = z_hi;  // kill accumulated rounding at the far end
  g.w.front() = 0.5 * dz;
  g.w.back() = 0.5 * dz;
  return g;
}

AxialGrid AxialGrid::gauss_legendre(double half_width, int node_count) {
  if (!(half_width > 0.0))
    throw std::invalid_argument("AxialGrid::gauss_legendre: half_width must be positive");
  if (node_count < 2)
    throw std::invalid_argument("AxialGrid::gauss_legendre: need at least two nodes");
  AxialGrid g;
  g.rule = Rule::GaussLegendre;
  g.spacing = 0.0;
  g.extent = half_width;
  const int m = node_count;
  g.z.resize(m);
  g.w.resize(m);
  // Newton iteration on the Legendre recurrence; nodes computed pairwise
  // symmetric so the grid is exactly symmetric about zero.
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      pp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // one clean-up Newton step after convergence
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= m; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        pp = m * (x * p1 - p0) / (x * x - 1.0);
        break;
      }
    }
    const double weight = 2.0 / ((1.0 - x * x) * pp * pp);
    g.z[i] = -half_width * x;  // x descends from ~1, so -x ascends
    g.w[i] = half_width * weight;
    g.z[m - 1 - i] = half_width * x;
    g.w[m - 1 - i] = half_width * weight;
  }
  if (m % 2 == 1) g.z[m / 2] = 0.0;
  return g;
}

bool AxialGrid::matches(const AxialGrid& other, double tol) const {
  if (rule != other.rule || z.size() != other.z.size()) return false;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (std::abs(z[i] - other.z[i]) > tol) return false;
  return true;
}

AxialGrid AxialGrid::slice(std::size_t i_lo, std::size_t i_hi) const {
  if (rule != Rule::Uniform) throw StencilError("slice requires a uniform grid");
  if (i_hi >= z.size() || i_lo > i_hi) throw std::invalid_argument("AxialGrid::slice: bad range");
  AxialGrid g;
  g.rule = Rule::Uniform;
  g.spacing = spacing;
  g.z.assign(z.begin() + i_lo, z.begin() + i_hi + 1);
  g.extent = std::max(std::abs(g.z.front()), std::abs(g.z.back()));
  g.w.assign(g.z.size(), spacing);
  g.w.front() = 0.5 * spacing;
  g.w.back() = 0.5 * spacing;
  return g;
}

double AxialGrid::integrate(const std::vector<double>& f) const {
  if (f.size() != z.size()) throw GridMismatchError("integrate: sample count != node count");
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += w[i] * f[i];
  return s;
}

}  // namespace mcflab
