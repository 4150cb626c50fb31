#include "mcflab/common.hpp"

#include <cstdio>

namespace mcflab {

double sphere_area(int k) {
  if (k < 0) throw std::invalid_argument("sphere_area: negative dimension");
  const double kp1 = 0.5 * (k + 1);
  return 2.0 * std::pow(M_PI, kp1) / std::tgamma(kp1);
}

double cutoff_plateau(double z, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("cutoff_plateau: rho must be positive");
  const double a = std::abs(z);
  if (a <= 0.5 * rho) return 1.0;
  if (a >= rho) return 0.0;
  const double s = (a - 0.5 * rho) / (0.5 * rho);  // in (0,1)
  return 1.0 - s * s * (3.0 - 2.0 * s);
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a64_hex(const void* data, std::size_t size) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data, size)));
  return buf;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  const std::size_t m = x.size();
  if (m < 2) throw std::invalid_argument("fit_line: need at least two samples");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / m);
  return f;
}

void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag,
                       std::vector<double>& sup, std::vector<double>& rhs) {
  const std::size_t m = diag.size();
  if (m == 0 || sub.size() != m || sup.size() != m || rhs.size() != m)
    throw std::invalid_argument("solve_tridiagonal: inconsistent band sizes");
  for (std::size_t i = 1; i < m; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[m - 1] /= diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

std::vector<std::vector<double>> fd_weights(double x0,
                                            const std::vector<double>& nodes,
                                            int max_order) {
  const int nn = static_cast<int>(nodes.size());
  if (nn == 0 || max_order < 0 || max_order >= nn)
    throw std::invalid_argument("fd_weights: need 0 <= max_order < nodes.size()");
  // Fornberg's recursion; c[j][k] is the weight of f(nodes[j]) for the k-th
  // derivative.
  std::vector<std::vector<double>> c(nn, std::vector<double>(max_order + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < nn; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      if (c3 == 0.0) throw std::invalid_argument("fd_weights: repeated node");
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<std::vector<double>> w(max_order + 1, std::vector<double>(nn, 0.0));
  for (int k = 0; k <= max_order; ++k)
    for (int j = 0; j < nn; ++j) w[k][j] = c[j][k];
  return w;
}

}  // namespace mcflab
