#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcflab {

// Error taxonomy.  Invalid-argument style errors indicate a misuse of an
// interface (bad grids, bad parameters); runtime errors indicate a numerical
// condition discovered while computing (blow-up, loss of monotonicity).

class GridMismatchError : public std::invalid_argument {
 public:
  explicit GridMismatchError(const std::string& what)
      : std::invalid_argument("grid mismatch: " + what) {}
};

class TruncationRiskError : public std::invalid_argument {
 public:
  explicit TruncationRiskError(const std::string& what)
      : std::invalid_argument("truncation risk: " + what) {}
};

class StencilError : public std::invalid_argument {
 public:
  explicit StencilError(const std::string& what)
      : std::invalid_argument("stencil error: " + what) {}
};

class InapplicableError : public std::invalid_argument {
 public:
  explicit InapplicableError(const std::string& what)
      : std::invalid_argument("inapplicable: " + what) {}
};

class NonexponentialError : public std::runtime_error {
 public:
  explicit NonexponentialError(const std::string& what)
      : std::runtime_error("nonexponential series: " + what) {}
};

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double tau_estimate)
      : std::runtime_error("blow-up: " + what), tau_estimate(tau_estimate) {}
  double tau_estimate;  // estimated blow-up time
};

// Numerical failures that should abort a run (CLI exit code 3).
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what)
      : std::runtime_error("numerical failure: " + what) {}
};

// Area of the unit k-sphere S^k embedded in R^{k+1}:
//   |S^k| = 2 pi^{(k+1)/2} / Gamma((k+1)/2).
// |S^0| = 2, |S^1| = 2 pi, |S^2| = 4 pi, |S^3| = 2 pi^2.
double sphere_area(int k);

// Axisymmetric cutoff used when projecting graphs: 1 on |z| <= rho/2,
// 0 on |z| >= rho, cubic smoothstep taper in between.
double cutoff_plateau(double z, double rho);

// Format a double with 17 significant digits (round-trip exact for IEEE
// doubles); used by every CSV/key-value export so outputs are bit-stable.
std::string fmt17(double x);

// FNV-1a 64-bit content hash; used for output manifests.  Not cryptographic.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 1469598103934665603ull);
std::string fnv1a64_hex(const void* data, std::size_t size);

// Least-squares fit of y = intercept + slope * x.  Returns {slope,
// intercept, rms_residual}.  Throws std::invalid_argument on fewer than two
// distinct abscissae.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// In-place Thomas solve of a tridiagonal system; the solution replaces rhs.
// sub[0] and sup[m-1] are ignored.
void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag,
                       std::vector<double>& sup, std::vector<double>& rhs);

// Finite-difference weights on arbitrarily spaced nodes (Fornberg's
// recursion): returns w with w[k][j] the weight of f(nodes[j]) in the
// approximation of the k-th derivative at x0, for k = 0..max_order.
// Requires distinct nodes and max_order < nodes.size().
std::vector<std::vector<double>> fd_weights(double x0,
                                            const std::vector<double>& nodes,
                                            int max_order);

// Catmull-Rom cubic through four equally spaced samples, evaluated at
// fractional position s in [0, 1] between f0 and f1.
inline double catmull_rom(double f_m1, double f0, double f1, double f2, double s) {
  return 0.5 * (2.0 * f0 + s * (f1 - f_m1 +
                s * (2.0 * f_m1 - 5.0 * f0 + 4.0 * f1 - f2 +
                s * (3.0 * (f0 - f1) + f2 - f_m1))));
}

}  // namespace mcflab
