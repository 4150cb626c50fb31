#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcflab/common.hpp"
#include "mcflab/flow.hpp"

namespace mcflab {

// Discrete moving-plane machinery on planar cross-sections: reflect the part
// of a section beyond a candidate plane, test whether the reflection sits
// inside the rest, and bisect for the symmetry plane.
//
// Containment is evaluated on a scanline rasterization of the enclosed
// region: rows at 1/4 of the input sample spacing, occupancy by even-odd
// crossing parity (orientation-independent), exact crossing abscissae within
// each row.  Per row the reflected material is compared against the
// occupancy on the other side of the plane, padded by the half-line beyond
// the plane so that contact *at* the plane itself never counts as a
// violation; the row margin is the least signed axial clearance of the
// reflected intervals (negative = protrusion depth).

class NoStartPlaneError : public std::runtime_error {
 public:
  explicit NoStartPlaneError(const std::string& what)
      : std::runtime_error("no start plane: " + what) {}
};

struct CrossSection {
  std::vector<double> x, y;  // ordered boundary samples
  bool closed = true;        // closed polygon (region) vs open chain
  bool ccw = true;           // orientation of the stored order (closed only)

  // sizes match, >= 3 closed / >= 2 open, finite, no repeated consecutive
  // samples; closed sections must be simple with nonzero area and an
  // orientation flag consistent with the vertex order
  void validate() const;
  std::array<double, 4> bounds() const;  // {x_lo, x_hi, y_lo, y_hi}
  double sample_spacing() const;         // median edge length
};

// Sets the orientation flag from the shoelace sign and validates.
CrossSection make_cross_section(std::vector<double> x, std::vector<double> y,
                                bool closed = true);

// Axis-containing cross-section of a rotationally symmetric body: the profile
// chain and its mirror image through the axis, closed through the cap apexes.
// Truncated (Dirichlet/Neumann) ends are closed by a vertical edge -- the
// section is clipped at the declared window, and symmetry of the surface
// beyond it is the caller's assertion.
CrossSection section_of_profile(const ProfileCurve& p);

struct ReflectionReport {
  double mu = 0.0;
  int axis = 0;
  bool contained = false;
  double margin = 0.0;    // least signed clearance of the reflected part
                          // inside the other side; negative = violation depth
  std::size_t rows = 0;   // scan rows carrying reflected material
};

// Reflects the part of the enclosed region with coordinate[axis] > mu across
// the plane coordinate[axis] = mu and reports the signed containment margin
// in the < mu side.  axis 0 sweeps along x, axis 1 along y.  Open chains are
// rejected: clip to the declared far-field window and close the section
// first (symmetry beyond the window is the caller's assertion).
ReflectionReport reflect_and_test(const CrossSection& s, double mu, int axis);

struct SymmetryPlane {
  double mu_star = 0.0;
  double residual = 0.0;  // asymmetry of the section about mu_star: Hausdorff
                          // distance between the boundary and its reflection
  double tol = 0.0;
  std::size_t iterations = 0;
};

// Bisects the infimum plane offset at which the reflection test first holds,
// starting from the bounding box.  Throws NoStartPlaneError when containment
// only ever holds at the degenerate right edge of the box.
SymmetryPlane find_symmetry_plane(const CrossSection& s, int axis, double tol);

}  // namespace mcflab
