#include "mcflab/moving_plane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace mcflab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double shoelace(const std::vector<double>& x, const std::vector<double>& y) {
  double a = 0.0;
  const std::size_t m = x.size();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = (i + 1) % m;
    a += x[i] * y[j] - x[j] * y[i];
  }
  return 0.5 * a;
}

int orient(double ax, double ay, double bx, double by, double cx, double cy) {
  const double v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  return v > 0.0 ? 1 : v < 0.0 ? -1 : 0;
}

bool on_segment(double ax, double ay, double bx, double by, double px, double py) {
  return std::min(ax, bx) <= px && px <= std::max(ax, bx) &&
         std::min(ay, by) <= py && py <= std::max(ay, by);
}

// closed-segment intersection (touching counts)
bool segments_meet(double ax, double ay, double bx, double by, double cx,
                   double cy, double dx, double dy) {
  const int o1 = orient(ax, ay, bx, by, cx, cy);
  const int o2 = orient(ax, ay, bx, by, dx, dy);
  const int o3 = orient(cx, cy, dx, dy, ax, ay);
  const int o4 = orient(cx, cy, dx, dy, bx, by);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(ax, ay, bx, by, cx, cy)) return true;
  if (o2 == 0 && on_segment(ax, ay, bx, by, dx, dy)) return true;
  if (o3 == 0 && on_segment(cx, cy, dx, dy, ax, ay)) return true;
  if (o4 == 0 && on_segment(cx, cy, dx, dy, bx, by)) return true;
  return false;
}

double point_segment_distance(double px, double py, double ax, double ay,
                              double bx, double by) {
  const double ux = bx - ax, uy = by - ay;
  const double L2 = ux * ux + uy * uy;
  double t = L2 > 0.0 ? ((px - ax) * ux + (py - ay) * uy) / L2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double qx = ax + t * ux, qy = ay + t * uy;
  return std::hypot(px - qx, py - qy);
}

// Scanline occupancy of the enclosed region, transposed so the sweep always
// runs along the first coordinate.
struct ScanRows {
  double cell = 0.0;
  double c_lo = 0.0, c_hi = 0.0;  // sweep-coordinate bounds
  std::vector<double> row_y;
  std::vector<std::vector<double>> cross;  // sorted crossings, even count
};

ScanRows build_scan(const CrossSection& s, int axis) {
  const std::vector<double>& cx = axis == 0 ? s.x : s.y;
  const std::vector<double>& cy = axis == 0 ? s.y : s.x;
  const std::size_t m = cx.size();

  ScanRows scan;
  scan.cell = s.sample_spacing() / 4.0;
  scan.c_lo = *std::min_element(cx.begin(), cx.end());
  scan.c_hi = *std::max_element(cx.begin(), cx.end());
  const double y_lo = *std::min_element(cy.begin(), cy.end());
  const double y_hi = *std::max_element(cy.begin(), cy.end());

  const std::size_t nrows =
      static_cast<std::size_t>(std::ceil((y_hi - y_lo) / scan.cell)) + 1;
  scan.row_y.resize(nrows);
  scan.cross.resize(nrows);
  for (std::size_t j = 0; j < nrows; ++j)
    scan.row_y[j] = y_lo + (j + 0.5) * scan.cell;

  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = (i + 1) % m;
    const double y0 = cy[i], y1 = cy[k];
    if (y0 == y1) continue;  // horizontal edges carry no crossings
    const double ylo = std::min(y0, y1), yhi = std::max(y0, y1);
    // half-open rule [min, max): each boundary crossing counted exactly once
    const std::ptrdiff_t j0 =
        std::max<std::ptrdiff_t>(0, std::ptrdiff_t(std::ceil((ylo - y_lo) / scan.cell - 0.5)));
    for (std::size_t j = j0; j < nrows && scan.row_y[j] < yhi; ++j) {
      const double y = scan.row_y[j];
      if (y < ylo) continue;
      const double t = (y - y0) / (y1 - y0);
      scan.cross[j].push_back(cx[i] + t * (cx[k] - cx[i]));
    }
  }
  for (std::size_t j = 0; j < nrows; ++j) {
    std::sort(scan.cross[j].begin(), scan.cross[j].end());
    if (scan.cross[j].size() % 2 != 0)
      throw NumericalFailure("scanline parity: odd crossing count at row y = " +
                             fmt17(scan.row_y[j]));
  }
  return scan;
}

// Signed distance of e into the padded occupancy (disjoint ascending
// intervals): positive clearance inside, negative depth outside.
double signed_depth(const std::vector<std::pair<double, double>>& pad, double e) {
  for (std::size_t k = 0; k < pad.size(); ++k) {
    if (e < pad[k].first)
      return -(k == 0 ? pad[k].first - e
                      : std::min(pad[k].first - e, e - pad[k - 1].second));
    if (e <= pad[k].second) return std::min(e - pad[k].first, pad[k].second - e);
  }
  return -(e - pad.back().second);  // unreachable with the half-line pad
}

// Least signed clearance of this row's reflected material, +inf when the row
// carries nothing beyond the plane.  Works in the plane-centered coordinate
// d = c - mu, so a rigid shift of both section and plane is arithmetic-exact
// whenever the shifted crossings are.
double row_margin(const std::vector<double>& cross, double mu, double big) {
  std::vector<std::pair<double, double>> refl;
  for (std::ptrdiff_t k = std::ptrdiff_t(cross.size()) - 2; k >= 0; k -= 2) {
    const double a = cross[k] - mu, b = cross[k + 1] - mu;
    if (b <= 0.0) break;
    refl.emplace_back(-b, -std::max(a, 0.0));  // ascending: built right-to-left
  }
  if (refl.empty()) return kInf;

  std::vector<std::pair<double, double>> pad;  // occupancy left of the plane
  for (std::size_t k = 0; k + 1 < cross.size(); k += 2) {
    const double a = cross[k] - mu, b = cross[k + 1] - mu;
    if (a >= 0.0) break;
    pad.emplace_back(a, std::min(b, 0.0));
  }
  // ...padded by the half-line beyond the plane: contact at the plane itself
  // is never a violation
  if (!pad.empty() && pad.back().second >= 0.0)
    pad.back().second = big;
  else
    pad.emplace_back(0.0, big);

  double m = kInf;
  for (const auto& [ra, rb] : refl) {
    m = std::min(m, signed_depth(pad, ra));
    m = std::min(m, signed_depth(pad, rb));
  }
  // interior protrusions bottom out at pad-gap midpoints
  for (std::size_t k = 1; k < pad.size(); ++k) {
    const double gm = 0.5 * (pad[k - 1].second + pad[k].first);
    for (const auto& [ra, rb] : refl)
      if (ra <= gm && gm <= rb) {
        m = std::min(m, signed_depth(pad, gm));
        break;
      }
  }
  return m;
}

ReflectionReport reflect_on_scan(const ScanRows& scan, double mu, int axis) {
  ReflectionReport rep;
  rep.mu = mu;
  rep.axis = axis;
  const double big = 4.0 * (scan.c_hi - scan.c_lo) + 1.0;
  double m = kInf;
  for (const auto& cross : scan.cross) {
    const double rm = row_margin(cross, mu, big);
    if (rm == kInf) continue;
    ++rep.rows;
    m = std::min(m, rm);
  }
  // no material beyond the plane: clearance of the extreme reflected point
  if (rep.rows == 0) m = 2.0 * mu - (scan.c_hi + scan.c_lo);
  rep.margin = m;
  rep.contained = m >= -1e-12 * std::max(1.0, scan.c_hi - scan.c_lo);
  return rep;
}

void require_region(const CrossSection& s, int axis) {
  s.validate();
  if (axis != 0 && axis != 1)
    throw std::invalid_argument("axis must be 0 (sweep along x) or 1 (along y)");
  if (!s.closed)
    throw InapplicableError(
        "open section: clip to the declared far-field window and close it "
        "before reflecting (symmetry beyond the window is the caller's "
        "assertion)");
}

}  // namespace

void CrossSection::validate() const {
  const std::size_t m = x.size();
  if (y.size() != m) throw std::invalid_argument("cross-section: x/y size mismatch");
  if (m < (closed ? 3u : 2u))
    throw std::invalid_argument("cross-section: too few samples");
  for (std::size_t i = 0; i < m; ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("cross-section: nonfinite sample");
  const std::size_t edges = closed ? m : m - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    const std::size_t j = (i + 1) % m;
    if (x[i] == x[j] && y[i] == y[j])
      throw std::invalid_argument("cross-section: repeated consecutive sample");
  }
  if (!closed) return;

  const double area = shoelace(x, y);
  if (area == 0.0)
    throw std::invalid_argument("cross-section: degenerate (zero enclosed area)");
  if ((area > 0.0) != ccw)
    throw std::invalid_argument(
        "cross-section: orientation flag inconsistent with vertex order");

  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t i2 = (i + 1) % m;
    for (std::size_t j = i + 2; j < m; ++j) {
      const std::size_t j2 = (j + 1) % m;
      if (j2 == i) continue;  // adjacent (wrap-around)
      // bounding-box quick reject
      if (std::max(x[i], x[i2]) < std::min(x[j], x[j2]) ||
          std::max(x[j], x[j2]) < std::min(x[i], x[i2]) ||
          std::max(y[i], y[i2]) < std::min(y[j], y[j2]) ||
          std::max(y[j], y[j2]) < std::min(y[i], y[i2]))
        continue;
      if (segments_meet(x[i], y[i], x[i2], y[i2], x[j], y[j], x[j2], y[j2]))
        throw std::invalid_argument("cross-section: self-intersecting polygon");
    }
  }
}

std::array<double, 4> CrossSection::bounds() const {
  return {*std::min_element(x.begin(), x.end()),
          *std::max_element(x.begin(), x.end()),
          *std::min_element(y.begin(), y.end()),
          *std::max_element(y.begin(), y.end())};
}

double CrossSection::sample_spacing() const {
  const std::size_t m = x.size();
  const std::size_t edges = closed ? m : m - 1;
  std::vector<double> len(edges);
  for (std::size_t i = 0; i < edges; ++i) {
    const std::size_t j = (i + 1) % m;
    len[i] = std::hypot(x[j] - x[i], y[j] - y[i]);
  }
  std::nth_element(len.begin(), len.begin() + edges / 2, len.end());
  return len[edges / 2];
}

CrossSection make_cross_section(std::vector<double> x, std::vector<double> y,
                                bool closed) {
  CrossSection s;
  s.x = std::move(x);
  s.y = std::move(y);
  s.closed = closed;
  if (closed && s.x.size() >= 3 && s.x.size() == s.y.size())
    s.ccw = shoelace(s.x, s.y) > 0.0;
  s.validate();
  return s;
}

CrossSection section_of_profile(const ProfileCurve& p) {
  p.validate();
  std::vector<double> X, Y;
  const std::size_t m = p.active_count();
  X.reserve(2 * m + 2);
  Y.reserve(2 * m + 2);
  if (p.left == EndCondition::Cap) {
    X.push_back(p.cap_left);
    Y.push_back(0.0);
  }
  for (std::size_t i = p.i_lo; i <= p.i_hi; ++i) {
    X.push_back(p.grid.z[i]);
    Y.push_back(p.r[i]);
  }
  if (p.right == EndCondition::Cap) {
    X.push_back(p.cap_right);
    Y.push_back(0.0);
  }
  for (std::size_t i = p.i_hi + 1; i-- > p.i_lo;) {
    X.push_back(p.grid.z[i]);
    Y.push_back(-p.r[i]);
  }
  return make_cross_section(std::move(X), std::move(Y));
}

ReflectionReport reflect_and_test(const CrossSection& s, double mu, int axis) {
  require_region(s, axis);
  if (!std::isfinite(mu)) throw std::invalid_argument("plane offset must be finite");
  return reflect_on_scan(build_scan(s, axis), mu, axis);
}

SymmetryPlane find_symmetry_plane(const CrossSection& s, int axis, double tol) {
  require_region(s, axis);
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw std::invalid_argument("tol must be positive");
  const ScanRows scan = build_scan(s, axis);

  double lo = scan.c_lo, hi = scan.c_hi;
  if (reflect_on_scan(scan, lo, axis).contained)
    throw NoStartPlaneError("section already symmetric-contained at the left "
                            "bounding edge; nothing to bisect");
  SymmetryPlane out;
  out.tol = tol;
  while (hi - lo > tol && out.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    (reflect_on_scan(scan, mid, axis).contained ? hi : lo) = mid;
    ++out.iterations;
  }
  out.mu_star = 0.5 * (lo + hi);
  if (scan.c_hi - out.mu_star <= std::max(2.0 * tol, scan.cell))
    throw NoStartPlaneError(
        "containment first holds only at the right edge of the bounding box "
        "(no interior start plane)");

  // residual: Hausdorff distance between the boundary and its reflection
  // about mu_star (reflection is an isometric involution, so one direction
  // of the sup equals the other)
  const std::vector<double>& cx = axis == 0 ? s.x : s.y;
  const std::vector<double>& cy = axis == 0 ? s.y : s.x;
  const std::size_t m = cx.size();
  double sup = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t k = (j + 1) % m;
      best = std::min(best, point_segment_distance(
                                cx[i], cy[i], 2.0 * out.mu_star - cx[j], cy[j],
                                2.0 * out.mu_star - cx[k], cy[k]));
      if (best == 0.0) break;
    }
    sup = std::max(sup, best);
  }
  out.residual = sup;
  return out;
}

}  // namespace mcflab
