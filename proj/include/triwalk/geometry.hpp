// Copyright 2026 The triwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace triwalk {

enum class Side { left, right };

inline Side other(Side s) { return s == Side::left ? Side::right : Side::left; }
inline const char* to_string(Side s) { return s == Side::left ? "L" : "R"; }

/// Planned foot placement on the ground plane.
struct Footprint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  Side side = Side::left;
  /// True for the alignment steps that end a plan; their length is not R.
  bool closing = false;

  Eigen::Vector2d position() const { return {x, y}; }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double center() const { return 0.5 * (lo + hi); }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
};

inline Interval span(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline Eigen::Vector2d rotate(const Eigen::Vector2d& v, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

/// Largest-area axis-aligned box centred at `center` that fits inside the
/// rectangle with half extents (half_long along `theta`, half_short across
/// it). Returns the box half extents along world x and y.
inline Eigen::Vector2d inscribed_half_extents(double half_long, double half_short, double theta) {
  const double c = std::abs(std::cos(theta));
  const double s = std::abs(std::sin(theta));
  constexpr double kAxisTol = 1e-15;
  if (s <= kAxisTol) return {half_long, half_short};
  if (c <= kAxisTol) return {half_short, half_long};
  // Box (p, q) fits iff p c + q s <= half_long and p s + q c <= half_short.
  auto fits = [&](double p, double q) {
    const double slack = 1e-12 * (half_long + half_short);
    return p >= 0.0 && q >= 0.0 && p * c + q * s <= half_long + slack &&
           p * s + q * c <= half_short + slack;
  };
  Eigen::Vector2d best(0.0, 0.0);
  auto consider = [&](double p, double q) {
    if (fits(p, q) && p * q > best.x() * best.y()) best = {p, q};
  };
  const double det = c * c - s * s;
  if (std::abs(det) > 1e-12) {
    consider((half_long * c - half_short * s) / det, (half_short * c - half_long * s) / det);
  }
  consider(half_long / (2.0 * c), half_long / (2.0 * s));
  consider(half_short / (2.0 * s), half_short / (2.0 * c));
  return best;
}

/// World-axis interval of the inscribed box along axis 0 (x) or 1 (y).
inline Interval inscribed_interval(const Eigen::Vector2d& center, double half_long,
                                   double half_short, double theta, int axis) {
  const Eigen::Vector2d h = inscribed_half_extents(half_long, half_short, theta);
  return {center(axis) - h(axis), center(axis) + h(axis)};
}

inline std::array<Eigen::Vector2d, 4> rectangle_corners(const Eigen::Vector2d& center,
                                                        double half_long, double half_short,
                                                        double theta) {
  return {center + rotate({half_long, half_short}, theta),
          center + rotate({-half_long, half_short}, theta),
          center + rotate({-half_long, -half_short}, theta),
          center + rotate({half_long, -half_short}, theta)};
}

/// Counter-clockwise convex hull (monotone chain).
inline std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0.0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// Distance from p to a counter-clockwise convex polygon; 0 when inside.
inline double distance_outside(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % poly.size()];
    const Eigen::Vector2d e = b - a;
    const double cr = e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x());
    if (cr < 0.0) inside = false;
    const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (a + t * e - p).norm());
  }
  return inside ? 0.0 : best;
}

}  // namespace triwalk
