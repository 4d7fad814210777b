#pragma once

#include "toss/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace toss {

namespace detail {

struct Pt2 {
  double x, y;
};

inline double cross(const Pt2& o, const Pt2& a, const Pt2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Andrew monotone chain, counter-clockwise, collinear points dropped.
inline std::vector<Pt2> convex_hull(std::vector<Pt2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Pt2& a, const Pt2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Pt2& a, const Pt2& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Pt2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

constexpr double kMinExtent = 1e-3;  // keeps degenerate boxes valid

}  // namespace detail

/// Fits an oriented box to a point cluster: the heading comes from the
/// minimum-area rectangle enclosing the x-y projection (rotating calipers
/// over the convex hull), the center from the rectangle / z extents, with
/// l >= w by convention and theta in [-pi/2, pi/2). Fewer than 3 points or a
/// collinear projection fall back to an axis-aligned box with theta = 0.
inline BBox fit_box(const std::vector<Point3>& points) {
  if (points.empty()) throw std::invalid_argument("fit_box: empty point set");

  double zmin = std::numeric_limits<double>::infinity();
  double zmax = -std::numeric_limits<double>::infinity();
  std::vector<detail::Pt2> flat;
  flat.reserve(points.size());
  for (const Point3& p : points) {
    flat.push_back({p.x, p.y});
    zmin = std::min(zmin, p.z);
    zmax = std::max(zmax, p.z);
  }
  const std::vector<detail::Pt2> hull = detail::convex_hull(std::move(flat));

  BBox box;
  box.cz = 0.5 * (zmin + zmax);
  box.h = std::max(zmax - zmin, detail::kMinExtent);

  if (hull.size() < 3) {
    double xmin = points[0].x, xmax = points[0].x;
    double ymin = points[0].y, ymax = points[0].y;
    for (const Point3& p : points) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    box.cx = 0.5 * (xmin + xmax);
    box.cy = 0.5 * (ymin + ymax);
    box.theta = 0.0;
    box.l = std::max(xmax - xmin, detail::kMinExtent);
    box.w = std::max(ymax - ymin, detail::kMinExtent);
    if (box.l < box.w) std::swap(box.l, box.w);
    return box;
  }

  double best_area = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const detail::Pt2& a = hull[i];
    const detail::Pt2& b = hull[(i + 1) % hull.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (len == 0.0) continue;
    const double dx = (b.x - a.x) / len;
    const double dy = (b.y - a.y) / len;
    double lo_d = std::numeric_limits<double>::infinity(), hi_d = -lo_d;
    double lo_n = lo_d, hi_n = -lo_d;
    for (const detail::Pt2& q : hull) {
      const double d = q.x * dx + q.y * dy;    // along the edge
      const double n = -q.x * dy + q.y * dx;   // perpendicular
      lo_d = std::min(lo_d, d);
      hi_d = std::max(hi_d, d);
      lo_n = std::min(lo_n, n);
      hi_n = std::max(hi_n, n);
    }
    const double ext_d = hi_d - lo_d;
    const double ext_n = hi_n - lo_n;
    if (ext_d * ext_n >= best_area) continue;
    best_area = ext_d * ext_n;

    const double cd = 0.5 * (lo_d + hi_d);
    const double cn = 0.5 * (lo_n + hi_n);
    box.cx = cd * dx - cn * dy;
    box.cy = cd * dy + cn * dx;
    if (ext_d >= ext_n) {
      box.l = ext_d;
      box.w = ext_n;
      box.theta = std::atan2(dy, dx);
    } else {
      box.l = ext_n;
      box.w = ext_d;
      box.theta = std::atan2(dx, -dy);
    }
  }
  // heading is a line direction; canonicalize to [-pi/2, pi/2)
  box.theta = wrap_pi(box.theta);
  if (box.theta >= M_PI / 2.0) box.theta -= M_PI;
  if (box.theta < -M_PI / 2.0) box.theta += M_PI;
  box.l = std::max(box.l, detail::kMinExtent);
  box.w = std::max(box.w, detail::kMinExtent);
  return box;
}

}  // namespace toss
