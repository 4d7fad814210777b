#pragma once

#include "toss/range_image.hpp"
#include "toss/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>
#include <vector>

namespace toss {

struct GroundParams {
  double cell_size = 2.0;        // m, x-y grid pitch of the local plane fits
  double ground_dist = 0.25;     // m, point-to-plane acceptance distance
  double max_slope_deg = 15.0;   // deg, max local plane slope
  double seed_margin = 0.3;      // m, band above the cell minimum used as fit seeds
  double sensor_height = 1.73;   // m, sensor height above ground (prior)
  double init_radius = 6.0;      // m, radius for seeding the region growth
  double height_tol = 0.5;       // m, allowed ground height step between cells
  int min_seed_points = 3;
};

struct ClusterParams {
  double d_merge = 0.5;        // m, 3D merge distance between adjacent cells
  int min_cluster_points = 10; // smaller components are discarded
};

/// Ground / instance partition of one scan. Ground indices and the union of
/// the instances are disjoint; every instance has >= min_cluster_points
/// members.
struct SegmentedScan {
  std::vector<std::int32_t> ground_indices;
  std::vector<std::vector<std::int32_t>> instances;
};

namespace detail {

struct GroundCell {
  std::vector<std::int32_t> points;
  double min_z = std::numeric_limits<double>::infinity();
  // plane z = a*x + b*y + c
  double a = 0.0, b = 0.0, c = 0.0;
  bool fit_ok = false;
  bool accepted = false;
};

inline std::uint64_t cell_key(int ix, int iy) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
         static_cast<std::uint32_t>(iy);
}

/// Least-squares plane over the lowest points of a cell. Fails when the seed
/// set is too small or has no 2D spread (vertical structures).
inline void fit_cell_plane(GroundCell& cell, const std::vector<Point3>& pts,
                           const GroundParams& p) {
  std::vector<std::int32_t> seeds;
  for (std::int32_t i : cell.points) {
    if (pts[i].z <= cell.min_z + p.seed_margin) seeds.push_back(i);
  }
  if (static_cast<int>(seeds.size()) < p.min_seed_points) return;

  double sx = 0, sy = 0, sz = 0;
  for (std::int32_t i : seeds) {
    sx += pts[i].x;
    sy += pts[i].y;
    sz += pts[i].z;
  }
  const double n = static_cast<double>(seeds.size());
  const double mx = sx / n, my = sy / n, mz = sz / n;

  double sxx = 0, sxy = 0, syy = 0, sxz = 0, syz = 0;
  for (std::int32_t i : seeds) {
    const double dx = pts[i].x - mx, dy = pts[i].y - my, dz = pts[i].z - mz;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
    sxz += dx * dz;
    syz += dy * dz;
  }
  // reject rank-deficient x-y spreads (walls project to a line)
  const double tr = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  const double lam_min = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  if (lam_min / n < 0.01) return;

  Eigen::Matrix2d m;
  m << sxx, sxy, sxy, syy;
  const Eigen::Vector2d rhs(sxz, syz);
  const Eigen::Vector2d ab = m.ldlt().solve(rhs);
  cell.a = ab.x();
  cell.b = ab.y();
  cell.c = mz - cell.a * mx - cell.b * my;
  const double slope = std::atan(std::hypot(cell.a, cell.b));
  cell.fit_ok = slope <= p.max_slope_deg * M_PI / 180.0;
}

}  // namespace detail

/// Classifies ground points by grid-wise plane fitting with region growing
/// from the sensor footprint outward. Deterministic for fixed input; an empty
/// result is legal (nothing satisfies the ground model).
inline std::vector<std::int32_t> segment_ground(const RangeImage& /*image*/,
                                                const Scan& scan,
                                                const GroundParams& params) {
  using detail::GroundCell;
  const std::vector<Point3>& pts = scan.points;

  std::unordered_map<std::uint64_t, GroundCell> cells;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i].finite()) continue;
    const int ix = static_cast<int>(std::floor(pts[i].x / params.cell_size));
    const int iy = static_cast<int>(std::floor(pts[i].y / params.cell_size));
    GroundCell& c = cells[detail::cell_key(ix, iy)];
    c.points.push_back(static_cast<std::int32_t>(i));
    c.min_z = std::min(c.min_z, pts[i].z);
  }
  for (auto& [key, cell] : cells) detail::fit_cell_plane(cell, pts, params);

  // Seed with near cells whose plane height matches the sensor-height prior,
  // then grow to neighbors with compatible plane heights. The accepted set is
  // a monotone fixpoint, so traversal order does not affect the result.
  auto plane_z = [](const GroundCell& c, double x, double y) {
    return c.a * x + c.b * y + c.c;
  };
  std::deque<std::pair<int, int>> queue;
  for (auto& [key, cell] : cells) {
    if (!cell.fit_ok) continue;
    const int ix = static_cast<int>(static_cast<std::int32_t>(key >> 32));
    const int iy = static_cast<int>(static_cast<std::int32_t>(key & 0xffffffffu));
    const double cx = (ix + 0.5) * params.cell_size;
    const double cy = (iy + 0.5) * params.cell_size;
    if (std::hypot(cx, cy) > params.init_radius) continue;
    if (std::abs(plane_z(cell, cx, cy) + params.sensor_height) > params.height_tol)
      continue;
    cell.accepted = true;
    queue.emplace_back(ix, iy);
  }
  while (!queue.empty()) {
    const auto [ix, iy] = queue.front();
    queue.pop_front();
    const GroundCell& cur = cells.at(detail::cell_key(ix, iy));
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        const auto it = cells.find(detail::cell_key(ix + dx, iy + dy));
        if (it == cells.end() || !it->second.fit_ok || it->second.accepted) continue;
        const double nx = (ix + dx + 0.5) * params.cell_size;
        const double ny = (iy + dy + 0.5) * params.cell_size;
        if (std::abs(plane_z(it->second, nx, ny) - plane_z(cur, nx, ny)) >
            params.height_tol)
          continue;
        it->second.accepted = true;
        queue.emplace_back(ix + dx, iy + dy);
      }
    }
  }

  std::vector<std::int32_t> ground;
  for (const auto& [key, cell] : cells) {
    if (!cell.accepted) continue;
    const double denom = std::sqrt(1.0 + cell.a * cell.a + cell.b * cell.b);
    for (std::int32_t i : cell.points) {
      const double d =
          std::abs(pts[i].z - plane_z(cell, pts[i].x, pts[i].y)) / denom;
      if (d <= params.ground_dist) ground.push_back(i);
    }
  }
  std::sort(ground.begin(), ground.end());
  return ground;
}

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
  }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Connected components over range-image 4-adjacency (azimuth wraps in u).
/// Neighboring cells merge when the 3D distance of their stored points is
/// within d_merge. `non_ground` is a per-point mask sized like the scan.
/// Components are reported as sorted index sets, ordered by smallest member;
/// components below min_cluster_points are dropped.
inline std::vector<std::vector<std::int32_t>> cluster_instances(
    const RangeImage& image, const Scan& scan,
    const std::vector<std::uint8_t>& non_ground, const ClusterParams& params) {
  const int w = image.width();
  const int h = image.height();
  const std::vector<Point3>& pts = scan.points;

  auto usable = [&](int u, int v) {
    if (!image.occupied(u, v)) return false;
    return non_ground[static_cast<std::size_t>(image.index(u, v))] != 0;
  };

  detail::UnionFind uf(static_cast<std::size_t>(w) * h);
  auto cell_id = [w](int u, int v) { return static_cast<std::size_t>(v) * w + u; };
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!usable(u, v)) continue;
      const Point3& p = pts[image.index(u, v)];
      const int ur = (u + 1) % w;  // azimuth wrap-around
      if (usable(ur, v) && distance(p, pts[image.index(ur, v)]) <= params.d_merge) {
        uf.unite(cell_id(u, v), cell_id(ur, v));
      }
      if (v + 1 < h && usable(u, v + 1) &&
          distance(p, pts[image.index(u, v + 1)]) <= params.d_merge) {
        uf.unite(cell_id(u, v), cell_id(u, v + 1));
      }
    }
  }

  std::unordered_map<std::size_t, std::vector<std::int32_t>> components;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!usable(u, v)) continue;
      components[uf.find(cell_id(u, v))].push_back(image.index(u, v));
    }
  }

  std::vector<std::vector<std::int32_t>> instances;
  for (auto& [root, members] : components) {
    if (static_cast<int>(members.size()) < params.min_cluster_points) continue;
    std::sort(members.begin(), members.end());
    instances.push_back(std::move(members));
  }
  std::sort(instances.begin(), instances.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return instances;
}

}  // namespace toss
