#pragma once

#include "toss/types.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace toss {

/// Geometry of the spherical projection grid.
struct ProjectionConfig {
  int width = 1024;      // pixels, azimuth
  int height = 64;       // pixels, elevation
  double f_up = 0.0;     // radians, upper vertical FOV bound
  double f_down = 0.0;   // radians, lower vertical FOV bound (stored positive)

  double fov() const { return f_up + f_down; }
  bool valid() const {
    return width >= 2 && height >= 2 && f_up >= 0.0 && f_down > 0.0;
  }
};

/// h x w grid mapping each cell to the nearest projected point and its range.
class RangeImage {
 public:
  static constexpr std::int32_t kEmpty = -1;

  RangeImage() = default;
  explicit RangeImage(const ProjectionConfig& config)
      : config_(config),
        indices_(static_cast<std::size_t>(config.width) * config.height, kEmpty),
        ranges_(static_cast<std::size_t>(config.width) * config.height, 0.0) {}

  const ProjectionConfig& config() const { return config_; }
  int width() const { return config_.width; }
  int height() const { return config_.height; }

  bool occupied(int u, int v) const { return index(u, v) != kEmpty; }
  std::int32_t index(int u, int v) const { return indices_[cell(u, v)]; }
  double range(int u, int v) const { return ranges_[cell(u, v)]; }

  /// Points skipped because their range was zero (or not finite).
  std::size_t skipped_points() const { return skipped_; }
  /// Points whose elevation row fell outside [0, h).
  std::size_t dropped_out_of_fov() const { return dropped_fov_; }
  std::size_t occupied_cells() const { return occupied_count_; }

  void store(int u, int v, std::int32_t point_index, double r) {
    const std::size_t c = cell(u, v);
    if (indices_[c] == kEmpty) {
      ++occupied_count_;
    } else if (r >= ranges_[c]) {
      return;  // nearest point wins
    }
    indices_[c] = point_index;
    ranges_[c] = r;
  }

  void count_skipped() { ++skipped_; }
  void count_dropped_fov() { ++dropped_fov_; }

 private:
  std::size_t cell(int u, int v) const {
    return static_cast<std::size_t>(v) * config_.width + u;
  }

  ProjectionConfig config_;
  std::vector<std::int32_t> indices_;
  std::vector<double> ranges_;
  std::size_t skipped_ = 0;
  std::size_t dropped_fov_ = 0;
  std::size_t occupied_count_ = 0;
};

/// Pixel coordinates of a point under the spherical projection, before
/// flooring. u wraps in azimuth; v may fall outside [0, h) for points
/// outside the vertical FOV.
inline void project_point(const Point3& p, const ProjectionConfig& cfg, double& u,
                          double& v) {
  const double r = p.norm();
  const double yaw = std::atan2(p.y, p.x);
  double sz = p.z / r;
  if (sz > 1.0) sz = 1.0;
  if (sz < -1.0) sz = -1.0;
  const double pitch = std::asin(sz);
  u = 0.5 * (1.0 - yaw / M_PI) * cfg.width;
  v = (1.0 - (pitch + cfg.f_up) / cfg.fov()) * cfg.height;
}

/// Builds the range image of a scan. Zero-range / non-finite points are
/// skipped and counted; points whose row falls outside the grid are dropped
/// and counted. On cell collisions the smaller-range point is kept.
inline RangeImage project(const Scan& scan, const ProjectionConfig& cfg) {
  if (!cfg.valid()) throw std::invalid_argument("project: invalid ProjectionConfig");
  RangeImage image(cfg);
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const Point3& p = scan.points[i];
    if (!p.finite() || p.norm() == 0.0) {
      image.count_skipped();
      continue;
    }
    double uf = 0.0, vf = 0.0;
    project_point(p, cfg, uf, vf);
    int u = static_cast<int>(std::floor(uf));
    u %= cfg.width;
    if (u < 0) u += cfg.width;  // azimuth wrap
    const int v = static_cast<int>(std::floor(vf));
    if (v < 0 || v >= cfg.height) {
      image.count_dropped_fov();
      continue;
    }
    image.store(u, v, static_cast<std::int32_t>(i), p.norm());
  }
  return image;
}

}  // namespace toss
