#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace toss {

/// Wraps an angle to [-pi, pi).
inline double wrap_pi(double a) {
  constexpr double two_pi = 2.0 * M_PI;
  a = std::fmod(a + M_PI, two_pi);
  if (a < 0.0) a += two_pi;
  return a - M_PI;
}

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }

  Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Point3 operator*(double s) const { return {x * s, y * s, z * s}; }

  Eigen::Vector3d eigen() const { return {x, y, z}; }
  static Point3 from_eigen(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }

/// One timestamped LiDAR point cloud in the sensor frame (meters).
struct Scan {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;  // seconds
  std::vector<Point3> points;
};

/// Rigid sensor-to-global transform.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Orthonormal with determinant +1 within tolerance.
  bool valid(double tol = 1e-6) const {
    const Eigen::Matrix3d rrt = rotation * rotation.transpose();
    return (rrt - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }

  Point3 apply(const Point3& p) const {
    return Point3::from_eigen(rotation * p.eigen() + translation);
  }

  /// Composition: (*this) after `first`, i.e. result.apply(p) == this->apply(first.apply(p)).
  Pose compose(const Pose& first) const {
    return {rotation * first.rotation, rotation * first.translation + translation};
  }

  Pose inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }

  static Pose identity() { return {}; }
};

/// Oriented 3D bounding box: center, heading about z, and extents.
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double cz = 0.0;
  double theta = 0.0;  // radians, [-pi, pi)
  double l = 1.0;
  double w = 1.0;
  double h = 1.0;

  Point3 center() const { return {cx, cy, cz}; }
  bool valid() const {
    return l > 0.0 && w > 0.0 && h > 0.0 && std::isfinite(cx) && std::isfinite(cy) &&
           std::isfinite(cz) && std::isfinite(theta) && theta >= -M_PI && theta < M_PI;
  }
};

inline double box_volume(const BBox& b) { return b.l * b.w * b.h; }

enum class PointLabel : std::uint8_t { Ground, Static, Dynamic, Unknown };

/// Applies a rigid transform to every point. Throws on non-finite input,
/// naming the offending index.
inline std::vector<Point3> transform_points(const std::vector<Point3>& points,
                                            const Pose& pose) {
  std::vector<Point3> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].finite()) {
      throw std::invalid_argument("transform_points: non-finite point at index " +
                                  std::to_string(i));
    }
    out.push_back(pose.apply(points[i]));
  }
  return out;
}

}  // namespace toss
