#pragma once

#include "toss/kitti_io.hpp"
#include "toss/range_image.hpp"
#include "toss/rng.hpp"
#include "toss/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace toss {

/// Infinite ground plane through `origin` with unit `normal`.
struct GroundModel {
  Point3 origin{0.0, 0.0, 0.0};
  Point3 normal{0.0, 0.0, 1.0};
};

struct StaticBox {
  BBox box;  // global frame
};

struct ActorWaypoint {
  std::int64_t frame = 0;
  Point3 center;
};

/// Dynamic actor: a box following a piecewise-linear waypoint path, heading
/// aligned with its motion.
struct Actor {
  double l = 0.5, w = 0.5, h = 1.4;
  std::vector<ActorWaypoint> waypoints;  // frame-indexed, strictly increasing
};

struct SensorModel {
  ProjectionConfig projection;
  double max_range = 60.0;
  double noise_sigma = 0.0;  // range noise, meters
};

/// Deterministic scene: identical spec + seed reproduce bit-identical output.
struct SceneSpec {
  SensorModel sensor;
  std::optional<GroundModel> ground;
  std::vector<StaticBox> static_boxes;
  std::vector<Actor> actors;
  std::vector<Pose> sensor_path;  // one sensor->global pose per frame
  std::uint64_t seed = 0;

  int n_frames() const { return static_cast<int>(sensor_path.size()); }
};

struct TruthTrackPoint {
  int actor = 0;
  std::int64_t frame = 0;
  Point3 center;  // global frame
};

struct SyntheticSequence {
  std::vector<Scan> scans;  // sensor frame
  std::vector<Pose> poses;
  std::vector<std::vector<PointLabel>> labels;  // aligned with scan points
  std::vector<TruthTrackPoint> truth_tracks;
};

namespace detail {

/// Center of an actor at a frame, linear between waypoints, clamped outside.
inline Point3 actor_center(const Actor& a, std::int64_t frame) {
  const auto& wp = a.waypoints;
  if (wp.empty()) throw std::invalid_argument("Actor: no waypoints");
  if (frame <= wp.front().frame) return wp.front().center;
  if (frame >= wp.back().frame) return wp.back().center;
  for (std::size_t i = 1; i < wp.size(); ++i) {
    if (frame > wp[i].frame) continue;
    const double span = static_cast<double>(wp[i].frame - wp[i - 1].frame);
    const double s = static_cast<double>(frame - wp[i - 1].frame) / span;
    return wp[i - 1].center + (wp[i].center - wp[i - 1].center) * s;
  }
  return wp.back().center;
}

inline double actor_heading(const Actor& a, std::int64_t frame) {
  const Point3 c0 = actor_center(a, frame);
  const Point3 c1 = actor_center(a, frame + 1);
  const Point3 d = c1 - c0;
  if (std::hypot(d.x, d.y) < 1e-9) return 0.0;
  return wrap_pi(std::atan2(d.y, d.x));
}

/// Ray / oriented-box distance; hits only from outside (t_near > eps).
inline bool ray_box(const Point3& origin, const Point3& dir, const BBox& b,
                    double& t_hit) {
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  const double ox = origin.x - b.cx, oy = origin.y - b.cy, oz = origin.z - b.cz;
  const double lox = c * ox + s * oy, loy = -s * ox + c * oy;
  const double ldx = c * dir.x + s * dir.y, ldy = -s * dir.x + c * dir.y;
  const double half[3] = {0.5 * b.l, 0.5 * b.w, 0.5 * b.h};
  const double o[3] = {lox, loy, oz};
  const double d[3] = {ldx, ldy, dir.z};
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-12) {
      if (std::abs(o[i]) > half[i]) return false;
      continue;
    }
    double t0 = (-half[i] - o[i]) / d[i];
    double t1 = (half[i] - o[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return false;
  }
  if (t_near <= 1e-9) return false;
  t_hit = t_near;
  return true;
}

inline bool ray_plane(const Point3& origin, const Point3& dir,
                      const GroundModel& g, double& t_hit) {
  const double denom = dir.x * g.normal.x + dir.y * g.normal.y + dir.z * g.normal.z;
  if (std::abs(denom) < 1e-12) return false;
  const Point3 rel = g.origin - origin;
  const double t = (rel.x * g.normal.x + rel.y * g.normal.y + rel.z * g.normal.z) /
                   denom;
  if (t <= 1e-9) return false;
  t_hit = t;
  return true;
}

inline bool point_in_box(const Point3& p, const BBox& b) {
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  const double px = p.x - b.cx, py = p.y - b.cy, pz = p.z - b.cz;
  const double lx = c * px + s * py, ly = -s * px + c * py;
  return std::abs(lx) <= 0.5 * b.l && std::abs(ly) <= 0.5 * b.w &&
         std::abs(pz) <= 0.5 * b.h;
}

}  // namespace detail

/// Casts the sensor's ray grid against all primitives per frame. Ray
/// directions sit at range-image cell centers, so every emitted point
/// projects back into its own cell. The per-frame RNG is split from the
/// master seed; serial and parallel generation agree.
inline SyntheticSequence generate(const SceneSpec& spec) {
  const ProjectionConfig& pc = spec.sensor.projection;
  if (!pc.valid()) throw std::invalid_argument("generate: invalid projection");
  if (spec.sensor_path.empty()) {
    throw std::invalid_argument("generate: empty sensor path");
  }
  SyntheticSequence seq;
  seq.poses = spec.sensor_path;

  for (int f = 0; f < spec.n_frames(); ++f) {
    const Pose& pose = spec.sensor_path[f];
    const Point3 origin = Point3::from_eigen(pose.translation);

    std::vector<BBox> actor_boxes(spec.actors.size());
    for (std::size_t a = 0; a < spec.actors.size(); ++a) {
      const Point3 c = detail::actor_center(spec.actors[a], f);
      actor_boxes[a] = {c.x,
                        c.y,
                        c.z,
                        detail::actor_heading(spec.actors[a], f),
                        spec.actors[a].l,
                        spec.actors[a].w,
                        spec.actors[a].h};
      if (detail::point_in_box(origin, actor_boxes[a])) {
        throw std::runtime_error("generate: actor " + std::to_string(a) +
                                 " intersects the sensor origin at frame " +
                                 std::to_string(f));
      }
      seq.truth_tracks.push_back({static_cast<int>(a), f, c});
    }

    Rng rng = Rng::split(spec.seed, static_cast<std::uint64_t>(f));
    Scan scan;
    scan.frame_index = f;
    scan.timestamp = 0.1 * f;
    std::vector<PointLabel> labels;

    for (int v = 0; v < pc.height; ++v) {
      const double pitch = pc.fov() * (1.0 - (v + 0.5) / pc.height) - pc.f_up;
      for (int u = 0; u < pc.width; ++u) {
        const double yaw = M_PI * (1.0 - 2.0 * (u + 0.5) / pc.width);
        const Point3 dir_s{std::cos(pitch) * std::cos(yaw),
                           std::cos(pitch) * std::sin(yaw), std::sin(pitch)};
        const Point3 dir = Point3::from_eigen(pose.rotation * dir_s.eigen());

        double best_t = spec.sensor.max_range;
        PointLabel label = PointLabel::Unknown;
        double t = 0.0;
        if (spec.ground && detail::ray_plane(origin, dir, *spec.ground, t) &&
            t < best_t) {
          best_t = t;
          label = PointLabel::Ground;
        }
        for (const StaticBox& sb : spec.static_boxes) {
          if (detail::ray_box(origin, dir, sb.box, t) && t < best_t) {
            best_t = t;
            label = PointLabel::Static;
          }
        }
        for (const BBox& ab : actor_boxes) {
          if (detail::ray_box(origin, dir, ab, t) && t < best_t) {
            best_t = t;
            label = PointLabel::Dynamic;
          }
        }
        if (label == PointLabel::Unknown) continue;  // no hit within range

        double range = best_t;
        if (spec.sensor.noise_sigma > 0.0) {
          range = std::max(1e-3, range + rng.gaussian(0.0, spec.sensor.noise_sigma));
        }
        scan.points.push_back(dir_s * range);
        labels.push_back(label);
      }
    }
    seq.scans.push_back(std::move(scan));
    seq.labels.push_back(std::move(labels));
  }
  return seq;
}

/// Straight sensor path with constant step and yaw rate, at fixed height.
inline std::vector<Pose> straight_path(int n_frames, const Point3& start,
                                       const Point3& step_per_frame,
                                       double yaw_rate_per_frame = 0.0) {
  std::vector<Pose> path;
  path.reserve(n_frames);
  for (int f = 0; f < n_frames; ++f) {
    Pose p;
    const double yaw = yaw_rate_per_frame * f;
    p.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    p.translation = (start + step_per_frame * static_cast<double>(f)).eigen();
    path.push_back(p);
  }
  return path;
}

namespace scenes {

inline SensorModel default_sensor() {
  SensorModel s;
  s.projection = {512, 32, 25.0 * M_PI / 180.0, 3.0 * M_PI / 180.0};
  s.max_range = 60.0;
  s.noise_sigma = 0.01;
  return s;
}

/// Walkers crossing a yard of static structures; the end-to-end benchmark
/// scene.
inline SceneSpec crossing_walkers(int n_frames = 200, std::uint64_t seed = 7) {
  SceneSpec spec;
  spec.seed = seed;
  spec.sensor = default_sensor();
  spec.ground = GroundModel{};
  spec.sensor_path = straight_path(n_frames, {0.0, 0.0, 1.2}, {0.02, 0.0, 0.0},
                                   (5.0 * M_PI / 180.0) / n_frames);
  spec.static_boxes = {
      {{14.0, -6.0, 1.25, 0.0, 10.0, 0.4, 2.5}},  // long wall
      {{10.0, 7.0, 1.0, 0.0, 2.0, 2.0, 2.0}},     // crate
      {{20.0, 2.0, 1.5, 0.0, 0.4, 12.0, 3.0}},    // far wall
      {{7.0, 4.5, 0.9, 0.5, 1.2, 1.2, 1.8}},      // rotated kiosk
  };
  Actor w1;
  w1.l = 0.5;
  w1.w = 0.5;
  w1.h = 1.4;
  w1.waypoints = {{0, {6.0, -8.0, 1.1}}, {n_frames - 1, {6.0, 8.0, 1.1}}};
  Actor w2 = w1;
  w2.waypoints = {{0, {2.0, 4.0, 1.1}}, {n_frames - 1, {14.0, -4.0, 1.1}}};
  Actor w3 = w1;
  w3.waypoints = {{0, {16.0, 5.0, 1.1}}, {n_frames - 1, {16.0, -5.0, 1.1}}};
  spec.actors = {w1, w2, w3};
  return spec;
}

/// A parked box periodically split in two by a passing walker; the split
/// sliver spawns short false-dynamic tracks that the vote must flip back.
inline SceneSpec parked_car_jitter(int n_frames = 200, std::uint64_t seed = 11) {
  SceneSpec spec;
  spec.seed = seed;
  spec.sensor = default_sensor();
  spec.ground = GroundModel{};
  spec.sensor_path = straight_path(n_frames, {0.0, 0.0, 1.2}, {0.0, 0.0, 0.0});
  spec.static_boxes = {
      {{8.0, 0.0, 1.0, 0.0, 2.4, 1.6, 1.4}},   // parked car
      {{4.0, -9.0, 1.25, 0.0, 6.0, 0.4, 2.5}}, // background wall
  };
  Actor walker;
  walker.l = 0.4;
  walker.w = 0.4;
  walker.h = 1.7;
  walker.waypoints = {{0, {4.5, -6.0, 1.05}}, {120, {4.5, 6.0, 1.05}},
                      {n_frames - 1, {4.5, 6.0, 1.05}}};
  spec.actors = {walker};
  return spec;
}

/// A walker fully occluded mid-sequence: its track dies, sliver detections
/// at the occluder edge spawn unmatched one-shot tracks, and a new track
/// picks it up on the far side.
inline SceneSpec tracking_gap(int n_frames = 150, std::uint64_t seed = 13) {
  SceneSpec spec;
  spec.seed = seed;
  spec.sensor = default_sensor();
  spec.ground = GroundModel{};
  spec.sensor_path = straight_path(n_frames, {0.0, 0.0, 1.2}, {0.0, 0.0, 0.0});
  spec.static_boxes = {
      {{5.0, -0.9, 0.9, 0.0, 0.4, 1.8, 1.8}},  // occluder panel
  };
  Actor walker;
  walker.l = 0.5;
  walker.w = 0.5;
  walker.h = 1.4;
  walker.waypoints = {{0, {10.0, -8.0, 1.1}}, {n_frames - 1, {10.0, 7.0, 1.1}}};
  spec.actors = {walker};
  return spec;
}

/// 10-degree uphill ground with a crate and a walker.
inline SceneSpec steep_hill(int n_frames = 120, std::uint64_t seed = 17) {
  SceneSpec spec;
  spec.seed = seed;
  spec.sensor = default_sensor();
  const double slope = 10.0 * M_PI / 180.0;
  spec.ground = GroundModel{{0.0, 0.0, 0.0},
                            {-std::sin(slope), 0.0, std::cos(slope)}};
  spec.sensor_path = straight_path(n_frames, {0.0, 0.0, 1.2}, {0.0, 0.0, 0.0});
  // crate resting on the slope at x = 8 (plane height = x * tan(slope))
  const double zc = 8.0 * std::tan(slope);
  spec.static_boxes = {{{8.0, 2.0, zc + 1.0, 0.0, 2.0, 2.0, 2.0}}};
  Actor walker;
  walker.waypoints = {{0, {6.0, -6.0, 6.0 * std::tan(slope) + 1.1}},
                      {n_frames - 1, {6.0, 6.0, 6.0 * std::tan(slope) + 1.1}}};
  spec.actors = {walker};
  return spec;
}

/// Two long walls with a walker moving away down the corridor.
inline SceneSpec long_corridor(int n_frames = 120, std::uint64_t seed = 19) {
  SceneSpec spec;
  spec.seed = seed;
  spec.sensor = default_sensor();
  spec.ground = GroundModel{};
  spec.sensor_path = straight_path(n_frames, {0.0, 0.0, 1.2}, {0.03, 0.0, 0.0});
  spec.static_boxes = {
      {{21.0, 3.0, 1.5, 0.0, 38.0, 0.4, 3.0}},
      {{21.0, -3.0, 1.5, 0.0, 38.0, 0.4, 3.0}},
  };
  Actor walker;
  walker.waypoints = {{0, {6.0, 0.5, 1.1}}, {n_frames - 1, {18.0, 0.5, 1.1}}};
  spec.actors = {walker};
  return spec;
}

/// Scene registry for the CLI. n_frames <= 0 keeps the scene default.
inline SceneSpec by_name(const std::string& name, int n_frames,
                         std::uint64_t seed) {
  auto n = [n_frames](int fallback) { return n_frames > 0 ? n_frames : fallback; };
  if (name == "crossing_walkers") return crossing_walkers(n(200), seed);
  if (name == "parked_car_jitter") return parked_car_jitter(n(200), seed);
  if (name == "tracking_gap") return tracking_gap(n(150), seed);
  if (name == "steep_hill") return steep_hill(n(120), seed);
  if (name == "long_corridor") return long_corridor(n(120), seed);
  throw std::invalid_argument(
      "unknown scene '" + name +
      "' (expected crossing_walkers, parked_car_jitter, tracking_gap, "
      "steep_hill or long_corridor)");
}

}  // namespace scenes

/// Writes a generated sequence in the KITTI layout consumed by
/// SequenceSource: velodyne/*.bin, poses.txt, labels/*.label plus a
/// truth_tracks.csv. Ground -> class 40, static -> 50, dynamic -> 254.
inline void write_sequence(const SyntheticSequence& seq,
                           const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "velodyne");
  fs::create_directories(dir / "labels");
  char name[32];
  for (std::size_t f = 0; f < seq.scans.size(); ++f) {
    std::snprintf(name, sizeof(name), "%06zu", f);
    write_scan(dir / "velodyne" / (std::string(name) + ".bin"), seq.scans[f]);
    std::vector<std::uint32_t> labels;
    labels.reserve(seq.labels[f].size());
    for (PointLabel l : seq.labels[f]) {
      switch (l) {
        case PointLabel::Ground: labels.push_back(40); break;
        case PointLabel::Dynamic: labels.push_back(254); break;
        default: labels.push_back(50); break;
      }
    }
    write_labels(dir / "labels" / (std::string(name) + ".label"), labels);
  }
  write_poses(dir / "poses.txt", seq.poses);

  std::ofstream csv(dir / "truth_tracks.csv");
  csv << "actor,frame,cx,cy,cz\n";
  csv.precision(17);
  for (const TruthTrackPoint& t : seq.truth_tracks) {
    csv << t.actor << ',' << t.frame << ',' << t.center.x << ',' << t.center.y
        << ',' << t.center.z << '\n';
  }
}

}  // namespace toss
