#pragma once

#include "toss/box_fit.hpp"
#include "toss/config.hpp"
#include "toss/ds_voting.hpp"
#include "toss/kitti_io.hpp"
#include "toss/log.hpp"
#include "toss/segmentation.hpp"
#include "toss/synthetic.hpp"
#include "toss/tracker.hpp"
#include "toss/voxel_map.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace toss {

struct FrameInput {
  Scan scan;
  Pose pose;  // sensor -> global
};

/// Supplies frame i. Called twice per frame (tracking pass and map replay);
/// it must return the same data both times.
using FrameProvider = std::function<FrameInput(std::size_t)>;

struct TimingReport {
  std::vector<double> segmentation_s;  // per frame
  std::vector<double> tracking_s;
  std::vector<double> mapping_s;
  double refine_s = 0.0;

  static double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  }
  static double p95(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return v[std::min(v.size() - 1, static_cast<std::size_t>(0.95 * v.size()))];
  }

  std::string summary() const {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed;
    auto row = [&](const char* name, const std::vector<double>& v) {
      os << "  " << name << ": median " << median(v) << " s, p95 " << p95(v)
         << " s\n";
    };
    row("segmentation", segmentation_s);
    row("tracking    ", tracking_s);
    row("mapping     ", mapping_s);
    std::vector<double> total(segmentation_s.size(), 0.0);
    for (std::size_t i = 0; i < total.size(); ++i) {
      total[i] = segmentation_s[i] + tracking_s[i] +
                 (i < mapping_s.size() ? mapping_s[i] : 0.0);
    }
    os << "  refinement  : total " << refine_s << " s\n";
    os << "  runtime/frame [s]: " << median(total) << " (median)\n";
    return os.str();
  }

  /// Long-format CSV: frame,stage,seconds. The refinement pass is one row
  /// with frame = -1.
  void write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("TimingReport: cannot open " + path.string());
    out.precision(9);
    out << "frame,stage,seconds\n";
    for (std::size_t i = 0; i < segmentation_s.size(); ++i) {
      out << i << ",segmentation," << segmentation_s[i] << '\n';
      out << i << ",tracking," << tracking_s[i] << '\n';
      if (i < mapping_s.size()) out << i << ",mapping," << mapping_s[i] << '\n';
    }
    out << "-1,refinement," << refine_s << '\n';
  }
};

struct PipelineResult {
  VoxelMap map{0.2};
  std::vector<std::vector<PointLabel>> labels;  // per frame, per point
  std::vector<RefinedBox> refined;
  std::vector<Track> archive;
  TimingReport timing;
  std::size_t frames = 0;
  std::size_t cost_evaluations = 0;
  std::int64_t ground_points = 0;
  std::int64_t static_points = 0;
  std::int64_t dynamic_points = 0;
};

namespace detail {

struct FrameRecord {
  std::vector<bool> ground_mask;
  std::vector<std::pair<std::int64_t, std::vector<std::int32_t>>> instances;
  Pose pose;
  std::size_t n_points = 0;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace detail

/// Runs the full flow: segmentation -> box fitting -> tracking -> coarse
/// labels -> refinement vote -> static map. Frames are processed strictly in
/// order; map insertion happens in a replay pass after every frame needed by
/// the vote windows has been refined. Deterministic for fixed inputs and
/// config.
inline PipelineResult run_sequence(std::size_t n_frames,
                                   const FrameProvider& frames,
                                   const PipelineConfig& cfg) {
  using clock = std::chrono::steady_clock;
  PipelineResult result;
  result.map = VoxelMap(cfg.voxel_size);
  result.frames = n_frames;
  if (n_frames == 0) return result;

  Tracker tracker(cfg.tracker);
  std::vector<detail::FrameRecord> records(n_frames);

  for (std::size_t f = 0; f < n_frames; ++f) {
    FrameInput input;
    try {
      input = frames(f);
    } catch (const std::exception& e) {
      throw std::runtime_error("frame " + std::to_string(f) + ": " + e.what());
    }
    detail::FrameRecord& rec = records[f];
    rec.pose = input.pose;
    rec.n_points = input.scan.points.size();

    auto t0 = clock::now();
    const RangeImage image = project(input.scan, cfg.projection);
    const std::vector<std::int32_t> ground =
        segment_ground(image, input.scan, cfg.ground);
    rec.ground_mask.assign(rec.n_points, false);
    for (std::int32_t i : ground) rec.ground_mask[i] = true;
    std::vector<std::uint8_t> non_ground(rec.n_points, 1);
    for (std::int32_t i : ground) non_ground[i] = 0;
    const std::vector<std::vector<std::int32_t>> instances =
        cluster_instances(image, input.scan, non_ground, cfg.clustering);
    result.timing.segmentation_s.push_back(detail::seconds_since(t0));

    t0 = clock::now();
    std::vector<Detection> detections;
    detections.reserve(instances.size());
    for (const auto& idx : instances) {
      std::vector<Point3> pts;
      pts.reserve(idx.size());
      for (std::int32_t i : idx) pts.push_back(input.scan.points[i]);
      Detection det;
      det.box = fit_box(transform_points(pts, input.pose));
      det.instance_points = idx;
      det.frame_index = input.scan.frame_index;
      detections.push_back(std::move(det));
    }
    const Tracker::StepResult step =
        tracker.step(input.scan.frame_index, input.scan.timestamp, detections);
    for (std::size_t d = 0; d < detections.size(); ++d) {
      rec.instances.emplace_back(step.track_of_detection[d],
                                 std::move(detections[d].instance_points));
    }
    result.timing.tracking_s.push_back(detail::seconds_since(t0));
  }
  tracker.finish();
  result.archive = tracker.archive();
  result.cost_evaluations = tracker.total_cost_evaluations();

  // final coarse label per track
  std::unordered_map<std::int64_t, bool> coarse_dynamic;
  for (const Track& t : result.archive) {
    coarse_dynamic[t.id] = t.motion_label == MotionLabel::CoarseDynamic;
  }

  // refinement vote over the archive
  std::unordered_map<std::uint64_t, bool> refined_dynamic;
  if (cfg.refine) {
    VoteConfig vote_cfg = cfg.voting;
    vote_cfg.n_frames = static_cast<int>(n_frames);
    if (!vote_cfg.valid()) {
      throw std::runtime_error(
          "refinement needs tau_d < tau_s < n_frames (n_frames = " +
          std::to_string(n_frames) + "); shorten tau_s or disable refinement");
    }
    const auto t0 = clock::now();
    result.refined = refine_sequence(result.archive, vote_cfg);
    result.timing.refine_s = detail::seconds_since(t0);
    for (const RefinedBox& r : result.refined) {
      refined_dynamic[(static_cast<std::uint64_t>(r.frame_index) << 32) |
                      static_cast<std::uint32_t>(r.track_id)] = r.dynamic;
    }
  }

  // replay: label every point and insert ground + static points
  result.labels.resize(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const FrameInput input = frames(f);
    const detail::FrameRecord& rec = records[f];
    if (input.scan.points.size() != rec.n_points) {
      throw std::runtime_error("frame " + std::to_string(f) +
                               ": provider returned different data on replay");
    }
    std::vector<PointLabel>& labels = result.labels[f];
    labels.assign(rec.n_points, PointLabel::Static);
    for (std::size_t i = 0; i < rec.n_points; ++i) {
      if (rec.ground_mask[i]) labels[i] = PointLabel::Ground;
    }
    for (const auto& [track_id, indices] : rec.instances) {
      bool dynamic = coarse_dynamic.at(track_id);
      if (cfg.refine) {
        const auto it = refined_dynamic.find(
            (static_cast<std::uint64_t>(f) << 32) |
            static_cast<std::uint32_t>(track_id));
        if (it != refined_dynamic.end()) dynamic = it->second;
      }
      const PointLabel label = dynamic ? PointLabel::Dynamic : PointLabel::Static;
      for (std::int32_t i : indices) labels[i] = label;
    }

    const auto t0 = clock::now();
    for (std::size_t i = 0; i < rec.n_points; ++i) {
      switch (labels[i]) {
        case PointLabel::Ground:
          ++result.ground_points;
          result.map.insert(rec.pose.apply(input.scan.points[i]));
          break;
        case PointLabel::Static:
          ++result.static_points;
          result.map.insert(rec.pose.apply(input.scan.points[i]));
          break;
        default:
          ++result.dynamic_points;
          break;
      }
    }
    result.timing.mapping_s.push_back(detail::seconds_since(t0));
  }
  return result;
}

inline PipelineResult run_sequence(const SequenceSource& source,
                                   const PipelineConfig& cfg) {
  return run_sequence(
      source.size(),
      [&](std::size_t i) {
        return FrameInput{source.scan(i, cfg.frame_period), source.pose(i)};
      },
      cfg);
}

inline PipelineResult run_sequence(const SyntheticSequence& seq,
                                   const PipelineConfig& cfg) {
  return run_sequence(
      seq.scans.size(),
      [&](std::size_t i) { return FrameInput{seq.scans[i], seq.poses[i]}; }, cfg);
}

}  // namespace toss
