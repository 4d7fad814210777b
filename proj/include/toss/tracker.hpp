#pragma once

#include "toss/association.hpp"
#include "toss/kalman.hpp"
#include "toss/types.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace toss {

enum class TrackStatus : std::uint8_t { Tentative, Confirmed, Dead };
enum class MotionLabel : std::uint8_t { CoarseStatic, CoarseDynamic };

struct TrackHistoryEntry {
  std::int64_t frame_index = 0;
  BBox box;  // measured detection box, global frame
  std::vector<std::int32_t> instance_points;
};

/// Persistent object hypothesis. History frame indices are strictly
/// increasing; Dead tracks are never re-associated.
struct Track {
  std::int64_t id = 0;
  KalmanState state;
  std::vector<TrackHistoryEntry> history;
  int hits = 0;
  int consecutive_hits = 0;
  int misses = 0;  // consecutive unassociated frames
  TrackStatus status = TrackStatus::Tentative;
  MotionLabel motion_label = MotionLabel::CoarseStatic;
  double max_displacement = 0.0;  // exact max pairwise center distance

  void append_history(TrackHistoryEntry entry) {
    if (!history.empty() && entry.frame_index <= history.back().frame_index) {
      throw std::invalid_argument("Track: history frames must strictly increase");
    }
    const Point3 c = entry.box.center();
    for (const TrackHistoryEntry& e : history) {
      max_displacement = std::max(max_displacement, distance(e.box.center(), c));
    }
    history.push_back(std::move(entry));
  }
};

/// Coarse dynamic/static call: a track is dynamic when its maximum center
/// displacement exceeds max(d_move, alpha * max(l, w)) of its median box.
/// The size term keeps partial-occlusion centroid jumps on large objects
/// from reading as motion.
inline MotionLabel classify_track(const Track& track, double d_move,
                                  double alpha) {
  if (track.history.size() < 2) {
    throw std::invalid_argument("classify_track: needs >= 2 history entries");
  }
  std::vector<double> ls, ws;
  ls.reserve(track.history.size());
  ws.reserve(track.history.size());
  for (const TrackHistoryEntry& e : track.history) {
    ls.push_back(e.box.l);
    ws.push_back(e.box.w);
  }
  const std::size_t mid = (ls.size() - 1) / 2;
  std::nth_element(ls.begin(), ls.begin() + mid, ls.end());
  std::nth_element(ws.begin(), ws.begin() + mid, ws.end());
  const double gate = std::max(d_move, alpha * std::max(ls[mid], ws[mid]));
  return track.max_displacement > gate ? MotionLabel::CoarseDynamic
                                       : MotionLabel::CoarseStatic;
}

struct TrackerParams {
  bool hierarchical = true;  // associator choice
  int k = 5;
  double cost_gate = 3.0;
  int min_hits = 2;
  int max_age = 3;
  double d_move = 0.75;  // m
  double alpha = 0.5;
  double grid_cell_size = 2.0;   // m, candidate-search hash pitch
  double radius_cap = 40.0;      // m, candidate-search radius cap
  double dt_default = 0.1;       // s, when timestamps are absent
  NoiseParams noise;
};

/// Kalman multi-object tracker. Single-threaded state machine: frames are
/// presented strictly in order, one at a time.
class Tracker {
 public:
  explicit Tracker(TrackerParams params = {}) : params_(std::move(params)) {}

  struct StepResult {
    std::vector<std::int64_t> track_of_detection;  // aligned with detections
    AssociationResult association;
  };

  /// Predict, associate, update, spawn, age. Unmatched detections spawn
  /// Tentative tracks; tracks die after max_age consecutive misses and move
  /// to the archive with their full history.
  StepResult step(std::int64_t frame_index, double timestamp,
                  const std::vector<Detection>& detections) {
    if (has_frame_ && frame_index <= last_frame_) {
      throw std::invalid_argument("Tracker: out-of-order frame " +
                                  std::to_string(frame_index));
    }
    double dt = params_.dt_default;
    if (has_frame_ && timestamp > last_timestamp_) dt = timestamp - last_timestamp_;
    has_frame_ = true;
    last_frame_ = frame_index;
    last_timestamp_ = timestamp;

    for (Track& t : live_) t.state = kf_predict(t.state, dt, params_.noise);

    std::vector<TrackRef> refs;
    refs.reserve(live_.size());
    for (const Track& t : live_) refs.push_back({t.id, t.state.box()});
    std::vector<BBox> det_boxes;
    det_boxes.reserve(detections.size());
    for (const Detection& d : detections) det_boxes.push_back(d.box);

    AssociationResult assoc =
        params_.hierarchical
            ? associate_hierarchical(det_boxes, refs, params_.k,
                                     params_.cost_gate, params_.grid_cell_size,
                                     params_.radius_cap)
            : associate_exhaustive(det_boxes, refs, params_.cost_gate);
    total_cost_evaluations_ += assoc.cost_evaluations;

    std::unordered_map<std::int64_t, Track*> by_id;
    for (Track& t : live_) by_id[t.id] = &t;

    StepResult result;
    result.track_of_detection.assign(detections.size(), -1);

    for (const Match& m : assoc.matches) {
      Track& t = *by_id.at(m.track_id);
      const Detection& det = detections[m.detection];
      t.state = kf_update(t.state, det.box, params_.noise);
      t.append_history({frame_index, det.box, det.instance_points});
      ++t.hits;
      ++t.consecutive_hits;
      t.misses = 0;
      if (t.status == TrackStatus::Tentative &&
          t.consecutive_hits >= params_.min_hits) {
        t.status = TrackStatus::Confirmed;
      }
      t.motion_label = classify_track(t, params_.d_move, params_.alpha);
      result.track_of_detection[m.detection] = t.id;
    }

    for (std::int64_t id : assoc.unmatched_tracks) {
      Track& t = *by_id.at(id);
      ++t.misses;
      t.consecutive_hits = 0;
    }

    for (int di : assoc.unmatched_detections) {
      const Detection& det = detections[di];
      Track t;
      t.id = next_id_++;
      t.state = kalman_init(det.box, params_.noise);
      t.append_history({frame_index, det.box, det.instance_points});
      t.hits = 1;
      t.consecutive_hits = 1;
      t.status = params_.min_hits <= 1 ? TrackStatus::Confirmed
                                       : TrackStatus::Tentative;
      result.track_of_detection[di] = t.id;
      live_.push_back(std::move(t));
    }

    // retire aged-out tracks
    std::vector<Track> survivors;
    survivors.reserve(live_.size());
    for (Track& t : live_) {
      if (t.misses >= params_.max_age) {
        t.status = TrackStatus::Dead;
        archive_.push_back(std::move(t));
      } else {
        survivors.push_back(std::move(t));
      }
    }
    live_ = std::move(survivors);

    result.association = std::move(assoc);
    return result;
  }

  /// Moves every remaining live track to the archive (end of sequence).
  void finish() {
    for (Track& t : live_) archive_.push_back(std::move(t));
    live_.clear();
  }

  const std::vector<Track>& live_tracks() const { return live_; }
  const std::vector<Track>& archive() const { return archive_; }
  std::size_t total_cost_evaluations() const { return total_cost_evaluations_; }
  const TrackerParams& params() const { return params_; }

 private:
  TrackerParams params_;
  std::vector<Track> live_;
  std::vector<Track> archive_;
  std::int64_t next_id_ = 1;
  std::int64_t last_frame_ = 0;
  double last_timestamp_ = 0.0;
  bool has_frame_ = false;
  std::size_t total_cost_evaluations_ = 0;
};

}  // namespace toss
