#pragma once

#include "toss/tracker.hpp"
#include "toss/types.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace toss {

/// Voting windows. tau is the spatial association distance; frames within
/// +-tau_d of a box vote for dynamism, frames at temporal distance >= tau_s
/// vote for persistence.
struct VoteConfig {
  double tau = 1.0;  // m
  int tau_d = 5;     // frames, dynamic window half-width
  int tau_s = 50;    // frames, static exclusion half-width
  int n_frames = 0;

  bool valid() const {
    return tau > 0.0 && tau_d > 0 && tau_d < tau_s && tau_s < n_frames;
  }
};

/// 1 iff the two centers are strictly closer than tau.
inline int proximity_flag(const Point3& c, const Point3& c_track, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("proximity_flag: tau must be > 0");
  return distance(c, c_track) < tau ? 1 : 0;
}

/// Per-frame spatial index over every archived track box center. Entries
/// carry the owning track's coarse motion label.
class TraceIndex {
 public:
  struct Entry {
    std::int64_t track_id = 0;
    Point3 center;
    bool coarse_dynamic = false;
  };

  TraceIndex(const std::vector<Track>& archive, int n_frames, double tau)
      : n_frames_(n_frames), cell_(tau), buckets_(n_frames) {
    for (const Track& t : archive) {
      const bool dyn = t.motion_label == MotionLabel::CoarseDynamic;
      for (const TrackHistoryEntry& e : t.history) {
        if (e.frame_index < 0 || e.frame_index >= n_frames) {
          throw std::invalid_argument("TraceIndex: history frame out of range");
        }
        Frame& f = buckets_[e.frame_index];
        const int slot = static_cast<int>(f.entries.size());
        f.entries.push_back({t.id, e.box.center(), dyn});
        f.grid[key(e.box.center())].push_back(slot);
      }
    }
  }

  int n_frames() const { return n_frames_; }

  const std::vector<Entry>& frame_entries(int frame) const {
    return buckets_[frame].entries;
  }

  /// Visits entries of `frame` within strict distance tau of `c`.
  template <typename Fn>
  void for_each_near(int frame, const Point3& c, Fn&& fn) const {
    const Frame& f = buckets_[frame];
    const int ix = static_cast<int>(std::floor(c.x / cell_));
    const int iy = static_cast<int>(std::floor(c.y / cell_));
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        const auto it = f.grid.find(pack(ix + dx, iy + dy));
        if (it == f.grid.end()) continue;
        for (int slot : it->second) {
          const Entry& e = f.entries[slot];
          if (distance(c, e.center) < cell_) fn(e);
        }
      }
    }
  }

 private:
  static std::uint64_t pack(int ix, int iy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
           static_cast<std::uint32_t>(iy);
  }
  std::uint64_t key(const Point3& p) const {
    return pack(static_cast<int>(std::floor(p.x / cell_)),
                static_cast<int>(std::floor(p.y / cell_)));
  }

  struct Frame {
    std::vector<Entry> entries;
    std::unordered_map<std::uint64_t, std::vector<int>> grid;
  };

  int n_frames_;
  double cell_;
  std::vector<Frame> buckets_;
};

/// N_dyn: proximity count against coarse-dynamic trace centers over frames
/// t + eps, eps in [-tau_d, tau_d], clipped at the sequence bounds.
inline int count_dynamic(const Point3& box_center, int t, const TraceIndex& index,
                         const VoteConfig& cfg) {
  int n = 0;
  const int lo = std::max(0, t - cfg.tau_d);
  const int hi = std::min(index.n_frames() - 1, t + cfg.tau_d);
  for (int f = lo; f <= hi; ++f) {
    index.for_each_near(f, box_center, [&](const TraceIndex::Entry& e) {
      if (e.coarse_dynamic) ++n;
    });
  }
  return n;
}

/// N_stat: proximity count against all trace centers in the temporally
/// distant frames, |f - t| >= tau_s, clipped to the sequence.
inline int count_static(const Point3& box_center, int t, const TraceIndex& index,
                        const VoteConfig& cfg) {
  int n = 0;
  for (int f = 0; f <= t - cfg.tau_s; ++f) {
    index.for_each_near(f, box_center, [&](const TraceIndex::Entry&) { ++n; });
  }
  for (int f = t + cfg.tau_s; f < index.n_frames(); ++f) {
    index.for_each_near(f, box_center, [&](const TraceIndex::Entry&) { ++n; });
  }
  return n;
}

/// Case split of the vote: Static iff N_dyn < N_stat, Dynamic otherwise
/// (ties fall to Dynamic).
inline PointLabel vote(const Point3& box_center, int t, const TraceIndex& index,
                       const VoteConfig& cfg) {
  const int n_dyn = count_dynamic(box_center, t, index, cfg);
  const int n_stat = count_static(box_center, t, index, cfg);
  return n_dyn < n_stat ? PointLabel::Static : PointLabel::Dynamic;
}

/// Refined label of one archived box.
struct RefinedBox {
  std::int64_t frame_index = 0;
  std::int64_t track_id = 0;
  Point3 center;
  bool dynamic = false;
};

/// Runs the vote over every archived box. Labels are a pure function of the
/// archive geometry, so re-application yields the same result.
inline std::vector<RefinedBox> refine_sequence(const std::vector<Track>& archive,
                                               const VoteConfig& cfg) {
  if (!cfg.valid()) throw std::invalid_argument("refine_sequence: invalid VoteConfig");
  const TraceIndex index(archive, cfg.n_frames, cfg.tau);
  std::vector<RefinedBox> refined;
  for (const Track& t : archive) {
    for (const TrackHistoryEntry& e : t.history) {
      const Point3 c = e.box.center();
      const PointLabel label =
          vote(c, static_cast<int>(e.frame_index), index, cfg);
      refined.push_back({e.frame_index, t.id, c, label == PointLabel::Dynamic});
    }
  }
  return refined;
}

}  // namespace toss
