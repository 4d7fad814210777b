#pragma once

#include "toss/cost.hpp"
#include "toss/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

namespace toss {

/// One fitted instance of a frame, in the global frame.
struct Detection {
  BBox box;
  std::vector<std::int32_t> instance_points;  // indices into the frame's scan
  std::int64_t frame_index = 0;
};

/// A live track as the associators see it: id plus predicted box.
struct TrackRef {
  std::int64_t id = 0;
  BBox box;
};

struct Match {
  int detection = 0;
  std::int64_t track_id = 0;
  double cost = 0.0;
};

/// Injective both ways; every match cost <= the gate.
struct AssociationResult {
  std::vector<Match> matches;
  std::vector<int> unmatched_detections;
  std::vector<std::int64_t> unmatched_tracks;
  std::size_t cost_evaluations = 0;  // pair_cost calls, instrumented
};

namespace detail {

struct Candidate {
  double cost;
  int det;
  int track_slot;
};

/// Greedy lowest-cost-first resolution over a candidate set. Ties break on
/// (detection index, track id) so both associators resolve identically.
inline AssociationResult resolve_greedy(std::vector<Candidate> candidates,
                                        std::size_t n_detections,
                                        const std::vector<TrackRef>& tracks,
                                        std::size_t cost_evaluations) {
  std::sort(candidates.begin(), candidates.end(),
            [&](const Candidate& a, const Candidate& b) {
              if (a.cost != b.cost) return a.cost < b.cost;
              if (a.det != b.det) return a.det < b.det;
              return tracks[a.track_slot].id < tracks[b.track_slot].id;
            });

  AssociationResult result;
  result.cost_evaluations = cost_evaluations;
  std::vector<std::uint8_t> det_used(n_detections, 0);
  std::vector<std::uint8_t> track_used(tracks.size(), 0);
  for (const Candidate& c : candidates) {
    if (det_used[c.det] || track_used[c.track_slot]) continue;
    det_used[c.det] = 1;
    track_used[c.track_slot] = 1;
    result.matches.push_back({c.det, tracks[c.track_slot].id, c.cost});
  }
  for (std::size_t i = 0; i < n_detections; ++i) {
    if (!det_used[i]) result.unmatched_detections.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    if (!track_used[j]) result.unmatched_tracks.push_back(tracks[j].id);
  }
  return result;
}

}  // namespace detail

/// Baseline associator: evaluates the full N x M cost matrix, then matches
/// greedily from the globally lowest cost upward. Pairs above the gate never
/// match.
inline AssociationResult associate_exhaustive(const std::vector<BBox>& detections,
                                              const std::vector<TrackRef>& tracks,
                                              double cost_gate) {
  std::vector<detail::Candidate> candidates;
  candidates.reserve(detections.size() * tracks.size());
  std::size_t evals = 0;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      const double c = pair_cost(detections[i], tracks[j].box).total;
      ++evals;
      if (c <= cost_gate) {
        candidates.push_back({c, static_cast<int>(i), static_cast<int>(j)});
      }
    }
  }
  return detail::resolve_greedy(std::move(candidates), detections.size(), tracks,
                                evals);
}

/// 2D grid hash over track centers used to pick the k nearest candidates.
class TrackGridIndex {
 public:
  explicit TrackGridIndex(const std::vector<TrackRef>& tracks,
                          double cell_size = 2.0, double radius_cap = 40.0)
      : tracks_(tracks), cell_(cell_size), radius_cap_(radius_cap) {
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      const auto [ix, iy] = cell_of(tracks[j].box.cx, tracks[j].box.cy);
      grid_[key(ix, iy)].push_back(static_cast<int>(j));
      min_ix_ = std::min(min_ix_, ix);
      max_ix_ = std::max(max_ix_, ix);
      min_iy_ = std::min(min_iy_, iy);
      max_iy_ = std::max(max_iy_, iy);
    }
  }

  /// Track slots of the k nearest centers, ordered by (distance, id). Rings
  /// expand until the k-th best cannot improve or the radius cap is reached.
  std::vector<int> nearest(double x, double y, int k) const {
    std::vector<std::pair<double, int>> found;  // (dist^2, slot)
    if (grid_.empty() || k <= 0) return {};
    const auto [qx, qy] = cell_of(x, y);
    const int max_ring =
        std::max({std::abs(qx - min_ix_), std::abs(max_ix_ - qx),
                  std::abs(qy - min_iy_), std::abs(max_iy_ - qy)});
    for (int r = 0;; ++r) {
      const double ring_min_dist = (r - 1) * cell_;  // lower bound for ring r
      if (r > 0 && static_cast<int>(found.size()) >= k) {
        std::nth_element(found.begin(), found.begin() + (k - 1), found.end());
        // strict: equal-distance candidates in the next ring still matter
        // for the (distance, id) tie-break
        if (found[k - 1].first < ring_min_dist * ring_min_dist) break;
      }
      if (r > max_ring || (r > 1 && ring_min_dist > radius_cap_)) break;
      scan_ring(qx, qy, r, x, y, found);
    }
    std::sort(found.begin(), found.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return tracks_[a.second].id < tracks_[b.second].id;
    });
    if (static_cast<int>(found.size()) > k) found.resize(k);
    std::vector<int> slots;
    slots.reserve(found.size());
    for (const auto& f : found) slots.push_back(f.second);
    return slots;
  }

 private:
  static std::uint64_t key(int ix, int iy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
           static_cast<std::uint32_t>(iy);
  }
  std::pair<int, int> cell_of(double x, double y) const {
    return {static_cast<int>(std::floor(x / cell_)),
            static_cast<int>(std::floor(y / cell_))};
  }
  void scan_ring(int qx, int qy, int r, double x, double y,
                 std::vector<std::pair<double, int>>& found) const {
    auto scan_cell = [&](int ix, int iy) {
      const auto it = grid_.find(key(ix, iy));
      if (it == grid_.end()) return;
      for (int slot : it->second) {
        const double dx = tracks_[slot].box.cx - x;
        const double dy = tracks_[slot].box.cy - y;
        found.emplace_back(dx * dx + dy * dy, slot);
      }
    };
    if (r == 0) {
      scan_cell(qx, qy);
      return;
    }
    for (int dx = -r; dx <= r; ++dx) {
      scan_cell(qx + dx, qy - r);
      scan_cell(qx + dx, qy + r);
    }
    for (int dy = -r + 1; dy <= r - 1; ++dy) {
      scan_cell(qx - r, qy + dy);
      scan_cell(qx + r, qy + dy);
    }
  }

  const std::vector<TrackRef>& tracks_;
  double cell_;
  double radius_cap_;
  std::unordered_map<std::uint64_t, std::vector<int>> grid_;
  int min_ix_ = std::numeric_limits<int>::max();
  int max_ix_ = std::numeric_limits<int>::min();
  int min_iy_ = std::numeric_limits<int>::max();
  int max_iy_ = std::numeric_limits<int>::min();
};

/// Hierarchical associator: each detection evaluates pair_cost only against
/// its min(k, M) nearest tracks by center distance, then the same greedy rule
/// resolves the sparse candidate set. The dense matrix is never materialized;
/// cost evaluations are exactly N * min(k, M) when the search stays inside
/// the radius cap.
inline AssociationResult associate_hierarchical(
    const std::vector<BBox>& detections, const std::vector<TrackRef>& tracks,
    int k, double cost_gate, double grid_cell_size = 2.0,
    double radius_cap = 40.0) {
  if (k < 1) throw std::invalid_argument("associate_hierarchical: k must be >= 1");
  const TrackGridIndex index(tracks, grid_cell_size, radius_cap);
  std::vector<detail::Candidate> candidates;
  candidates.reserve(detections.size() * static_cast<std::size_t>(k));
  std::size_t evals = 0;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    for (int slot : index.nearest(detections[i].cx, detections[i].cy, k)) {
      const double c = pair_cost(detections[i], tracks[slot].box).total;
      ++evals;
      if (c <= cost_gate) {
        candidates.push_back({c, static_cast<int>(i), slot});
      }
    }
  }
  return detail::resolve_greedy(std::move(candidates), detections.size(), tracks,
                                evals);
}

}  // namespace toss
