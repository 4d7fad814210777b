#pragma once

#include "toss/types.hpp"

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace toss {

/// Sparse voxel grid accumulating points. Also the unit of PR/RR evaluation:
/// in reference mode each cell tallies ground-truth static/dynamic points.
class VoxelMap {
 public:
  struct Cell {
    std::uint32_t count = 0;
    std::uint32_t static_points = 0;   // reference mode
    std::uint32_t dynamic_points = 0;  // reference mode
    Point3 representative;             // first point, for dense export
  };

  explicit VoxelMap(double voxel_size = 0.2) : voxel_size_(voxel_size) {
    if (!(voxel_size > 0.0)) {
      throw std::invalid_argument("VoxelMap: voxel_size must be > 0");
    }
  }

  double voxel_size() const { return voxel_size_; }

  struct Coord {
    int ix, iy, iz;
  };
  Coord coord_of(const Point3& p) const {
    return {static_cast<int>(std::floor(p.x / voxel_size_)),
            static_cast<int>(std::floor(p.y / voxel_size_)),
            static_cast<int>(std::floor(p.z / voxel_size_))};
  }

  void insert(const Point3& global) {
    if (!global.finite()) {
      ++skipped_points_;
      return;
    }
    Cell& c = cells_[pack(coord_of(global))];
    if (c.count == 0) c.representative = global;
    ++c.count;
  }

  /// Reference-map insertion with a ground-truth dynamic flag.
  void insert_labeled(const Point3& global, bool dynamic) {
    if (!global.finite()) {
      ++skipped_points_;
      return;
    }
    Cell& c = cells_[pack(coord_of(global))];
    if (c.count == 0) c.representative = global;
    ++c.count;
    if (dynamic) {
      ++c.dynamic_points;
    } else {
      ++c.static_points;
    }
  }

  bool contains(const Point3& p) const {
    return cells_.find(pack(coord_of(p))) != cells_.end();
  }
  bool contains_key(std::uint64_t k) const { return cells_.count(k) != 0; }

  std::size_t size() const { return cells_.size(); }
  std::size_t skipped_points() const { return skipped_points_; }
  const std::unordered_map<std::uint64_t, Cell>& cells() const { return cells_; }

  static Coord unpack(std::uint64_t k) {
    constexpr std::int64_t bias = 1 << 20;
    return {static_cast<int>(((k >> 42) & 0x1fffff) - bias),
            static_cast<int>(((k >> 21) & 0x1fffff) - bias),
            static_cast<int>((k & 0x1fffff) - bias)};
  }

 private:
  static std::uint64_t pack(const Coord& c) {
    constexpr std::int64_t bias = 1 << 20;  // +-200 km at 0.2 m voxels
    return (static_cast<std::uint64_t>(c.ix + bias) << 42) |
           (static_cast<std::uint64_t>(c.iy + bias) << 21) |
           static_cast<std::uint64_t>(c.iz + bias);
  }

  double voxel_size_;
  std::unordered_map<std::uint64_t, Cell> cells_;
  std::size_t skipped_points_ = 0;
};

/// Inserts one frame's ground and refined-static points, transformed to the
/// global frame. Dynamic-labeled points never reach the map.
inline void insert_frame(VoxelMap& map, const std::vector<Point3>& ground_points,
                         const std::vector<Point3>& static_points,
                         const Pose& pose) {
  for (const Point3& p : ground_points) {
    if (!p.finite()) continue;  // insert() counts the skip
    map.insert(pose.apply(p));
  }
  for (const Point3& p : static_points) {
    if (!p.finite()) continue;
    map.insert(pose.apply(p));
  }
}

/// F1 as the harmonic mean of PR and RR given as percentages.
inline double f1_score(double pr_pct, double rr_pct) {
  const double pr = pr_pct / 100.0;
  const double rr = rr_pct / 100.0;
  if (pr + rr == 0.0) return 0.0;
  return 2.0 * pr * rr / (pr + rr);
}

struct EvalReport {
  double pr_pct = 0.0;
  double rr_pct = 0.0;
  double f1 = 0.0;
  bool pr_defined = false;
  bool rr_defined = false;
  std::int64_t preserved_static = 0;
  std::int64_t total_static = 0;
  std::int64_t remaining_dynamic = 0;
  std::int64_t total_dynamic = 0;

  std::string table() const {
    auto num = [](bool defined, double v) {
      if (!defined) return std::string("undefined");
      std::ostringstream os;
      os << std::fixed << std::setprecision(3) << v;
      return os.str();
    };
    std::ostringstream os;
    os << "  metric              value\n"
       << "  PR [%]              " << num(pr_defined, pr_pct) << "\n"
       << "  RR [%]              " << num(rr_defined, rr_pct) << "\n"
       << "  F1                  " << num(pr_defined && rr_defined, f1) << "\n"
       << "  preserved static    " << preserved_static << " / " << total_static
       << "\n"
       << "  remaining dynamic   " << remaining_dynamic << " / " << total_dynamic
       << "\n";
    return os.str();
  }

  std::string key_values() const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6);
    os << "pr_pct=" << (pr_defined ? pr_pct : -1.0) << "\n"
       << "rr_pct=" << (rr_defined ? rr_pct : -1.0) << "\n"
       << "f1=" << (pr_defined && rr_defined ? f1 : -1.0) << "\n"
       << "preserved_static_voxels=" << preserved_static << "\n"
       << "total_static_voxels=" << total_static << "\n"
       << "remaining_dynamic_voxels=" << remaining_dynamic << "\n"
       << "total_dynamic_voxels=" << total_dynamic << "\n";
    return os.str();
  }
};

/// PR/RR/F1 of a built map against a naively accumulated reference carrying
/// ground-truth labels. A reference voxel counts static when it holds at
/// least one static point and no dynamic points; any dynamic point makes it
/// dynamic (mixed voxels are excluded from the static denominator).
inline EvalReport evaluate(const VoxelMap& built, const VoxelMap& reference) {
  if (built.voxel_size() != reference.voxel_size()) {
    throw std::invalid_argument("evaluate: maps must share voxel_size");
  }
  EvalReport rep;
  for (const auto& [key, cell] : reference.cells()) {
    const bool dynamic = cell.dynamic_points > 0;
    const bool is_static = !dynamic && cell.static_points > 0;
    if (is_static) {
      ++rep.total_static;
      if (built.contains_key(key)) ++rep.preserved_static;
    } else if (dynamic) {
      ++rep.total_dynamic;
      if (built.contains_key(key)) ++rep.remaining_dynamic;
    }
  }
  rep.pr_defined = rep.total_static > 0;
  rep.rr_defined = rep.total_dynamic > 0;
  if (rep.pr_defined) {
    rep.pr_pct = 100.0 * static_cast<double>(rep.preserved_static) /
                 static_cast<double>(rep.total_static);
  }
  if (rep.rr_defined) {
    rep.rr_pct = 100.0 * (1.0 - static_cast<double>(rep.remaining_dynamic) /
                                    static_cast<double>(rep.total_dynamic));
  }
  if (rep.pr_defined && rep.rr_defined) rep.f1 = f1_score(rep.pr_pct, rep.rr_pct);
  return rep;
}

}  // namespace toss
