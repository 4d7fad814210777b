#pragma once

#include "toss/ds_voting.hpp"
#include "toss/tracker.hpp"
#include "toss/voxel_map.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <vector>

namespace toss {

/// Binary little-endian PLY of one representative point per voxel, in
/// canonical voxel order.
inline void write_map_ply(const std::filesystem::path& path, const VoxelMap& map) {
  std::vector<std::pair<std::uint64_t, Point3>> rows;
  rows.reserve(map.size());
  for (const auto& [key, cell] : map.cells()) {
    rows.emplace_back(key, cell.representative);
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_map_ply: cannot open " + path.string());
  out << "ply\nformat binary_little_endian 1.0\nelement vertex " << rows.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  for (const auto& [key, p] : rows) {
    const float xyz[3] = {static_cast<float>(p.x), static_cast<float>(p.y),
                          static_cast<float>(p.z)};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
}

/// CSV voxel dump: ix,iy,iz,count in canonical order.
inline void write_voxel_csv(const std::filesystem::path& path, const VoxelMap& map) {
  std::vector<std::pair<std::uint64_t, std::uint32_t>> rows;
  rows.reserve(map.size());
  for (const auto& [key, cell] : map.cells()) rows.emplace_back(key, cell.count);
  std::sort(rows.begin(), rows.end());

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_voxel_csv: cannot open " + path.string());
  out << "ix,iy,iz,count\n";
  for (const auto& [key, count] : rows) {
    const VoxelMap::Coord c = VoxelMap::unpack(key);
    out << c.ix << ',' << c.iy << ',' << c.iz << ',' << count << '\n';
  }
}

/// Track archive CSV for debugging: one row per history entry.
inline void write_track_archive_csv(const std::filesystem::path& path,
                                    const std::vector<Track>& archive) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_track_archive_csv: cannot open " +
                             path.string());
  }
  out.precision(9);
  out << "frame,track_id,cx,cy,cz,theta,l,w,h,status,motion_label\n";
  for (const Track& t : archive) {
    const char* status = t.status == TrackStatus::Dead        ? "dead"
                         : t.status == TrackStatus::Confirmed ? "confirmed"
                                                              : "tentative";
    const char* motion =
        t.motion_label == MotionLabel::CoarseDynamic ? "dynamic" : "static";
    for (const TrackHistoryEntry& e : t.history) {
      out << e.frame_index << ',' << t.id << ',' << e.box.cx << ',' << e.box.cy
          << ',' << e.box.cz << ',' << e.box.theta << ',' << e.box.l << ','
          << e.box.w << ',' << e.box.h << ',' << status << ',' << motion << '\n';
    }
  }
}

/// Refined per-box labels: frame,track_id,refined_label.
inline void write_refined_csv(const std::filesystem::path& path,
                              const std::vector<RefinedBox>& refined) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_refined_csv: cannot open " + path.string());
  }
  out << "frame,track_id,refined_label\n";
  for (const RefinedBox& r : refined) {
    out << r.frame_index << ',' << r.track_id << ','
        << (r.dynamic ? "dynamic" : "static") << '\n';
  }
}

}  // namespace toss
