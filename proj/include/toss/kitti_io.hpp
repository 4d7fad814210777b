#pragma once

#include "toss/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace toss {

/// Default ground-truth movable classes (SemanticKITTI moving-* ids).
inline const std::set<std::uint16_t>& default_movable_classes() {
  static const std::set<std::uint16_t> table = {252, 253, 254, 255,
                                                256, 257, 258, 259};
  return table;
}

/// Per-point 32-bit labels: lower 16 bits semantic class, upper 16 bits
/// instance id.
struct LabelFrame {
  std::vector<std::uint32_t> raw;

  std::uint16_t semantic(std::size_t i) const {
    return static_cast<std::uint16_t>(raw[i] & 0xffffu);
  }
  bool dynamic(std::size_t i,
               const std::set<std::uint16_t>& movable = default_movable_classes())
      const {
    return movable.count(semantic(i)) != 0;
  }
};

/// Reads a KITTI .bin scan: little-endian float32 records (x, y, z,
/// intensity); intensity is discarded. A size not divisible by 16 bytes is
/// an error naming the last whole-record byte offset.
inline Scan read_scan(const std::filesystem::path& path,
                      std::int64_t frame_index = 0, double timestamp = 0.0) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("read_scan: cannot open " + path.string());
  const std::streamoff size = in.tellg();
  if (size % 16 != 0) {
    throw std::runtime_error("read_scan: " + path.string() + " truncated at byte " +
                             std::to_string((size / 16) * 16));
  }
  in.seekg(0);
  const std::size_t n = static_cast<std::size_t>(size / 16);
  std::vector<float> buf(n * 4);
  if (n > 0) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(size));
    if (!in) throw std::runtime_error("read_scan: short read on " + path.string());
  }
  Scan scan;
  scan.frame_index = frame_index;
  scan.timestamp = timestamp;
  scan.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    scan.points[i] = {buf[4 * i], buf[4 * i + 1], buf[4 * i + 2]};
  }
  return scan;
}

inline void write_scan(const std::filesystem::path& path, const Scan& scan) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_scan: cannot open " + path.string());
  std::vector<float> buf;
  buf.reserve(scan.points.size() * 4);
  for (const Point3& p : scan.points) {
    buf.push_back(static_cast<float>(p.x));
    buf.push_back(static_cast<float>(p.y));
    buf.push_back(static_cast<float>(p.z));
    buf.push_back(0.0f);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

namespace detail {

inline Pose pose_from_row_major(const double m[12]) {
  Pose p;
  p.rotation << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
  p.translation << m[3], m[7], m[11];
  return p;
}

/// Projects a drifted rotation back onto SO(3) via SVD.
inline void reorthonormalize(Pose& p) {
  if (p.valid(1e-6)) return;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      p.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  p.rotation = r;
}

}  // namespace detail

/// Reads KITTI poses.txt: one row-major 3x4 transform per line. Each pose is
/// composed with the calibration so the result maps sensor frame -> global
/// frame. Malformed lines are an error naming the line number.
inline std::vector<Pose> read_poses(const std::filesystem::path& path,
                                    const Pose& calibration = Pose::identity()) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_poses: cannot open " + path.string());
  std::vector<Pose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ls(line);
    double m[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ls >> m[i])) {
        throw std::runtime_error("read_poses: malformed line " +
                                 std::to_string(line_no) + " in " + path.string());
      }
    }
    double extra;
    if (ls >> extra) {
      throw std::runtime_error("read_poses: malformed line " +
                               std::to_string(line_no) + " in " + path.string());
    }
    Pose p = detail::pose_from_row_major(m).compose(calibration);
    detail::reorthonormalize(p);
    poses.push_back(p);
  }
  return poses;
}

inline void write_poses(const std::filesystem::path& path,
                        const std::vector<Pose>& poses) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_poses: cannot open " + path.string());
  out.precision(17);
  for (const Pose& p : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        if (r != 0 || c != 0) out << ' ';
        out << (c < 3 ? p.rotation(r, c) : p.translation(r));
      }
    }
    out << '\n';
  }
}

/// Reads the `Tr:` line of a KITTI calib.txt (sensor -> reference frame).
/// Returns identity when the file has no Tr entry.
inline Pose read_calib(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_calib: cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("Tr:", 0) != 0 && line.rfind("Tr ", 0) != 0) continue;
    std::istringstream ls(line.substr(3));
    double m[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ls >> m[i])) {
        throw std::runtime_error("read_calib: malformed Tr line in " +
                                 path.string());
      }
    }
    Pose p = detail::pose_from_row_major(m);
    detail::reorthonormalize(p);
    return p;
  }
  return Pose::identity();
}

/// Reads a SemanticKITTI .label file: 32-bit little-endian records.
inline LabelFrame read_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("read_labels: cannot open " + path.string());
  const std::streamoff size = in.tellg();
  if (size % 4 != 0) {
    throw std::runtime_error("read_labels: " + path.string() +
                             " truncated at byte " + std::to_string((size / 4) * 4));
  }
  in.seekg(0);
  LabelFrame frame;
  frame.raw.resize(static_cast<std::size_t>(size / 4));
  if (size > 0) {
    in.read(reinterpret_cast<char*>(frame.raw.data()),
            static_cast<std::streamsize>(size));
    if (!in) throw std::runtime_error("read_labels: short read on " + path.string());
  }
  return frame;
}

/// Exact inverse of read_labels.
inline void write_labels(const std::filesystem::path& path,
                         const std::vector<std::uint32_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_labels: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size() * 4));
}

/// A KITTI-layout sequence directory: velodyne/*.bin, poses.txt, optional
/// calib.txt and labels/*.label. Scan, pose, and label counts must agree.
class SequenceSource {
 public:
  explicit SequenceSource(const std::filesystem::path& dir) : dir_(dir) {
    namespace fs = std::filesystem;
    const fs::path scan_dir = dir / "velodyne";
    if (!fs::is_directory(scan_dir)) {
      throw std::runtime_error("SequenceSource: missing directory " +
                               scan_dir.string());
    }
    for (const auto& entry : fs::directory_iterator(scan_dir)) {
      if (entry.path().extension() == ".bin") scan_files_.push_back(entry.path());
    }
    std::sort(scan_files_.begin(), scan_files_.end());

    Pose calib = Pose::identity();
    if (fs::exists(dir / "calib.txt")) calib = read_calib(dir / "calib.txt");
    poses_ = read_poses(dir / "poses.txt", calib);
    if (poses_.size() != scan_files_.size()) {
      throw std::runtime_error(
          "SequenceSource: " + std::to_string(scan_files_.size()) + " scans but " +
          std::to_string(poses_.size()) + " poses in " + dir.string());
    }

    const fs::path label_dir = dir / "labels";
    if (fs::is_directory(label_dir)) {
      for (const auto& entry : fs::directory_iterator(label_dir)) {
        if (entry.path().extension() == ".label")
          label_files_.push_back(entry.path());
      }
      std::sort(label_files_.begin(), label_files_.end());
      if (label_files_.size() != scan_files_.size()) {
        throw std::runtime_error("SequenceSource: scan/label count mismatch in " +
                                 dir.string());
      }
    }
  }

  std::size_t size() const { return scan_files_.size(); }
  bool has_labels() const { return !label_files_.empty(); }
  const std::filesystem::path& directory() const { return dir_; }

  Scan scan(std::size_t i, double frame_period = 0.1) const {
    Scan s = read_scan(scan_files_[i], static_cast<std::int64_t>(i),
                       static_cast<double>(i) * frame_period);
    return s;
  }
  const Pose& pose(std::size_t i) const { return poses_[i]; }
  LabelFrame labels(std::size_t i) const { return read_labels(label_files_[i]); }
  const std::filesystem::path& scan_path(std::size_t i) const {
    return scan_files_[i];
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> scan_files_;
  std::vector<Pose> poses_;
  std::vector<std::filesystem::path> label_files_;
};

}  // namespace toss
