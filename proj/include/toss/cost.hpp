#pragma once

#include "toss/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace toss {

namespace detail {

struct V2 {
  double x, y;
};

/// BEV footprint corners, counter-clockwise. l runs along the heading.
inline std::array<V2, 4> bev_corners(const BBox& b) {
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  const double hl = 0.5 * b.l, hw = 0.5 * b.w;
  auto rot = [&](double x, double y) {
    return V2{b.cx + c * x - s * y, b.cy + s * x + c * y};
  };
  return {rot(hl, hw), rot(-hl, hw), rot(-hl, -hw), rot(hl, -hw)};
}

inline double polygon_area(const std::vector<V2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const V2& p = poly[i];
    const V2& q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(a);
}

/// Sutherland-Hodgman clip of a convex polygon by the half-planes of a
/// counter-clockwise convex clip polygon.
inline std::vector<V2> clip_convex(std::vector<V2> subject,
                                   const std::array<V2, 4>& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const V2& a = clip[e];
    const V2& b = clip[(e + 1) % clip.size()];
    auto inside = [&](const V2& p) {
      return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0;
    };
    auto intersect = [&](const V2& p, const V2& q) {
      const double a1 = b.y - a.y, b1 = a.x - b.x;
      const double c1 = a1 * a.x + b1 * a.y;
      const double a2 = q.y - p.y, b2 = p.x - q.x;
      const double c2 = a2 * p.x + b2 * p.y;
      const double det = a1 * b2 - a2 * b1;
      return V2{(b2 * c1 - b1 * c2) / det, (a1 * c2 - a2 * c1) / det};
    };
    std::vector<V2> out;
    out.reserve(subject.size() + 4);
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const V2& cur = subject[i];
      const V2& prev = subject[(i + subject.size() - 1) % subject.size()];
      const bool cur_in = inside(cur), prev_in = inside(prev);
      if (cur_in) {
        if (!prev_in) out.push_back(intersect(prev, cur));
        out.push_back(cur);
      } else if (prev_in) {
        out.push_back(intersect(prev, cur));
      }
    }
    subject = std::move(out);
  }
  return subject;
}

}  // namespace detail

/// 3D IoU of upright oriented boxes: oriented-rectangle BEV intersection
/// (polygon clipping) times the z overlap.
inline double iou_3d(const BBox& bi, const BBox& bj) {
  const auto ci = detail::bev_corners(bi);
  const auto cj = detail::bev_corners(bj);
  const std::vector<detail::V2> inter =
      detail::clip_convex({ci.begin(), ci.end()}, cj);
  if (inter.size() < 3) return 0.0;
  const double area = detail::polygon_area(inter);
  const double z_lo = std::max(bi.cz - 0.5 * bi.h, bj.cz - 0.5 * bj.h);
  const double z_hi = std::min(bi.cz + 0.5 * bi.h, bj.cz + 0.5 * bj.h);
  const double inter_vol = area * std::max(0.0, z_hi - z_lo);
  const double union_vol = box_volume(bi) + box_volume(bj) - inter_vol;
  if (union_vol <= 0.0) return 0.0;
  return std::clamp(inter_vol / union_vol, 0.0, 1.0);
}

/// Association cost between two boxes: total = c_d + c_o + c_v with
/// c_d the center distance, c_o = 1 - IoU and c_v the volume-ratio cost.
struct PairCost {
  double total = 0.0;
  double c_d = 0.0;  // ||c_i - c_j||
  double c_o = 0.0;  // 1 - IoU
  double c_v = 0.0;  // 1 - min(v_i, v_j) / max(v_i, v_j)
};

inline PairCost pair_cost(const BBox& bi, const BBox& bj) {
  PairCost out;
  out.c_d = distance(bi.center(), bj.center());
  out.c_o = 1.0 - iou_3d(bi, bj);
  const double vi = box_volume(bi), vj = box_volume(bj);
  out.c_v = 1.0 - std::min(vi, vj) / std::max(vi, vj);
  out.total = out.c_d + out.c_o + out.c_v;
  return out;
}

}  // namespace toss
