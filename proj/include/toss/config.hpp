#pragma once

#include "toss/ds_voting.hpp"
#include "toss/kitti_io.hpp"
#include "toss/range_image.hpp"
#include "toss/segmentation.hpp"
#include "toss/tracker.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

namespace toss {

/// Aggregate pipeline configuration. Angles are degrees at this boundary and
/// radians everywhere else.
struct PipelineConfig {
  ProjectionConfig projection{512, 32, 25.0 * M_PI / 180.0, 3.0 * M_PI / 180.0};
  GroundParams ground;
  ClusterParams clustering;
  TrackerParams tracker;
  VoteConfig voting;  // n_frames is filled in from the sequence
  bool refine = true;
  double voxel_size = 0.2;
  bool dense_export = true;
  double frame_period = 0.1;  // s, when timestamps are absent
  std::set<std::uint16_t> movable_classes = default_movable_classes();
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj, const char* section,
                                std::initializer_list<const char*> known) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::runtime_error(std::string("config: unknown key '") + item.key() +
                               "' in section '" + section + "'");
    }
  }
}

template <typename T>
void maybe(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace detail

inline PipelineConfig parse_config_json(const nlohmann::json& j) {
  using detail::maybe;
  using detail::reject_unknown_keys;
  PipelineConfig cfg;

  reject_unknown_keys(j, "<root>",
                      {"projection", "ground", "clustering", "tracker", "voting",
                       "map", "movable_classes", "frame_period"});

  if (j.contains("projection")) {
    const auto& p = j.at("projection");
    reject_unknown_keys(p, "projection", {"width", "height", "f_up_deg", "f_down_deg"});
    maybe(p, "width", cfg.projection.width);
    maybe(p, "height", cfg.projection.height);
    double up = cfg.projection.f_up * 180.0 / M_PI;
    double down = cfg.projection.f_down * 180.0 / M_PI;
    maybe(p, "f_up_deg", up);
    maybe(p, "f_down_deg", down);
    cfg.projection.f_up = up * M_PI / 180.0;
    cfg.projection.f_down = down * M_PI / 180.0;
    if (!cfg.projection.valid()) {
      throw std::runtime_error("config: invalid projection parameters");
    }
  }
  if (j.contains("ground")) {
    const auto& g = j.at("ground");
    reject_unknown_keys(g, "ground",
                        {"cell_size", "ground_dist", "max_slope_deg", "seed_margin",
                         "sensor_height", "init_radius", "height_tol",
                         "min_seed_points"});
    maybe(g, "cell_size", cfg.ground.cell_size);
    maybe(g, "ground_dist", cfg.ground.ground_dist);
    maybe(g, "max_slope_deg", cfg.ground.max_slope_deg);
    maybe(g, "seed_margin", cfg.ground.seed_margin);
    maybe(g, "sensor_height", cfg.ground.sensor_height);
    maybe(g, "init_radius", cfg.ground.init_radius);
    maybe(g, "height_tol", cfg.ground.height_tol);
    maybe(g, "min_seed_points", cfg.ground.min_seed_points);
  }
  if (j.contains("clustering")) {
    const auto& c = j.at("clustering");
    reject_unknown_keys(c, "clustering", {"d_merge", "min_cluster_points"});
    maybe(c, "d_merge", cfg.clustering.d_merge);
    maybe(c, "min_cluster_points", cfg.clustering.min_cluster_points);
  }
  if (j.contains("tracker")) {
    const auto& t = j.at("tracker");
    reject_unknown_keys(t, "tracker",
                        {"associator", "k", "cost_gate", "min_hits", "max_age",
                         "d_move", "alpha", "grid_cell_size", "radius_cap",
                         "dt_default", "noise"});
    std::string assoc = cfg.tracker.hierarchical ? "hierarchical" : "exhaustive";
    maybe(t, "associator", assoc);
    if (assoc != "hierarchical" && assoc != "exhaustive") {
      throw std::runtime_error("config: associator must be hierarchical or exhaustive");
    }
    cfg.tracker.hierarchical = assoc == "hierarchical";
    maybe(t, "k", cfg.tracker.k);
    maybe(t, "cost_gate", cfg.tracker.cost_gate);
    maybe(t, "min_hits", cfg.tracker.min_hits);
    maybe(t, "max_age", cfg.tracker.max_age);
    maybe(t, "d_move", cfg.tracker.d_move);
    maybe(t, "alpha", cfg.tracker.alpha);
    maybe(t, "grid_cell_size", cfg.tracker.grid_cell_size);
    maybe(t, "radius_cap", cfg.tracker.radius_cap);
    maybe(t, "dt_default", cfg.tracker.dt_default);
    if (t.contains("noise")) {
      const auto& n = t.at("noise");
      reject_unknown_keys(n, "tracker.noise",
                          {"q_pos", "q_vel", "q_angle", "q_dims", "r_pos",
                           "r_angle", "r_dims"});
      maybe(n, "q_pos", cfg.tracker.noise.q_pos);
      maybe(n, "q_vel", cfg.tracker.noise.q_vel);
      maybe(n, "q_angle", cfg.tracker.noise.q_angle);
      maybe(n, "q_dims", cfg.tracker.noise.q_dims);
      maybe(n, "r_pos", cfg.tracker.noise.r_pos);
      maybe(n, "r_angle", cfg.tracker.noise.r_angle);
      maybe(n, "r_dims", cfg.tracker.noise.r_dims);
    }
  }
  if (j.contains("voting")) {
    const auto& v = j.at("voting");
    reject_unknown_keys(v, "voting", {"enabled", "tau", "tau_d", "tau_s"});
    maybe(v, "enabled", cfg.refine);
    maybe(v, "tau", cfg.voting.tau);
    maybe(v, "tau_d", cfg.voting.tau_d);
    maybe(v, "tau_s", cfg.voting.tau_s);
  }
  if (j.contains("map")) {
    const auto& m = j.at("map");
    reject_unknown_keys(m, "map", {"voxel_size", "dense_export"});
    maybe(m, "voxel_size", cfg.voxel_size);
    maybe(m, "dense_export", cfg.dense_export);
  }
  if (j.contains("movable_classes")) {
    cfg.movable_classes.clear();
    for (const auto& c : j.at("movable_classes")) {
      cfg.movable_classes.insert(c.get<std::uint16_t>());
    }
  }
  maybe(j, "frame_period", cfg.frame_period);
  return cfg;
}

/// Parses a JSON config file; // and /* */ comments are allowed. Unknown
/// keys are rejected with the offending key named.
inline PipelineConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config: " + path.string() + ": " + e.what());
  }
  return parse_config_json(j);
}

}  // namespace toss
