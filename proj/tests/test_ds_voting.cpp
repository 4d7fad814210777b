#include "toss/ds_voting.hpp"
#include "toss/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <map>

using namespace toss;

namespace {

Track track_at(std::int64_t id, MotionLabel label,
               const std::vector<std::pair<std::int64_t, Point3>>& entries) {
  Track t;
  t.id = id;
  t.motion_label = label;
  for (const auto& [frame, c] : entries) {
    t.append_history({frame, {c.x, c.y, c.z, 0, 1, 1, 1}, {}});
  }
  return t;
}

/// Brute-force N_dyn: double loop over every archived box.
int brute_count_dynamic(const std::vector<Track>& archive, const Point3& c, int t,
                        const VoteConfig& cfg) {
  int n = 0;
  for (const Track& tr : archive) {
    if (tr.motion_label != MotionLabel::CoarseDynamic) continue;
    for (const TrackHistoryEntry& e : tr.history) {
      const std::int64_t eps = e.frame_index - t;
      if (eps < -cfg.tau_d || eps > cfg.tau_d) continue;
      n += proximity_flag(c, e.box.center(), cfg.tau);
    }
  }
  return n;
}

/// Brute-force N_stat over the distant frames.
int brute_count_static(const std::vector<Track>& archive, const Point3& c, int t,
                       const VoteConfig& cfg) {
  int n = 0;
  for (const Track& tr : archive) {
    for (const TrackHistoryEntry& e : tr.history) {
      const std::int64_t eps = e.frame_index - t;
      if (eps > -cfg.tau_s && eps < cfg.tau_s) continue;
      n += proximity_flag(c, e.box.center(), cfg.tau);
    }
  }
  return n;
}

}  // namespace

TEST_CASE("proximity_flag boundary behavior", "[ds_voting]") {
  CHECK(proximity_flag({1, 2, 3}, {1, 2, 3}, 1.0) == 1);
  CHECK(proximity_flag({0, 0, 0}, {2, 0, 0}, 2.0) == 0);  // strict inequality
  CHECK(proximity_flag({0, 0, 0}, {1, 0, 0}, 2.0) == 1);
  CHECK_THROWS_AS(proximity_flag({0, 0, 0}, {0, 0, 0}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("proximity_flag is symmetric and monotone in tau", "[ds_voting]") {
  Rng rng(61);
  for (int i = 0; i < 500; ++i) {
    const Point3 a{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const Point3 b{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double tau1 = rng.uniform(0.1, 5.0);
    const double tau2 = tau1 + rng.uniform(0.0, 5.0);
    CHECK(proximity_flag(a, b, tau1) == proximity_flag(b, a, tau1));
    CHECK(proximity_flag(a, b, tau1) <= proximity_flag(a, b, tau2));
  }
}

TEST_CASE("count_dynamic over a co-located window", "[ds_voting]") {
  VoteConfig cfg;
  cfg.tau = 1.0;
  cfg.tau_d = 3;
  cfg.tau_s = 10;
  cfg.n_frames = 100;
  const Point3 c{5, 5, 1};
  std::vector<std::pair<std::int64_t, Point3>> entries;
  for (int f = 0; f < 100; ++f) entries.push_back({f, c});
  const std::vector<Track> archive = {
      track_at(1, MotionLabel::CoarseDynamic, entries)};
  const TraceIndex index(archive, cfg.n_frames, cfg.tau);

  // one dynamic trace in all 2*tau_d + 1 window frames
  CHECK(count_dynamic(c, 50, index, cfg) == 7);
  // window clipped at the sequence start
  CHECK(count_dynamic(c, 0, index, cfg) == 4);
  // empty archive of dynamic traces
  const std::vector<Track> static_only = {
      track_at(1, MotionLabel::CoarseStatic, entries)};
  const TraceIndex index2(static_only, cfg.n_frames, cfg.tau);
  CHECK(count_dynamic(c, 50, index2, cfg) == 0);
}

TEST_CASE("count_dynamic ignores traces outside the window", "[ds_voting]") {
  VoteConfig cfg;
  cfg.tau = 1.0;
  cfg.tau_d = 3;
  cfg.tau_s = 10;
  cfg.n_frames = 50;
  const Point3 c{5, 5, 1};
  // trace present only at eps = tau_d + 1
  const std::vector<Track> archive = {
      track_at(1, MotionLabel::CoarseDynamic, {{24, c}})};
  const TraceIndex index(archive, cfg.n_frames, cfg.tau);
  CHECK(count_dynamic(c, 20, index, cfg) == 0);
  CHECK(count_dynamic(c, 21, index, cfg) == 1);
}

TEST_CASE("count_static over a persistent structure", "[ds_voting]") {
  VoteConfig cfg;
  cfg.tau = 1.0;
  cfg.tau_d = 3;
  cfg.tau_s = 10;
  cfg.n_frames = 100;
  const Point3 c{10, -4, 0.5};
  std::vector<std::pair<std::int64_t, Point3>> entries;
  for (int f = 0; f < 100; ++f) entries.push_back({f, c});
  const std::vector<Track> archive = {
      track_at(3, MotionLabel::CoarseStatic, entries)};
  const TraceIndex index(archive, cfg.n_frames, cfg.tau);

  // frames 0..40 and 60..99 are at temporal distance >= tau_s from t = 50
  CHECK(count_static(c, 50, index, cfg) == 81);
  // nothing inside the exclusion zone counts
  const std::vector<Track> near_only = {
      track_at(4, MotionLabel::CoarseStatic,
               {{45, c}, {50, c}, {55, c}})};
  const TraceIndex index2(near_only, cfg.n_frames, cfg.tau);
  CHECK(count_static(c, 50, index2, cfg) == 0);
  // empty distant frames
  CHECK(count_static({90, 90, 0}, 50, index, cfg) == 0);
}

TEST_CASE("vote: ties fall to Dynamic", "[ds_voting]") {
  VoteConfig cfg;
  cfg.tau = 1.0;
  cfg.tau_d = 2;
  cfg.tau_s = 10;
  cfg.n_frames = 40;
  const Point3 c{0, 0, 0};

  // N_dyn = 0, N_stat = 5 -> Static
  std::vector<Track> archive = {track_at(1, MotionLabel::CoarseStatic,
                                         {{30, c}, {31, c}, {32, c}, {33, c},
                                          {34, c}})};
  TraceIndex index(archive, cfg.n_frames, cfg.tau);
  CHECK(vote(c, 10, index, cfg) == PointLabel::Static);

  // N_dyn = 5, N_stat = 0 -> Dynamic
  archive = {track_at(1, MotionLabel::CoarseDynamic,
                      {{8, c}, {9, c}, {10, c}, {11, c}, {12, c}})};
  TraceIndex index2(archive, cfg.n_frames, cfg.tau);
  CHECK(vote(c, 10, index2, cfg) == PointLabel::Dynamic);

  // N_dyn = 3 vs N_stat = 3 -> Dynamic (strict inequality in the Static case)
  archive = {track_at(1, MotionLabel::CoarseDynamic, {{9, c}, {10, c}, {11, c}}),
             track_at(2, MotionLabel::CoarseStatic, {{30, c}, {31, c}, {32, c}})};
  TraceIndex index3(archive, cfg.n_frames, cfg.tau);
  REQUIRE(count_dynamic(c, 10, index3, cfg) == 3);
  REQUIRE(count_static(c, 10, index3, cfg) == 3);
  CHECK(vote(c, 10, index3, cfg) == PointLabel::Dynamic);
}

TEST_CASE("indexed counts equal the brute-force oracle", "[ds_voting]") {
  VoteConfig cfg;
  cfg.tau = 1.0;
  cfg.tau_d = 5;
  cfg.tau_s = 50;
  cfg.n_frames = 200;

  Rng rng(404);
  std::vector<Track> archive;
  for (int id = 1; id <= 50; ++id) {
    const bool dynamic = rng.uniform() < 0.4;
    Point3 c{rng.uniform(0, 40), rng.uniform(0, 40), rng.uniform(0, 2)};
    Point3 step{0, 0, 0};
    if (dynamic) step = {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0};
    const int start = static_cast<int>(rng.uniform_int(100));
    const int len = 20 + static_cast<int>(rng.uniform_int(100));
    std::vector<std::pair<std::int64_t, Point3>> entries;
    for (int f = start; f < std::min(200, start + len); ++f) {
      entries.push_back({f, c});
      c = c + step;
      // small jitter either way
      c.x += rng.uniform(-0.02, 0.02);
      c.y += rng.uniform(-0.02, 0.02);
    }
    archive.push_back(track_at(
        id, dynamic ? MotionLabel::CoarseDynamic : MotionLabel::CoarseStatic,
        entries));
  }

  const TraceIndex index(archive, cfg.n_frames, cfg.tau);
  for (const Track& tr : archive) {
    for (const TrackHistoryEntry& e : tr.history) {
      const Point3 c = e.box.center();
      const int t = static_cast<int>(e.frame_index);
      REQUIRE(count_dynamic(c, t, index, cfg) ==
              brute_count_dynamic(archive, c, t, cfg));
      REQUIRE(count_static(c, t, index, cfg) ==
              brute_count_static(archive, c, t, cfg));
    }
  }
}

TEST_CASE("votes are invariant under archive duplication", "[ds_voting]") {
  VoteConfig cfg;
  cfg.tau = 1.0;
  cfg.tau_d = 3;
  cfg.tau_s = 20;
  cfg.n_frames = 60;
  Rng rng(505);
  std::vector<Track> archive;
  for (int id = 1; id <= 8; ++id) {
    std::vector<std::pair<std::int64_t, Point3>> entries;
    Point3 c{rng.uniform(0, 10), rng.uniform(0, 10), 0};
    const bool dynamic = id % 2 == 0;
    for (int f = 0; f < 60; ++f) {
      entries.push_back({f, c});
      if (dynamic) c.x += 0.15;
    }
    archive.push_back(track_at(
        id, dynamic ? MotionLabel::CoarseDynamic : MotionLabel::CoarseStatic,
        entries));
  }
  const std::vector<RefinedBox> base = refine_sequence(archive, cfg);

  std::vector<Track> doubled = archive;
  for (Track t : archive) {
    t.id += 100;
    doubled.push_back(std::move(t));
  }
  const std::vector<RefinedBox> dup = refine_sequence(doubled, cfg);
  std::map<std::pair<std::int64_t, std::int64_t>, bool> base_labels, dup_labels;
  for (const RefinedBox& r : base) base_labels[{r.frame_index, r.track_id}] = r.dynamic;
  for (const RefinedBox& r : dup) {
    if (r.track_id <= 100) dup_labels[{r.frame_index, r.track_id}] = r.dynamic;
  }
  CHECK(base_labels == dup_labels);
}

TEST_CASE("refine_sequence is idempotent and a fixed point on persistent statics",
          "[ds_voting]") {
  VoteConfig cfg;
  cfg.tau = 1.0;
  cfg.tau_d = 5;
  cfg.tau_s = 50;
  cfg.n_frames = 150;
  std::vector<Track> archive;
  for (int id = 1; id <= 5; ++id) {
    std::vector<std::pair<std::int64_t, Point3>> entries;
    const Point3 c{3.0 * id, -2.0 * id, 0.5};
    for (int f = 0; f < 150; ++f) entries.push_back({f, c});
    archive.push_back(track_at(id, MotionLabel::CoarseStatic, entries));
  }
  const auto first = refine_sequence(archive, cfg);
  const auto second = refine_sequence(archive, cfg);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].dynamic == second[i].dynamic);
    CHECK_FALSE(first[i].dynamic);  // all refined Static, no change
  }
}

TEST_CASE("tracking-gap boxes near a dynamic corridor refine Dynamic",
          "[ds_voting]") {
  VoteConfig cfg;
  cfg.tau = 1.0;
  cfg.tau_d = 5;
  cfg.tau_s = 50;
  cfg.n_frames = 150;

  // walker moving +y at 0.2 m/frame, tracked 0-20 and 26-40 by two tracks;
  // frames 21-25 produce unmatched one-shot boxes along the same corridor
  auto walker_pos = [](int f) { return Point3{10.0, 0.2 * f, 1.0}; };
  std::vector<Track> archive;
  std::vector<std::pair<std::int64_t, Point3>> first, second;
  for (int f = 0; f <= 20; ++f) first.push_back({f, walker_pos(f)});
  for (int f = 26; f <= 40; ++f) second.push_back({f, walker_pos(f)});
  archive.push_back(track_at(1, MotionLabel::CoarseDynamic, first));
  archive.push_back(track_at(2, MotionLabel::CoarseDynamic, second));
  for (int f = 21; f <= 25; ++f) {
    archive.push_back(
        track_at(10 + f, MotionLabel::CoarseStatic, {{f, walker_pos(f)}}));
  }

  const auto refined = refine_sequence(archive, cfg);
  for (const RefinedBox& r : refined) {
    if (r.track_id >= 10) {
      INFO("gap frame " << r.frame_index);
      CHECK(r.dynamic);
    }
  }
}

TEST_CASE("a parked object with a few jittery frames refines Static",
          "[ds_voting]") {
  VoteConfig cfg;
  cfg.tau = 1.0;
  cfg.tau_d = 5;
  cfg.tau_s = 50;
  cfg.n_frames = 200;

  const Point3 car{8, 0, 1};
  std::vector<std::pair<std::int64_t, Point3>> persistent;
  for (int f = 0; f < 200; ++f) persistent.push_back({f, car});
  std::vector<Track> archive = {track_at(1, MotionLabel::CoarseStatic, persistent)};
  // misdetected dynamic sliver during frames 90-92, centered 0.6 m off
  archive.push_back(track_at(2, MotionLabel::CoarseDynamic,
                             {{90, {8.6, 0, 1}}, {91, {8.5, 0, 1}},
                              {92, {8.4, 0, 1}}}));

  const auto refined = refine_sequence(archive, cfg);
  for (const RefinedBox& r : refined) {
    if (r.track_id == 2) CHECK_FALSE(r.dynamic);
  }
}
