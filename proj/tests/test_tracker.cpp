#include "toss/rng.hpp"
#include "toss/tracker.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <map>

using namespace toss;

namespace {

Detection det(const BBox& b, std::int64_t frame) {
  Detection d;
  d.box = b;
  d.frame_index = frame;
  return d;
}

Track make_track(const std::vector<BBox>& boxes) {
  Track t;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    t.append_history({static_cast<std::int64_t>(i), boxes[i], {}});
  }
  return t;
}

}  // namespace

TEST_CASE("empty first frame creates no tracks", "[tracker]") {
  Tracker tracker;
  tracker.step(0, 0.0, {});
  CHECK(tracker.live_tracks().empty());
  CHECK(tracker.archive().empty());
}

TEST_CASE("a track confirms after min_hits consecutive hits", "[tracker]") {
  TrackerParams params;
  params.min_hits = 3;
  Tracker tracker(params);
  const BBox b{5, 5, 1, 0, 2, 1, 1};
  tracker.step(0, 0.0, {det(b, 0)});
  REQUIRE(tracker.live_tracks().size() == 1);
  CHECK(tracker.live_tracks()[0].status == TrackStatus::Tentative);
  tracker.step(1, 0.1, {det(b, 1)});
  CHECK(tracker.live_tracks()[0].status == TrackStatus::Tentative);
  tracker.step(2, 0.2, {det(b, 2)});
  REQUIRE(tracker.live_tracks().size() == 1);
  CHECK(tracker.live_tracks()[0].status == TrackStatus::Confirmed);
  CHECK(tracker.live_tracks()[0].hits == 3);
}

TEST_CASE("tracks die after max_age misses and archive with history",
          "[tracker]") {
  TrackerParams params;
  params.max_age = 3;
  Tracker tracker(params);
  const BBox b{5, 5, 1, 0, 2, 1, 1};
  tracker.step(0, 0.0, {det(b, 0)});
  tracker.step(1, 0.1, {det(b, 1)});
  for (int f = 2; f < 5; ++f) tracker.step(f, 0.1 * f, {});
  CHECK(tracker.live_tracks().empty());
  REQUIRE(tracker.archive().size() == 1);
  CHECK(tracker.archive()[0].status == TrackStatus::Dead);
  CHECK(tracker.archive()[0].history.size() == 2);
}

TEST_CASE("out-of-order frames are rejected", "[tracker]") {
  Tracker tracker;
  tracker.step(5, 0.5, {});
  CHECK_THROWS_AS(tracker.step(5, 0.6, {}), std::invalid_argument);
  CHECK_THROWS_AS(tracker.step(4, 0.6, {}), std::invalid_argument);
}

TEST_CASE("classify_track: stationary jitter stays static", "[tracker]") {
  Rng rng(50);
  std::vector<BBox> boxes;
  for (int i = 0; i < 20; ++i) {
    boxes.push_back({5.0 + rng.uniform(-0.05, 0.05), 3.0 + rng.uniform(-0.05, 0.05),
                     1.0, 0, 1.0, 0.8, 1.7});
  }
  const Track t = make_track(boxes);
  CHECK(classify_track(t, 0.75, 0.5) == MotionLabel::CoarseStatic);
}

TEST_CASE("classify_track: steady motion reads dynamic", "[tracker]") {
  std::vector<BBox> boxes;
  for (int i = 0; i < 5; ++i) {
    boxes.push_back({1.0 * i, 0.0, 1.0, 0, 1.0, 0.8, 1.7});
  }
  const Track t = make_track(boxes);
  CHECK(classify_track(t, 0.75, 0.5) == MotionLabel::CoarseDynamic);
}

TEST_CASE("classify_track: the size term absorbs occlusion centroid shifts",
          "[tracker]") {
  // 4 m long box with a single 1.0 m centroid jump from partial occlusion
  std::vector<BBox> boxes(10, BBox{5, 0, 1, 0, 4.0, 1.6, 1.4});
  boxes[6].cx = 6.0;
  const Track t = make_track(boxes);
  // gate = max(0.75, 0.5 * 4.0) = 2.0 > 1.0
  CHECK(classify_track(t, 0.75, 0.5) == MotionLabel::CoarseStatic);
}

TEST_CASE("classify_track needs two entries", "[tracker]") {
  const Track t = make_track({{0, 0, 0, 0, 1, 1, 1}});
  CHECK_THROWS_AS(classify_track(t, 0.75, 0.5), std::invalid_argument);
}

TEST_CASE("incremental max displacement equals the pairwise maximum",
          "[tracker]") {
  Rng rng(51);
  std::vector<BBox> boxes;
  for (int i = 0; i < 40; ++i) {
    boxes.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 2), 0,
                     1, 1, 1});
  }
  const Track t = make_track(boxes);
  double brute = 0.0;
  for (std::size_t a = 0; a < boxes.size(); ++a) {
    for (std::size_t b = a + 1; b < boxes.size(); ++b) {
      brute = std::max(brute, distance(boxes[a].center(), boxes[b].center()));
    }
  }
  CHECK(t.max_displacement == Catch::Approx(brute));
}

TEST_CASE("two crossing objects keep their identities", "[tracker]") {
  // object A runs along +x, object B along +y; paths cross at (10, 10) with
  // an offset in time, speeds 1 m/frame
  Tracker tracker;
  std::map<std::string, std::int64_t> identity;
  for (int f = 0; f < 20; ++f) {
    const BBox a{static_cast<double>(f + 1), 10.0, 1.0, 0.0, 1.6, 0.8, 1.7};
    const BBox b{10.0, static_cast<double>(f - 3), 1.0, 0.0, 1.6, 0.8, 1.7};
    const Tracker::StepResult r =
        tracker.step(f, 0.1 * f, {det(a, f), det(b, f)});
    if (f == 1) {
      identity["a"] = r.track_of_detection[0];
      identity["b"] = r.track_of_detection[1];
      REQUIRE(identity["a"] != identity["b"]);
    }
    if (f > 1) {
      REQUIRE(r.track_of_detection[0] == identity["a"]);
      REQUIRE(r.track_of_detection[1] == identity["b"]);
    }
  }
  tracker.finish();
  REQUIRE(tracker.archive().size() == 2);
  for (const Track& t : tracker.archive()) {
    CHECK(t.motion_label == MotionLabel::CoarseDynamic);
    CHECK(t.history.size() == 20);
  }
}

TEST_CASE("hierarchical and exhaustive trackers agree when k covers all tracks",
          "[tracker]") {
  Rng rng(52);
  TrackerParams ph;
  ph.hierarchical = true;
  ph.k = 64;
  TrackerParams pe = ph;
  pe.hierarchical = false;
  Tracker th(ph), te(pe);
  for (int f = 0; f < 30; ++f) {
    std::vector<Detection> dets;
    const int n = 1 + static_cast<int>(rng.uniform_int(12));
    for (int i = 0; i < n; ++i) {
      dets.push_back(det({rng.uniform(0, 30), rng.uniform(0, 30),
                          rng.uniform(0, 2), 0, 1.5, 1.0, 1.5},
                         f));
    }
    const auto rh = th.step(f, 0.1 * f, dets);
    const auto re = te.step(f, 0.1 * f, dets);
    REQUIRE(rh.track_of_detection == re.track_of_detection);
  }
}
