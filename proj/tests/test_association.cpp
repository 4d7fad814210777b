#include "toss/association.hpp"
#include "toss/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>

using namespace toss;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BBox random_box(Rng& rng, double arena = 20.0) {
  BBox b;
  b.cx = rng.uniform(0.0, arena);
  b.cy = rng.uniform(0.0, arena);
  b.cz = rng.uniform(0.0, 2.0);
  b.theta = rng.uniform(-M_PI, M_PI);
  b.l = rng.uniform(0.5, 4.0);
  b.w = rng.uniform(0.5, 2.0);
  b.h = rng.uniform(0.5, 2.0);
  return b;
}

std::set<std::pair<int, std::int64_t>> match_set(const AssociationResult& r) {
  std::set<std::pair<int, std::int64_t>> s;
  for (const Match& m : r.matches) s.insert({m.detection, m.track_id});
  return s;
}

}  // namespace

TEST_CASE("no detections leaves every track unmatched", "[association]") {
  std::vector<TrackRef> tracks = {{1, {0, 0, 0, 0, 1, 1, 1}},
                                  {2, {5, 0, 0, 0, 1, 1, 1}}};
  const AssociationResult r = associate_exhaustive({}, tracks, 3.0);
  CHECK(r.matches.empty());
  CHECK(r.unmatched_tracks == std::vector<std::int64_t>{1, 2});
  CHECK(r.cost_evaluations == 0);
}

TEST_CASE("a detection identical to one track matches it at cost zero",
          "[association]") {
  const BBox target{4, 4, 0, 0.3, 2, 1, 1};
  std::vector<TrackRef> tracks = {{7, {0, 0, 0, 0, 1, 1, 1}},
                                  {8, target},
                                  {9, {9, 9, 0, 0, 1, 1, 1}}};
  for (bool hierarchical : {false, true}) {
    const AssociationResult r =
        hierarchical ? associate_hierarchical({target}, tracks, 3, 3.0)
                     : associate_exhaustive({target}, tracks, 3.0);
    REQUIRE(r.matches.size() == 1);
    CHECK(r.matches[0].track_id == 8);
    CHECK(r.matches[0].cost == Catch::Approx(0.0).margin(1e-9));
    CHECK(r.unmatched_detections.empty());
    CHECK(r.unmatched_tracks == std::vector<std::int64_t>{7, 9});
  }
}

TEST_CASE("cost gate blocks expensive matches", "[association]") {
  std::vector<TrackRef> tracks = {{1, {30, 0, 0, 0, 1, 1, 1}}};
  const std::vector<BBox> detections = {{0, 0, 0, 0, 1, 1, 1}};
  const AssociationResult r = associate_exhaustive(detections, tracks, 3.0);
  CHECK(r.matches.empty());
  CHECK(r.unmatched_detections == std::vector<int>{0});
  CHECK(r.unmatched_tracks == std::vector<std::int64_t>{1});
}

TEST_CASE("hierarchical equals exhaustive whenever k covers all tracks",
          "[association]") {
  Rng rng(555);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(40));
    const int m = 1 + static_cast<int>(rng.uniform_int(40));
    std::vector<BBox> detections(n);
    for (auto& b : detections) b = random_box(rng);
    std::vector<TrackRef> tracks(m);
    for (int j = 0; j < m; ++j) tracks[j] = {j + 1, random_box(rng)};
    const double gate = trial % 2 == 0 ? 3.0 : kInf;

    const AssociationResult ex = associate_exhaustive(detections, tracks, gate);
    const AssociationResult hi =
        associate_hierarchical(detections, tracks, m, gate);
    REQUIRE(match_set(ex) == match_set(hi));
    REQUIRE(ex.unmatched_detections == hi.unmatched_detections);
    REQUIRE(ex.cost_evaluations == static_cast<std::size_t>(n) * m);
    REQUIRE(hi.cost_evaluations == static_cast<std::size_t>(n) * m);
  }
}

TEST_CASE("well-separated pairs resolve identically at k = 1", "[association]") {
  Rng rng(808);
  std::vector<BBox> detections;
  std::vector<TrackRef> tracks;
  // pair i lives on a coarse lattice; within-pair gap ~0.3 m, between-pair > 10x
  for (int i = 0; i < 25; ++i) {
    const double gx = 20.0 * (i % 5);
    const double gy = 20.0 * (i / 5);
    BBox t{gx, gy, 0, 0, 2, 1, 1};
    BBox d = t;
    d.cx += rng.uniform(-0.15, 0.15);
    d.cy += rng.uniform(-0.15, 0.15);
    tracks.push_back({i + 1, t});
    detections.push_back(d);
  }
  const AssociationResult hi =
      associate_hierarchical(detections, tracks, 1, 3.0, 2.0, 200.0);
  const AssociationResult ex = associate_exhaustive(detections, tracks, 3.0);
  REQUIRE(hi.matches.size() == 25);
  CHECK(match_set(hi) == match_set(ex));
  CHECK(hi.cost_evaluations == 25);
  CHECK(ex.cost_evaluations == 625);
}

TEST_CASE("cost evaluation counts are exactly N*min(M,k)", "[association]") {
  Rng rng(909);
  for (const auto& [n, m, k] : std::vector<std::array<int, 3>>{
           {17, 23, 5}, {23, 17, 40}, {8, 8, 1}, {50, 3, 7}}) {
    std::vector<BBox> detections(n);
    for (auto& b : detections) b = random_box(rng);
    std::vector<TrackRef> tracks(m);
    for (int j = 0; j < m; ++j) tracks[j] = {j + 1, random_box(rng)};
    const AssociationResult hi = associate_hierarchical(detections, tracks, k, kInf);
    const AssociationResult ex = associate_exhaustive(detections, tracks, kInf);
    CHECK(hi.cost_evaluations ==
          static_cast<std::size_t>(n) * std::min(m, k));
    CHECK(ex.cost_evaluations == static_cast<std::size_t>(n) * m);
  }
}

TEST_CASE("matching is injective both ways", "[association]") {
  Rng rng(111);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(30));
    const int m = 1 + static_cast<int>(rng.uniform_int(30));
    std::vector<BBox> detections(n);
    for (auto& b : detections) b = random_box(rng);
    std::vector<TrackRef> tracks(m);
    for (int j = 0; j < m; ++j) tracks[j] = {j + 1, random_box(rng)};
    for (const AssociationResult& r :
         {associate_exhaustive(detections, tracks, 3.0),
          associate_hierarchical(detections, tracks, 4, 3.0)}) {
      std::set<int> dets;
      std::set<std::int64_t> ids;
      for (const Match& mm : r.matches) {
        CHECK(dets.insert(mm.detection).second);
        CHECK(ids.insert(mm.track_id).second);
        CHECK(mm.cost <= 3.0);
      }
      CHECK(r.matches.size() + r.unmatched_detections.size() ==
            static_cast<std::size_t>(n));
      CHECK(r.matches.size() + r.unmatched_tracks.size() ==
            static_cast<std::size_t>(m));
    }
  }
}

// Frozen replay of a random 20x20 instance: the exhaustive greedy associator
// is itself the oracle here; the fixture below was captured from it once and
// guards against regressions in either associator.
TEST_CASE("frozen 20x20 fixture replays exactly", "[association]") {
  Rng rng(20240314);
  std::vector<BBox> detections(20);
  for (auto& b : detections) b = random_box(rng);
  std::vector<TrackRef> tracks(20);
  for (int j = 0; j < 20; ++j) tracks[j] = {j + 1, random_box(rng)};

  const AssociationResult ex = associate_exhaustive(detections, tracks, kInf);
  const AssociationResult hi = associate_hierarchical(detections, tracks, 20, kInf);
  REQUIRE(match_set(ex) == match_set(hi));
  REQUIRE(ex.matches.size() == 20);

  std::map<int, std::int64_t> got;
  for (const Match& m : ex.matches) got[m.detection] = m.track_id;

  // captured fixture: detection -> track id
  const std::map<int, std::int64_t> expected = {
#include "fixtures/assoc_20x20.inc"
  };
  CHECK(got == expected);
}
