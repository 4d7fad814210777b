#include "toss/cost.hpp"
#include "toss/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace toss;

namespace {

BBox random_box(Rng& rng) {
  BBox b;
  b.cx = rng.uniform(-10, 10);
  b.cy = rng.uniform(-10, 10);
  b.cz = rng.uniform(-2, 2);
  b.theta = rng.uniform(-M_PI, M_PI);
  b.l = rng.uniform(0.2, 5.0);
  b.w = rng.uniform(0.2, 5.0);
  b.h = rng.uniform(0.2, 3.0);
  return b;
}

}  // namespace

TEST_CASE("identical boxes cost zero in all components", "[cost]") {
  const BBox b{1.0, -2.0, 0.5, 0.7, 3.0, 1.4, 1.6};
  const PairCost c = pair_cost(b, b);
  CHECK(c.c_d == Catch::Approx(0.0).margin(1e-12));
  CHECK(c.c_o == Catch::Approx(0.0).margin(1e-9));
  CHECK(c.c_v == Catch::Approx(0.0).margin(1e-12));
  CHECK(c.total == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("disjoint unit cubes on a 3-4-5 offset", "[cost]") {
  const BBox a{0, 0, 0, 0, 1, 1, 1};
  const BBox b{3, 4, 0, 0, 1, 1, 1};
  const PairCost c = pair_cost(a, b);
  CHECK(c.c_d == Catch::Approx(5.0));
  CHECK(c.c_o == Catch::Approx(1.0));
  CHECK(c.c_v == Catch::Approx(0.0));
  CHECK(c.total == Catch::Approx(6.0));
}

TEST_CASE("containment forces IoU = v_small / v_large", "[cost]") {
  const BBox small{0, 0, 0, 0, 1, 1, 1};
  const BBox big{0, 0, 0, 0, 2, 1, 1};
  const PairCost c = pair_cost(small, big);
  CHECK(c.c_d == Catch::Approx(0.0));
  CHECK(c.c_o == Catch::Approx(0.5));
  CHECK(c.c_v == Catch::Approx(0.5));
  CHECK(c.total == Catch::Approx(1.0));
}

TEST_CASE("rotated overlap uses the true oriented intersection", "[cost]") {
  // concentric equal squares, one at 45 degrees: IoU is exactly 1/sqrt(2)
  const BBox a{0, 0, 0, 0, 2, 2, 2};
  const BBox b{0, 0, 0, M_PI / 4.0, 2, 2, 2};
  CHECK(iou_3d(a, b) == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-9));
}

TEST_CASE("partial z overlap scales the 3D IoU", "[cost]") {
  // identical footprints, half the height overlapping
  const BBox a{0, 0, 0.0, 0, 2, 2, 2};
  const BBox b{0, 0, 1.0, 0, 2, 2, 2};
  // inter = 4 * 1, union = 8 + 8 - 4
  CHECK(iou_3d(a, b) == Catch::Approx(4.0 / 12.0).margin(1e-9));
}

TEST_CASE("pair_cost is symmetric with bounded components", "[cost]") {
  Rng rng(31337);
  for (int i = 0; i < 10000; ++i) {
    const BBox a = random_box(rng);
    const BBox b = random_box(rng);
    const PairCost ab = pair_cost(a, b);
    const PairCost ba = pair_cost(b, a);
    REQUIRE(ab.c_d == Catch::Approx(ba.c_d).margin(1e-9));
    REQUIRE(ab.c_o == Catch::Approx(ba.c_o).margin(1e-9));
    REQUIRE(ab.c_v == Catch::Approx(ba.c_v).margin(1e-12));
    REQUIRE(ab.c_d >= 0.0);
    REQUIRE(ab.c_o >= 0.0);
    REQUIRE(ab.c_o <= 1.0);
    REQUIRE(ab.c_v >= 0.0);
    REQUIRE(ab.c_v <= 1.0);
    const PairCost self = pair_cost(a, a);
    REQUIRE(self.total == Catch::Approx(0.0).margin(1e-9));
  }
}
