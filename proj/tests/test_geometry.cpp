#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "shoal/geometry.hpp"

using shoal::BBox;

TEST(BBox, RejectsDegenerateBoxes) {
  EXPECT_THROW(BBox(0, 0, 0, 5), std::invalid_argument);
  EXPECT_THROW(BBox(0, 0, 5, -1), std::invalid_argument);
  EXPECT_NO_THROW(BBox(-3, -3, 0.5, 0.5));
}

TEST(Iou, IdentityDisjointAndHalfShift) {
  const BBox b(3, 4, 10, 7);
  EXPECT_DOUBLE_EQ(shoal::iou(b, b), 1.0);
  EXPECT_DOUBLE_EQ(shoal::iou(BBox(0, 0, 10, 10), BBox(20, 20, 5, 5)), 0.0);
  // intersection 50, union 150
  EXPECT_NEAR(shoal::iou(BBox(0, 0, 10, 10), BBox(5, 0, 10, 10)), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(oracle::pixel_iou(0, 0, 10, 10, 5, 0, 10, 10), 1.0 / 3.0, 1e-12);
}

TEST(Iou, TouchingEdgesAndCornersHaveZeroOverlap) {
  EXPECT_EQ(shoal::iou(BBox(0, 0, 10, 10), BBox(10, 0, 10, 10)), 0.0);
  EXPECT_EQ(shoal::iou(BBox(0, 0, 10, 10), BBox(10, 10, 3, 3)), 0.0);
}

TEST(Iou, MatchesPixelCountingOnRandomIntegerBoxes) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pos(-6, 12), size(1, 9);
  for (int i = 0; i < 2000; ++i) {
    const int ax = pos(rng), ay = pos(rng), aw = size(rng), ah = size(rng);
    const int bx = pos(rng), by = pos(rng), bw = size(rng), bh = size(rng);
    const double v = shoal::iou(BBox(ax, ay, aw, ah), BBox(bx, by, bw, bh));
    ASSERT_NEAR(v, oracle::pixel_iou(ax, ay, aw, ah, bx, by, bw, bh), 1e-9);
  }
}

TEST(Iou, SymmetricAndBounded) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pos(-50, 50), size(0.1, 40);
  for (int i = 0; i < 5000; ++i) {
    const BBox a(pos(rng), pos(rng), size(rng), size(rng));
    const BBox b(pos(rng), pos(rng), size(rng), size(rng));
    const double ab = shoal::iou(a, b);
    ASSERT_EQ(ab, shoal::iou(b, a));
    ASSERT_GE(ab, 0.0);
    ASSERT_LE(ab, 1.0);
    ASSERT_EQ(shoal::iou(a, a), 1.0);
  }
}

TEST(BufferRegion, ScalesAroundCenter) {
  const BBox box(10, 10, 4, 6);
  EXPECT_EQ(shoal::buffer_region(box, 1), BBox(8, 7, 8, 12));
  EXPECT_EQ(shoal::buffer_region(box, 2), BBox(4, 1, 16, 24));
  EXPECT_THROW(shoal::buffer_region(box, 0), std::invalid_argument);
}

TEST(BufferRegion, CenterPreservedAndNested) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> pos(-100, 100), size(0.5, 30);
  for (int i = 0; i < 500; ++i) {
    const BBox b(pos(rng), pos(rng), size(rng), size(rng));
    const auto c = shoal::center(b);
    for (int k = 1; k <= 5; ++k) {
      const BBox r = shoal::buffer_region(b, k);
      ASSERT_NEAR(shoal::center(r).x, c.x, 1e-9);
      ASSERT_NEAR(shoal::center(r).y, c.y, 1e-9);
      const BBox outer = shoal::buffer_region(b, k + 1);
      ASSERT_LE(outer.x(), r.x());
      ASSERT_LE(outer.y(), r.y());
      ASSERT_GE(outer.right(), r.right());
      ASSERT_GE(outer.bottom(), r.bottom());
    }
  }
}

TEST(Interpolate, ConstantMidpointAndLinear) {
  const BBox b(1, 2, 3, 4);
  for (const auto& x : shoal::interpolate_boxes(b, b, 4)) EXPECT_EQ(x, b);

  const auto mid = shoal::interpolate_boxes(BBox(0, 0, 10, 10), BBox(10, 0, 10, 10), 1);
  ASSERT_EQ(mid.size(), 1u);
  EXPECT_EQ(mid[0], BBox(5, 0, 10, 10));

  const auto two = shoal::interpolate_boxes(BBox(0, 0, 10, 10), BBox(9, 9, 10, 16), 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NEAR(two[0].x(), 3, 1e-12);
  EXPECT_NEAR(two[0].y(), 3, 1e-12);
  EXPECT_NEAR(two[0].h(), 12, 1e-12);
  EXPECT_NEAR(two[1].x(), 6, 1e-12);
  EXPECT_NEAR(two[1].y(), 6, 1e-12);
  EXPECT_NEAR(two[1].h(), 14, 1e-12);
  EXPECT_EQ(two[1].w(), 10);
}

TEST(Interpolate, CentersAreCollinear) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> pos(-100, 100), size(1, 30);
  for (int i = 0; i < 300; ++i) {
    const BBox a(pos(rng), pos(rng), size(rng), size(rng));
    const BBox b(pos(rng), pos(rng), size(rng), size(rng));
    const auto ca = shoal::center(a), cb = shoal::center(b);
    const double len = std::hypot(cb.x - ca.x, cb.y - ca.y);
    for (const auto& m : shoal::interpolate_boxes(a, b, 1 + i % 7)) {
      const auto cm = shoal::center(m);
      const double cross = (cb.x - ca.x) * (cm.y - ca.y) - (cb.y - ca.y) * (cm.x - ca.x);
      ASSERT_LT(std::fabs(cross) / std::max(len, 1.0), 1e-9);
    }
  }
}

TEST(Contains, ClosedBoundary) {
  const BBox r(0, 0, 10, 10);
  EXPECT_EQ(shoal::center(r).x, 5);
  EXPECT_EQ(shoal::center(r).y, 5);
  EXPECT_TRUE(shoal::contains(r, {10, 10}));
  EXPECT_TRUE(shoal::contains(r, {0, 0}));
  EXPECT_FALSE(shoal::contains(r, {10.1, 5}));
}
