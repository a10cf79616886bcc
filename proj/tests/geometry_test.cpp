#include <gtest/gtest.h>

#include "oracles.hpp"
#include "similo/error.hpp"
#include "similo/geometry.hpp"

using similo::Rect;

TEST(Geometry, IntersectionAndUnionOfKnownRects) {
  const Rect a{0, 0, 100, 40};
  const Rect b{2, 2, 96, 36};
  EXPECT_EQ(similo::intersection_area(a, b), 3456);
  EXPECT_EQ(similo::union_area(a, b), 4000);
  EXPECT_DOUBLE_EQ(similo::overlap_ratio(a, b), 0.864);
}

TEST(Geometry, DisjointAndTouchingRectsDoNotIntersect) {
  EXPECT_EQ(similo::intersection_area({0, 0, 10, 10}, {20, 20, 5, 5}), 0);
  EXPECT_EQ(similo::intersection_area({0, 0, 10, 10}, {10, 0, 10, 10}), 0);
  EXPECT_EQ(similo::union_area({0, 0, 10, 10}, {10, 0, 10, 10}), 200);
  EXPECT_DOUBLE_EQ(similo::overlap_ratio({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
}

TEST(Geometry, ZeroUnionGivesZeroRatio) {
  EXPECT_DOUBLE_EQ(similo::overlap_ratio({5, 5, 0, 0}, {5, 5, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(similo::overlap_ratio({5, 5, 0, 3}, {1, 1, 4, 0}), 0.0);
}

TEST(Geometry, IdenticalRectsHaveRatioOne) {
  EXPECT_DOUBLE_EQ(similo::overlap_ratio({3, 4, 7, 9}, {3, 4, 7, 9}), 1.0);
}

TEST(Geometry, CenterContainmentIsEdgeInclusive) {
  // Inner centre (10, 5) sits exactly on the outer right edge.
  EXPECT_TRUE(similo::center_contained({0, 0, 10, 10}, {8, 0, 4, 10}));
  EXPECT_FALSE(similo::center_contained({0, 0, 10, 10}, {9, 0, 4, 10}));
  // Degenerate outer rect still contains a centre on its point.
  EXPECT_TRUE(similo::center_contained({5, 5, 0, 0}, {4, 4, 2, 2}));
}

TEST(Geometry, MakeRectRejectsNegativeSize) {
  EXPECT_THROW(similo::make_rect(0, 0, -1, 4), similo::Error);
  EXPECT_THROW(similo::make_rect(0, 0, 1, -4), similo::Error);
  EXPECT_EQ(similo::make_rect(1, 2, 3, 4), (Rect{1, 2, 3, 4}));
}

TEST(Geometry, MatchesGridCountsOnRandomPairs) {
  gen::Rng rng(7);
  for (int i = 0; i < 3000; ++i) {
    const Rect a = gen::rect(rng);
    const Rect b = gen::rect(rng);
    ASSERT_EQ(similo::intersection_area(a, b), oracle::grid_intersection(a, b));
    ASSERT_EQ(similo::union_area(a, b), oracle::grid_union(a, b));
    ASSERT_EQ(similo::center_contained(a, b), oracle::center_inside(a, b));
    ASSERT_EQ(similo::intersection_area(a, b), similo::intersection_area(b, a));
  }
}

TEST(Geometry, RatioAboveHalfImpliesMutualCenterContainment) {
  gen::Rng rng(11);
  int checked = 0;
  while (checked < 5000) {
    const Rect a = gen::rect(rng);
    Rect b = a;
    b.x += static_cast<int>(rng() % 9) - 4;
    b.y += static_cast<int>(rng() % 9) - 4;
    b.width = std::max<std::int64_t>(0, b.width + static_cast<int>(rng() % 9) - 4);
    b.height = std::max<std::int64_t>(0, b.height + static_cast<int>(rng() % 9) - 4);
    if (similo::overlap_ratio(a, b) <= 0.5) continue;
    ++checked;
    ASSERT_TRUE(similo::center_contained(a, b)) << a.x << "," << a.y << " " << b.x << "," << b.y;
    ASSERT_TRUE(similo::center_contained(b, a));
  }
}
