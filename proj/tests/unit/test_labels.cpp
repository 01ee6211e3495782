#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "textkernel/labels.hpp"
#include "textkernel/scene.hpp"

using namespace textkernel;

namespace {

Polygon pixel_square(int x0, int y0, int side) {
  const double a = x0 - 0.5, b = y0 - 0.5;
  return Polygon{{{a, b}, {a + side, b}, {a + side, b + side}, {a, b + side}}};
}

std::size_t count(const BinaryMap& m) { return static_cast<std::size_t>(std::count(m.data.begin(), m.data.end(), 1)); }

Scene random_scene(std::uint64_t seed, double shrink = kDefaultShrinkRatio) {
  SceneConfig cfg;
  cfg.height = cfg.width = 192;
  cfg.min_thickness = 10;
  cfg.max_thickness = 24;
  cfg.shrink_ratio = shrink;
  cfg.seed = seed;
  return gen_scene(cfg).scene;
}

}  // namespace

TEST(RegionLabel, EmptyScene) {
  const RegionLabel r = region_label(Scene{16, 16, {}});
  EXPECT_EQ(count(r.region), 0u);
  EXPECT_EQ(r.ids.count, 0);
}

TEST(RegionLabel, TenByTenSquare) {
  const RegionLabel r = region_label(Scene{32, 32, {pixel_square(5, 5, 10)}});
  EXPECT_EQ(count(r.region), 100u);
  EXPECT_EQ(r.ids.ids.at(5, 5), 1);
}

TEST(RegionLabel, TwoDisjointInstances) {
  const RegionLabel r = region_label(Scene{32, 32, {pixel_square(1, 1, 5), pixel_square(20, 20, 6)}});
  EXPECT_EQ(r.ids.count, 2);
  std::size_t ones = 0, twos = 0;
  for (auto v : r.ids.ids.data) {
    ones += v == 1;
    twos += v == 2;
  }
  EXPECT_EQ(ones, 25u);
  EXPECT_EQ(twos, 36u);
}

TEST(KernelLabel, ShrinkOffsetOfSquare) {
  EXPECT_DOUBLE_EQ(shrink_offset(pixel_square(0, 0, 10), 0.5), 1.875);
  // [1.375, 7.625] after shrinking covers pixel centers 2..7.
  const BinaryMap k = kernel_label(Scene{16, 16, {pixel_square(0, 0, 10)}, 0.5});
  EXPECT_EQ(count(k), 36u);
  EXPECT_EQ(k.at(2, 2), 1);
  EXPECT_EQ(k.at(1, 1), 0);
}

TEST(KernelLabel, RatioNearOneKeepsRegion) {
  const Scene s{64, 64, {pixel_square(3, 3, 20), pixel_square(30, 30, 25)}, 0.999999};
  EXPECT_EQ(kernel_label(s).data, region_label(s).region.data);
}

TEST(KernelLabel, VanishedInstancesDropped) {
  // A 0.45-wide sliver covering column 2; shrinking by about 0.21 leaves a
  // strip at x in [1.81, 1.84] that holds no pixel center.
  const Polygon sliver{{{1.6, 1.5}, {2.05, 1.5}, {2.05, 10.5}, {1.6, 10.5}}};
  const Scene s{16, 16, {sliver}, 0.01};
  EXPECT_EQ(count(region_label(s).region), 9u);
  EXPECT_EQ(count(kernel_label(s)), 0u);
}

TEST(KernelLabel, SubsetOfRegionAndMonotoneInRatio) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Scene s = random_scene(seed);
    const BinaryMap region = region_label(s).region;
    const BinaryMap k5 = kernel_label(s);
    s.shrink_ratio = 0.8;
    const BinaryMap k8 = kernel_label(s);
    for (std::size_t i = 0; i < region.size(); ++i) {
      if (k5.data[i]) ASSERT_EQ(region.data[i], 1) << "seed " << seed;
      if (k5.data[i]) ASSERT_EQ(k8.data[i], 1) << "seed " << seed;
    }
  }
}

TEST(DistanceLabel, IsolatedPixel) {
  LabeledMask m{Grid<std::int32_t>(5, 5, 0), 1};
  m.ids.at(2, 2) = 1;
  EXPECT_EQ(distance_label(m).at(2, 2), 1.0f);
}

TEST(DistanceLabel, FiveByFiveBlockCenter) {
  LabeledMask m{Grid<std::int32_t>(15, 15, 0), 1};
  for (int y = 5; y < 10; ++y)
    for (int x = 5; x < 10; ++x) m.ids.at(y, x) = 1;
  const FloatMap d = distance_label(m);
  EXPECT_EQ(d.at(7, 7), 3.0f);
  EXPECT_EQ(d.at(5, 5), 1.0f);
  EXPECT_EQ(d.at(0, 0), 0.0f);
}

TEST(DistanceLabel, CanvasEdgeCountsAsOutside) {
  LabeledMask m{Grid<std::int32_t>(4, 4, 1), 1};
  const FloatMap d = distance_label(m);
  EXPECT_EQ(d.at(0, 0), 1.0f);
  EXPECT_EQ(d.at(1, 1), 2.0f);
}

TEST(DistanceLabel, TouchingInstancesDoNotShareDistances) {
  LabeledMask m{Grid<std::int32_t>(1, 8, 0), 2};
  for (int x = 0; x < 4; ++x) m.ids.at(0, x) = 1;
  for (int x = 4; x < 8; ++x) m.ids.at(0, x) = 2;
  const FloatMap d = distance_label(m);
  for (float v : d.data) EXPECT_EQ(v, 1.0f);
}

TEST(DistanceLabel, MatchesBruteForceExactly) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = static_cast<int>(rng.uniform_int(1, 40)), w = static_cast<int>(rng.uniform_int(1, 40));
    LabeledMask m;
    if (trial % 2 == 0) {
      BinaryMap b(h, w, 0);
      const double density = rng.uniform(0.3, 0.95);
      for (auto& v : b.data) v = rng.uniform() < density;
      m = connected_components(b);
    } else {
      m.ids = Grid<std::int32_t>(h, w, 0);
      m.count = 3;
      for (auto& v : m.ids.data) v = static_cast<std::int32_t>(rng.uniform_int(0, 3));
    }
    EXPECT_EQ(distance_label(m).data, oracle::brute_force_distance(m.ids).data) << "trial " << trial;
  }
}

TEST(DistanceLabel, BoundsOnSceneInstances) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scene s = random_scene(seed);
    const LabelBundle l = make_labels(s);
    for (int id = 1; id <= l.instance_ids.count; ++id) {
      int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
      for (int y = 0; y < l.instance_ids.height(); ++y)
        for (int x = 0; x < l.instance_ids.width(); ++x)
          if (l.instance_ids.ids.at(y, x) == id) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
          }
      const double w = x1 - x0 + 1, h = y1 - y0 + 1;
      const double half_diag = 0.5 * std::hypot(w, h);
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          if (l.instance_ids.ids.at(y, x) != id) continue;
          EXPECT_GE(l.distance.at(y, x), 1.0f);
          EXPECT_LE(l.distance.at(y, x), half_diag);
        }
    }
  }
}

TEST(MakeLabels, BundleInvariants) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LabelBundle l = make_labels(random_scene(seed));
    for (std::size_t i = 0; i < l.region.size(); ++i) {
      if (l.kernel.data[i]) EXPECT_EQ(l.region.data[i], 1);
      EXPECT_EQ(l.distance.data[i] > 0.0f, l.region.data[i] == 1);
      EXPECT_EQ(l.instance_ids.ids.data[i] != 0, l.region.data[i] == 1);
    }
  }
}
