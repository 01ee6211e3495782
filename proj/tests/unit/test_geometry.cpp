#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "oracles.hpp"
#include "textkernel/geometry.hpp"
#include "textkernel/scene.hpp"

using namespace textkernel;

namespace {

Polygon square(double x0, double y0, double side) {
  return Polygon{{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}}};
}

double total_area(const std::vector<Polygon>& ps) {
  double a = 0;
  for (const Polygon& p : ps) a += polygon_area(p);
  return a;
}

Polygon random_convex(Rng& rng, double cx, double cy, double r, int n) {
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (double& a : angles) a = rng.uniform(0, 2 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  Polygon p;
  for (double a : angles) p.points.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  if (signed_area(p) < 0) p = reversed(p);
  return p;
}

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
}

double inradius_about_centroid(const Polygon& p) {
  double cx = 0, cy = 0;
  for (const Point& q : p.points) {
    cx += q.x;
    cy += q.y;
  }
  cx /= static_cast<double>(p.size());
  cy /= static_cast<double>(p.size());
  double best = 1e300;
  for (std::size_t i = 0; i < p.size(); ++i)
    best = std::min(best, segment_distance({cx, cy}, p.points[i], p.points[(i + 1) % p.size()]));
  return best;
}

std::size_t count(const BinaryMap& m) { return static_cast<std::size_t>(std::count(m.data.begin(), m.data.end(), 1)); }

// Marks background reachable from the canvas edge; everything else is filled.
BinaryMap fill_holes(const BinaryMap& m) {
  BinaryMap outside(m.height, m.width, 0);
  std::deque<PixelPos> q;
  auto push = [&](int x, int y) {
    if (!m.contains(y, x) || m.at(y, x) || outside.at(y, x)) return;
    outside.at(y, x) = 1;
    q.push_back({x, y});
  };
  for (int x = 0; x < m.width; ++x) {
    push(x, 0);
    push(x, m.height - 1);
  }
  for (int y = 0; y < m.height; ++y) {
    push(0, y);
    push(m.width - 1, y);
  }
  while (!q.empty()) {
    const PixelPos p = q.front();
    q.pop_front();
    push(p.x + 1, p.y);
    push(p.x - 1, p.y);
    push(p.x, p.y + 1);
    push(p.x, p.y - 1);
  }
  BinaryMap out(m.height, m.width, 0);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = outside.data[i] ? 0 : 1;
  return out;
}

}  // namespace

TEST(PolygonBasics, AreaPerimeterOrientation) {
  const Polygon s = square(0, 0, 2);
  EXPECT_DOUBLE_EQ(signed_area(s), 4.0);
  EXPECT_DOUBLE_EQ(signed_area(reversed(s)), -4.0);
  EXPECT_DOUBLE_EQ(perimeter(s), 8.0);
  EXPECT_DOUBLE_EQ(polygon_area(scaled(s, 3)), 36.0);
  const BoundingBox b = bounding_box(translated(s, 1, -1));
  EXPECT_DOUBLE_EQ(b.x0, 1);
  EXPECT_DOUBLE_EQ(b.y1, 1);
}

TEST(PolygonBasics, RemoveCollinearAndSimplicity) {
  const Polygon p{{{0, 0}, {1, 0}, {2, 0}, {2, 2}, {2, 2}, {0, 2}}};
  EXPECT_EQ(remove_collinear(p).size(), 4u);
  EXPECT_TRUE(is_simple(square(0, 0, 1)));
  const Polygon bowtie{{{0, 0}, {2, 2}, {2, 0}, {0, 2}}};
  EXPECT_FALSE(is_simple(bowtie));
}

TEST(SimplifyRing, KeepsEveryVertexWithinTolerance) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Polygon band = make_curved_band(50, 50, rng.uniform(40, 90), rng.uniform(8, 20), rng.uniform(0, 3),
                                          rng.uniform(-10, 10), 0.1, rng.uniform(0, 6), 40);
    const Polygon c = extract_contour(rasterize(band, 100, 100));
    for (double tol : {0.5, 1.0, 2.0}) {
      const Polygon s = simplify_ring(c, tol);
      EXPECT_LE(s.size(), c.size());
      EXPECT_GE(s.size(), 3u);
      for (const Point& v : c.points) {
        double best = 1e300;
        for (std::size_t i = 0; i < s.size(); ++i)
          best = std::min(best, segment_distance(v, s.points[i], s.points[(i + 1) % s.size()]));
        EXPECT_LE(best, tol + 1e-9);
      }
    }
  }
}

TEST(ConnectedComponents, EmptyMask) {
  EXPECT_EQ(connected_components(BinaryMap(5, 5, 0)).count, 0);
}

TEST(ConnectedComponents, TwoSquaresSeparatedByColumn) {
  BinaryMap m(3, 7, 0);
  for (int y = 0; y < 3; ++y)
    for (int x : {0, 1, 2, 4, 5, 6}) m.at(y, x) = 1;
  const LabeledMask l = connected_components(m);
  EXPECT_EQ(l.count, 2);
  EXPECT_EQ(l.ids.at(0, 0), 1);
  EXPECT_EQ(l.ids.at(2, 6), 2);
}

TEST(ConnectedComponents, DiagonalPixelsAreSeparate) {
  BinaryMap m(2, 2, 0);
  m.at(0, 0) = m.at(1, 1) = 1;
  EXPECT_EQ(connected_components(m).count, 2);
}

TEST(ConnectedComponents, MatchesFloodFill) {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int h = static_cast<int>(rng.uniform_int(1, 70)), w = static_cast<int>(rng.uniform_int(1, 70));
    const double density = rng.uniform(0.2, 0.8);
    BinaryMap m(h, w, 0);
    for (auto& v : m.data) v = rng.uniform() < density ? 1 : 0;
    const LabeledMask got = connected_components(m);
    const LabeledMask ref = oracle::flood_fill_components(m);
    EXPECT_EQ(got.count, ref.count);
    EXPECT_EQ(got.ids.data, ref.ids.data);
    // Float scan sees the same components.
    FloatMap f(h, w, 0.0f);
    for (std::size_t i = 0; i < f.size(); ++i) f.data[i] = m.data[i] ? rng.uniform(0.51, 1.0) : rng.uniform(0, 0.5);
    const ComponentRuns cr = label_runs(f, 0.5f);
    Grid<std::int32_t> ids(h, w, 0);
    paint_labels(cr, ids);
    EXPECT_EQ(ids.data, ref.ids.data);
  }
}

TEST(ExtractContour, FilledSquare) {
  BinaryMap m(3, 3, 1);
  const LabeledMask l = connected_components(m);
  EXPECT_EQ(trace_border(l.ids, 1, {0, 0}).size(), 8u);
  const Polygon c = extract_contour(m);
  EXPECT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(signed_area(c), 4.0);
  const BoundingBox b = bounding_box(c);
  EXPECT_DOUBLE_EQ(b.x0, 0);
  EXPECT_DOUBLE_EQ(b.x1, 2);
}

TEST(ExtractContour, SinglePixelAndRowFallBackToCorners) {
  BinaryMap px(3, 3, 0);
  px.at(1, 1) = 1;
  const Polygon p = extract_contour(px);
  EXPECT_DOUBLE_EQ(signed_area(p), 1.0);
  EXPECT_DOUBLE_EQ(bounding_box(p).x0, 0.5);

  BinaryMap row(3, 7, 0);
  for (int x = 1; x <= 5; ++x) row.at(1, x) = 1;
  const Polygon r = extract_contour(row);
  EXPECT_DOUBLE_EQ(signed_area(r), 5.0);
  EXPECT_EQ(count(rasterize(r, 3, 7)), 5u);
}

TEST(ExtractContour, RasterCoversOuterBorderOfRandomBlobs) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const BinaryMap blob = fill_holes(oracle::random_blob(rng, 40, 40, static_cast<int>(rng.uniform_int(5, 400))));
    const Polygon c = extract_contour(blob);
    ASSERT_GE(c.size(), 3u);
    EXPECT_GT(signed_area(c), 0.0);
    const BinaryMap r = rasterize(c, 40, 40);
    const BinaryMap border = oracle::border_pixels(blob);
    for (std::size_t i = 0; i < border.size(); ++i)
      if (border.data[i]) ASSERT_EQ(r.data[i], 1) << "trial " << trial << " pixel " << i;
    // The center ring never strays outside the component.
    for (std::size_t i = 0; i < r.size(); ++i)
      if (r.data[i]) ASSERT_EQ(blob.data[i], 1) << "trial " << trial;
  }
}

TEST(ExtractContour, SimpleRingOnTextLikeShapes) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const double t = rng.uniform(6, 20);
    const Polygon shape = trial % 2 == 0
                              ? make_rotated_rect(60, 60, t * rng.uniform(2, 5), t, rng.uniform(0, 3.2))
                              : make_curved_band(60, 60, t * rng.uniform(2, 5), t, rng.uniform(0, 3.2),
                                                 rng.uniform(-8, 8), 0.1, rng.uniform(0, 6));
    const Polygon c = extract_contour(rasterize(shape, 120, 120));
    EXPECT_TRUE(is_simple(c)) << "trial " << trial;
    EXPECT_GT(signed_area(c), 0.0);
  }
}

TEST(PixelOutline, AreaEqualsPixelCountAndRasterRecoversBlob) {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const BinaryMap blob = fill_holes(oracle::random_blob(rng, 40, 40, static_cast<int>(rng.uniform_int(1, 400))));
    PixelPos start{-1, -1};
    for (std::size_t i = 0; i < blob.size() && start.x < 0; ++i)
      if (blob.data[i]) start = {static_cast<int>(i % 40), static_cast<int>(i / 40)};
    const Polygon o = pixel_outline(blob, start);
    EXPECT_GT(signed_area(o), 0.0);
    EXPECT_DOUBLE_EQ(polygon_area(o), static_cast<double>(count(blob))) << "trial " << trial;
    for (const Point& q : o.points) ASSERT_EQ(q.x - std::floor(q.x), 0.5);
    EXPECT_EQ(rasterize(o, 40, 40).data, blob.data) << "trial " << trial;
  }
}

TEST(PixelOutline, DiagonalNeighbourIsNotFollowed) {
  BinaryMap m(4, 4, 0);
  m.at(1, 1) = 1;
  m.at(2, 2) = 1;
  const Polygon o = pixel_outline(m, {1, 1});
  EXPECT_EQ(o.size(), 4u);
  EXPECT_DOUBLE_EQ(polygon_area(o), 1.0);
}

TEST(Offset, AreaBoundsAndMonotoneOnGeneratedShapes) {
  // Inward: A - L d <= area <= A. Outward (no holes to fill on these shapes):
  // A <= area <= A + L d + pi d^2. Both monotone in d.
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    SceneConfig cfg;
    cfg.height = cfg.width = 256;
    cfg.min_thickness = 6;
    cfg.max_thickness = 40;
    cfg.seed = seed;
    for (const Polygon& p : gen_scene(cfg).scene.instances) {
      const double a = polygon_area(p), len = perimeter(p);
      double prev_in = a, prev_out = a;
      for (int k = 1; k <= 40; ++k) {
        const double d = 0.137 * k;
        const double in = total_area(offset_polygon(p, -d)), out = total_area(offset_polygon(p, d));
        ASSERT_LE(in, prev_in + 1e-6) << "seed " << seed << " d " << d;
        ASSERT_GE(in, a - len * d - 1e-6) << "seed " << seed << " d " << d;
        ASSERT_GE(out, prev_out - 1e-6) << "seed " << seed << " d " << d;
        ASSERT_LE(out, a + len * d + std::numbers::pi * d * d + 1e-6) << "seed " << seed << " d " << d;
        prev_in = in;
        prev_out = out;
      }
    }
  }
}

TEST(Offset, StaircaseOutlinesShrinkWithinBounds) {
  Rng rng(15);
  for (int trial = 0; trial < 300; ++trial) {
    const BinaryMap blob = fill_holes(oracle::random_blob(rng, 40, 40, static_cast<int>(rng.uniform_int(5, 300))));
    PixelPos start{-1, -1};
    for (std::size_t i = 0; i < blob.size() && start.x < 0; ++i)
      if (blob.data[i]) start = {static_cast<int>(i % 40), static_cast<int>(i / 40)};
    const Polygon o = pixel_outline(blob, start);
    const double a = polygon_area(o), len = perimeter(o);
    double prev = a;
    for (int k = 1; k <= 12; ++k) {
      const double d = 0.173 * k;
      const double in = total_area(offset_polygon(o, -d));
      ASSERT_LE(in, prev + 1e-6) << "trial " << trial << " d " << d;
      ASSERT_GE(in, a - len * d - 1e-6) << "trial " << trial << " d " << d;
      prev = in;
    }
  }
}

TEST(Offset, UnitSquarePlusOne) {
  const std::vector<Polygon> out = offset_polygon(square(0, 0, 1), 1.0);
  ASSERT_EQ(out.size(), 1u);
  const double expected = 5.0 + std::numbers::pi;
  EXPECT_NEAR(total_area(out), expected, 0.02 * expected);
  EXPECT_GT(signed_area(out[0]), 0.0);
}

TEST(Offset, TenSquareMinusThree) {
  const std::vector<Polygon> out = offset_polygon(square(0, 0, 10), -3.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(total_area(out), 16.0, 0.16);
}

TEST(Offset, ZeroKeepsArea) {
  Rng rng(1);
  const Polygon p = random_convex(rng, 0, 0, 10, 9);
  const std::vector<Polygon> out = offset_polygon(p, 0.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(total_area(out), polygon_area(p), 1e-9);
}

TEST(Offset, VanishesWhenTooNegative) {
  EXPECT_TRUE(offset_polygon(square(0, 0, 4), -2.5).empty());
}

TEST(Offset, ConcaveShapeSplitsInward) {
  // Dumbbell: two 10x10 squares joined by a 2-px-high bar.
  const Polygon p{{{0, 0}, {10, 0}, {10, 4}, {20, 4}, {20, 0}, {30, 0}, {30, 10}, {20, 10}, {20, 6}, {10, 6}, {10, 10}, {0, 10}}};
  EXPECT_EQ(offset_polygon(p, -2.0).size(), 2u);
  const std::vector<Polygon> grown = offset_polygon(p, 1.0);
  ASSERT_EQ(grown.size(), 1u);
  EXPECT_TRUE(is_simple(grown[0]));
}

TEST(Offset, OutwardThenInwardPreservesConvexArea) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Polygon p = random_convex(rng, 0, 0, rng.uniform(5, 60), static_cast<int>(rng.uniform_int(3, 12)));
    const double d = rng.uniform(0.05, 0.95) * inradius_about_centroid(p);
    const std::vector<Polygon> grown = offset_polygon(p, d);
    ASSERT_EQ(grown.size(), 1u);
    EXPECT_GT(total_area(grown), polygon_area(p));
    const std::vector<Polygon> back = offset_polygon(grown[0], -d);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_NEAR(total_area(back), polygon_area(p), 0.03 * polygon_area(p)) << "trial " << trial;
  }
}

TEST(Rasterize, SquareCoveringSixteenCenters) {
  EXPECT_EQ(count(rasterize(square(-0.5, -0.5, 4), 10, 10)), 16u);
  EXPECT_EQ(count(rasterize(square(2.1, 2.1, 3.5), 10, 10)), 9u);
}

TEST(Rasterize, OffCanvasIsEmpty) {
  EXPECT_EQ(count(rasterize(square(50, 50, 5), 10, 10)), 0u);
  EXPECT_EQ(count(rasterize(square(-20, 3, 5), 10, 10)), 0u);
}

TEST(Rasterize, MatchesPointInPolygon) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Polygon p = make_curved_band(20, 20, rng.uniform(15, 30), rng.uniform(4, 10), rng.uniform(0, 3),
                                       rng.uniform(-6, 6), 0.1, 0.3);
    const BinaryMap r = rasterize(p, 40, 40);
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 40; ++x) ASSERT_EQ(r.at(y, x), oracle::point_in_polygon(p, x, y) ? 1 : 0);
  }
}

TEST(Rasterize, AreaTracksShoelace) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Polygon p = random_convex(rng, 64, 64, rng.uniform(15, 50), static_cast<int>(rng.uniform_int(5, 12)));
    if (polygon_area(p) < 400) continue;
    const double ratio = static_cast<double>(count(rasterize(p, 128, 128))) / polygon_area(p);
    EXPECT_NEAR(ratio, 1.0, 0.05);
  }
}

TEST(Rasterize, MonotoneOnNestedShapes) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const double x0 = rng.uniform(0, 20), y0 = rng.uniform(0, 20), side = rng.uniform(1, 20);
    const double grow = rng.uniform(0, 5);
    const BinaryMap inner = rasterize(square(x0, y0, side), 50, 50);
    const BinaryMap outer = rasterize(square(x0 - rng.uniform(0, grow), y0 - rng.uniform(0, grow), side + grow), 50, 50);
    for (std::size_t i = 0; i < inner.size(); ++i)
      if (inner.data[i]) ASSERT_EQ(outer.data[i], 1);
    // Convex shape vs its scaled copy about an interior point.
    Polygon p = random_convex(rng, 0, 0, rng.uniform(4, 15), 7);
    Point c{0, 0};
    for (const Point& q : p.points) c = {c.x + q.x / 7, c.y + q.y / 7};
    p = translated(p, -c.x, -c.y);
    const BinaryMap a = rasterize(translated(p, 25, 25), 50, 50);
    const BinaryMap b = rasterize(translated(scaled(p, rng.uniform(1.0, 1.5)), 25, 25), 50, 50);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a.data[i]) ASSERT_EQ(b.data[i], 1);
  }
}

TEST(MaskIou, Examples) {
  const BinaryMap a = rasterize(square(-0.5, -0.5, 10), 20, 20);
  EXPECT_EQ(mask_iou(a, a), 1.0);
  EXPECT_EQ(mask_iou(a, rasterize(square(10.5, 10.5, 5), 20, 20)), 0.0);
  EXPECT_NEAR(mask_iou(a, rasterize(square(4.5, -0.5, 10), 20, 20)), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(mask_iou(BinaryMap(3, 3, 0), BinaryMap(3, 3, 0)), 0.0);
}

TEST(MaskIou, SymmetricBoundedAndOneIffEqual) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    BinaryMap a(12, 12, 0), b(12, 12, 0);
    for (auto& v : a.data) v = rng.uniform() < 0.5;
    b = a;
    if (trial % 2) b.data[rng.uniform_int(0, 143)] ^= 1;
    const double ab = mask_iou(a, b);
    EXPECT_EQ(ab, mask_iou(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_EQ(ab == 1.0, a.data == b.data);
  }
}
