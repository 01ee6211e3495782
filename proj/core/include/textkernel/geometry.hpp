#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "textkernel/grid.hpp"

namespace textkernel {

/// Pixel (col, row) has its center at (col, row).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct PixelPos {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelPos&, const PixelPos&) = default;
};

/// Closed ring; outer rings have positive shoelace area.
struct Polygon {
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct BoundingBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
};

double signed_area(const Polygon& p);
double polygon_area(const Polygon& p);  // |signed_area|
double perimeter(const Polygon& p);
BoundingBox bounding_box(const Polygon& p);
Polygon reversed(Polygon p);
Polygon translated(Polygon p, double dx, double dy);
Polygon scaled(Polygon p, double factor);

/// Drops repeated and collinear-forward vertices; spikes are kept.
Polygon remove_collinear(const Polygon& p);

/// True when no two non-adjacent edges intersect or touch.
bool is_simple(const Polygon& p);

/// Douglas-Peucker on a closed ring: every dropped vertex lies within
/// `tolerance` of the kept chord spanning it. Returns the input when fewer
/// than three vertices would survive.
Polygon simplify_ring(const Polygon& p, double tolerance);

// ---------------------------------------------------------------------------
// Components and contours

/// Runs of set pixels grouped into 4-connected components. Component ids are
/// 1-based in raster first-touch order.
struct ComponentRuns {
  int height = 0;
  int width = 0;
  std::vector<Run> runs;             // raster order
  std::vector<std::int32_t> run_id;  // component id per run
  int count = 0;
};

ComponentRuns label_runs(const BinaryMap& mask);
/// Components of the pixels strictly above `threshold`.
ComponentRuns label_runs(const FloatMap& prob, float threshold);
void paint_labels(const ComponentRuns& cr, Grid<std::int32_t>& ids);

LabeledMask connected_components(const BinaryMap& mask);

/// Outer border pixels of the component with `id`, traced with 8-neighbour
/// moves from its first raster pixel. Pixels may repeat on one-pixel-wide
/// parts. `start` must be the component's first pixel in raster order.
std::vector<PixelPos> trace_border(const Grid<std::int32_t>& ids, std::int32_t id, PixelPos start);
/// Same, with every nonzero pixel of `mask` a member.
std::vector<PixelPos> trace_border(const BinaryMap& mask, PixelPos start);

/// Polygon through pixel centers of the outer border, positively oriented,
/// collinear vertices removed. Components whose center ring has zero area
/// (single pixels, straight one-pixel lines) fall back to the pixel-corner
/// outline.
Polygon contour_from_border(const std::vector<PixelPos>& border, const Grid<std::int32_t>& ids,
                            std::int32_t id);
Polygon contour_from_border(const std::vector<PixelPos>& border, const BinaryMap& mask);

/// Outline along pixel edges (corners at half-integer coordinates) of the
/// 4-connected component of `mask` containing `start`, positively oriented.
/// Its area equals the component's pixel count when the component has no
/// holes. `start` must be the component's first pixel in raster order.
Polygon pixel_outline(const BinaryMap& mask, PixelPos start);

Polygon extract_contour(const LabeledMask& mask, std::int32_t id);
/// Contour of the first component (raster order) of a binary mask.
Polygon extract_contour(const BinaryMap& component);

// ---------------------------------------------------------------------------
// Offsetting, rasterization, IoU

inline constexpr double kArcTolerance = 0.25;
/// Round joins never use fewer segments than this per full turn.
inline constexpr int kMinArcSegments = 16;

/// Offsets a positively oriented ring by `delta` (positive grows) with round
/// joins, resolving self-overlaps of the raw offset path with a positive
/// winding union. Returns outer rings only; empty when the ring vanishes.
std::vector<Polygon> offset_polygon(const Polygon& p, double delta, double arc_tolerance = kArcTolerance);

/// Pixels whose center lies inside (even-odd) or on the boundary of `p`.
BinaryMap rasterize(const Polygon& p, int height, int width);

/// Same rule, painted (OR) into `canvas` whose pixel (0, 0) sits at image
/// pixel (origin_x, origin_y).
void rasterize_onto(const Polygon& p, BinaryMap& canvas, int origin_x = 0, int origin_y = 0);

/// |a & b| / |a | b|, with 0/0 defined as 0.
double mask_iou(const BinaryMap& a, const BinaryMap& b);

}  // namespace textkernel
