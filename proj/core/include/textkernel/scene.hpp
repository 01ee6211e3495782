#pragma once

// Synthetic text scenes: rotated rectangles and curved bands laid out with a
// guaranteed pixel gap.

#include <cstdint>
#include <string>

#include "textkernel/labels.hpp"

namespace textkernel {

enum class ShapeFamily { kRectangles, kBands, kMixed };

std::string to_string(ShapeFamily f);
/// Accepts "rectangles", "bands", "mixed".
ShapeFamily parse_shape_family(const std::string& name);

struct SceneConfig {
  int height = 512;
  int width = 512;
  int min_instances = 3;
  int max_instances = 6;
  ShapeFamily family = ShapeFamily::kMixed;
  double min_thickness = 18.0;  // px, short side of a shape
  double max_thickness = 40.0;
  double min_aspect = 2.0;  // length / thickness
  double max_aspect = 5.0;
  double min_separation = 2.0;  // px of background between any two shapes
  double shrink_ratio = kDefaultShrinkRatio;
  /// Shapes whose kernel would be smaller than this (or split) are rejected.
  double min_kernel_area = 16.0;
  int max_attempts = 200;  // placement retries per instance
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedScene {
  Scene scene;
  int requested = 0;  // instance count drawn from the range
};

/// Deterministic per seed. Places fewer than `requested` instances when
/// retries run out.
GeneratedScene gen_scene(const SceneConfig& cfg);

/// Rectangle of `length` x `thickness` centered at (cx, cy), long axis at
/// `angle` radians.
Polygon make_rotated_rect(double cx, double cy, double length, double thickness, double angle);

/// Band swept along a quadratic arc whose midpoint sits `bend` px off the
/// chord. Half-width is thickness/2 * (1 + width_wave * cos(2 pi t + phase)).
Polygon make_curved_band(double cx, double cy, double length, double thickness, double angle,
                         double bend, double width_wave, double phase, int samples = 24);

}  // namespace textkernel
