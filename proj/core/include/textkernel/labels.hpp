#pragma once

#include <vector>

#include "textkernel/geometry.hpp"
#include "textkernel/grid.hpp"

namespace textkernel {

inline constexpr double kDefaultShrinkRatio = 0.5;

/// Ground-truth text shapes on a canvas.
struct Scene {
  int height = 0;
  int width = 0;
  std::vector<Polygon> instances;
  double shrink_ratio = kDefaultShrinkRatio;
};

struct LabelBundle {
  BinaryMap region;
  BinaryMap kernel;
  FloatMap distance;
  LabeledMask instance_ids;
};

/// Inward offset used to build a kernel: area * (1 - r^2) / perimeter.
double shrink_offset(const Polygon& p, double shrink_ratio);

struct RegionLabel {
  BinaryMap region;
  LabeledMask ids;  // id i+1 belongs to scene.instances[i]
};

RegionLabel region_label(const Scene& scene);

/// Union of the rasterized shrunk polygons; instances that vanish are
/// dropped.
BinaryMap kernel_label(const Scene& scene);

/// Exact Euclidean distance from each instance pixel to the nearest pixel
/// not in the same instance; pixels beyond the canvas count as outside.
/// Zero on background.
FloatMap distance_label(const LabeledMask& ids);

LabelBundle make_labels(const Scene& scene);

}  // namespace textkernel
