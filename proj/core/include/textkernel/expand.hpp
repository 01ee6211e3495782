#pragma once

// Kernel expansion post-processing. Three expanders share the same kernel
// extraction front end:
//   - boundary-guided: each kernel contour is offset by the mean predicted
//     distance sampled on that contour, rasterized, and refined by the text
//     region map;
//   - pixel aggregation: multi-source BFS from every kernel over the region;
//   - fixed offset: one preset offset for every kernel, no refinement by
//     default.

#include <cstdint>
#include <string>
#include <vector>

#include "textkernel/geometry.hpp"
#include "textkernel/grid.hpp"

namespace textkernel {

enum class ExpandMethod { kBoundaryGuided, kPixelAggregation, kFixedOffset };

std::string to_string(ExpandMethod m);
/// Accepts "bg", "pa", "fixed".
ExpandMethod parse_expand_method(const std::string& name);

struct PostConfig {
  double kernel_threshold = 0.5;
  double region_threshold = 0.5;
  double min_kernel_area = 16.0;  // px^2
  double score_threshold = 0.5;
  double distance_scale = 1.0;  // distance-map units -> map pixels
  double output_scale = 1.0;    // map pixels -> reported coordinates
  double fixed_delta = 0.0;     // fixed-offset expander only
  /// Douglas-Peucker tolerance applied to kernel outlines before offsetting;
  /// 0 offsets the raw pixel-edge staircase.
  double simplify_tolerance = 1.0;
  bool fixed_refine_with_region = false;
  int threads = 1;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

struct DetectedInstance {
  Polygon polygon;
  double score = 0.0;
  double offset = 0.0;  // expansion distance applied, map pixels
};

struct ExpandCounters {
  /// Pixels read while deciding how far to expand: distance samples on
  /// kernel contours (boundary-guided) or region pixels visited by BFS
  /// (pixel aggregation).
  std::uint64_t decision_touches = 0;
  std::uint64_t contour_pixels = 0;
  std::uint64_t kernels_found = 0;
  std::uint64_t kernels_kept = 0;
};

struct DetectionResult {
  std::vector<DetectedInstance> instances;
  double model_ms = 0.0;
  double post_ms = 0.0;
  ExpandCounters counters;
};

/// Maps fed to an expander. All share H x W.
struct ExpandInputs {
  const FloatMap* kernel_prob = nullptr;
  const FloatMap* region_prob = nullptr;
  const FloatMap* distance = nullptr;  // boundary-guided only
};

DetectionResult boundary_guided_expand(const FloatMap& kernel_prob, const FloatMap& distance,
                                       const FloatMap& region_prob, const PostConfig& cfg);

DetectionResult pixel_aggregation_expand(const FloatMap& kernel_prob, const FloatMap& region_prob,
                                         const PostConfig& cfg);

DetectionResult fixed_offset_expand(const FloatMap& kernel_prob, const FloatMap& region_prob,
                                    double fixed_delta, const PostConfig& cfg);

DetectionResult run_expand(ExpandMethod method, const ExpandInputs& in, const PostConfig& cfg);

}  // namespace textkernel
