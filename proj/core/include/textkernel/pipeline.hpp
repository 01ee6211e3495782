#pragma once

// End-to-end runs over synthetic scenes: label maps (optionally corrupted)
// fed to an expander and scored, post-processing benchmarks, and the context
// block demo.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "textkernel/context.hpp"
#include "textkernel/evaluate.hpp"
#include "textkernel/expand.hpp"
#include "textkernel/scene.hpp"

namespace textkernel {

/// Perturbations applied to perfect label maps.
struct Corruption {
  double prob_noise_sigma = 0.0;  // additive Gaussian on kernel/region probabilities, clamped to [0, 1]
  double distance_jitter = 0.0;   // per-pixel multiplicative factor in [1 - j, 1 + j]
  std::uint64_t seed = 0;

  bool active() const { return prob_noise_sigma > 0.0 || distance_jitter > 0.0; }
};

struct ExpanderMaps {
  FloatMap kernel_prob;
  FloatMap region_prob;
  FloatMap distance;

  ExpandInputs inputs() const { return {&kernel_prob, &region_prob, &distance}; }
};

ExpanderMaps maps_from_labels(const LabelBundle& labels, const Corruption& corruption = {});

/// Mean inward shrink offset of the scene's instances.
double mean_shrink_offset(const Scene& scene);

struct RoundtripConfig {
  SceneConfig scene;
  int num_scenes = 100;
  ExpandMethod method = ExpandMethod::kBoundaryGuided;
  PostConfig post;
  Corruption corruption;
  double iou_threshold = kDefaultIouThreshold;
  /// Fixed-offset method only: when > 0 the offset is this multiple of the
  /// scene's mean true shrink offset, overriding post.fixed_delta.
  double fixed_delta_factor = 0.0;
  int threads = 1;  // scenes processed in parallel

  void validate() const;
};

struct SceneOutcome {
  std::uint64_t seed = 0;
  int requested = 0;
  EvalReport report;
  double fixed_delta = 0.0;
};

struct RoundtripSummary {
  std::vector<SceneOutcome> scenes;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f = 0.0;
  double mean_iou = 0.0;  // over every matched pair of every scene
  int total_gt = 0;
  int total_pred = 0;
  int total_tp = 0;
  std::map<std::string, double> timings_ms;  // summed per stage
};

RoundtripSummary roundtrip(const RoundtripConfig& cfg);

// ---------------------------------------------------------------------------
// Post-processing benchmark

/// Five (or `count`) rectangles and curved bands at fixed positions on a
/// square canvas; `thickness` is the short side in px, long side 2x.
Scene bench_scene(int map_size, double thickness, int count = 5);

struct BenchConfig {
  int map_size = 1024;
  double thickness = 165.0;
  int count = 5;
  std::vector<ExpandMethod> methods{ExpandMethod::kBoundaryGuided, ExpandMethod::kPixelAggregation};
  int runs = 20;
  int warmup = 3;

  void validate() const;
};

struct BenchRow {
  ExpandMethod method = ExpandMethod::kBoundaryGuided;
  int map_size = 0;
  double thickness = 0.0;
  int instances = 0;
  double median_ms = 0.0;
  double min_ms = 0.0;
  std::uint64_t decision_touches = 0;
  std::uint64_t contour_pixels = 0;
  double total_perimeter = 0.0;    // ground-truth polygons, px
  std::int64_t region_pixels = 0;  // ground-truth raster area
};

/// Post-processing wall time only, single-threaded, on perfect label maps.
std::vector<BenchRow> bench_post(const BenchConfig& cfg);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log(y) on log(x).
LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Context demo

/// Raw per-pixel features fed to the projection block: region, kernel,
/// normalized distance, x, y, constant 1.
inline constexpr std::size_t kDemoFeatureChannels = 6;
/// Segmentation channels K: region and kernel.
inline constexpr std::size_t kDemoSegChannels = 2;

struct ContextDemoInputs {
  DenseMap features;  // kDemoFeatureChannels x H x W
  DenseMap seg;       // K x H x W, values in [0, 1]
  DenseMap distance;  // K x H x W, raw distance-head stand-in
};

ContextDemoInputs context_demo_inputs(const Scene& scene);

struct ContextDemoResult {
  ContextOutputs outputs;
  double max_column_sum_error = 0.0;  // |sum_k M_ki - 1|, worst column
  std::vector<std::string> files;     // written, relative to out_dir
};

/// Runs the context block on the scene's stand-in maps; writes M, G, L and
/// S' as NPY and PNG heatmaps into `out_dir` when it is non-empty.
ContextDemoResult context_demo(const ContextWeights& weights, const Scene& scene,
                               const std::filesystem::path& out_dir);

}  // namespace textkernel
