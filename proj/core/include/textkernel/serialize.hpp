#pragma once

// JSON documents written by the CLI. Keys are sorted and every float is
// rounded to 1e-6, so equal inputs give byte-identical files. Wall-clock
// timings never appear here; they go to a separate timings document.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "textkernel/evaluate.hpp"
#include "textkernel/expand.hpp"
#include "textkernel/pipeline.hpp"
#include "textkernel/scene.hpp"

namespace textkernel {

double round6(double v);

std::string detections_to_json(const DetectionResult& d, ExpandMethod method, const PostConfig& cfg, int height,
                               int width);
/// Instances and counters only; timings are not part of the document.
DetectionResult detections_from_json(const std::string& text);

std::string scene_to_json(const Scene& s, const SceneConfig& cfg, int requested);
Scene scene_from_json(const std::string& text);

std::string report_to_json(const EvalReport& r);
std::string roundtrip_to_json(const RoundtripConfig& cfg, const RoundtripSummary& s);

struct BenchFits {
  LineFit bg_touches_vs_perimeter;
  LineFit pa_touches_vs_area;
};
std::string bench_to_json(const std::vector<BenchRow>& rows, const BenchFits* fits);
/// Median and min wall times of each bench row.
std::string bench_timings_to_json(const std::vector<BenchRow>& rows);

std::string timings_to_json(const std::map<std::string, double>& ms);

std::string post_config_to_json(const PostConfig& c);
std::string scene_config_to_json(const SceneConfig& c);

/// Applies {"post": {...}, "scene": {...}} onto the given configs. Unknown
/// keys are rejected.
void apply_config_json(const std::string& text, PostConfig& post, SceneConfig& scene);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace textkernel
