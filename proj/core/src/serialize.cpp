#include "textkernel/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "textkernel/errors.hpp"
#include "textkernel/version.hpp"

namespace textkernel {

using nlohmann::json;

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json polygon_json(const Polygon& p) {
  json pts = json::array();
  for (const Point& q : p.points) pts.push_back({round6(q.x), round6(q.y)});
  return json{{"points", pts}};
}

Polygon polygon_from(const json& j) {
  Polygon p;
  for (const auto& q : j.at("points")) p.points.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
  return p;
}

json post_json(const PostConfig& c) {
  return {{"kernel_threshold", round6(c.kernel_threshold)},
          {"region_threshold", round6(c.region_threshold)},
          {"min_kernel_area", round6(c.min_kernel_area)},
          {"score_threshold", round6(c.score_threshold)},
          {"distance_scale", round6(c.distance_scale)},
          {"output_scale", round6(c.output_scale)},
          {"fixed_delta", round6(c.fixed_delta)},
          {"fixed_refine_with_region", c.fixed_refine_with_region},
          {"simplify_tolerance", round6(c.simplify_tolerance)}};
}

json scene_cfg_json(const SceneConfig& c) {
  return {{"height", c.height},
          {"width", c.width},
          {"min_instances", c.min_instances},
          {"max_instances", c.max_instances},
          {"family", to_string(c.family)},
          {"min_thickness", round6(c.min_thickness)},
          {"max_thickness", round6(c.max_thickness)},
          {"min_aspect", round6(c.min_aspect)},
          {"max_aspect", round6(c.max_aspect)},
          {"min_separation", round6(c.min_separation)},
          {"shrink_ratio", round6(c.shrink_ratio)},
          {"min_kernel_area", round6(c.min_kernel_area)},
          {"max_attempts", c.max_attempts},
          {"seed", c.seed}};
}

json report_json(const EvalReport& r) {
  json matches = json::array();
  for (const Match& m : r.matches) matches.push_back({{"pred", m.pred}, {"gt", m.gt}, {"iou", round6(m.iou)}});
  return {{"precision", round6(r.precision)},
          {"recall", round6(r.recall)},
          {"f_measure", round6(r.f_measure)},
          {"num_pred", r.num_pred},
          {"num_gt", r.num_gt},
          {"true_positives", r.true_positives()},
          {"mean_iou", round6(r.mean_iou())},
          {"iou_threshold", round6(r.iou_threshold)},
          {"matches", matches}};
}

json fit_json(const LineFit& f) {
  return {{"slope", round6(f.slope)}, {"intercept", round6(f.intercept)}, {"r2", round6(f.r2)}};
}

template <typename T>
void take(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

void reject_unknown(const json& obj, const json& known, const std::string& section) {
  for (const auto& [k, v] : obj.items()) {
    if (!known.contains(k)) throw ConfigError("unknown key '" + k + "' in config section '" + section + "'");
  }
}

}  // namespace

double round6(double v) {
  if (!std::isfinite(v)) return v;
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

std::string detections_to_json(const DetectionResult& d, ExpandMethod method, const PostConfig& cfg, int height,
                               int width) {
  json inst = json::array();
  for (const DetectedInstance& i : d.instances) {
    json j = polygon_json(i.polygon);
    j["score"] = round6(i.score);
    j["offset"] = round6(i.offset);
    inst.push_back(std::move(j));
  }
  const ExpandCounters& c = d.counters;
  json doc{{"version", kVersion},
           {"method", to_string(method)},
           {"height", height},
           {"width", width},
           {"config", post_json(cfg)},
           {"counters",
            {{"decision_touches", c.decision_touches},
             {"contour_pixels", c.contour_pixels},
             {"kernels_found", c.kernels_found},
             {"kernels_kept", c.kernels_kept}}},
           {"instances", inst}};
  return dump(doc);
}

DetectionResult detections_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    DetectionResult d;
    for (const auto& j : doc.at("instances")) {
      DetectedInstance i;
      i.polygon = polygon_from(j);
      take(j, "score", i.score);
      take(j, "offset", i.offset);
      d.instances.push_back(std::move(i));
    }
    if (doc.contains("counters")) {
      const json& c = doc.at("counters");
      take(c, "decision_touches", d.counters.decision_touches);
      take(c, "contour_pixels", d.counters.contour_pixels);
      take(c, "kernels_found", d.counters.kernels_found);
      take(c, "kernels_kept", d.counters.kernels_kept);
    }
    return d;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("detections: ") + e.what());
  }
}

std::string scene_to_json(const Scene& s, const SceneConfig& cfg, int requested) {
  json inst = json::array();
  for (const Polygon& p : s.instances) inst.push_back(polygon_json(p));
  json doc{{"version", kVersion},
           {"height", s.height},
           {"width", s.width},
           {"shrink_ratio", round6(s.shrink_ratio)},
           {"requested", requested},
           {"placed", static_cast<int>(s.instances.size())},
           {"config", scene_cfg_json(cfg)},
           {"instances", inst}};
  return dump(doc);
}

Scene scene_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    Scene s;
    s.height = doc.at("height").get<int>();
    s.width = doc.at("width").get<int>();
    take(doc, "shrink_ratio", s.shrink_ratio);
    for (const auto& j : doc.at("instances")) s.instances.push_back(polygon_from(j));
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
}

std::string report_to_json(const EvalReport& r) {
  json doc = report_json(r);
  doc["version"] = kVersion;
  return dump(doc);
}

std::string roundtrip_to_json(const RoundtripConfig& cfg, const RoundtripSummary& s) {
  json scenes = json::array();
  for (const SceneOutcome& o : s.scenes) {
    json j = report_json(o.report);
    j["seed"] = o.seed;
    j["requested"] = o.requested;
    j["fixed_delta"] = round6(o.fixed_delta);
    j.erase("matches");
    scenes.push_back(std::move(j));
  }
  json doc{{"version", kVersion},
           {"method", to_string(cfg.method)},
           {"num_scenes", cfg.num_scenes},
           {"iou_threshold", round6(cfg.iou_threshold)},
           {"fixed_delta_factor", round6(cfg.fixed_delta_factor)},
           {"corruption",
            {{"prob_noise_sigma", round6(cfg.corruption.prob_noise_sigma)},
             {"distance_jitter", round6(cfg.corruption.distance_jitter)},
             {"seed", cfg.corruption.seed}}},
           {"post", post_json(cfg.post)},
           {"scene", scene_cfg_json(cfg.scene)},
           {"summary",
            {{"mean_precision", round6(s.mean_precision)},
             {"mean_recall", round6(s.mean_recall)},
             {"mean_f", round6(s.mean_f)},
             {"mean_iou", round6(s.mean_iou)},
             {"total_gt", s.total_gt},
             {"total_pred", s.total_pred},
             {"total_tp", s.total_tp}}},
           {"scenes", scenes}};
  return dump(doc);
}

std::string bench_to_json(const std::vector<BenchRow>& rows, const BenchFits* fits) {
  json arr = json::array();
  for (const BenchRow& r : rows) {
    arr.push_back({{"method", to_string(r.method)},
                   {"map_size", r.map_size},
                   {"thickness", round6(r.thickness)},
                   {"instances", r.instances},
                   {"decision_touches", r.decision_touches},
                   {"contour_pixels", r.contour_pixels},
                   {"total_perimeter", round6(r.total_perimeter)},
                   {"region_pixels", r.region_pixels}});
  }
  json doc{{"version", kVersion}, {"rows", arr}};
  if (fits != nullptr) {
    doc["fits"] = {{"bg_touches_vs_perimeter", fit_json(fits->bg_touches_vs_perimeter)},
                   {"pa_touches_vs_area", fit_json(fits->pa_touches_vs_area)}};
  }
  return dump(doc);
}

std::string bench_timings_to_json(const std::vector<BenchRow>& rows) {
  json arr = json::array();
  for (const BenchRow& r : rows) {
    arr.push_back({{"method", to_string(r.method)},
                   {"map_size", r.map_size},
                   {"thickness", round6(r.thickness)},
                   {"median_ms", round6(r.median_ms)},
                   {"min_ms", round6(r.min_ms)}});
  }
  return dump(json{{"rows", arr}});
}

std::string timings_to_json(const std::map<std::string, double>& ms) {
  json doc = json::object();
  for (const auto& [k, v] : ms) doc[k] = round6(v);
  return dump(doc);
}

std::string post_config_to_json(const PostConfig& c) { return dump(post_json(c)); }
std::string scene_config_to_json(const SceneConfig& c) { return dump(scene_cfg_json(c)); }

void apply_config_json(const std::string& text, PostConfig& post, SceneConfig& scene) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, json{{"post", 0}, {"scene", 0}}, "<root>");
  try {
    if (doc.contains("post")) {
      const json& p = doc.at("post");
      json known = post_json(post);
      known["threads"] = 0;
      reject_unknown(p, known, "post");
      take(p, "kernel_threshold", post.kernel_threshold);
      take(p, "region_threshold", post.region_threshold);
      take(p, "min_kernel_area", post.min_kernel_area);
      take(p, "score_threshold", post.score_threshold);
      take(p, "distance_scale", post.distance_scale);
      take(p, "output_scale", post.output_scale);
      take(p, "fixed_delta", post.fixed_delta);
      take(p, "fixed_refine_with_region", post.fixed_refine_with_region);
      take(p, "simplify_tolerance", post.simplify_tolerance);
      take(p, "threads", post.threads);
    }
    if (doc.contains("scene")) {
      const json& s = doc.at("scene");
      reject_unknown(s, scene_cfg_json(scene), "scene");
      take(s, "height", scene.height);
      take(s, "width", scene.width);
      take(s, "min_instances", scene.min_instances);
      take(s, "max_instances", scene.max_instances);
      if (s.contains("family")) scene.family = parse_shape_family(s.at("family").get<std::string>());
      take(s, "min_thickness", scene.min_thickness);
      take(s, "max_thickness", scene.max_thickness);
      take(s, "min_aspect", scene.min_aspect);
      take(s, "max_aspect", scene.max_aspect);
      take(s, "min_separation", scene.min_separation);
      take(s, "shrink_ratio", scene.shrink_ratio);
      take(s, "min_kernel_area", scene.min_kernel_area);
      take(s, "max_attempts", scene.max_attempts);
      take(s, "seed", scene.seed);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  post.validate();
  scene.validate();
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace textkernel
