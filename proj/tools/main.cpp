// textkernel command line: label generation, kernel expansion, evaluation,
// round trips, post-processing benchmarks and the context demo.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "textkernel/errors.hpp"
#include "textkernel/npy.hpp"
#include "textkernel/pipeline.hpp"
#include "textkernel/serialize.hpp"
#include "textkernel/version.hpp"
#include "textkernel/weights.hpp"

namespace fs = std::filesystem;
using namespace textkernel;

namespace {

struct Common {
  std::string config;
  std::string out = ".";
};

void load_config(const Common& c, PostConfig& post, SceneConfig& scene) {
  if (!c.config.empty()) apply_config_json(read_text(c.config), post, scene);
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON file with \"post\" and/or \"scene\" sections")->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
}

// Scene flags shared by labelgen and roundtrip; applied after the config file.
struct SceneFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> height, width;
  std::optional<std::string> family;

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Scene seed");
    app->add_option("--height", height, "Canvas height");
    app->add_option("--width", width, "Canvas width");
    app->add_option("--family", family, "rectangles | bands | mixed");
  }
  void apply(SceneConfig& s) const {
    if (seed) s.seed = *seed;
    if (height) s.height = *height;
    if (width) s.width = *width;
    if (family) s.family = parse_shape_family(*family);
    s.validate();
  }
};

// Post-processing flags shared by expand and roundtrip.
struct PostFlags {
  std::optional<double> kernel_thresh, region_thresh, fixed_delta, scale;
  std::optional<int> threads;

  void add(CLI::App* app) {
    app->add_option("--kernel-thresh", kernel_thresh, "Kernel binarization threshold");
    app->add_option("--region-thresh", region_thresh, "Region binarization threshold");
    app->add_option("--fixed-delta", fixed_delta, "Offset for --method fixed, px");
    app->add_option("--scale", scale, "Distance scale (output stride compensation)");
    app->add_option("--threads", threads, "Worker threads");
  }
  void apply(PostConfig& p) const {
    if (kernel_thresh) p.kernel_threshold = *kernel_thresh;
    if (region_thresh) p.region_threshold = *region_thresh;
    if (fixed_delta) p.fixed_delta = *fixed_delta;
    if (scale) p.distance_scale = *scale;
    if (threads) p.threads = *threads;
    p.validate();
  }
};

int run_labelgen(const Common& c, const SceneFlags& sf) {
  PostConfig post;
  SceneConfig scene;
  load_config(c, post, scene);
  sf.apply(scene);
  const GeneratedScene g = gen_scene(scene);
  const LabelBundle labels = make_labels(g.scene);
  const fs::path out = prepare_out(c.out);
  write_text(out / "scene.json", scene_to_json(g.scene, scene, g.requested));
  npy::write(out / "region.npy", npy::from_grid(labels.region));
  npy::write(out / "kernel.npy", npy::from_grid(labels.kernel));
  npy::write(out / "distance.npy", npy::from_grid(labels.distance));
  npy::write(out / "ids.npy", npy::from_grid(labels.instance_ids.ids));
  std::printf("placed %zu of %d instances on %dx%d -> %s\n", g.scene.instances.size(), g.requested, scene.height,
              scene.width, out.string().c_str());
  return 0;
}

int run_expand_cmd(const Common& c, const PostFlags& pf, const std::string& method_name, const std::string& in_dir) {
  PostConfig post;
  SceneConfig scene;
  load_config(c, post, scene);
  pf.apply(post);
  const ExpandMethod method = parse_expand_method(method_name);
  const fs::path in(in_dir);
  const FloatMap kernel = npy::to_float_map(npy::read(in / "kernel.npy"), "kernel.npy");
  const FloatMap region = npy::to_float_map(npy::read(in / "region.npy"), "region.npy");
  FloatMap distance;
  if (method == ExpandMethod::kBoundaryGuided) distance = npy::to_float_map(npy::read(in / "distance.npy"), "distance.npy");
  const DetectionResult d = run_expand(method, {&kernel, &region, &distance}, post);
  const fs::path out = prepare_out(c.out);
  write_text(out / "detections.json", detections_to_json(d, method, post, kernel.height, kernel.width));
  write_text(out / "timings.json", timings_to_json({{"model", d.model_ms}, {"post", d.post_ms}}));
  std::printf("%s: %zu instances from %llu kernels, post %.3f ms\n", to_string(method).c_str(), d.instances.size(),
              static_cast<unsigned long long>(d.counters.kernels_found), d.post_ms);
  return 0;
}

int run_eval(const Common& c, const std::string& pred, const std::string& gt, double iou) {
  const DetectionResult d = detections_from_json(read_text(pred));
  const Scene s = scene_from_json(read_text(gt));
  const EvalReport r = evaluate(d, s, iou);
  const fs::path out = prepare_out(c.out);
  write_text(out / "report.json", report_to_json(r));
  std::printf("P=%.4f R=%.4f F=%.4f (tp %d, pred %d, gt %d)\n", r.precision, r.recall, r.f_measure,
              r.true_positives(), r.num_pred, r.num_gt);
  return 0;
}

struct RoundtripFlags {
  int scenes = 100;
  std::string method = "bg";
  double noise = 0.0;
  double jitter = 0.0;
  double fixed_factor = 0.0;
  double iou = kDefaultIouThreshold;
  int scene_threads = 1;
};

int run_roundtrip(const Common& c, const SceneFlags& sf, const PostFlags& pf, const RoundtripFlags& rf) {
  RoundtripConfig cfg;
  load_config(c, cfg.post, cfg.scene);
  sf.apply(cfg.scene);
  pf.apply(cfg.post);
  cfg.num_scenes = rf.scenes;
  cfg.method = parse_expand_method(rf.method);
  cfg.corruption.prob_noise_sigma = rf.noise;
  cfg.corruption.distance_jitter = rf.jitter;
  cfg.corruption.seed = cfg.scene.seed;
  cfg.fixed_delta_factor = rf.fixed_factor;
  cfg.iou_threshold = rf.iou;
  cfg.threads = rf.scene_threads;
  const RoundtripSummary s = roundtrip(cfg);
  const fs::path out = prepare_out(c.out);
  write_text(out / "report.json", roundtrip_to_json(cfg, s));
  write_text(out / "timings.json", timings_to_json(s.timings_ms));
  std::printf("%s over %d scenes: F=%.4f P=%.4f R=%.4f mean IoU=%.4f (tp %d / gt %d)\n", rf.method.c_str(),
              cfg.num_scenes, s.mean_f, s.mean_precision, s.mean_recall, s.mean_iou, s.total_tp, s.total_gt);
  return 0;
}

struct BenchFlags {
  int size = 1024;
  double thickness = 165.0;
  int runs = 20;
  int warmup = 3;
  std::vector<double> scales;
};

int run_bench(const Common& c, const BenchFlags& bf) {
  BenchConfig cfg;
  cfg.map_size = bf.size;
  cfg.runs = bf.runs;
  cfg.warmup = bf.warmup;
  std::vector<double> scales = bf.scales.empty() ? std::vector<double>{1.0} : bf.scales;
  std::vector<BenchRow> rows;
  for (double s : scales) {
    cfg.thickness = bf.thickness * s;
    const std::vector<BenchRow> part = bench_post(cfg);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::unique_ptr<BenchFits> fits;
  if (scales.size() >= 2) {
    std::vector<double> per, bg, area, pa;
    for (const BenchRow& r : rows) {
      if (r.method == ExpandMethod::kBoundaryGuided) {
        per.push_back(r.total_perimeter);
        bg.push_back(static_cast<double>(r.decision_touches));
      } else if (r.method == ExpandMethod::kPixelAggregation) {
        area.push_back(static_cast<double>(r.region_pixels));
        pa.push_back(static_cast<double>(r.decision_touches));
      }
    }
    fits = std::make_unique<BenchFits>();
    fits->bg_touches_vs_perimeter = loglog_fit(per, bg);
    fits->pa_touches_vs_area = loglog_fit(area, pa);
  }
  const fs::path out = prepare_out(c.out);
  write_text(out / "bench.json", bench_to_json(rows, fits.get()));
  write_text(out / "timings.json", bench_timings_to_json(rows));
  std::printf("%-6s %6s %9s %11s %12s %10s\n", "method", "size", "thickness", "median_ms", "touches", "region_px");
  for (const BenchRow& r : rows) {
    std::printf("%-6s %6d %9.1f %11.3f %12llu %10lld\n", to_string(r.method).c_str(), r.map_size, r.thickness,
                r.median_ms, static_cast<unsigned long long>(r.decision_touches), static_cast<long long>(r.region_pixels));
  }
  if (fits) {
    std::printf("slope BG touches vs perimeter: %.3f\n", fits->bg_touches_vs_perimeter.slope);
    std::printf("slope PA touches vs area:      %.3f\n", fits->pa_touches_vs_area.slope);
  }
  return 0;
}

struct DemoFlags {
  std::string weights;
  bool init_weights = false;
  std::uint64_t weight_seed = 0;
  std::size_t channels = 8;
  int size = 64;
};

int run_context_demo(const Common& c, const SceneFlags& sf, const DemoFlags& df) {
  PostConfig post;
  SceneConfig scene;
  scene.height = scene.width = df.size;
  scene.min_thickness = 8.0;
  scene.max_thickness = 14.0;
  scene.min_instances = 2;
  scene.max_instances = 3;
  load_config(c, post, scene);
  sf.apply(scene);
  if (df.init_weights) {
    save_weights(random_weights(kDemoFeatureChannels, df.channels, kDemoSegChannels, df.weight_seed), df.weights);
  }
  const ContextWeights w = load_weights(df.weights);
  const GeneratedScene g = gen_scene(scene);
  const fs::path out = prepare_out(c.out);
  const ContextDemoResult r = context_demo(w, g.scene, out);
  std::printf("M %zux%zu, G/L %zux%zux%zu, S' %zux%zux%zu, max |column sum - 1| = %.3g\n", r.outputs.relation.m.rows,
              r.outputs.relation.m.cols, r.outputs.global.channels, r.outputs.global.height, r.outputs.global.width,
              r.outputs.enhanced.channels, r.outputs.enhanced.height, r.outputs.enhanced.width, r.max_column_sum_error);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"textkernel: text kernel expansion and context tools"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common lg_c;
  SceneFlags lg_s;
  auto* labelgen = app.add_subcommand("labelgen", "Generate a synthetic scene and its label maps");
  add_common(labelgen, lg_c);
  lg_s.add(labelgen);

  Common ex_c;
  PostFlags ex_p;
  std::string ex_method = "bg", ex_in = ".";
  auto* expand = app.add_subcommand("expand", "Expand kernels from kernel/region/distance NPY maps");
  add_common(expand, ex_c);
  ex_p.add(expand);
  expand->add_option("--method", ex_method, "bg | pa | fixed")->capture_default_str();
  expand->add_option("--in", ex_in, "Directory holding kernel.npy, region.npy, distance.npy")->capture_default_str();

  Common ev_c;
  std::string ev_pred, ev_gt;
  double ev_iou = kDefaultIouThreshold;
  auto* eval = app.add_subcommand("eval", "Score detections against a scene");
  add_common(eval, ev_c);
  eval->add_option("--pred", ev_pred, "detections.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", ev_gt, "scene.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--iou", ev_iou, "IoU threshold")->capture_default_str();

  Common rt_c;
  SceneFlags rt_s;
  PostFlags rt_p;
  RoundtripFlags rt_f;
  auto* rt = app.add_subcommand("roundtrip", "Scenes -> labels -> expansion -> evaluation");
  add_common(rt, rt_c);
  rt_s.add(rt);
  rt_p.add(rt);
  rt->add_option("--scenes", rt_f.scenes, "Number of scenes")->capture_default_str();
  rt->add_option("--method", rt_f.method, "bg | pa | fixed")->capture_default_str();
  rt->add_option("--noise", rt_f.noise, "Gaussian sigma on probabilities")->capture_default_str();
  rt->add_option("--jitter", rt_f.jitter, "Relative distance jitter")->capture_default_str();
  rt->add_option("--fixed-factor", rt_f.fixed_factor, "Fixed offset as a multiple of the true shrink offset");
  rt->add_option("--iou", rt_f.iou, "IoU threshold")->capture_default_str();
  rt->add_option("--scene-threads", rt_f.scene_threads, "Scenes processed in parallel")->capture_default_str();

  Common bn_c;
  BenchFlags bn_f;
  auto* bench = app.add_subcommand("bench", "Time BG and PA post-processing (single thread)");
  add_common(bench, bn_c);
  bench->add_option("--size", bn_f.size, "Map side, px")->capture_default_str();
  bench->add_option("--thickness", bn_f.thickness, "Instance short side, px")->capture_default_str();
  bench->add_option("--runs", bn_f.runs, "Timed runs")->capture_default_str();
  bench->add_option("--warmup", bn_f.warmup, "Untimed runs")->capture_default_str();
  bench->add_option("--scales", bn_f.scales, "Thickness multipliers for log-log fits");

  Common cd_c;
  SceneFlags cd_s;
  DemoFlags cd_f;
  auto* demo = app.add_subcommand("context-demo", "Run the context block on a synthetic scene");
  add_common(demo, cd_c);
  cd_s.add(demo);
  demo->add_option("--weights", cd_f.weights, "Weight bundle directory")->required();
  demo->add_flag("--init-weights", cd_f.init_weights, "Write seeded random weights to --weights first");
  demo->add_option("--weight-seed", cd_f.weight_seed, "Seed for --init-weights")->capture_default_str();
  demo->add_option("--channels", cd_f.channels, "Representation width C for --init-weights")->capture_default_str();
  demo->add_option("--size", cd_f.size, "Scene side, px")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*labelgen) return run_labelgen(lg_c, lg_s);
    if (*expand) return run_expand_cmd(ex_c, ex_p, ex_method, ex_in);
    if (*eval) return run_eval(ev_c, ev_pred, ev_gt, ev_iou);
    if (*rt) return run_roundtrip(rt_c, rt_s, rt_p, rt_f);
    if (*bench) return run_bench(bn_c, bn_f);
    if (*demo) return run_context_demo(cd_c, cd_s, cd_f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
