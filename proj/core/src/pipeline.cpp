#include "textkernel/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "parallel.hpp"
#include "textkernel/errors.hpp"
#include "textkernel/npy.hpp"
#include "textkernel/rng.hpp"

namespace textkernel {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

FloatMap to_float(const BinaryMap& b) {
  FloatMap f(b.height, b.width, 0.0f);
  for (std::size_t i = 0; i < b.size(); ++i) f.data[i] = b.data[i];
  return f;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Channels tiled left to right, min-max normalized over the whole map.
void write_heatmap(const DenseMap& m, const fs::path& path) {
  const int h = static_cast<int>(m.height), w = static_cast<int>(m.width);
  const int c = static_cast<int>(m.channels);
  cv::Mat gray(h, w * c, CV_8UC1, cv::Scalar(0));
  const auto [lo_it, hi_it] = std::minmax_element(m.data.begin(), m.data.end());
  const double lo = m.data.empty() ? 0.0 : *lo_it;
  const double span = m.data.empty() ? 0.0 : *hi_it - lo;
  for (int k = 0; k < c; ++k) {
    for (int y = 0; y < h; ++y) {
      auto* row = gray.ptr<std::uint8_t>(y);
      for (int x = 0; x < w; ++x) {
        const double v = span > 0.0 ? (m.at(static_cast<std::size_t>(k), static_cast<std::size_t>(y),
                                            static_cast<std::size_t>(x)) - lo) / span
                                    : 0.0;
        row[k * w + x] = static_cast<std::uint8_t>(std::lround(255.0 * v));
      }
    }
  }
  cv::Mat color;
  cv::applyColorMap(gray, color, cv::COLORMAP_JET);
  if (!cv::imwrite(path.string(), color)) throw ConfigError("cannot write " + path.string());
}

}  // namespace

ExpanderMaps maps_from_labels(const LabelBundle& labels, const Corruption& corruption) {
  ExpanderMaps m;
  m.kernel_prob = to_float(labels.kernel);
  m.region_prob = to_float(labels.region);
  m.distance = labels.distance;
  if (!corruption.active()) return m;

  Rng rng(mix_seed(corruption.seed, 101));
  if (corruption.prob_noise_sigma > 0.0) {
    for (FloatMap* f : {&m.kernel_prob, &m.region_prob}) {
      for (float& v : f->data) {
        v = static_cast<float>(std::clamp(v + corruption.prob_noise_sigma * rng.normal(), 0.0, 1.0));
      }
    }
  }
  if (corruption.distance_jitter > 0.0) {
    const double j = corruption.distance_jitter;
    for (float& v : m.distance.data) {
      if (v > 0.0f) v = static_cast<float>(v * rng.uniform(1.0 - j, 1.0 + j));
    }
  }
  return m;
}

double mean_shrink_offset(const Scene& scene) {
  if (scene.instances.empty()) return 0.0;
  double s = 0.0;
  for (const Polygon& p : scene.instances) s += shrink_offset(p, scene.shrink_ratio);
  return s / static_cast<double>(scene.instances.size());
}

void RoundtripConfig::validate() const {
  scene.validate();
  post.validate();
  if (num_scenes < 0) throw ConfigError("num_scenes must be >= 0");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw ConfigError("iou_threshold must be in (0, 1]");
  if (corruption.prob_noise_sigma < 0.0) throw ConfigError("prob_noise_sigma must be >= 0");
  if (!(corruption.distance_jitter >= 0.0 && corruption.distance_jitter < 1.0))
    throw ConfigError("distance_jitter must be in [0, 1)");
  if (fixed_delta_factor < 0.0) throw ConfigError("fixed_delta_factor must be >= 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

RoundtripSummary roundtrip(const RoundtripConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.num_scenes);
  RoundtripSummary out;
  out.scenes.resize(n);
  std::vector<std::map<std::string, double>> stage(n);

  detail::parallel_for(n, cfg.threads, [&](std::size_t i) {
    SceneOutcome& o = out.scenes[i];
    SceneConfig sc = cfg.scene;
    sc.seed = mix_seed(cfg.scene.seed, i);
    o.seed = sc.seed;

    auto t = Clock::now();
    const GeneratedScene g = gen_scene(sc);
    stage[i]["generate"] = ms_since(t);
    o.requested = g.requested;

    t = Clock::now();
    const LabelBundle labels = make_labels(g.scene);
    Corruption corruption = cfg.corruption;
    corruption.seed = mix_seed(cfg.corruption.seed, i);
    const ExpanderMaps maps = maps_from_labels(labels, corruption);
    stage[i]["labels"] = ms_since(t);

    PostConfig post = cfg.post;
    post.threads = 1;
    if (cfg.method == ExpandMethod::kFixedOffset && cfg.fixed_delta_factor > 0.0) {
      post.fixed_delta = cfg.fixed_delta_factor * mean_shrink_offset(g.scene);
    }
    o.fixed_delta = cfg.method == ExpandMethod::kFixedOffset ? post.fixed_delta : 0.0;
    const DetectionResult det = run_expand(cfg.method, maps.inputs(), post);
    stage[i]["post"] = det.post_ms;

    t = Clock::now();
    o.report = evaluate(det, g.scene, cfg.iou_threshold);
    stage[i]["evaluate"] = ms_since(t);
  });

  double iou_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const EvalReport& r = out.scenes[i].report;
    out.mean_precision += r.precision;
    out.mean_recall += r.recall;
    out.mean_f += r.f_measure;
    out.total_gt += r.num_gt;
    out.total_pred += r.num_pred;
    out.total_tp += r.true_positives();
    for (const Match& m : r.matches) iou_sum += m.iou;
    for (const auto& [k, v] : stage[i]) out.timings_ms[k] += v;
  }
  if (n > 0) {
    out.mean_precision /= static_cast<double>(n);
    out.mean_recall /= static_cast<double>(n);
    out.mean_f /= static_cast<double>(n);
  }
  if (out.total_tp > 0) out.mean_iou = iou_sum / out.total_tp;
  return out;
}

// ---------------------------------------------------------------------------

Scene bench_scene(int map_size, double thickness, int count) {
  struct Slot {
    double fx, fy, angle;
  };
  static constexpr Slot kSlots[] = {{0.27, 0.2, 0.08}, {0.73, 0.2, -0.06}, {0.27, 0.5, 0.12},
                                    {0.73, 0.5, -0.10}, {0.27, 0.8, 0.04}, {0.73, 0.8, -0.03}};
  constexpr int kMaxSlots = static_cast<int>(std::size(kSlots));
  if (count < 0 || count > kMaxSlots) throw ConfigError("bench scene holds 0.." + std::to_string(kMaxSlots) + " instances");
  Scene s;
  s.height = s.width = map_size;
  const double length = 2.0 * thickness;
  for (int i = 0; i < count; ++i) {
    const Slot& slot = kSlots[i];
    const double cx = slot.fx * map_size, cy = slot.fy * map_size;
    if (i % 2 == 0) {
      s.instances.push_back(make_rotated_rect(cx, cy, length, thickness, slot.angle));
    } else {
      s.instances.push_back(make_curved_band(cx, cy, length, thickness, slot.angle, 0.1 * length, 0.05, 0.0, 32));
    }
  }
  return s;
}

void BenchConfig::validate() const {
  if (map_size < 256) throw ConfigError("bench map_size must be >= 256");
  if (!(thickness > 0.0)) throw ConfigError("bench thickness must be > 0");
  if (runs < 1 || warmup < 0) throw ConfigError("bench needs runs >= 1 and warmup >= 0");
}

std::vector<BenchRow> bench_post(const BenchConfig& cfg) {
  cfg.validate();
  const Scene scene = bench_scene(cfg.map_size, cfg.thickness, cfg.count);
  const LabelBundle labels = make_labels(scene);
  const ExpanderMaps maps = maps_from_labels(labels);
  double perimeter_sum = 0.0;
  for (const Polygon& p : scene.instances) perimeter_sum += perimeter(p);
  const auto region_px = static_cast<std::int64_t>(std::count(labels.region.data.begin(), labels.region.data.end(), std::uint8_t{1}));

  PostConfig post;
  post.threads = 1;
  post.fixed_delta = mean_shrink_offset(scene);
  std::vector<BenchRow> rows;
  for (ExpandMethod m : cfg.methods) {
    BenchRow row;
    row.method = m;
    row.map_size = cfg.map_size;
    row.thickness = cfg.thickness;
    row.instances = static_cast<int>(scene.instances.size());
    row.total_perimeter = perimeter_sum;
    row.region_pixels = region_px;
    std::vector<double> times;
    for (int r = 0; r < cfg.warmup + cfg.runs; ++r) {
      const auto t = Clock::now();
      const DetectionResult d = run_expand(m, maps.inputs(), post);
      const double ms = ms_since(t);
      if (r < cfg.warmup) continue;
      times.push_back(ms);
      row.decision_touches = d.counters.decision_touches;
      row.contour_pixels = d.counters.contour_pixels;
    }
    row.median_ms = median(times);
    row.min_ms = *std::min_element(times.begin(), times.end());
    rows.push_back(row);
  }
  return rows;
}

LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ShapeError("loglog_fit needs two equal-length series of >= 2 points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw ShapeError("loglog_fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ShapeError("loglog_fit: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

// ---------------------------------------------------------------------------

ContextDemoInputs context_demo_inputs(const Scene& scene) {
  const LabelBundle labels = make_labels(scene);
  const auto h = static_cast<std::size_t>(scene.height), w = static_cast<std::size_t>(scene.width);
  ContextDemoInputs in;
  in.features = DenseMap(kDemoFeatureChannels, h, w);
  in.seg = DenseMap(kDemoSegChannels, h, w);
  in.distance = DenseMap(kDemoSegChannels, h, w);
  const float dmax = labels.distance.data.empty() ? 0.0f : *std::max_element(labels.distance.data.begin(), labels.distance.data.end());
  const double shrink = mean_shrink_offset(scene);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const int yi = static_cast<int>(y), xi = static_cast<int>(x);
      const double region = labels.region.at(yi, xi);
      const double kernel = labels.kernel.at(yi, xi);
      const double dist = labels.distance.at(yi, xi);
      in.features.at(0, y, x) = region;
      in.features.at(1, y, x) = kernel;
      in.features.at(2, y, x) = dmax > 0.0f ? dist / dmax : 0.0;
      in.features.at(3, y, x) = w > 1 ? static_cast<double>(x) / static_cast<double>(w - 1) : 0.0;
      in.features.at(4, y, x) = h > 1 ? static_cast<double>(y) / static_cast<double>(h - 1) : 0.0;
      in.features.at(5, y, x) = 1.0;
      in.seg.at(0, y, x) = region;
      in.seg.at(1, y, x) = kernel;
      // Distance-head logits: positive inside, negative outside the region
      // (channel 0) or the kernel (channel 1).
      in.distance.at(0, y, x) = dist - 1.0;
      in.distance.at(1, y, x) = dist - 1.0 - shrink;
    }
  }
  return in;
}

ContextDemoResult context_demo(const ContextWeights& weights, const Scene& scene, const fs::path& out_dir) {
  weights.validate();
  if (weights.pixel_proj.in_channels != kDemoFeatureChannels) {
    throw ConfigError("context demo: pixel_proj must take " + std::to_string(kDemoFeatureChannels) + " feature channels");
  }
  const ContextDemoInputs in = context_demo_inputs(scene);
  ContextDemoResult r;
  r.outputs = run_context(in.features, in.seg, in.distance, weights);

  const Matrix& m = r.outputs.relation.m;
  for (std::size_t col = 0; col < m.cols; ++col) {
    double s = 0.0;
    for (std::size_t k = 0; k < m.rows; ++k) s += m(k, col);
    r.max_column_sum_error = std::max(r.max_column_sum_error, std::abs(s - 1.0));
  }
  if (out_dir.empty()) return r;

  fs::create_directories(out_dir);
  const DenseMap m_map = DenseMap::from_matrix(m, static_cast<std::size_t>(scene.height), static_cast<std::size_t>(scene.width));
  npy::Array m_arr = npy::from_dense(m_map);
  m_arr.shape = {m.rows, m.cols};
  npy::write(out_dir / "M.npy", m_arr);
  npy::write(out_dir / "G.npy", npy::from_dense(r.outputs.global));
  npy::write(out_dir / "L.npy", npy::from_dense(r.outputs.local));
  npy::write(out_dir / "S_prime.npy", npy::from_dense(r.outputs.enhanced));
  write_heatmap(m_map, out_dir / "M.png");
  write_heatmap(r.outputs.global, out_dir / "G.png");
  write_heatmap(r.outputs.local, out_dir / "L.png");
  write_heatmap(r.outputs.enhanced, out_dir / "S_prime.png");
  r.files = {"M.npy", "G.npy", "L.npy", "S_prime.npy", "M.png", "G.png", "L.png", "S_prime.png"};
  return r;
}

}  // namespace textkernel
