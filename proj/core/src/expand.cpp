#include "textkernel/expand.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

#include "parallel.hpp"
#include "textkernel/errors.hpp"

namespace textkernel {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct Kernel {
  std::int32_t id = 0;  // component id in KernelSet::components
  std::int64_t area = 0;
  double score = 0.0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive pixel bbox
  std::vector<std::size_t> runs;
};

struct KernelSet {
  ComponentRuns components;
  std::vector<Kernel> kept;
};

void check_same_size(const FloatMap& a, const FloatMap& b, const char* what) {
  if (!a.same_size(b)) throw ShapeError(std::string(what) + ": input maps differ in size");
}

// row[x] &= (reg[x] > t)
void and_above(std::uint8_t* row, const float* reg, int n, float t) {
  int x = 0;
#if defined(__SSE2__)
  const __m128 tv = _mm_set1_ps(t);
  for (; x + 16 <= n; x += 16) {
    const __m128i m0 = _mm_castps_si128(_mm_cmpgt_ps(_mm_loadu_ps(reg + x), tv));
    const __m128i m1 = _mm_castps_si128(_mm_cmpgt_ps(_mm_loadu_ps(reg + x + 4), tv));
    const __m128i m2 = _mm_castps_si128(_mm_cmpgt_ps(_mm_loadu_ps(reg + x + 8), tv));
    const __m128i m3 = _mm_castps_si128(_mm_cmpgt_ps(_mm_loadu_ps(reg + x + 12), tv));
    const __m128i mask = _mm_packs_epi16(_mm_packs_epi32(m0, m1), _mm_packs_epi32(m2, m3));
    auto* p = reinterpret_cast<__m128i*>(row + x);
    _mm_storeu_si128(p, _mm_and_si128(_mm_loadu_si128(p), mask));
  }
#endif
  for (; x < n; ++x) row[x] &= static_cast<std::uint8_t>(reg[x] > t);
}

double row_sum(const float* row, int n) {
  int x = 0;
  double sum = 0.0;
#if defined(__SSE2__)
  __m128d a0 = _mm_setzero_pd(), a1 = _mm_setzero_pd();
  for (; x + 4 <= n; x += 4) {
    const __m128 v = _mm_loadu_ps(row + x);
    a0 = _mm_add_pd(a0, _mm_cvtps_pd(v));
    a1 = _mm_add_pd(a1, _mm_cvtps_pd(_mm_movehl_ps(v, v)));
  }
  double lanes[2];
  _mm_storeu_pd(lanes, _mm_add_pd(a0, a1));
  sum = lanes[0] + lanes[1];
#endif
  for (; x < n; ++x) sum += row[x];
  return sum;
}

BinaryMap binarize(const FloatMap& prob, double threshold) {
  BinaryMap out(prob.height, prob.width, 0);
  const float t = static_cast<float>(threshold);
  const float* src = prob.data.data();
  std::uint8_t* dst = out.data.data();
  const std::size_t n = prob.size();
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<std::uint8_t>(src[i] > t);
  return out;
}

KernelSet extract_kernels(const FloatMap& kernel_prob, const PostConfig& cfg) {
  KernelSet ks;
  ks.components = label_runs(kernel_prob, static_cast<float>(cfg.kernel_threshold));
  const ComponentRuns& cr = ks.components;
  std::vector<Kernel> all(static_cast<std::size_t>(cr.count));
  std::vector<double> score_sum(all.size(), 0.0);
  for (std::size_t i = 0; i < cr.runs.size(); ++i) {
    const Run& r = cr.runs[i];
    const auto c = static_cast<std::size_t>(cr.run_id[i] - 1);
    Kernel& k = all[c];
    if (k.area == 0) {
      k.id = cr.run_id[i];
      k.x0 = r.x0;
      k.x1 = r.x1 - 1;
      k.y0 = k.y1 = r.y;
    }
    k.area += r.length();
    k.x0 = std::min(k.x0, r.x0);
    k.x1 = std::max(k.x1, r.x1 - 1);
    k.y1 = r.y;
    k.runs.push_back(i);
    score_sum[c] += row_sum(kernel_prob.data.data() + kernel_prob.index(r.y, r.x0), r.length());
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    Kernel& k = all[i];
    k.score = score_sum[i] / static_cast<double>(k.area);
    if (static_cast<double>(k.area) < cfg.min_kernel_area) continue;
    if (k.score < cfg.score_threshold) continue;
    ks.kept.push_back(std::move(k));
  }
  return ks;
}

// Kernel pixels painted into a mask covering its bbox plus one pixel of
// margin; image pixel (x, y) maps to (x - ox, y - oy).
struct LocalMask {
  BinaryMap mask;
  int ox = 0, oy = 0;
};

LocalMask local_mask(const Kernel& k, const ComponentRuns& cr) {
  LocalMask m;
  m.ox = k.x0 - 1;
  m.oy = k.y0 - 1;
  m.mask = BinaryMap(k.y1 - k.y0 + 3, k.x1 - k.x0 + 3, 0);
  for (std::size_t i : k.runs) {
    const Run& r = cr.runs[i];
    std::uint8_t* row = m.mask.data.data() + m.mask.index(r.y - m.oy, 0);
    std::fill(row + (r.x0 - m.ox), row + (r.x1 - m.ox), 1);
  }
  return m;
}

struct Refined {
  Polygon polygon;
  bool ok = false;
};

// Rasterizes the expanded rings, optionally keeps only region pixels, and
// returns the contour of the largest 4-connected piece in image coordinates.
Refined refine(const std::vector<Polygon>& rings, const FloatMap* region_prob, double region_threshold,
               int height, int width) {
  Refined out;
  if (rings.empty()) return out;
  double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
  for (const Polygon& r : rings) {
    const BoundingBox b = bounding_box(r);
    bx0 = std::min(bx0, b.x0);
    by0 = std::min(by0, b.y0);
    bx1 = std::max(bx1, b.x1);
    by1 = std::max(by1, b.y1);
  }
  const int x0 = std::max(0, static_cast<int>(std::floor(bx0)));
  const int y0 = std::max(0, static_cast<int>(std::floor(by0)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(bx1)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(by1)));
  if (x0 > x1 || y0 > y1) return out;

  BinaryMap window(y1 - y0 + 1, x1 - x0 + 1, 0);
  for (const Polygon& r : rings) rasterize_onto(r, window, x0, y0);
  if (region_prob != nullptr) {
    const float t = static_cast<float>(region_threshold);
    for (int y = 0; y < window.height; ++y) {
      and_above(window.data.data() + window.index(y, 0), region_prob->data.data() + region_prob->index(y0 + y, x0),
                window.width, t);
    }
  }

  const ComponentRuns cr = label_runs(window);
  if (cr.count == 0) return out;
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(cr.count) + 1, 0);
  for (std::size_t i = 0; i < cr.runs.size(); ++i) sizes[static_cast<std::size_t>(cr.run_id[i])] += cr.runs[i].length();
  std::int32_t best = 1;
  for (std::int32_t id = 2; id <= cr.count; ++id) {
    if (sizes[static_cast<std::size_t>(id)] > sizes[static_cast<std::size_t>(best)]) best = id;
  }
  PixelPos start{-1, -1};
  for (std::size_t i = 0; i < cr.runs.size(); ++i) {
    const Run& r = cr.runs[i];
    if (cr.run_id[i] != best) {
      std::fill(window.data.begin() + static_cast<std::ptrdiff_t>(window.index(r.y, r.x0)),
                window.data.begin() + static_cast<std::ptrdiff_t>(window.index(r.y, r.x1)), std::uint8_t{0});
    } else if (start.x < 0) {
      start = {r.x0, r.y};
    }
  }
  Polygon poly = contour_from_border(trace_border(window, start), window);
  if (poly.size() < 3) return out;
  out.polygon = translated(std::move(poly), x0, y0);
  out.ok = true;
  return out;
}

enum class OffsetSource { kDistanceMap, kFixed };

DetectionResult contour_expand(const FloatMap& kernel_prob, const FloatMap* distance,
                               const FloatMap& region_prob, const PostConfig& cfg, OffsetSource source,
                               bool refine_with_region) {
  const auto t0 = Clock::now();
  cfg.validate();
  check_same_size(kernel_prob, region_prob, "expand");
  if (distance != nullptr) check_same_size(kernel_prob, *distance, "expand");

  const KernelSet ks = extract_kernels(kernel_prob, cfg);
  const std::size_t n = ks.kept.size();
  std::vector<std::optional<DetectedInstance>> slots(n);
  std::vector<std::uint64_t> touches(n, 0), contour_px(n, 0);

  detail::parallel_for(n, cfg.threads, [&](std::size_t i) {
    const Kernel& k = ks.kept[i];
    const LocalMask m = local_mask(k, ks.components);
    const Run& first = ks.components.runs[k.runs.front()];
    const std::vector<PixelPos> border = trace_border(m.mask, {first.x0 - m.ox, first.y - m.oy});
    contour_px[i] = border.size();
    double delta = cfg.fixed_delta;
    if (source == OffsetSource::kDistanceMap) {
      double sum = 0.0;
      for (const PixelPos& p : border) sum += distance->at(p.y + m.oy, p.x + m.ox);
      touches[i] = border.size();
      delta = sum / static_cast<double>(border.size()) * cfg.distance_scale;
    }
    // A zero offset returns the kernel contour itself; otherwise the pixel
    // outline is grown so the result keeps the kernel's area.
    std::vector<Polygon> expanded;
    if (delta == 0.0) {
      expanded.push_back(translated(contour_from_border(border, m.mask), m.ox, m.oy));
    } else {
      const Polygon outline = translated(pixel_outline(m.mask, {first.x0 - m.ox, first.y - m.oy}), m.ox, m.oy);
      expanded = offset_polygon(simplify_ring(outline, cfg.simplify_tolerance), delta);
    }
    const Refined r = refine(expanded, refine_with_region ? &region_prob : nullptr, cfg.region_threshold,
                             kernel_prob.height, kernel_prob.width);
    if (!r.ok) return;
    DetectedInstance inst;
    inst.polygon = cfg.output_scale == 1.0 ? r.polygon : scaled(r.polygon, cfg.output_scale);
    inst.score = k.score;
    inst.offset = delta;
    slots[i] = std::move(inst);
  });

  DetectionResult result;
  result.counters.kernels_found = static_cast<std::uint64_t>(ks.components.count);
  result.counters.kernels_kept = n;
  for (std::size_t i = 0; i < n; ++i) {
    result.counters.decision_touches += touches[i];
    result.counters.contour_pixels += contour_px[i];
    if (slots[i]) result.instances.push_back(std::move(*slots[i]));
  }
  result.post_ms = elapsed_ms(t0);
  return result;
}

}  // namespace

std::string to_string(ExpandMethod m) {
  switch (m) {
    case ExpandMethod::kBoundaryGuided: return "bg";
    case ExpandMethod::kPixelAggregation: return "pa";
    case ExpandMethod::kFixedOffset: return "fixed";
  }
  return "?";
}

ExpandMethod parse_expand_method(const std::string& name) {
  if (name == "bg") return ExpandMethod::kBoundaryGuided;
  if (name == "pa") return ExpandMethod::kPixelAggregation;
  if (name == "fixed") return ExpandMethod::kFixedOffset;
  throw ConfigError("unknown expansion method '" + name + "' (expected bg, pa or fixed)");
}

void PostConfig::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(kernel_threshold)) throw ConfigError("kernel_threshold must be in (0, 1)");
  if (!in_unit(region_threshold)) throw ConfigError("region_threshold must be in (0, 1)");
  if (!(score_threshold >= 0.0 && score_threshold < 1.0)) throw ConfigError("score_threshold must be in [0, 1)");
  if (!(min_kernel_area >= 0.0)) throw ConfigError("min_kernel_area must be >= 0");
  if (!(distance_scale > 0.0) || !std::isfinite(distance_scale)) throw ConfigError("distance_scale must be > 0");
  if (!(output_scale > 0.0) || !std::isfinite(output_scale)) throw ConfigError("output_scale must be > 0");
  if (!(fixed_delta >= 0.0) || !std::isfinite(fixed_delta)) throw ConfigError("fixed_delta must be >= 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

DetectionResult boundary_guided_expand(const FloatMap& kernel_prob, const FloatMap& distance,
                                       const FloatMap& region_prob, const PostConfig& cfg) {
  return contour_expand(kernel_prob, &distance, region_prob, cfg, OffsetSource::kDistanceMap, true);
}

DetectionResult fixed_offset_expand(const FloatMap& kernel_prob, const FloatMap& region_prob,
                                    double fixed_delta, const PostConfig& cfg) {
  PostConfig c = cfg;
  c.fixed_delta = fixed_delta;
  return contour_expand(kernel_prob, nullptr, region_prob, c, OffsetSource::kFixed, c.fixed_refine_with_region);
}

DetectionResult pixel_aggregation_expand(const FloatMap& kernel_prob, const FloatMap& region_prob,
                                         const PostConfig& cfg) {
  const auto t0 = Clock::now();
  cfg.validate();
  check_same_size(kernel_prob, region_prob, "pixel_aggregation_expand");
  const int h = kernel_prob.height;
  const int w = kernel_prob.width;

  const KernelSet ks = extract_kernels(kernel_prob, cfg);
  if (ks.kept.empty()) {
    DetectionResult none;
    none.counters.kernels_found = static_cast<std::uint64_t>(ks.components.count);
    none.post_ms = elapsed_ms(t0);
    return none;
  }
  const BinaryMap region = binarize(region_prob, cfg.region_threshold);

  // Kept kernels seed labels 1..m; dropped kernels are ordinary region.
  const ComponentRuns& cr = ks.components;
  std::vector<std::int32_t> label_of(static_cast<std::size_t>(cr.count) + 1, 0);
  for (std::size_t i = 0; i < ks.kept.size(); ++i) label_of[static_cast<std::size_t>(ks.kept[i].id)] = static_cast<std::int32_t>(i + 1);
  Grid<std::int32_t> assign(h, w, 0);
  Grid<std::int32_t> level(h, w, -1);
  std::vector<std::size_t> frontier, next;
  std::vector<std::size_t> first_index(ks.kept.size() + 1, static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < cr.runs.size(); ++i) {
    const std::int32_t label = label_of[static_cast<std::size_t>(cr.run_id[i])];
    if (label == 0) continue;
    const Run& r = cr.runs[i];
    const std::size_t base = assign.index(r.y, 0);
    first_index[static_cast<std::size_t>(label)] = std::min(first_index[static_cast<std::size_t>(label)], base + static_cast<std::size_t>(r.x0));
    for (int x = r.x0; x < r.x1; ++x) {
      assign.data[base + static_cast<std::size_t>(x)] = label;
      level.data[base + static_cast<std::size_t>(x)] = 0;
      frontier.push_back(base + static_cast<std::size_t>(x));
    }
  }

  std::uint64_t touches = 0;
  for (std::int32_t lv = 0; !frontier.empty(); ++lv) {
    next.clear();
    for (std::size_t p : frontier) {
      ++touches;
      const std::int32_t label = assign.data[p];
      const int y = static_cast<int>(p / static_cast<std::size_t>(w));
      const int x = static_cast<int>(p % static_cast<std::size_t>(w));
      const std::size_t nbr[4] = {p - static_cast<std::size_t>(w), p - 1, p + 1, p + static_cast<std::size_t>(w)};
      const bool valid[4] = {y > 0, x > 0, x + 1 < w, y + 1 < h};
      for (int k = 0; k < 4; ++k) {
        if (!valid[k]) continue;
        const std::size_t q = nbr[k];
        if (!region.data[q]) continue;
        if (assign.data[q] == 0) {
          assign.data[q] = label;
          level.data[q] = lv + 1;
          next.push_back(q);
          first_index[static_cast<std::size_t>(label)] = std::min(first_index[static_cast<std::size_t>(label)], q);
        } else if (level.data[q] == lv + 1 && assign.data[q] > label) {
          assign.data[q] = label;  // ties go to the lower kernel id
          first_index[static_cast<std::size_t>(label)] = std::min(first_index[static_cast<std::size_t>(label)], q);
        }
      }
    }
    std::swap(frontier, next);
  }

  const std::size_t n = ks.kept.size();
  std::vector<std::optional<DetectedInstance>> slots(n);
  std::vector<std::uint64_t> contour_px(n, 0);
  detail::parallel_for(n, cfg.threads, [&](std::size_t i) {
    const auto label = static_cast<std::int32_t>(i + 1);
    // A tie overwrite can leave first_index pointing at a pixel now owned by
    // a lower label; rescan forward from it to find the true first pixel.
    std::size_t p = first_index[static_cast<std::size_t>(label)];
    while (p < assign.size() && assign.data[p] != label) ++p;
    if (p >= assign.size()) return;
    const PixelPos start{static_cast<int>(p % static_cast<std::size_t>(w)), static_cast<int>(p / static_cast<std::size_t>(w))};
    const std::vector<PixelPos> border = trace_border(assign, label, start);
    contour_px[i] = border.size();
    Polygon poly = contour_from_border(border, assign, label);
    if (poly.size() < 3) return;
    DetectedInstance inst;
    inst.polygon = cfg.output_scale == 1.0 ? std::move(poly) : scaled(std::move(poly), cfg.output_scale);
    inst.score = ks.kept[i].score;
    slots[i] = std::move(inst);
  });

  DetectionResult result;
  result.counters.kernels_found = static_cast<std::uint64_t>(ks.components.count);
  result.counters.kernels_kept = n;
  result.counters.decision_touches = touches;
  for (std::size_t i = 0; i < n; ++i) {
    result.counters.contour_pixels += contour_px[i];
    if (slots[i]) result.instances.push_back(std::move(*slots[i]));
  }
  result.post_ms = elapsed_ms(t0);
  return result;
}

DetectionResult run_expand(ExpandMethod method, const ExpandInputs& in, const PostConfig& cfg) {
  if (in.kernel_prob == nullptr || in.region_prob == nullptr) throw ConfigError("expand: kernel and region maps are required");
  switch (method) {
    case ExpandMethod::kBoundaryGuided:
      if (in.distance == nullptr) throw ConfigError("boundary-guided expansion needs a distance map");
      return boundary_guided_expand(*in.kernel_prob, *in.distance, *in.region_prob, cfg);
    case ExpandMethod::kPixelAggregation:
      return pixel_aggregation_expand(*in.kernel_prob, *in.region_prob, cfg);
    case ExpandMethod::kFixedOffset:
      return fixed_offset_expand(*in.kernel_prob, *in.region_prob, cfg.fixed_delta, cfg);
  }
  throw ConfigError("unknown expansion method");
}

}  // namespace textkernel
