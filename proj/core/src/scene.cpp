#include "textkernel/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "textkernel/errors.hpp"
#include "textkernel/rng.hpp"

namespace textkernel {

namespace {

struct Placed {
  BinaryMap window;
  int ox = 0, oy = 0;
};

Polygon transform(const std::vector<Point>& local, double cx, double cy, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Polygon p;
  p.points.reserve(local.size());
  for (const Point& q : local) p.points.push_back({cx + q.x * c - q.y * s, cy + q.x * s + q.y * c});
  if (signed_area(p) < 0.0) p = reversed(std::move(p));
  return p;
}

// Rasterizes `p` into its own bbox window.
Placed raster_window(const Polygon& p) {
  const BoundingBox b = bounding_box(p);
  Placed w;
  w.ox = static_cast<int>(std::floor(b.x0));
  w.oy = static_cast<int>(std::floor(b.y0));
  const int x1 = static_cast<int>(std::ceil(b.x1));
  const int y1 = static_cast<int>(std::ceil(b.y1));
  w.window = BinaryMap(y1 - w.oy + 1, x1 - w.ox + 1, 0);
  rasterize_onto(p, w.window, w.ox, w.oy);
  return w;
}

bool kernel_is_usable(const Polygon& p, const SceneConfig& cfg) {
  const double d = shrink_offset(p, cfg.shrink_ratio);
  const std::vector<Polygon> pieces = offset_polygon(p, -d);
  if (pieces.size() != 1) return false;
  const Placed k = raster_window(pieces.front());
  const ComponentRuns cr = label_runs(k.window);
  if (cr.count != 1) return false;
  std::int64_t area = 0;
  for (const Run& r : cr.runs) area += r.length();
  return static_cast<double>(area) >= cfg.min_kernel_area;
}

}  // namespace

std::string to_string(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::kRectangles: return "rectangles";
    case ShapeFamily::kBands: return "bands";
    case ShapeFamily::kMixed: return "mixed";
  }
  return "?";
}

ShapeFamily parse_shape_family(const std::string& name) {
  if (name == "rectangles") return ShapeFamily::kRectangles;
  if (name == "bands") return ShapeFamily::kBands;
  if (name == "mixed") return ShapeFamily::kMixed;
  throw ConfigError("unknown shape family '" + name + "' (expected rectangles, bands or mixed)");
}

void SceneConfig::validate() const {
  if (height < 16 || width < 16) throw ConfigError("scene canvas must be at least 16x16");
  if (min_instances < 0 || max_instances < min_instances) throw ConfigError("instance count range is empty");
  if (!(min_thickness >= 2.0) || max_thickness < min_thickness) throw ConfigError("thickness range is empty or below 2 px");
  if (!(min_aspect >= 1.0) || max_aspect < min_aspect) throw ConfigError("aspect range is empty or below 1");
  if (!(min_separation >= 2.0)) throw ConfigError("min_separation must be >= 2 px");
  if (!(shrink_ratio > 0.0 && shrink_ratio < 1.0)) throw ConfigError("shrink_ratio must be in (0, 1)");
  if (!(min_kernel_area >= 0.0)) throw ConfigError("min_kernel_area must be >= 0");
  if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

Polygon make_rotated_rect(double cx, double cy, double length, double thickness, double angle) {
  const double hl = 0.5 * length, ht = 0.5 * thickness;
  return transform({{-hl, -ht}, {hl, -ht}, {hl, ht}, {-hl, ht}}, cx, cy, angle);
}

Polygon make_curved_band(double cx, double cy, double length, double thickness, double angle,
                         double bend, double width_wave, double phase, int samples) {
  samples = std::max(samples, 2);
  // Quadratic Bezier from (-L/2, 0) to (L/2, 0) through control (0, 2 bend);
  // its midpoint is `bend` off the chord.
  const double hl = 0.5 * length;
  std::vector<Point> upper, lower;
  upper.reserve(static_cast<std::size_t>(samples) + 1);
  lower.reserve(static_cast<std::size_t>(samples) + 1);
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const double x = -hl + length * t;
    const double y = 4.0 * bend * t * (1.0 - t);
    const double tx = length, ty = 4.0 * bend * (1.0 - 2.0 * t);
    const double tl = std::hypot(tx, ty);
    const double nx = -ty / tl, ny = tx / tl;
    const double hw = 0.5 * thickness * (1.0 + width_wave * std::cos(2.0 * std::numbers::pi * t + phase));
    upper.push_back({x + nx * hw, y + ny * hw});
    lower.push_back({x - nx * hw, y - ny * hw});
  }
  std::vector<Point> ring(lower.begin(), lower.end());
  ring.insert(ring.end(), upper.rbegin(), upper.rend());
  return transform(ring, cx, cy, angle);
}

GeneratedScene gen_scene(const SceneConfig& cfg) {
  cfg.validate();
  Rng rng(mix_seed(cfg.seed, 0));
  GeneratedScene out;
  out.scene.height = cfg.height;
  out.scene.width = cfg.width;
  out.scene.shrink_ratio = cfg.shrink_ratio;
  out.requested = static_cast<int>(rng.uniform_int(cfg.min_instances, cfg.max_instances));

  // Pixels within `gap` (Chebyshev) of any placed shape.
  const int gap = static_cast<int>(std::ceil(cfg.min_separation));
  BinaryMap blocked(cfg.height, cfg.width, 0);

  for (int n = 0; n < out.requested; ++n) {
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
      const double thickness = rng.uniform(cfg.min_thickness, cfg.max_thickness);
      const double length = thickness * rng.uniform(cfg.min_aspect, cfg.max_aspect);
      const double angle = rng.uniform(0.0, std::numbers::pi);
      const double cx = rng.uniform(0.0, cfg.width);
      const double cy = rng.uniform(0.0, cfg.height);
      bool band = cfg.family == ShapeFamily::kBands;
      if (cfg.family == ShapeFamily::kMixed) band = rng.uniform() < 0.5;
      Polygon p;
      if (band) {
        const double bend = rng.uniform(-0.2, 0.2) * length;
        const double wave = rng.uniform(0.0, 0.1);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        p = make_curved_band(cx, cy, length, thickness, angle, bend, wave, phase);
      } else {
        p = make_rotated_rect(cx, cy, length, thickness, angle);
      }

      const BoundingBox b = bounding_box(p);
      if (b.x0 < 1.0 || b.y0 < 1.0 || b.x1 > cfg.width - 2.0 || b.y1 > cfg.height - 2.0) continue;
      const Placed w = raster_window(p);
      const ComponentRuns cr = label_runs(w.window);
      if (cr.count != 1) continue;
      bool clear = true;
      for (const Run& r : cr.runs) {
        const std::uint8_t* row = blocked.data.data() + blocked.index(r.y + w.oy, 0);
        if (std::any_of(row + r.x0 + w.ox, row + r.x1 + w.ox, [](std::uint8_t v) { return v != 0; })) {
          clear = false;
          break;
        }
      }
      if (!clear || !kernel_is_usable(p, cfg)) continue;

      for (const Run& r : cr.runs) {
        const int y0 = std::max(0, r.y + w.oy - gap), y1 = std::min(cfg.height - 1, r.y + w.oy + gap);
        const int x0 = std::max(0, r.x0 + w.ox - gap), x1 = std::min(cfg.width, r.x1 + w.ox + gap);
        for (int y = y0; y <= y1; ++y) {
          std::uint8_t* row = blocked.data.data() + blocked.index(y, 0);
          std::fill(row + x0, row + x1, std::uint8_t{1});
        }
      }
      out.scene.instances.push_back(std::move(p));
      break;
    }
  }
  return out;
}

}  // namespace textkernel
