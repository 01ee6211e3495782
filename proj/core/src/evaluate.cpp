#include "textkernel/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "textkernel/errors.hpp"

namespace textkernel {

namespace {

// Canvas-clipped raster of one polygon, stored over its bbox.
struct Footprint {
  BinaryMap mask;
  int ox = 0, oy = 0;
  std::int64_t area = 0;
};

Footprint footprint(const Polygon& p, int height, int width) {
  Footprint f;
  if (p.size() < 3) return f;
  const BoundingBox b = bounding_box(p);
  const int x0 = std::max(0, static_cast<int>(std::floor(b.x0)));
  const int y0 = std::max(0, static_cast<int>(std::floor(b.y0)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(b.x1)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(b.y1)));
  if (x0 > x1 || y0 > y1) return f;
  f.ox = x0;
  f.oy = y0;
  f.mask = BinaryMap(y1 - y0 + 1, x1 - x0 + 1, 0);
  rasterize_onto(p, f.mask, x0, y0);
  f.area = std::count(f.mask.data.begin(), f.mask.data.end(), std::uint8_t{1});
  return f;
}

std::int64_t overlap(const Footprint& a, const Footprint& b) {
  const int x0 = std::max(a.ox, b.ox), y0 = std::max(a.oy, b.oy);
  const int x1 = std::min(a.ox + a.mask.width, b.ox + b.mask.width);
  const int y1 = std::min(a.oy + a.mask.height, b.oy + b.mask.height);
  std::int64_t n = 0;
  for (int y = y0; y < y1; ++y) {
    const std::uint8_t* ra = a.mask.data.data() + a.mask.index(y - a.oy, 0) - a.ox;
    const std::uint8_t* rb = b.mask.data.data() + b.mask.index(y - b.oy, 0) - b.ox;
    for (int x = x0; x < x1; ++x) n += ra[x] & rb[x];
  }
  return n;
}

}  // namespace

double EvalReport::mean_iou() const {
  if (matches.empty()) return 0.0;
  double s = 0.0;
  for (const Match& m : matches) s += m.iou;
  return s / static_cast<double>(matches.size());
}

double f_measure(double precision, double recall) {
  const double d = precision + recall;
  return d > 0.0 ? 2.0 * precision * recall / d : 0.0;
}

EvalReport evaluate_polygons(const std::vector<Polygon>& pred, const std::vector<Polygon>& gt, int height,
                             int width, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw ConfigError("iou_threshold must be in (0, 1]");
  EvalReport r;
  r.iou_threshold = iou_threshold;
  r.num_pred = static_cast<int>(pred.size());
  r.num_gt = static_cast<int>(gt.size());

  std::vector<Footprint> fp, fg;
  fp.reserve(pred.size());
  fg.reserve(gt.size());
  for (const Polygon& p : pred) fp.push_back(footprint(p, height, width));
  for (const Polygon& g : gt) fg.push_back(footprint(g, height, width));

  std::vector<Match> candidates;
  for (std::size_t i = 0; i < fp.size(); ++i) {
    for (std::size_t j = 0; j < fg.size(); ++j) {
      const std::int64_t inter = overlap(fp[i], fg[j]);
      if (inter == 0) continue;
      const double iou = static_cast<double>(inter) / static_cast<double>(fp[i].area + fg[j].area - inter);
      if (iou >= iou_threshold) candidates.push_back({static_cast<int>(i), static_cast<int>(j), iou});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Match& a, const Match& b) {
    return std::tie(b.iou, a.gt, a.pred) < std::tie(a.iou, b.gt, b.pred);
  });
  std::vector<char> pred_used(pred.size(), 0), gt_used(gt.size(), 0);
  for (const Match& m : candidates) {
    if (pred_used[static_cast<std::size_t>(m.pred)] || gt_used[static_cast<std::size_t>(m.gt)]) continue;
    pred_used[static_cast<std::size_t>(m.pred)] = gt_used[static_cast<std::size_t>(m.gt)] = 1;
    r.matches.push_back(m);
  }
  const double tp = r.true_positives();
  r.precision = r.num_pred > 0 ? tp / r.num_pred : 0.0;
  r.recall = r.num_gt > 0 ? tp / r.num_gt : 0.0;
  r.f_measure = f_measure(r.precision, r.recall);
  return r;
}

EvalReport evaluate(const DetectionResult& pred, const Scene& gt, double iou_threshold) {
  std::vector<Polygon> polys;
  polys.reserve(pred.instances.size());
  for (const DetectedInstance& d : pred.instances) polys.push_back(d.polygon);
  EvalReport r = evaluate_polygons(polys, gt.instances, gt.height, gt.width, iou_threshold);
  r.timings_ms["model"] = pred.model_ms;
  r.timings_ms["post"] = pred.post_ms;
  return r;
}

}  // namespace textkernel
