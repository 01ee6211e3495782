#pragma once

#include <map>
#include <string>
#include <vector>

#include "textkernel/expand.hpp"
#include "textkernel/labels.hpp"

namespace textkernel {

inline constexpr double kDefaultIouThreshold = 0.5;

struct Match {
  int pred = 0;
  int gt = 0;
  double iou = 0.0;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  int num_pred = 0;
  int num_gt = 0;
  std::vector<Match> matches;  // in matching order (descending IoU)
  double iou_threshold = kDefaultIouThreshold;
  std::map<std::string, double> timings_ms;

  int true_positives() const { return static_cast<int>(matches.size()); }
  double mean_iou() const;
};

/// Polygons are compared as rasterized masks on an h x w canvas. Pairs at or
/// above the threshold are matched greedily by descending IoU, one to one.
EvalReport evaluate_polygons(const std::vector<Polygon>& pred, const std::vector<Polygon>& gt, int height,
                             int width, double iou_threshold = kDefaultIouThreshold);

EvalReport evaluate(const DetectionResult& pred, const Scene& gt, double iou_threshold = kDefaultIouThreshold);

/// 2PR / (P + R), 0 when both are 0.
double f_measure(double precision, double recall);

}  // namespace textkernel
