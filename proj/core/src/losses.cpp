#include "textkernel/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace textkernel {

namespace {

void require_same(const DenseMap& a, const DenseMap& b, const SelectMask& m, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": prediction and target shapes differ");
  if (m.size() != a.size()) throw ShapeError(std::string(what) + ": mask length differs from map size");
}

}  // namespace

LossValue dice_loss(const DenseMap& pred, const DenseMap& gt, const SelectMask& select) {
  require_same(pred, gt, select, "dice_loss");
  double inter = 0.0;
  double denom = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!select[i]) continue;
    inter += pred.data[i] * gt.data[i];
    denom += pred.data[i] * pred.data[i] + gt.data[i] * gt.data[i];
  }
  LossValue out;
  out.grad = DenseMap(pred.channels, pred.height, pred.width);
  if (denom == 0.0) return out;

  out.value = 1.0 - 2.0 * inter / denom;
  const double d2 = denom * denom;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!select[i]) continue;
    out.grad.data[i] = -2.0 * (gt.data[i] * denom - 2.0 * inter * pred.data[i]) / d2;
  }
  return out;
}

LossValue distance_ratio_loss(const DenseMap& pred, const DenseMap& gt, const SelectMask& region) {
  require_same(pred, gt, region, "distance_ratio_loss");
  LossValue out;
  out.grad = DenseMap(pred.channels, pred.height, pred.width);
  const auto n = static_cast<std::size_t>(std::count_if(region.begin(), region.end(),
                                                        [](std::uint8_t v) { return v != 0; }));
  if (n == 0) return out;

  double sum = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!region[i]) continue;
    const double d = std::max(pred.data[i], kDistanceFloor);
    const double g = std::max(gt.data[i], kDistanceFloor);
    const double log_ratio = std::log(d) - std::log(g);
    sum += std::abs(log_ratio);
    if (pred.data[i] > kDistanceFloor && log_ratio != 0.0) {
      out.grad.data[i] = (log_ratio > 0.0 ? 1.0 : -1.0) / d * inv_n;
    }
  }
  out.value = sum * inv_n;
  return out;
}

SelectMask ohem_select(const DenseMap& pred, const DenseMap& gt, double neg_pos_ratio) {
  if (!pred.same_shape(gt)) throw ShapeError("ohem_select: prediction and target shapes differ");
  if (!(neg_pos_ratio > 0.0)) throw std::invalid_argument("ohem_select: ratio must be > 0");

  SelectMask mask(pred.size(), 0);
  std::vector<std::size_t> negatives;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.data[i] > 0.5) {
      mask[i] = 1;
      ++positives;
    } else {
      negatives.push_back(i);
    }
  }
  if (positives == 0) {
    std::fill(mask.begin(), mask.end(), 1);
    return mask;
  }
  const auto wanted = static_cast<std::size_t>(std::floor(neg_pos_ratio * static_cast<double>(positives)));
  const std::size_t keep = std::min(wanted, negatives.size());
  auto harder = [&](std::size_t a, std::size_t b) {
    if (pred.data[a] != pred.data[b]) return pred.data[a] > pred.data[b];
    return a < b;
  };
  std::partial_sort(negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(keep),
                    negatives.end(), harder);
  for (std::size_t j = 0; j < keep; ++j) mask[negatives[j]] = 1;
  return mask;
}

double cbn_loss(double seg_loss, double dis_loss, const LossWeights& w) {
  return w.lambda1 * seg_loss + w.lambda2 * dis_loss;
}

CbnLossTerms compute_cbn_loss(const DenseMap& seg_pred, const DenseMap& seg_gt,
                              const DenseMap& dist_pred, const DenseMap& dist_gt,
                              const SelectMask& region, const LossWeights& w,
                              double neg_pos_ratio) {
  if (seg_pred.plane_size() != dist_pred.plane_size() || seg_pred.channels != 1 ||
      dist_pred.channels != 1) {
    throw ShapeError("compute_cbn_loss expects single-channel maps of equal size");
  }
  CbnLossTerms terms;
  const SelectMask ohem = ohem_select(seg_pred, seg_gt, neg_pos_ratio);
  terms.seg = dice_loss(seg_pred, seg_gt, ohem);
  if (region.size() != ohem.size()) throw ShapeError("compute_cbn_loss: region mask size");
  SelectMask dis_mask(region.size());
  for (std::size_t i = 0; i < region.size(); ++i) dis_mask[i] = region[i] && ohem[i];
  terms.dis = distance_ratio_loss(dist_pred, dist_gt, dis_mask);
  terms.total = cbn_loss(terms.seg.value, terms.dis.value, w);
  return terms;
}

double gradient_check(const std::function<double(const DenseMap&)>& f, const DenseMap& x,
                      const DenseMap& analytic, double h, double abs_floor) {
  if (!x.same_shape(analytic)) throw ShapeError("gradient_check: gradient shape mismatch");
  DenseMap probe = x;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe.data[i];
    probe.data[i] = orig + h;
    const double up = f(probe);
    probe.data[i] = orig - h;
    const double down = f(probe);
    probe.data[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.data[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), abs_floor});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace textkernel
