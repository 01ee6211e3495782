#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "textkernel/dense.hpp"

namespace textkernel {

/// Flat per-element selection mask (1 = contributes), same length as the
/// map it selects from.
using SelectMask = std::vector<std::uint8_t>;

struct LossValue {
  double value = 0.0;
  DenseMap grad;  // d value / d prediction, same shape as the prediction
};

struct LossWeights {
  double lambda1 = 1.0;
  double lambda2 = 0.25;
};

/// Predictions are clamped to this floor before entering the log ratio.
inline constexpr double kDistanceFloor = 1e-3;
inline constexpr double kDefaultOhemRatio = 3.0;

/// 1 - 2*sum(p*g) / (sum(p^2) + sum(g^2)) over selected elements.
/// An all-zero denominator yields loss 0 with a zero gradient.
LossValue dice_loss(const DenseMap& pred, const DenseMap& gt, const SelectMask& select);

/// Mean over region elements of ln(max(d, g) / min(d, g)), with d clamped at
/// kDistanceFloor. Empty region yields 0 with a zero gradient.
LossValue distance_ratio_loss(const DenseMap& pred, const DenseMap& gt, const SelectMask& region);

/// All positives of `gt` plus the min(ratio*|pos|, |neg|) highest-scoring
/// negatives. Ties among negatives go to the lower flat index. With no
/// positives every element is selected.
SelectMask ohem_select(const DenseMap& pred, const DenseMap& gt, double neg_pos_ratio = kDefaultOhemRatio);

double cbn_loss(double seg_loss, double dis_loss, const LossWeights& w = {});

struct CbnLossTerms {
  LossValue seg;
  LossValue dis;
  double total = 0.0;
};

/// Enhanced-segmentation and distance losses with OHEM applied to both:
/// the OHEM mask (mined on the segmentation prediction) selects dice terms,
/// and is intersected with `region` for the distance term.
CbnLossTerms compute_cbn_loss(const DenseMap& seg_pred, const DenseMap& seg_gt,
                              const DenseMap& dist_pred, const DenseMap& dist_gt,
                              const SelectMask& region, const LossWeights& w = {},
                              double neg_pos_ratio = kDefaultOhemRatio);

/// Largest elementwise relative error between `analytic` and a central
/// finite difference of `f` around `x`. The denominator is
/// max(|analytic|, |numeric|, abs_floor).
double gradient_check(const std::function<double(const DenseMap&)>& f, const DenseMap& x,
                      const DenseMap& analytic, double h = 1e-4, double abs_floor = 1e-7);

}  // namespace textkernel
