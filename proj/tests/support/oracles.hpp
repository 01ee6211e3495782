#pragma once

// Brute-force reference implementations used by the tests. Each one is a
// direct transcription of the defining formula with no shared code paths
// from the library beyond the plain data types.

#include <cstdint>
#include <vector>

#include "textkernel/context.hpp"
#include "textkernel/dense.hpp"
#include "textkernel/geometry.hpp"
#include "textkernel/grid.hpp"
#include "textkernel/losses.hpp"
#include "textkernel/rng.hpp"

namespace oracle {

using namespace textkernel;

Matrix naive_matmul(const Matrix& a, const Matrix& b);

/// Direct nested-loop convolution (1x1 or 3x3, zero padding), optional
/// BN + ReLU.
DenseMap naive_conv(const DenseMap& in, const ConvParams& p, bool bn_relu);

/// y = W x + b for a 1x1 conv applied to one vector.
std::vector<double> apply_1x1(const ConvParams& p, const std::vector<double>& x);

/// Softmax of one column computed with long double and no max shift
/// (inputs must be small).
std::vector<double> softmax_column(const std::vector<double>& logits);

/// T_k = sum_i P_i S_{k,i}.
Matrix text_representation_loop(const DenseMap& pixels, const DenseMap& seg);

/// M_{ki} = softmax_k(phi(T_k) . psi(P_i)).
Matrix relation_loop(const Matrix& t, const DenseMap& pixels, const ContextWeights& w);

/// Per-pixel global context: G_i = rho(sum_k M_{ki} delta(T_k)).
DenseMap global_context_loop(const Matrix& t, const Matrix& m, std::size_t h, std::size_t w,
                             const ContextWeights& weights);

/// Per-pixel local context: L_i = rho(sum_k sigmoid(D_{k,i}) delta(T_k)).
DenseMap local_context_loop(const Matrix& t, const DenseMap& distance, const ContextWeights& weights);

/// Distance from each instance pixel to the nearest pixel not carrying the
/// same id, pixels beyond the canvas included; 0 on background. O(N^2).
FloatMap brute_force_distance(const Grid<std::int32_t>& ids);

/// OHEM reference: positives plus the hardest negatives found by a full
/// stable sort on (score desc, index asc).
SelectMask ohem_by_sort(const DenseMap& pred, const DenseMap& gt, double ratio);

/// Dice loss value straight from its definition.
double dice_value(const DenseMap& pred, const DenseMap& gt, const SelectMask& sel);

/// Mean log ratio over the selected elements, prediction floored.
double distance_ratio_value(const DenseMap& pred, const DenseMap& gt, const SelectMask& sel);

/// 4-connected labeling by BFS flood fill, ids in raster first-touch order.
LabeledMask flood_fill_components(const BinaryMap& mask);

/// Pixels of `mask` with at least one 4-neighbour outside the mask (or
/// outside the canvas).
BinaryMap border_pixels(const BinaryMap& mask);

/// Ray-casting point-in-polygon (even-odd); points on an edge count inside.
bool point_in_polygon(const Polygon& p, double x, double y);

/// Random blob grown by a seeded random walk of 4-neighbour steps.
BinaryMap random_blob(Rng& rng, int h, int w, int steps);

ConvParams random_conv(Rng& rng, std::size_t in, std::size_t out, int k, bool bias, bool bn);
ContextWeights random_context_weights(Rng& rng, std::size_t feat, std::size_t c, std::size_t c_inner,
                                      std::size_t k_out);
DenseMap random_map(Rng& rng, std::size_t c, std::size_t h, std::size_t w, double lo, double hi);

/// max |a - b| / max(|a|, |b|, floor) over all elements.
double max_rel_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-12);

}  // namespace oracle
