#pragma once

// Forward pass of the context-aware kernel segmentation block: text
// representations aggregated from soft segmentation maps, a pixel-to-text
// relation matrix, global and local contextual features, and the fused mask
// head producing the enhanced segmentation.

#include "textkernel/dense.hpp"

namespace textkernel {

/// C x K matrix; column k is the representation of segmentation channel k.
struct TextRepresentations {
  Matrix t;

  std::size_t dim() const { return t.rows; }
  std::size_t count() const { return t.cols; }
};

/// K x (H*W), softmax-normalized down each column.
struct RelationMatrix {
  Matrix m;
};

struct MaskHead {
  ConvParams conv3x3;  // Conv 3x3 -> BN -> ReLU
  ConvParams conv1x1;
};

struct ContextWeights {
  ConvParams pixel_proj;  // Conv 1x1 -> BN -> ReLU, features -> C
  ConvParams phi;         // C -> C'
  ConvParams psi;         // C -> C'
  ConvParams rho;         // C -> C
  ConvParams delta;       // C -> C
  MaskHead mask_head;     // 3C -> hidden -> K'

  /// Representation width C, taken from pixel_proj.
  std::size_t dim() const { return pixel_proj.out_channels; }

  /// Throws ShapeError if the channel dimensions do not chain.
  void validate() const;
};

/// Pixel representations P from raw features (the 1x1 projection block).
DenseMap pixel_representations(const DenseMap& features, const ContextWeights& w);

/// T = P(C, HW) x S(K, HW)^T.
TextRepresentations text_representation(const DenseMap& pixels, const DenseMap& seg);

/// M = softmax_k(phi(T)^T x psi(P)).
RelationMatrix relation_matrix(const TextRepresentations& reps, const DenseMap& pixels,
                               const ContextWeights& w);

/// G = rho(delta(T) x M), reshaped to C x H x W.
DenseMap global_context(const TextRepresentations& reps, const RelationMatrix& rel,
                        std::size_t height, std::size_t width, const ContextWeights& w);

/// L = rho(delta(T) x sigmoid(D)) with D given as K x H x W.
DenseMap local_context(const TextRepresentations& reps, const DenseMap& distance,
                       const ContextWeights& w);

struct FusedOutput {
  DenseMap fused;     // [G, L, P], 3C x H x W
  DenseMap enhanced;  // S', K' x H x W in (0, 1)
};

FusedOutput fuse_and_segment(const DenseMap& global, const DenseMap& local,
                             const DenseMap& pixels, const ContextWeights& w);

struct ContextOutputs {
  DenseMap pixels;
  TextRepresentations reps;
  RelationMatrix relation;
  DenseMap global;
  DenseMap local;
  DenseMap enhanced;
};

/// Runs the whole block from features, initial segmentation S (K x H x W)
/// and distance-head output D (K x H x W).
ContextOutputs run_context(const DenseMap& features, const DenseMap& seg,
                           const DenseMap& distance, const ContextWeights& w);

}  // namespace textkernel
