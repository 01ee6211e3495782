#include "textkernel/context.hpp"

#include <array>
#include <string>

namespace textkernel {

namespace {

void expect_channels(const ConvParams& p, std::size_t in, std::size_t out, const char* name) {
  p.validate();
  if (p.in_channels != in || (out != 0 && p.out_channels != out)) {
    throw ShapeError(std::string(name) + " expects " + std::to_string(in) + "->" +
                     (out ? std::to_string(out) : std::string("*")) + " channels, got " +
                     std::to_string(p.in_channels) + "->" + std::to_string(p.out_channels));
  }
}

Matrix project_text(const TextRepresentations& reps, const ContextWeights& w) {
  if (reps.dim() != w.delta.in_channels) throw ShapeError("delta input width != representation dim");
  return conv1x1_columns(reps.t, w.delta);
}

}  // namespace

void ContextWeights::validate() const {
  const std::size_t c = dim();
  expect_channels(pixel_proj, pixel_proj.in_channels, c, "pixel_proj");
  if (pixel_proj.kernel_size != 1) throw ShapeError("pixel_proj must be 1x1");
  expect_channels(phi, c, 0, "phi");
  expect_channels(psi, c, phi.out_channels, "psi");
  expect_channels(delta, c, c, "delta");
  expect_channels(rho, c, c, "rho");
  for (const ConvParams* p : {&phi, &psi, &delta, &rho}) {
    if (p->kernel_size != 1) throw ShapeError("phi/psi/rho/delta must be 1x1");
  }
  expect_channels(mask_head.conv3x3, 3 * c, 0, "mask_head.conv3x3");
  if (mask_head.conv3x3.kernel_size != 3) throw ShapeError("mask_head.conv3x3 must be 3x3");
  expect_channels(mask_head.conv1x1, mask_head.conv3x3.out_channels, 0, "mask_head.conv1x1");
  if (mask_head.conv1x1.kernel_size != 1) throw ShapeError("mask_head.conv1x1 must be 1x1");
}

DenseMap pixel_representations(const DenseMap& features, const ContextWeights& w) {
  return conv_forward(features, w.pixel_proj, true);
}

TextRepresentations text_representation(const DenseMap& pixels, const DenseMap& seg) {
  if (pixels.height != seg.height || pixels.width != seg.width) {
    throw ShapeError("text_representation: P and S spatial sizes differ");
  }
  if (seg.channels == 0) throw ShapeError("text_representation: S needs at least one channel");
  return {matmul(pixels.as_matrix(), transpose(seg.as_matrix()))};
}

RelationMatrix relation_matrix(const TextRepresentations& reps, const DenseMap& pixels,
                               const ContextWeights& w) {
  if (reps.dim() != pixels.channels) throw ShapeError("relation_matrix: T and P widths differ");
  const Matrix phi_t = conv1x1_columns(reps.t, w.phi);         // C' x K
  const Matrix psi_p = conv1x1_columns(pixels.as_matrix(), w.psi);  // C' x HW
  return {softmax_over_k(matmul(transpose(phi_t), psi_p))};
}

DenseMap global_context(const TextRepresentations& reps, const RelationMatrix& rel,
                        std::size_t height, std::size_t width, const ContextWeights& w) {
  if (rel.m.rows != reps.count()) throw ShapeError("global_context: M rows != K");
  if (rel.m.cols != height * width) throw ShapeError("global_context: M columns != H*W");
  const Matrix mixed = matmul(project_text(reps, w), rel.m);
  return DenseMap::from_matrix(conv1x1_columns(mixed, w.rho), height, width);
}

DenseMap local_context(const TextRepresentations& reps, const DenseMap& distance,
                       const ContextWeights& w) {
  if (distance.channels != reps.count()) throw ShapeError("local_context: D channels != K");
  const Matrix weights = sigmoid(distance.as_matrix());
  const Matrix mixed = matmul(project_text(reps, w), weights);
  return DenseMap::from_matrix(conv1x1_columns(mixed, w.rho), distance.height, distance.width);
}

FusedOutput fuse_and_segment(const DenseMap& global, const DenseMap& local,
                             const DenseMap& pixels, const ContextWeights& w) {
  if (!global.same_shape(local) || !global.same_shape(pixels)) {
    throw ShapeError("fuse_and_segment: G, L and P must share C x H x W");
  }
  const std::array<const DenseMap*, 3> parts{&global, &local, &pixels};
  FusedOutput out;
  out.fused = concat_channels(parts);
  const DenseMap hidden = conv_forward(out.fused, w.mask_head.conv3x3, true);
  out.enhanced = sigmoid(conv_forward(hidden, w.mask_head.conv1x1, false));
  return out;
}

ContextOutputs run_context(const DenseMap& features, const DenseMap& seg,
                           const DenseMap& distance, const ContextWeights& w) {
  w.validate();
  ContextOutputs out;
  out.pixels = pixel_representations(features, w);
  out.reps = text_representation(out.pixels, seg);
  out.relation = relation_matrix(out.reps, out.pixels, w);
  out.global = global_context(out.reps, out.relation, out.pixels.height, out.pixels.width, w);
  out.local = local_context(out.reps, distance, w);
  out.enhanced = fuse_and_segment(out.global, out.local, out.pixels, w).enhanced;
  return out;
}

}  // namespace textkernel
