#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "textkernel/context.hpp"

using namespace textkernel;

namespace {

ContextWeights identity_weights(std::size_t c, std::size_t k_out) {
  ContextWeights w;
  w.pixel_proj = ConvParams::identity(c);
  w.phi = ConvParams::identity(c);
  w.psi = ConvParams::identity(c);
  w.rho = ConvParams::identity(c);
  w.delta = ConvParams::identity(c);
  w.mask_head.conv3x3 = ConvParams::zeros(3 * c, c, 3);
  w.mask_head.conv1x1 = ConvParams::zeros(c, k_out, 1);
  return w;
}

TextRepresentations reps_of(Matrix t) {
  TextRepresentations r;
  r.t = std::move(t);
  return r;
}

struct Instance {
  std::size_t c, c_inner, k, h, w;
  ContextWeights weights;
  DenseMap pixels, seg, distance;
};

Instance random_instance(Rng& rng) {
  Instance in;
  in.c = rng.uniform_int(1, 8);
  in.c_inner = rng.uniform_int(1, 8);
  in.k = rng.uniform_int(1, 4);
  in.h = rng.uniform_int(1, 16);
  in.w = rng.uniform_int(1, 16);
  in.weights = oracle::random_context_weights(rng, in.c, in.c, in.c_inner, in.k);
  in.pixels = oracle::random_map(rng, in.c, in.h, in.w, -1, 1);
  in.seg = oracle::random_map(rng, in.k, in.h, in.w, 0, 1);
  in.distance = oracle::random_map(rng, in.k, in.h, in.w, -4, 4);
  return in;
}

}  // namespace

TEST(TextRepresentation, AllOnesHalfWeights) {
  const DenseMap p(2, 1, 2, 1.0);
  const DenseMap s(1, 1, 2, 0.5);
  const TextRepresentations t = text_representation(p, s);
  ASSERT_EQ(t.dim(), 2u);
  ASSERT_EQ(t.count(), 1u);
  EXPECT_DOUBLE_EQ(t.t(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(t.t(1, 0), 1.0);
}

TEST(TextRepresentation, ZeroWeightsGiveZeroVector) {
  Rng rng(1);
  const TextRepresentations t = text_representation(oracle::random_map(rng, 3, 4, 4, -1, 1), DenseMap(2, 4, 4));
  for (double v : t.t.data) EXPECT_EQ(v, 0.0);
}

TEST(TextRepresentation, MatchesPerPixelSum) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_instance(rng);
    const Matrix ref = oracle::text_representation_loop(in.pixels, in.seg);
    EXPECT_LT(oracle::max_rel_error(text_representation(in.pixels, in.seg).t.data, ref.data, 1e-12), 1e-10);
  }
}

TEST(TextRepresentation, ShapeMismatchThrows) {
  EXPECT_THROW(text_representation(DenseMap(2, 3, 3), DenseMap(1, 3, 4)), ShapeError);
}

TEST(RelationMatrix, ZeroWeightsGiveUniformColumns) {
  Rng rng(3);
  ContextWeights w = identity_weights(3, 1);
  w.phi = ConvParams::zeros(3, 3);
  w.psi = ConvParams::zeros(3, 3);
  const DenseMap p = oracle::random_map(rng, 3, 2, 3, -1, 1);
  const DenseMap s = oracle::random_map(rng, 4, 2, 3, 0, 1);
  const RelationMatrix m = relation_matrix(text_representation(p, s), p, w);
  ASSERT_EQ(m.m.rows, 4u);
  ASSERT_EQ(m.m.cols, 6u);
  for (double v : m.m.data) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(RelationMatrix, SingleChannelIsAllOnes) {
  Rng rng(4);
  const Instance base = random_instance(rng);
  const DenseMap s = oracle::random_map(rng, 1, base.h, base.w, 0, 1);
  ContextWeights w = oracle::random_context_weights(rng, base.c, base.c, base.c_inner, 1);
  const RelationMatrix m = relation_matrix(text_representation(base.pixels, s), base.pixels, w);
  for (double v : m.m.data) EXPECT_EQ(v, 1.0);
}

TEST(RelationMatrix, MatchesPerPixelOracleAndColumnsSumToOne) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = random_instance(rng);
    const TextRepresentations t = text_representation(in.pixels, in.seg);
    const RelationMatrix m = relation_matrix(t, in.pixels, in.weights);
    EXPECT_LT(oracle::max_rel_error(m.m.data, oracle::relation_loop(t.t, in.pixels, in.weights).data, 1e-12), 1e-8);
    for (std::size_t j = 0; j < m.m.cols; ++j) {
      double sum = 0;
      for (std::size_t k = 0; k < m.m.rows; ++k) {
        sum += m.m(k, j);
        EXPECT_GE(m.m(k, j), 0.0);
        EXPECT_LE(m.m(k, j), 1.0);
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(GlobalContext, IdentityBroadcastsSingleRepresentation) {
  const ContextWeights w = identity_weights(3, 1);
  const TextRepresentations t = reps_of(Matrix(3, 1, {0.5, -1.0, 2.0}));
  RelationMatrix m;
  m.m = Matrix(1, 6, 1.0);
  const DenseMap g = global_context(t, m, 2, 3, w);
  ASSERT_EQ(g.channels, 3u);
  for (std::size_t c = 0; c < 3; ++c)
    for (double v : g.plane(c)) EXPECT_DOUBLE_EQ(v, t.t(c, 0));
}

TEST(GlobalContext, ZeroDeltaGivesRhoBias) {
  Rng rng(6);
  ContextWeights w = identity_weights(2, 1);
  w.delta = ConvParams::zeros(2, 2);
  w.rho.bias = std::vector<double>{0.3, -0.7};
  const TextRepresentations t = reps_of(Matrix(2, 2, {1, 2, 3, 4}));
  RelationMatrix m;
  m.m = softmax_over_k(Matrix(2, 4, {0, 1, 2, 3, 3, 2, 1, 0}));
  const DenseMap g = global_context(t, m, 2, 2, w);
  for (double v : g.plane(0)) EXPECT_DOUBLE_EQ(v, 0.3);
  for (double v : g.plane(1)) EXPECT_DOUBLE_EQ(v, -0.7);
}

TEST(GlobalContext, MatrixFormMatchesPerPixelSum) {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = random_instance(rng);
    const TextRepresentations t = text_representation(in.pixels, in.seg);
    const RelationMatrix m = relation_matrix(t, in.pixels, in.weights);
    const DenseMap g = global_context(t, m, in.h, in.w, in.weights);
    const DenseMap ref = oracle::global_context_loop(t.t, m.m, in.h, in.w, in.weights);
    ASSERT_TRUE(g.same_shape(ref));
    EXPECT_LT(oracle::max_rel_error(g.data, ref.data, 1e-12), 1e-8);
  }
}

TEST(GlobalContext, PermutingInstancesLeavesContextUnchanged) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Instance in = random_instance(rng);
    if (in.k < 2) continue;
    const TextRepresentations t = text_representation(in.pixels, in.seg);
    const RelationMatrix m = relation_matrix(t, in.pixels, in.weights);
    // Reverse the K channels of S.
    DenseMap seg_rev = in.seg;
    for (std::size_t k = 0; k < in.k; ++k) {
      auto src = in.seg.plane(in.k - 1 - k);
      std::copy(src.begin(), src.end(), seg_rev.plane(k).begin());
    }
    const TextRepresentations t2 = text_representation(in.pixels, seg_rev);
    const RelationMatrix m2 = relation_matrix(t2, in.pixels, in.weights);
    for (std::size_t k = 0; k < in.k; ++k)
      for (std::size_t i = 0; i < m.m.cols; ++i) EXPECT_NEAR(m2.m(k, i), m.m(in.k - 1 - k, i), 1e-12);
    const DenseMap g = global_context(t, m, in.h, in.w, in.weights);
    const DenseMap g2 = global_context(t2, m2, in.h, in.w, in.weights);
    EXPECT_LT(oracle::max_rel_error(g.data, g2.data, 1e-9), 1e-9);
  }
}

TEST(LocalContext, SaturatedNegativeDistanceGivesRhoOfZero) {
  Rng rng(9);
  ContextWeights w = identity_weights(2, 1);
  w.rho.bias = std::vector<double>{0.25, 0.5};
  const TextRepresentations t = reps_of(Matrix(2, 2, {1, 2, 3, 4}));
  const DenseMap l = local_context(t, DenseMap(2, 3, 3, -100.0), w);
  for (double v : l.plane(0)) EXPECT_NEAR(v, 0.25, 1e-40 + 1e-12);
  for (double v : l.plane(1)) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(LocalContext, ZeroDistanceHalvesRepresentation) {
  const ContextWeights w = identity_weights(3, 1);
  const TextRepresentations t = reps_of(Matrix(3, 1, {2, -4, 6}));
  const DenseMap l = local_context(t, DenseMap(1, 2, 2, 0.0), w);
  for (std::size_t c = 0; c < 3; ++c)
    for (double v : l.plane(c)) EXPECT_DOUBLE_EQ(v, 0.5 * t.t(c, 0));
}

TEST(LocalContext, MatrixFormMatchesPerPixelSum) {
  Rng rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = random_instance(rng);
    const TextRepresentations t = text_representation(in.pixels, in.seg);
    const DenseMap l = local_context(t, in.distance, in.weights);
    EXPECT_LT(oracle::max_rel_error(l.data, oracle::local_context_loop(t.t, in.distance, in.weights).data, 1e-12),
              1e-8);
  }
}

TEST(LocalContext, ShapeMismatchThrows) {
  const ContextWeights w = identity_weights(2, 1);
  const TextRepresentations t = reps_of(Matrix(2, 2, 1.0));
  EXPECT_THROW(local_context(t, DenseMap(3, 2, 2), w), ShapeError);
}

TEST(FuseAndSegment, ShapeAndRange) {
  Rng rng(11);
  const Instance in = random_instance(rng);
  const DenseMap g = oracle::random_map(rng, in.c, in.h, in.w, -1, 1);
  const DenseMap l = oracle::random_map(rng, in.c, in.h, in.w, -1, 1);
  const FusedOutput f = fuse_and_segment(g, l, in.pixels, in.weights);
  EXPECT_EQ(f.fused.channels, 3 * in.c);
  EXPECT_EQ(f.enhanced.channels, in.k);
  EXPECT_EQ(f.enhanced.height, in.h);
  EXPECT_EQ(f.enhanced.width, in.w);
  for (double v : f.enhanced.data) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(FuseAndSegment, ZeroInputsGiveHalf) {
  const ContextWeights w = identity_weights(2, 3);
  const DenseMap z(2, 4, 4);
  const FusedOutput f = fuse_and_segment(z, z, z, w);
  for (double v : f.enhanced.data) EXPECT_EQ(v, 0.5);
}

TEST(FuseAndSegment, MatchesComposedConvolutions) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = random_instance(rng);
    const DenseMap g = oracle::random_map(rng, in.c, in.h, in.w, -1, 1);
    const DenseMap l = oracle::random_map(rng, in.c, in.h, in.w, -1, 1);
    const FusedOutput f = fuse_and_segment(g, l, in.pixels, in.weights);
    DenseMap cat(3 * in.c, in.h, in.w);
    std::copy(g.data.begin(), g.data.end(), cat.data.begin());
    std::copy(l.data.begin(), l.data.end(), cat.data.begin() + static_cast<std::ptrdiff_t>(g.size()));
    std::copy(in.pixels.data.begin(), in.pixels.data.end(), cat.data.begin() + static_cast<std::ptrdiff_t>(2 * g.size()));
    EXPECT_EQ(f.fused.data, cat.data);
    DenseMap ref = oracle::naive_conv(oracle::naive_conv(cat, in.weights.mask_head.conv3x3, true),
                                      in.weights.mask_head.conv1x1, false);
    for (double& v : ref.data) v = 1.0 / (1.0 + std::exp(-v));
    EXPECT_LT(oracle::max_rel_error(f.enhanced.data, ref.data, 1e-12), 1e-8);
  }
}

TEST(RunContext, EndToEndShapesAndFinite) {
  Rng rng(13);
  const std::size_t feat = 5, c = 4, k = 2;
  const ContextWeights w = oracle::random_context_weights(rng, feat, c, 3, k);
  const DenseMap x = oracle::random_map(rng, feat, 6, 7, -1, 1);
  const DenseMap s = oracle::random_map(rng, k, 6, 7, 0, 1);
  const DenseMap d = oracle::random_map(rng, k, 6, 7, -2, 2);
  const ContextOutputs o = run_context(x, s, d, w);
  EXPECT_EQ(o.pixels.channels, c);
  EXPECT_EQ(o.relation.m.rows, k);
  EXPECT_EQ(o.relation.m.cols, 42u);
  EXPECT_EQ(o.global.channels, c);
  EXPECT_EQ(o.local.channels, c);
  EXPECT_EQ(o.enhanced.channels, k);
  for (const DenseMap* m : {&o.pixels, &o.global, &o.local, &o.enhanced})
    for (double v : m->data) EXPECT_TRUE(std::isfinite(v));
  // Pixel projection is Conv -> BN -> ReLU.
  EXPECT_LT(oracle::max_rel_error(o.pixels.data, oracle::naive_conv(x, w.pixel_proj, true).data, 1e-12), 1e-10);
}

TEST(ContextWeights, ValidateCatchesBrokenChain) {
  Rng rng(14);
  ContextWeights w = oracle::random_context_weights(rng, 4, 3, 2, 2);
  EXPECT_NO_THROW(w.validate());
  w.rho = ConvParams::identity(4);
  EXPECT_THROW(w.validate(), ShapeError);
}
