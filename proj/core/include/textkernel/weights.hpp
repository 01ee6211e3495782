#pragma once

// Context weight bundles: one NPY per convolution in a directory.
//
//   pixel_proj.npy phi.npy psi.npy rho.npy delta.npy
//   mask_head_3x3.npy mask_head_1x1.npy
//
// plus optional <name>_bias.npy and <name>_bn_{scale,shift,mean,var}.npy.
// 1x1 weights may be stored as (out, in), (out, in, 1) or (out, in, 1, 1);
// the 3x3 head as (out, in, 3, 3).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "textkernel/context.hpp"

namespace textkernel {

/// Required file stems, in load order.
const std::vector<std::string>& weight_names();

/// Throws ConfigError naming every missing required file.
ContextWeights load_weights(const std::filesystem::path& dir);

/// Writes float32 NPYs; the inverse of load_weights.
void save_weights(const ContextWeights& w, const std::filesystem::path& dir);

/// Uniform [-0.1, 0.1] weights and biases, seeded. The projection and the
/// 3x3 head get batch norm with unit scale and zero statistics.
ContextWeights random_weights(std::size_t feature_channels, std::size_t dim, std::size_t out_channels,
                              std::uint64_t seed);

}  // namespace textkernel
