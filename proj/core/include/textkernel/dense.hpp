#pragma once

// Dense tensor plumbing: row-major matrices, C x H x W maps, 1x1 / 3x3
// convolutions with optional inference-mode batch norm, and the pointwise
// activations used by the context module.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "textkernel/errors.hpp"

namespace textkernel {

/// Row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  static Matrix identity(std::size_t n);

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// C x H x W grid, channel-major then row-major. Houses pixel features,
/// segmentation/distance maps and the context outputs.
struct DenseMap {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  DenseMap() = default;
  DenseMap(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
      : channels(c), height(h), width(w), data(c * h * w, fill) {}

  std::size_t plane_size() const { return height * width; }
  std::size_t size() const { return data.size(); }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * height + y) * width + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * height + y) * width + x];
  }

  std::span<double> plane(std::size_t c) { return {data.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(std::size_t c) const {
    return {data.data() + c * plane_size(), plane_size()};
  }

  bool same_shape(const DenseMap& other) const {
    return channels == other.channels && height == other.height && width == other.width;
  }

  /// View as a (C, H*W) matrix; copies.
  Matrix as_matrix() const;
  /// Inverse of as_matrix: m.rows becomes channels, m.cols must equal h*w.
  static DenseMap from_matrix(const Matrix& m, std::size_t h, std::size_t w);
};

/// Inference-mode batch-norm statistics, one entry per output channel.
struct BatchNorm {
  std::vector<double> scale;
  std::vector<double> shift;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double epsilon = 1e-5;
};

/// Weights of a 1x1 or 3x3 convolution. `weights` is laid out
/// [out][in][ky][kx].
struct ConvParams {
  int kernel_size = 1;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<double> weights;
  std::optional<std::vector<double>> bias;
  std::optional<BatchNorm> bn;

  /// Throws ShapeError when any invariant on array lengths is broken.
  void validate() const;

  static ConvParams identity(std::size_t channels);
  static ConvParams zeros(std::size_t in, std::size_t out, int kernel_size = 1);
};

Matrix transpose(const Matrix& m);

/// Dense product with fixed row-major accumulation order.
Matrix matmul(const Matrix& a, const Matrix& b);

/// 1x1 or 3x3 (zero padding 1) convolution. With `apply_bn_relu`, batch norm
/// (if present) and ReLU follow the convolution.
DenseMap conv_forward(const DenseMap& input, const ConvParams& params, bool apply_bn_relu);

/// Applies a 1x1 convolution to the columns of a (C, N) matrix.
Matrix conv1x1_columns(const Matrix& input, const ConvParams& params);

/// Column-wise softmax across rows; max-subtracted.
Matrix softmax_over_k(const Matrix& logits);

double sigmoid(double x);
Matrix sigmoid(const Matrix& m);
DenseMap sigmoid(const DenseMap& m);

/// Channel concatenation; all inputs must share H and W.
DenseMap concat_channels(std::span<const DenseMap* const> maps);

}  // namespace textkernel
