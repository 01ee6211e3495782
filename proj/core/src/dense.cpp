#include "textkernel/dense.hpp"

#include <algorithm>
#include <cmath>

namespace textkernel {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) {
    throw ShapeError("matrix data length " + std::to_string(data.size()) +
                     " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix DenseMap::as_matrix() const { return Matrix(channels, plane_size(), data); }

DenseMap DenseMap::from_matrix(const Matrix& m, std::size_t h, std::size_t w) {
  if (m.cols != h * w) {
    throw ShapeError("matrix with " + std::to_string(m.cols) + " columns cannot be viewed as " +
                     std::to_string(h) + "x" + std::to_string(w));
  }
  DenseMap out;
  out.channels = m.rows;
  out.height = h;
  out.width = w;
  out.data = m.data;
  return out;
}

void ConvParams::validate() const {
  if (kernel_size != 1 && kernel_size != 3) {
    throw ShapeError("conv kernel size must be 1 or 3, got " + std::to_string(kernel_size));
  }
  const std::size_t k2 = static_cast<std::size_t>(kernel_size * kernel_size);
  if (weights.size() != out_channels * in_channels * k2) {
    throw ShapeError("conv weights length " + std::to_string(weights.size()) + " != " +
                     std::to_string(out_channels) + "*" + std::to_string(in_channels) + "*" +
                     std::to_string(k2));
  }
  if (bias && bias->size() != out_channels) {
    throw ShapeError("conv bias length must equal out_channels");
  }
  if (bn) {
    const auto n = out_channels;
    if (bn->scale.size() != n || bn->shift.size() != n || bn->running_mean.size() != n ||
        bn->running_var.size() != n) {
      throw ShapeError("batch-norm arrays must have out_channels entries");
    }
    for (double v : bn->running_var) {
      if (!(v + bn->epsilon > 0.0)) throw ShapeError("batch-norm running_var + epsilon must be > 0");
    }
  }
}

ConvParams ConvParams::identity(std::size_t channels) {
  ConvParams p = zeros(channels, channels, 1);
  for (std::size_t c = 0; c < channels; ++c) p.weights[c * channels + c] = 1.0;
  return p;
}

ConvParams ConvParams::zeros(std::size_t in, std::size_t out, int kernel_size) {
  ConvParams p;
  p.kernel_size = kernel_size;
  p.in_channels = in;
  p.out_channels = out;
  p.weights.assign(in * out * static_cast<std::size_t>(kernel_size * kernel_size), 0.0);
  return p;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) t(c, r) = m(r, c);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw ShapeError("matmul inner dimensions differ: " + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + " * " + std::to_string(b.rows) + "x" +
                     std::to_string(b.cols));
  }
  Matrix c(a.rows, b.cols);
  // i-k-j order: every c(i, j) accumulates its k terms in increasing k.
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* crow = c.data.data() + i * c.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      const double* brow = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

namespace {

void finish_channel(std::span<double> plane, const ConvParams& params, std::size_t o,
                    bool apply_bn_relu) {
  if (params.bias) {
    const double b = (*params.bias)[o];
    for (double& v : plane) v += b;
  }
  if (!apply_bn_relu) return;
  if (params.bn) {
    const auto& bn = *params.bn;
    const double inv = 1.0 / std::sqrt(bn.running_var[o] + bn.epsilon);
    for (double& v : plane) v = bn.scale[o] * (v - bn.running_mean[o]) * inv + bn.shift[o];
  }
  for (double& v : plane) v = std::max(v, 0.0);
}

}  // namespace

DenseMap conv_forward(const DenseMap& input, const ConvParams& params, bool apply_bn_relu) {
  params.validate();
  if (input.channels != params.in_channels) {
    throw ShapeError("conv expects " + std::to_string(params.in_channels) +
                     " input channels, got " + std::to_string(input.channels));
  }
  const std::size_t h = input.height;
  const std::size_t w = input.width;
  const std::size_t cin = params.in_channels;
  DenseMap out(params.out_channels, h, w);

  if (params.kernel_size == 1) {
    for (std::size_t o = 0; o < params.out_channels; ++o) {
      auto dst = out.plane(o);
      for (std::size_t i = 0; i < cin; ++i) {
        const double wt = params.weights[o * cin + i];
        auto src = input.plane(i);
        for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += wt * src[p];
      }
      finish_channel(dst, params, o, apply_bn_relu);
    }
    return out;
  }

  for (std::size_t o = 0; o < params.out_channels; ++o) {
    auto dst = out.plane(o);
    for (std::size_t i = 0; i < cin; ++i) {
      const double* wk = params.weights.data() + (o * cin + i) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const double wt = wk[ky * 3 + kx];
          for (std::size_t y = 0; y < h; ++y) {
            const long sy = static_cast<long>(y) + ky - 1;
            if (sy < 0 || sy >= static_cast<long>(h)) continue;
            for (std::size_t x = 0; x < w; ++x) {
              const long sx = static_cast<long>(x) + kx - 1;
              if (sx < 0 || sx >= static_cast<long>(w)) continue;
              dst[y * w + x] += wt * input.at(i, static_cast<std::size_t>(sy),
                                                static_cast<std::size_t>(sx));
            }
          }
        }
      }
    }
    finish_channel(dst, params, o, apply_bn_relu);
  }
  return out;
}

Matrix conv1x1_columns(const Matrix& input, const ConvParams& params) {
  if (params.kernel_size != 1) throw ShapeError("conv1x1_columns needs a 1x1 kernel");
  DenseMap as_map = DenseMap::from_matrix(input, 1, input.cols);
  return conv_forward(as_map, params, false).as_matrix();
}

Matrix softmax_over_k(const Matrix& logits) {
  Matrix out(logits.rows, logits.cols);
  for (std::size_t n = 0; n < logits.cols; ++n) {
    double mx = logits(0, n);
    for (std::size_t k = 1; k < logits.rows; ++k) mx = std::max(mx, logits(k, n));
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.rows; ++k) {
      const double e = std::exp(logits(k, n) - mx);
      out(k, n) = e;
      sum += e;
    }
    for (std::size_t k = 0; k < logits.rows; ++k) out(k, n) /= sum;
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data) v = sigmoid(v);
  return out;
}

DenseMap sigmoid(const DenseMap& m) {
  DenseMap out = m;
  for (double& v : out.data) v = sigmoid(v);
  return out;
}

DenseMap concat_channels(std::span<const DenseMap* const> maps) {
  if (maps.empty()) return {};
  const std::size_t h = maps.front()->height;
  const std::size_t w = maps.front()->width;
  std::size_t total = 0;
  for (const DenseMap* m : maps) {
    if (m->height != h || m->width != w) throw ShapeError("concat: spatial sizes differ");
    total += m->channels;
  }
  DenseMap out(total, h, w);
  auto it = out.data.begin();
  for (const DenseMap* m : maps) it = std::copy(m->data.begin(), m->data.end(), it);
  return out;
}

}  // namespace textkernel
