#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace textkernel {

/// Single-channel H x W raster, row-major.
template <typename T>
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int h, int w, T fill = T{})
      : height(h), width(w), data(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  T& at(int y, int x) { return data[index(y, x)]; }
  const T& at(int y, int x) const { return data[index(y, x)]; }
  bool contains(int y, int x) const { return y >= 0 && x >= 0 && y < height && x < width; }
  bool same_size(int h, int w) const { return height == h && width == w; }
  template <typename U>
  bool same_size(const Grid<U>& o) const { return height == o.height && width == o.width; }
  std::size_t size() const { return data.size(); }
};

using BinaryMap = Grid<std::uint8_t>;
using FloatMap = Grid<float>;

/// Per-pixel instance ids, 0 = background, ids contiguous 1..count.
struct LabeledMask {
  Grid<std::int32_t> ids;
  int count = 0;

  int height() const { return ids.height; }
  int width() const { return ids.width; }
};

/// Horizontal run of pixels [x0, x1) on row y.
struct Run {
  int y = 0;
  int x0 = 0;
  int x1 = 0;
  int length() const { return x1 - x0; }
};

}  // namespace textkernel
