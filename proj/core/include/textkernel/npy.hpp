#pragma once

// NPY v1.0 reading and writing for the dtypes used on disk: |u1, <i4, <f4,
// <f8. Only C-order arrays. Writing is byte-deterministic.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "textkernel/dense.hpp"
#include "textkernel/grid.hpp"

namespace textkernel::npy {

enum class DType { kUint8, kInt32, kFloat32, kFloat64 };

std::string descr(DType t);
std::size_t item_size(DType t);

struct Array {
  DType dtype = DType::kFloat32;
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> bytes;  // little-endian payload

  std::size_t count() const;
  /// Converts any stored dtype to doubles.
  std::vector<double> as_doubles() const;
};

Array read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Array& a);

/// Header + payload exactly as `write` would put on disk.
std::vector<std::uint8_t> encode(const Array& a);
Array decode(const std::vector<std::uint8_t>& file, const std::string& what = "npy");

Array from_grid(const BinaryMap& g);
Array from_grid(const Grid<std::int32_t>& g);
Array from_grid(const FloatMap& g);
/// float32 array of shape (C, H, W).
Array from_dense(const DenseMap& m);

/// 2-D array of any supported dtype to a float map.
FloatMap to_float_map(const Array& a, const std::string& what);
/// 2-D uint8 / int32 array to a binary map (nonzero -> 1).
BinaryMap to_binary_map(const Array& a, const std::string& what);
Grid<std::int32_t> to_int_grid(const Array& a, const std::string& what);
/// 1-, 2- or 3-D array as a DenseMap; 2-D becomes one channel.
DenseMap to_dense(const Array& a, const std::string& what);

}  // namespace textkernel::npy
