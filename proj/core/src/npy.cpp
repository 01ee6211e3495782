#include "textkernel/npy.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>

#include "textkernel/errors.hpp"

static_assert(std::endian::native == std::endian::little, "NPY payloads are written in native little-endian order");

namespace textkernel::npy {

namespace {

constexpr char kMagic[] = "\x93NUMPY";

template <typename T>
Array pack(DType t, std::vector<std::size_t> shape, const std::vector<T>& values) {
  Array a;
  a.dtype = t;
  a.shape = std::move(shape);
  a.bytes.resize(values.size() * sizeof(T));
  if (!values.empty()) std::memcpy(a.bytes.data(), values.data(), a.bytes.size());
  return a;
}

template <typename T>
T load(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

DType parse_descr(const std::string& d, const std::string& what) {
  if (d == "|u1" || d == "<u1") return DType::kUint8;
  if (d == "<i4") return DType::kInt32;
  if (d == "<f4") return DType::kFloat32;
  if (d == "<f8") return DType::kFloat64;
  if (d == "|b1") return DType::kUint8;
  throw ConfigError(what + ": unsupported dtype '" + d + "'");
}

void require_2d(const Array& a, const std::string& what) {
  if (a.shape.size() != 2) throw ShapeError(what + ": expected a 2-D array");
}

}  // namespace

std::string descr(DType t) {
  switch (t) {
    case DType::kUint8: return "|u1";
    case DType::kInt32: return "<i4";
    case DType::kFloat32: return "<f4";
    case DType::kFloat64: return "<f8";
  }
  return "";
}

std::size_t item_size(DType t) {
  switch (t) {
    case DType::kUint8: return 1;
    case DType::kInt32: return 4;
    case DType::kFloat32: return 4;
    case DType::kFloat64: return 8;
  }
  return 0;
}

std::size_t Array::count() const {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::vector<double> Array::as_doubles() const {
  const std::size_t n = count();
  std::vector<double> out(n);
  const std::uint8_t* p = bytes.data();
  for (std::size_t i = 0; i < n; ++i) {
    switch (dtype) {
      case DType::kUint8: out[i] = p[i]; break;
      case DType::kInt32: out[i] = load<std::int32_t>(p + 4 * i); break;
      case DType::kFloat32: out[i] = load<float>(p + 4 * i); break;
      case DType::kFloat64: out[i] = load<double>(p + 8 * i); break;
    }
  }
  return out;
}

std::vector<std::uint8_t> encode(const Array& a) {
  if (a.bytes.size() != a.count() * item_size(a.dtype)) throw ShapeError("npy: payload size does not match shape");
  std::string shape = "(";
  for (std::size_t i = 0; i < a.shape.size(); ++i) {
    shape += std::to_string(a.shape[i]);
    if (a.shape.size() == 1 || i + 1 < a.shape.size()) shape += ",";
    if (i + 1 < a.shape.size()) shape += " ";
  }
  shape += ")";
  std::string header = "{'descr': '" + descr(a.dtype) + "', 'fortran_order': False, 'shape': " + shape + ", }";
  // Magic (6) + version (2) + length (2) + header, padded to 64 bytes.
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::vector<std::uint8_t> out;
  out.reserve(10 + header.size() + a.bytes.size());
  out.insert(out.end(), kMagic, kMagic + 6);
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<std::uint8_t>(header.size() & 0xFF));
  out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), a.bytes.begin(), a.bytes.end());
  return out;
}

Array decode(const std::vector<std::uint8_t>& file, const std::string& what) {
  if (file.size() < 10 || std::memcmp(file.data(), kMagic, 6) != 0) throw ConfigError(what + ": not an NPY file");
  const int major = file[6];
  std::size_t header_len = 0, offset = 0;
  if (major == 1) {
    header_len = file[8] | (static_cast<std::size_t>(file[9]) << 8);
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (file.size() < 12) throw ConfigError(what + ": truncated header");
    header_len = load<std::uint32_t>(file.data() + 8);
    offset = 12;
  } else {
    throw ConfigError(what + ": unsupported NPY version " + std::to_string(major));
  }
  if (file.size() < offset + header_len) throw ConfigError(what + ": truncated header");
  const std::string header(file.begin() + static_cast<std::ptrdiff_t>(offset),
                           file.begin() + static_cast<std::ptrdiff_t>(offset + header_len));

  std::smatch m;
  if (!std::regex_search(header, m, std::regex(R"('descr'\s*:\s*'([^']+)')")))
    throw ConfigError(what + ": header has no descr");
  Array a;
  a.dtype = parse_descr(m[1], what);
  if (std::regex_search(header, m, std::regex(R"('fortran_order'\s*:\s*True)")))
    throw ConfigError(what + ": Fortran-order arrays are not supported");
  if (!std::regex_search(header, m, std::regex(R"('shape'\s*:\s*\(([^)]*)\))")))
    throw ConfigError(what + ": header has no shape");
  const std::string dims = m[1];
  static const std::regex kDigits(R"(\d+)");
  for (auto it = std::sregex_iterator(dims.begin(), dims.end(), kDigits); it != std::sregex_iterator(); ++it) {
    a.shape.push_back(static_cast<std::size_t>(std::stoull(it->str())));
  }
  const std::size_t payload = a.count() * item_size(a.dtype);
  const std::size_t start = offset + header_len;
  if (file.size() < start + payload) throw ConfigError(what + ": payload is shorter than the shape requires");
  a.bytes.assign(file.begin() + static_cast<std::ptrdiff_t>(start),
                 file.begin() + static_cast<std::ptrdiff_t>(start + payload));
  return a;
}

Array read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes, path.string());
}

void write(const std::filesystem::path& path, const Array& a) {
  const std::vector<std::uint8_t> bytes = encode(a);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing " + path.string());
}

Array from_grid(const BinaryMap& g) {
  return pack(DType::kUint8, {static_cast<std::size_t>(g.height), static_cast<std::size_t>(g.width)}, g.data);
}

Array from_grid(const Grid<std::int32_t>& g) {
  return pack(DType::kInt32, {static_cast<std::size_t>(g.height), static_cast<std::size_t>(g.width)}, g.data);
}

Array from_grid(const FloatMap& g) {
  return pack(DType::kFloat32, {static_cast<std::size_t>(g.height), static_cast<std::size_t>(g.width)}, g.data);
}

Array from_dense(const DenseMap& m) {
  std::vector<float> values(m.data.begin(), m.data.end());
  return pack(DType::kFloat32, {m.channels, m.height, m.width}, values);
}

FloatMap to_float_map(const Array& a, const std::string& what) {
  require_2d(a, what);
  FloatMap g(static_cast<int>(a.shape[0]), static_cast<int>(a.shape[1]), 0.0f);
  if (a.dtype == DType::kFloat32) {
    std::memcpy(g.data.data(), a.bytes.data(), a.bytes.size());
  } else {
    const std::vector<double> v = a.as_doubles();
    for (std::size_t i = 0; i < v.size(); ++i) g.data[i] = static_cast<float>(v[i]);
  }
  return g;
}

BinaryMap to_binary_map(const Array& a, const std::string& what) {
  require_2d(a, what);
  BinaryMap g(static_cast<int>(a.shape[0]), static_cast<int>(a.shape[1]), 0);
  const std::vector<double> v = a.as_doubles();
  for (std::size_t i = 0; i < v.size(); ++i) g.data[i] = v[i] != 0.0 ? 1 : 0;
  return g;
}

Grid<std::int32_t> to_int_grid(const Array& a, const std::string& what) {
  require_2d(a, what);
  if (a.dtype != DType::kInt32 && a.dtype != DType::kUint8) throw ConfigError(what + ": expected an integer array");
  Grid<std::int32_t> g(static_cast<int>(a.shape[0]), static_cast<int>(a.shape[1]), 0);
  const std::vector<double> v = a.as_doubles();
  for (std::size_t i = 0; i < v.size(); ++i) g.data[i] = static_cast<std::int32_t>(v[i]);
  return g;
}

DenseMap to_dense(const Array& a, const std::string& what) {
  std::size_t c = 1, h = 1, w = 1;
  if (a.shape.size() == 3) {
    c = a.shape[0];
    h = a.shape[1];
    w = a.shape[2];
  } else if (a.shape.size() == 2) {
    h = a.shape[0];
    w = a.shape[1];
  } else if (a.shape.size() == 1) {
    w = a.shape[0];
  } else {
    throw ShapeError(what + ": expected a 1-, 2- or 3-D array");
  }
  DenseMap m(c, h, w);
  m.data = a.as_doubles();
  return m;
}

}  // namespace textkernel::npy
