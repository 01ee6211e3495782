#include "textkernel/weights.hpp"

#include <cstring>
#include <filesystem>

#include "textkernel/errors.hpp"
#include "textkernel/npy.hpp"
#include "textkernel/rng.hpp"

namespace textkernel {

namespace fs = std::filesystem;

namespace {

std::vector<double> load_vector(const fs::path& path, std::size_t expected, const std::string& what) {
  const npy::Array a = npy::read(path);
  if (a.count() != expected) {
    throw ShapeError(what + ": expected " + std::to_string(expected) + " values, got " + std::to_string(a.count()));
  }
  return a.as_doubles();
}

ConvParams load_conv(const fs::path& dir, const std::string& name, int kernel_size) {
  const npy::Array a = npy::read(dir / (name + ".npy"));
  const auto& s = a.shape;
  const std::size_t k = static_cast<std::size_t>(kernel_size);
  bool ok = s.size() >= 2;
  for (std::size_t i = 2; ok && i < s.size(); ++i) ok = s[i] == k;
  if (!ok || s.size() > 4 || (kernel_size == 3 && s.size() != 4)) {
    throw ShapeError(name + ".npy: unexpected weight shape for a " + std::to_string(kernel_size) + "x" +
                     std::to_string(kernel_size) + " convolution");
  }
  ConvParams p;
  p.kernel_size = kernel_size;
  p.out_channels = s[0];
  p.in_channels = s[1];
  p.weights = a.as_doubles();

  const fs::path bias = dir / (name + "_bias.npy");
  if (fs::exists(bias)) p.bias = load_vector(bias, p.out_channels, name + "_bias.npy");

  const char* parts[] = {"scale", "shift", "mean", "var"};
  int present = 0;
  for (const char* part : parts) present += fs::exists(dir / (name + "_bn_" + part + ".npy")) ? 1 : 0;
  if (present != 0 && present != 4) throw ConfigError(name + ": batch norm needs all of _bn_{scale,shift,mean,var}.npy");
  if (present == 4) {
    BatchNorm bn;
    bn.scale = load_vector(dir / (name + "_bn_scale.npy"), p.out_channels, name + "_bn_scale.npy");
    bn.shift = load_vector(dir / (name + "_bn_shift.npy"), p.out_channels, name + "_bn_shift.npy");
    bn.running_mean = load_vector(dir / (name + "_bn_mean.npy"), p.out_channels, name + "_bn_mean.npy");
    bn.running_var = load_vector(dir / (name + "_bn_var.npy"), p.out_channels, name + "_bn_var.npy");
    p.bn = std::move(bn);
  }
  p.validate();
  return p;
}

npy::Array doubles_to_f32(const std::vector<double>& v, std::vector<std::size_t> shape) {
  npy::Array a;
  a.dtype = npy::DType::kFloat32;
  a.shape = std::move(shape);
  a.bytes.resize(v.size() * 4);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const float f = static_cast<float>(v[i]);
    std::memcpy(a.bytes.data() + 4 * i, &f, 4);
  }
  return a;
}

void save_conv(const fs::path& dir, const std::string& name, const ConvParams& p) {
  std::vector<std::size_t> shape{p.out_channels, p.in_channels};
  if (p.kernel_size == 3) {
    shape.push_back(3);
    shape.push_back(3);
  }
  npy::write(dir / (name + ".npy"), doubles_to_f32(p.weights, shape));
  if (p.bias) npy::write(dir / (name + "_bias.npy"), doubles_to_f32(*p.bias, {p.out_channels}));
  if (p.bn) {
    npy::write(dir / (name + "_bn_scale.npy"), doubles_to_f32(p.bn->scale, {p.out_channels}));
    npy::write(dir / (name + "_bn_shift.npy"), doubles_to_f32(p.bn->shift, {p.out_channels}));
    npy::write(dir / (name + "_bn_mean.npy"), doubles_to_f32(p.bn->running_mean, {p.out_channels}));
    npy::write(dir / (name + "_bn_var.npy"), doubles_to_f32(p.bn->running_var, {p.out_channels}));
  }
}

ConvParams random_conv(Rng& rng, std::size_t in, std::size_t out, int k, bool with_bn) {
  ConvParams p = ConvParams::zeros(in, out, k);
  for (double& v : p.weights) v = static_cast<float>(rng.uniform(-0.1, 0.1));
  std::vector<double> bias(out);
  for (double& v : bias) v = static_cast<float>(rng.uniform(-0.1, 0.1));
  p.bias = std::move(bias);
  if (with_bn) {
    BatchNorm bn;
    bn.scale.assign(out, 1.0);
    bn.shift.assign(out, 0.0);
    bn.running_mean.assign(out, 0.0);
    bn.running_var.assign(out, 1.0);
    p.bn = std::move(bn);
  }
  return p;
}

}  // namespace

const std::vector<std::string>& weight_names() {
  static const std::vector<std::string> names{"pixel_proj", "phi", "psi", "rho", "delta", "mask_head_3x3",
                                              "mask_head_1x1"};
  return names;
}

ContextWeights load_weights(const fs::path& dir) {
  std::string missing;
  for (const std::string& n : weight_names()) {
    if (!fs::exists(dir / (n + ".npy"))) missing += (missing.empty() ? "" : ", ") + n + ".npy";
  }
  if (!missing.empty()) throw ConfigError("weight bundle " + dir.string() + " is missing: " + missing);

  ContextWeights w;
  w.pixel_proj = load_conv(dir, "pixel_proj", 1);
  w.phi = load_conv(dir, "phi", 1);
  w.psi = load_conv(dir, "psi", 1);
  w.rho = load_conv(dir, "rho", 1);
  w.delta = load_conv(dir, "delta", 1);
  w.mask_head.conv3x3 = load_conv(dir, "mask_head_3x3", 3);
  w.mask_head.conv1x1 = load_conv(dir, "mask_head_1x1", 1);
  w.validate();
  return w;
}

void save_weights(const ContextWeights& w, const fs::path& dir) {
  w.validate();
  fs::create_directories(dir);
  save_conv(dir, "pixel_proj", w.pixel_proj);
  save_conv(dir, "phi", w.phi);
  save_conv(dir, "psi", w.psi);
  save_conv(dir, "rho", w.rho);
  save_conv(dir, "delta", w.delta);
  save_conv(dir, "mask_head_3x3", w.mask_head.conv3x3);
  save_conv(dir, "mask_head_1x1", w.mask_head.conv1x1);
}

ContextWeights random_weights(std::size_t feature_channels, std::size_t dim, std::size_t out_channels,
                              std::uint64_t seed) {
  // Values are rounded through float so a save/load round trip is exact.
  Rng rng(mix_seed(seed, 7));
  ContextWeights w;
  w.pixel_proj = random_conv(rng, feature_channels, dim, 1, true);
  w.phi = random_conv(rng, dim, dim, 1, false);
  w.psi = random_conv(rng, dim, dim, 1, false);
  w.rho = random_conv(rng, dim, dim, 1, false);
  w.delta = random_conv(rng, dim, dim, 1, false);
  w.mask_head.conv3x3 = random_conv(rng, 3 * dim, dim, 3, true);
  w.mask_head.conv1x1 = random_conv(rng, dim, out_channels, 1, false);
  return w;
}

}  // namespace textkernel
