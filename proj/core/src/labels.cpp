#include "textkernel/labels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace textkernel {

namespace {

constexpr double kFar = 1e20;

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), squared 1-D EDT.
void squared_edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  v.resize(static_cast<std::size_t>(n));
  z.resize(static_cast<std::size_t>(n) + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

struct Box {
  int x0 = std::numeric_limits<int>::max();
  int y0 = std::numeric_limits<int>::max();
  int x1 = -1;
  int y1 = -1;
};

}  // namespace

double shrink_offset(const Polygon& p, double shrink_ratio) {
  const double len = perimeter(p);
  if (len <= 0.0) return 0.0;
  return polygon_area(p) * (1.0 - shrink_ratio * shrink_ratio) / len;
}

RegionLabel region_label(const Scene& scene) {
  RegionLabel out;
  out.region = BinaryMap(scene.height, scene.width, 0);
  out.ids.ids = Grid<std::int32_t>(scene.height, scene.width, 0);
  out.ids.count = static_cast<int>(scene.instances.size());
  for (std::size_t i = 0; i < scene.instances.size(); ++i) {
    const BinaryMap mask = rasterize(scene.instances[i], scene.height, scene.width);
    for (std::size_t p = 0; p < mask.size(); ++p) {
      if (!mask.data[p]) continue;
      out.region.data[p] = 1;
      out.ids.ids.data[p] = static_cast<std::int32_t>(i + 1);
    }
  }
  return out;
}

BinaryMap kernel_label(const Scene& scene) {
  BinaryMap kernel(scene.height, scene.width, 0);
  for (const Polygon& poly : scene.instances) {
    const double d = shrink_offset(poly, scene.shrink_ratio);
    for (const Polygon& piece : offset_polygon(poly, -d)) rasterize_onto(piece, kernel);
  }
  return kernel;
}

FloatMap distance_label(const LabeledMask& mask) {
  const auto& ids = mask.ids;
  FloatMap out(ids.height, ids.width, 0.0f);
  std::vector<Box> boxes(static_cast<std::size_t>(mask.count) + 1);
  int max_id = 0;
  for (int y = 0; y < ids.height; ++y) {
    for (int x = 0; x < ids.width; ++x) {
      const int id = ids.at(y, x);
      if (id <= 0) continue;
      if (id >= static_cast<int>(boxes.size())) boxes.resize(static_cast<std::size_t>(id) + 1);
      Box& b = boxes[static_cast<std::size_t>(id)];
      b.x0 = std::min(b.x0, x);
      b.y0 = std::min(b.y0, y);
      b.x1 = std::max(b.x1, x);
      b.y1 = std::max(b.y1, y);
      max_id = std::max(max_id, id);
    }
  }

  std::vector<double> grid, col_in, col_out;
  std::vector<int> v;
  std::vector<double> z;
  for (int id = 1; id <= max_id; ++id) {
    const Box& b = boxes[static_cast<std::size_t>(id)];
    if (b.x1 < 0) continue;
    // One ring of padding: every pixel there is outside the instance.
    const int ox = b.x0 - 1, oy = b.y0 - 1;
    const int w = b.x1 - b.x0 + 3, h = b.y1 - b.y0 + 3;
    grid.assign(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 1; y < h - 1; ++y) {
      for (int x = 1; x < w - 1; ++x) {
        if (ids.at(oy + y, ox + x) == id) grid[static_cast<std::size_t>(y) * w + x] = kFar;
      }
    }
    col_in.resize(static_cast<std::size_t>(h));
    col_out.resize(static_cast<std::size_t>(h));
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) col_in[y] = grid[static_cast<std::size_t>(y) * w + x];
      squared_edt_1d(col_in.data(), col_out.data(), h, v, z);
      for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = col_out[y];
    }
    std::vector<double> row_out(static_cast<std::size_t>(w));
    for (int y = 1; y < h - 1; ++y) {
      double* row = grid.data() + static_cast<std::size_t>(y) * w;
      squared_edt_1d(row, row_out.data(), w, v, z);
      for (int x = 1; x < w - 1; ++x) {
        if (ids.at(oy + y, ox + x) == id) {
          out.at(oy + y, ox + x) = static_cast<float>(std::sqrt(row_out[x]));
        }
      }
    }
  }
  return out;
}

LabelBundle make_labels(const Scene& scene) {
  LabelBundle bundle;
  RegionLabel region = region_label(scene);
  bundle.region = std::move(region.region);
  bundle.instance_ids = std::move(region.ids);
  bundle.kernel = kernel_label(scene);
  bundle.distance = distance_label(bundle.instance_ids);
  return bundle;
}

}  // namespace textkernel
