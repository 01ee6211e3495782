#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

#include "textkernel/geometry.hpp"

namespace textkernel {

namespace {

// Clockwise on screen (y grows downwards): E, SE, S, SW, W, NW, N, NE.
constexpr std::array<int, 8> kDx{1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy{0, 1, 1, 1, 0, -1, -1, -1};

int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  return -1;
}

struct DisjointSet {
  std::vector<std::int32_t> parent;

  std::int32_t add() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }
  std::int32_t find(std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
};

// First index in [from, to) whose byte is (non)zero, or `to`.
template <bool kWantSet>
int scan_row(const std::uint8_t* row, int from, int to) {
  int x = from;
  while (x < to && (x & 7) != 0) {
    if ((row[x] != 0) == kWantSet) return x;
    ++x;
  }
  while (x + 8 <= to) {
    std::uint64_t word;
    std::memcpy(&word, row + x, sizeof(word));
    const bool skip = kWantSet ? word == 0 : word == 0x0101010101010101ULL;
    if (!skip) break;
    x += 8;
  }
  while (x < to) {
    if ((row[x] != 0) == kWantSet) return x;
    ++x;
  }
  return to;
}

template <typename Member>
Polygon pixel_corner_outline(const std::vector<PixelPos>& border, Member&& member) {
  int x0 = border[0].x, x1 = border[0].x, y0 = border[0].y, y1 = border[0].y;
  for (const PixelPos& p : border) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  // Corners in doubled integer coordinates; pixel (c, r) spans 2c-1..2c+1.
  using Corner = std::pair<int, int>;
  std::map<Corner, std::vector<Corner>> out_edges;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (!member(x, y)) continue;
      const int l = 2 * x - 1, r = 2 * x + 1, t = 2 * y - 1, b = 2 * y + 1;
      if (!member(x, y - 1)) out_edges[{l, t}].push_back({r, t});
      if (!member(x + 1, y)) out_edges[{r, t}].push_back({r, b});
      if (!member(x, y + 1)) out_edges[{r, b}].push_back({l, b});
      if (!member(x - 1, y)) out_edges[{l, b}].push_back({l, t});
    }
  }
  const PixelPos s = border[0];
  const Corner start{2 * s.x - 1, 2 * s.y - 1};
  Polygon ring;
  Corner cur = start;
  const std::size_t guard = 4 * static_cast<std::size_t>(x1 - x0 + 1) * static_cast<std::size_t>(y1 - y0 + 1) + 8;
  for (std::size_t steps = 0; steps < guard; ++steps) {
    ring.points.push_back({cur.first * 0.5, cur.second * 0.5});
    auto it = out_edges.find(cur);
    if (it == out_edges.end() || it->second.empty()) break;
    const Corner next = it->second.back();
    it->second.pop_back();
    cur = next;
    if (cur == start) break;
  }
  return remove_collinear(ring);
}

// First index in [from, to) whose value is (not) above t, or `to`.
template <bool kWantAbove>
int scan_row(const float* row, int from, int to, float t) {
  int x = from;
#if defined(__SSE2__)
  const __m128 tv = _mm_set1_ps(t);
  constexpr int kNone = kWantAbove ? 0 : 0xF;
  while (x + 8 <= to) {
    const int m0 = _mm_movemask_ps(_mm_cmpgt_ps(_mm_loadu_ps(row + x), tv));
    const int m1 = _mm_movemask_ps(_mm_cmpgt_ps(_mm_loadu_ps(row + x + 4), tv));
    if (m0 != kNone || m1 != kNone) break;
    x += 8;
  }
#endif
  while (x < to) {
    if ((row[x] > t) == kWantAbove) return x;
    ++x;
  }
  return to;
}

// Union-find over row runs; `find_run(y, x, width)` returns the [start, stop)
// of the next run on row y at or after x, start == width when none is left.
template <typename FindRun>
ComponentRuns label_runs_impl(int height, int width, FindRun&& find_run) {
  ComponentRuns cr;
  cr.height = height;
  cr.width = width;
  DisjointSet ds;
  std::size_t prev_begin = 0, prev_end = 0;
  for (int y = 0; y < height; ++y) {
    const std::size_t row_begin = cr.runs.size();
    int x = 0;
    while (x < width) {
      const auto [start, stop] = find_run(y, x);
      if (start >= width) break;
      cr.runs.push_back({y, start, stop});
      ds.add();
      x = stop;
    }
    const std::size_t row_end = cr.runs.size();
    // Merge with overlapping runs of the previous row (4-connectivity).
    std::size_t j = prev_begin;
    for (std::size_t i = row_begin; i < row_end; ++i) {
      const Run& cur = cr.runs[i];
      while (j < prev_end && cr.runs[j].x1 <= cur.x0) ++j;
      for (std::size_t k = j; k < prev_end && cr.runs[k].x0 < cur.x1; ++k) {
        ds.unite(static_cast<std::int32_t>(i), static_cast<std::int32_t>(k));
      }
    }
    prev_begin = row_begin;
    prev_end = row_end;
  }
  cr.run_id.assign(cr.runs.size(), 0);
  std::vector<std::int32_t> root_id(cr.runs.size(), 0);
  for (std::size_t i = 0; i < cr.runs.size(); ++i) {
    const std::int32_t root = ds.find(static_cast<std::int32_t>(i));
    if (root_id[root] == 0) root_id[root] = ++cr.count;
    cr.run_id[i] = root_id[root];
  }
  return cr;
}

}  // namespace

ComponentRuns label_runs(const BinaryMap& mask) {
  return label_runs_impl(mask.height, mask.width, [&](int y, int x) {
    const std::uint8_t* row = mask.data.data() + mask.index(y, 0);
    const int start = scan_row<true>(row, x, mask.width);
    if (start >= mask.width) return std::pair{start, start};
    return std::pair{start, scan_row<false>(row, start, mask.width)};
  });
}

ComponentRuns label_runs(const FloatMap& prob, float threshold) {
  return label_runs_impl(prob.height, prob.width, [&](int y, int x) {
    const float* row = prob.data.data() + prob.index(y, 0);
    const int start = scan_row<true>(row, x, prob.width, threshold);
    if (start >= prob.width) return std::pair{start, start};
    return std::pair{start, scan_row<false>(row, start, prob.width, threshold)};
  });
}

void paint_labels(const ComponentRuns& cr, Grid<std::int32_t>& ids) {
  for (std::size_t i = 0; i < cr.runs.size(); ++i) {
    const Run& r = cr.runs[i];
    std::int32_t* row = ids.data.data() + ids.index(r.y, 0);
    std::fill(row + r.x0, row + r.x1, cr.run_id[i]);
  }
}

LabeledMask connected_components(const BinaryMap& mask) {
  const ComponentRuns cr = label_runs(mask);
  LabeledMask out;
  out.ids = Grid<std::int32_t>(mask.height, mask.width, 0);
  out.count = cr.count;
  paint_labels(cr, out.ids);
  return out;
}

namespace {

template <typename Member>
std::vector<PixelPos> trace_impl(Member&& member, PixelPos start, std::size_t guard) {
  std::vector<PixelPos> chain;
  chain.push_back(start);

  // Find the first neighbour clockwise from `back` (a non-member direction).
  auto step = [&](PixelPos c, int back, PixelPos& next, int& next_back) {
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) & 7;
      const int nx = c.x + kDx[d];
      const int ny = c.y + kDy[d];
      if (member(nx, ny)) {
        const int pd = (d + 7) & 7;  // last non-member checked before hitting next
        next = {nx, ny};
        next_back = direction_of(c.x + kDx[pd] - nx, c.y + kDy[pd] - ny);
        return true;
      }
    }
    return false;
  };

  PixelPos first_next;
  int back = 4;  // west of the first raster pixel is never a member
  int first_back = 0;
  if (!step(start, back, first_next, first_back)) return chain;

  PixelPos cur = first_next;
  back = first_back;
  while (chain.size() < guard) {
    PixelPos next;
    int next_back = 0;
    step(cur, back, next, next_back);
    if (cur == start && next == first_next) break;
    chain.push_back(cur);
    cur = next;
    back = next_back;
  }
  return chain;
}

template <typename Member>
Polygon contour_impl(const std::vector<PixelPos>& border, Member&& member) {
  if (border.empty()) return {};
  if (border.size() == 1) {
    const double x = border[0].x, y = border[0].y;
    return Polygon{{{x - 0.5, y - 0.5}, {x + 0.5, y - 0.5}, {x + 0.5, y + 0.5}, {x - 0.5, y + 0.5}}};
  }
  Polygon ring;
  ring.points.reserve(border.size());
  for (const PixelPos& p : border) ring.points.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  ring = remove_collinear(ring);
  const double area = signed_area(ring);
  if (ring.size() < 3 || std::abs(area) < 1e-9) return pixel_corner_outline(border, member);
  if (area < 0.0) ring = reversed(std::move(ring));
  return ring;
}

}  // namespace

std::vector<PixelPos> trace_border(const Grid<std::int32_t>& ids, std::int32_t id, PixelPos start) {
  return trace_impl([&](int x, int y) { return ids.contains(y, x) && ids.at(y, x) == id; }, start,
                    8 * ids.size() + 16);
}

std::vector<PixelPos> trace_border(const BinaryMap& mask, PixelPos start) {
  return trace_impl([&](int x, int y) { return mask.contains(y, x) && mask.at(y, x) != 0; }, start,
                    8 * mask.size() + 16);
}

Polygon contour_from_border(const std::vector<PixelPos>& border, const Grid<std::int32_t>& ids,
                            std::int32_t id) {
  return contour_impl(border, [&](int x, int y) { return ids.contains(y, x) && ids.at(y, x) == id; });
}

Polygon contour_from_border(const std::vector<PixelPos>& border, const BinaryMap& mask) {
  return contour_impl(border, [&](int x, int y) { return mask.contains(y, x) && mask.at(y, x) != 0; });
}

Polygon pixel_outline(const BinaryMap& mask, PixelPos start) {
  auto member = [&](int x, int y) { return mask.contains(y, x) && mask.at(y, x) != 0; };
  if (!member(start.x, start.y)) return {};
  // Corner (i, j) sits at (i - 0.5, j - 0.5). The component stays on the
  // right-hand side; diagonal contacts are not followed.
  int i = start.x, j = start.y, dx = 1, dy = 0;
  Polygon ring;
  ring.points.push_back({i - 0.5, j - 0.5});
  const std::size_t guard = 4 * mask.size() + 8;
  for (std::size_t steps = 0; steps < guard; ++steps) {
    i += dx;
    j += dy;
    if (i == start.x && j == start.y) break;
    const int rx = -dy, ry = dx;
    const bool right_in = member(i + (dx + rx - 1) / 2, j + (dy + ry - 1) / 2);
    const bool left_in = member(i + (dx - rx - 1) / 2, j + (dy - ry - 1) / 2);
    int nx = dx, ny = dy;
    if (!right_in) {
      nx = rx;
      ny = ry;
    } else if (left_in) {
      nx = -rx;
      ny = -ry;
    }
    if (nx != dx || ny != dy) ring.points.push_back({i - 0.5, j - 0.5});
    dx = nx;
    dy = ny;
  }
  if (signed_area(ring) < 0.0) ring = reversed(std::move(ring));
  return ring;
}

Polygon extract_contour(const LabeledMask& mask, std::int32_t id) {
  const auto& ids = mask.ids;
  for (int y = 0; y < ids.height; ++y) {
    for (int x = 0; x < ids.width; ++x) {
      if (ids.at(y, x) == id) return contour_from_border(trace_border(ids, id, {x, y}), ids, id);
    }
  }
  return {};
}

Polygon extract_contour(const BinaryMap& component) {
  const ComponentRuns cr = label_runs(component);
  if (cr.count == 0) return {};
  Grid<std::int32_t> ids(component.height, component.width, 0);
  paint_labels(cr, ids);
  const Run& first = cr.runs.front();
  return contour_from_border(trace_border(ids, 1, {first.x0, first.y}), ids, 1);
}

}  // namespace textkernel
