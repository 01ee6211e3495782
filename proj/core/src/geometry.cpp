#include <algorithm>
#include <cmath>
#include <utility>

#include "textkernel/errors.hpp"
#include "textkernel/geometry.hpp"

namespace textkernel {

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double norm(double x, double y) { return std::sqrt(x * x + y * y); }

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

constexpr double kRasterEps = 1e-9;

}  // namespace

double signed_area(const Polygon& p) {
  const std::size_t n = p.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    acc += p.points[j].x * p.points[i].y - p.points[i].x * p.points[j].y;
  }
  return 0.5 * acc;
}

double polygon_area(const Polygon& p) { return std::abs(signed_area(p)); }

double perimeter(const Polygon& p) {
  const std::size_t n = p.size();
  if (n < 2) return 0.0;
  double len = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    len += norm(p.points[i].x - p.points[j].x, p.points[i].y - p.points[j].y);
  }
  return len;
}

BoundingBox bounding_box(const Polygon& p) {
  BoundingBox b;
  if (p.empty()) return b;
  b.x0 = b.x1 = p.points[0].x;
  b.y0 = b.y1 = p.points[0].y;
  for (const Point& q : p.points) {
    b.x0 = std::min(b.x0, q.x);
    b.x1 = std::max(b.x1, q.x);
    b.y0 = std::min(b.y0, q.y);
    b.y1 = std::max(b.y1, q.y);
  }
  return b;
}

Polygon reversed(Polygon p) {
  std::reverse(p.points.begin(), p.points.end());
  return p;
}

Polygon translated(Polygon p, double dx, double dy) {
  for (Point& q : p.points) {
    q.x += dx;
    q.y += dy;
  }
  return p;
}

Polygon scaled(Polygon p, double factor) {
  for (Point& q : p.points) {
    q.x *= factor;
    q.y *= factor;
  }
  return p;
}

Polygon remove_collinear(const Polygon& p) {
  std::vector<Point> pts = p.points;
  bool changed = true;
  while (changed && pts.size() >= 3) {
    changed = false;
    std::vector<Point> out;
    out.reserve(pts.size());
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& prev = out.empty() ? pts[(i + n - 1) % n] : out.back();
      const Point& cur = pts[i];
      const Point& next = pts[(i + 1) % n];
      if (cur == prev) {
        changed = true;
        continue;
      }
      const double ax = cur.x - prev.x, ay = cur.y - prev.y;
      const double bx = next.x - cur.x, by = next.y - cur.y;
      const double cr = ax * by - ay * bx;
      const double dot = ax * bx + ay * by;
      const double scale = norm(ax, ay) * norm(bx, by);
      if (std::abs(cr) <= 1e-12 * scale && dot > 0.0) {
        changed = true;
        continue;
      }
      out.push_back(cur);
    }
    pts = std::move(out);
  }
  return Polygon{std::move(pts)};
}

Polygon simplify_ring(const Polygon& p, double tolerance) {
  const std::size_t n = p.size();
  if (n <= 3 || tolerance <= 0.0) return p;
  // Split the ring at vertex 0 and the vertex farthest from it.
  std::size_t far = 0;
  double far_d = -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = norm(p.points[i].x - p.points[0].x, p.points[i].y - p.points[0].y);
    if (d > far_d) {
      far_d = d;
      far = i;
    }
  }
  std::vector<char> keep(n, 0);
  keep[0] = keep[far] = 1;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, far}, {far, n}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    const Point& a = p.points[i];
    const Point& b = p.points[j % n];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len = norm(dx, dy);
    std::size_t best = 0;
    double best_d = tolerance;
    for (std::size_t k = i + 1; k < j; ++k) {
      const Point& q = p.points[k];
      const double d = len > 0.0 ? std::abs(dx * (q.y - a.y) - dy * (q.x - a.x)) / len
                                 : norm(q.x - a.x, q.y - a.y);
      if (d > best_d) {
        best_d = d;
        best = k;
      }
    }
    if (best == 0) continue;
    keep[best] = 1;
    stack.push_back({i, best});
    stack.push_back({best, j});
  }
  Polygon out;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.points.push_back(p.points[i]);
  if (out.size() < 3) return p;
  return out;
}

bool is_simple(const Polygon& p) {
  const std::size_t n = p.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = p.points[i];
    const Point& b = p.points[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Point& c = p.points[j];
      const Point& d = p.points[(j + 1) % n];
      if (adjacent) {
        // Adjacent edges may only share their common vertex.
        const Point& shared = (j == i + 1) ? b : a;
        const Point& far_this = (j == i + 1) ? a : b;
        const Point& far_other = (j == i + 1) ? d : c;
        if (cross(shared, far_this, far_other) == 0.0) {
          const double dot = (far_this.x - shared.x) * (far_other.x - shared.x) +
                             (far_this.y - shared.y) * (far_other.y - shared.y);
          if (dot > 0.0) return false;  // folds back over itself
        }
        continue;
      }
      if (segments_touch(a, b, c, d)) return false;
    }
  }
  return true;
}

void rasterize_onto(const Polygon& poly, BinaryMap& canvas, int origin_x, int origin_y) {
  const std::size_t n = poly.size();
  if (n == 0 || canvas.height == 0 || canvas.width == 0) return;
  const int h = canvas.height;
  const int w = canvas.width;

  std::vector<Point> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {poly.points[i].x - origin_x, poly.points[i].y - origin_y};
  }

  auto fill = [&](int y, double xa, double xb) {
    int lo = static_cast<int>(std::ceil(xa - kRasterEps));
    int hi = static_cast<int>(std::floor(xb + kRasterEps));
    lo = std::max(lo, 0);
    hi = std::min(hi, w - 1);
    if (lo > hi) return;
    std::uint8_t* row = canvas.data.data() + canvas.index(y, 0);
    std::fill(row + lo, row + hi + 1, std::uint8_t{1});
  };

  // Interior: even-odd crossings with half-open [ymin, ymax) edge rows.
  std::vector<std::pair<int, double>> crossings;
  crossings.reserve(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % n];
    if (a.y == b.y) continue;
    const Point& lo = a.y < b.y ? a : b;
    const Point& hi = a.y < b.y ? b : a;
    int r0 = static_cast<int>(std::ceil(lo.y));
    int r1 = static_cast<int>(std::ceil(hi.y)) - 1;
    r0 = std::max(r0, 0);
    r1 = std::min(r1, h - 1);
    const double slope = (hi.x - lo.x) / (hi.y - lo.y);
    for (int r = r0; r <= r1; ++r) crossings.emplace_back(r, lo.x + (r - lo.y) * slope);
  }
  std::sort(crossings.begin(), crossings.end());
  for (std::size_t i = 0; i + 1 < crossings.size();) {
    if (crossings[i].first != crossings[i + 1].first) {
      ++i;
      continue;
    }
    fill(crossings[i].first, crossings[i].second, crossings[i + 1].second);
    i += 2;
  }

  // Boundary: centers lying exactly on an edge count as inside.
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % n];
    if (a.y == b.y) {
      const double ry = std::round(a.y);
      if (std::abs(a.y - ry) <= kRasterEps && ry >= 0 && ry < h) {
        fill(static_cast<int>(ry), std::min(a.x, b.x), std::max(a.x, b.x));
      }
      continue;
    }
    const Point& lo = a.y < b.y ? a : b;
    const Point& hi = a.y < b.y ? b : a;
    int r0 = std::max(static_cast<int>(std::ceil(lo.y - kRasterEps)), 0);
    int r1 = std::min(static_cast<int>(std::floor(hi.y + kRasterEps)), h - 1);
    const double slope = (hi.x - lo.x) / (hi.y - lo.y);
    for (int r = r0; r <= r1; ++r) {
      const double x = lo.x + (r - lo.y) * slope;
      const double rx = std::round(x);
      if (std::abs(x - rx) <= kRasterEps && rx >= 0 && rx < w) {
        canvas.at(r, static_cast<int>(rx)) = 1;
      }
    }
  }
}

BinaryMap rasterize(const Polygon& p, int height, int width) {
  BinaryMap out(height, width, 0);
  rasterize_onto(p, out, 0, 0);
  return out;
}

double mask_iou(const BinaryMap& a, const BinaryMap& b) {
  if (!a.same_size(b)) throw ShapeError("mask_iou: masks differ in size");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a.data[i] != 0;
    const bool y = b.data[i] != 0;
    inter += static_cast<std::size_t>(x && y);
    uni += static_cast<std::size_t>(x || y);
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace textkernel
