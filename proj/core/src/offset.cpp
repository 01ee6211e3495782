// Polygon offsetting with round joins.
//
// The raw offset path (edges shifted along their outward normals, arcs at
// joins that open up, a detour through the original vertex at joins that
// close) self-overlaps wherever the offset folds. The result is the region
// of positive winding number of that path, recovered by splitting every
// edge at all of its crossings, classifying each piece by the winding
// numbers on its two sides, and re-linking the pieces that separate
// positive from non-positive winding into rings.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>

#include "textkernel/geometry.hpp"

namespace textkernel {

namespace {

constexpr double kSnap = 1048576.0;  // 2^20 grid for vertex identity

double snap(double v) { return std::round(v * kSnap) / kSnap; }
Point snap(Point p) { return {snap(p.x), snap(p.y)}; }

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }
double norm(double x, double y) { return std::sqrt(x * x + y * y); }

struct Segment {
  Point a;
  Point b;
};

struct PointKey {
  std::int64_t x;
  std::int64_t y;
  friend bool operator==(const PointKey&, const PointKey&) = default;
  friend bool operator<(const PointKey& l, const PointKey& r) {
    return l.x != r.x ? l.x < r.x : l.y < r.y;
  }
};

PointKey key_of(const Point& p) {
  return {static_cast<std::int64_t>(std::llround(p.x * kSnap)),
          static_cast<std::int64_t>(std::llround(p.y * kSnap))};
}

// Horizontal bands for winding-number ray casts.
class BandIndex {
 public:
  BandIndex(const std::vector<Segment>& segs, double band) : segs_(segs), band_(band) {
    y0_ = std::numeric_limits<double>::max();
    double y1 = std::numeric_limits<double>::lowest();
    for (const Segment& s : segs) {
      y0_ = std::min({y0_, s.a.y, s.b.y});
      y1 = std::max({y1, s.a.y, s.b.y});
    }
    n_ = std::max(1, static_cast<int>((y1 - y0_) / band_) + 1);
    start_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (const Segment& s : segs) {
      for (int b = bin(std::min(s.a.y, s.b.y)), e = bin(std::max(s.a.y, s.b.y)); b <= e; ++b) ++start_[b + 1];
    }
    for (int b = 0; b < n_; ++b) start_[b + 1] += start_[b];
    members_.resize(start_.back());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const Segment& s = segs[i];
      for (int b = bin(std::min(s.a.y, s.b.y)), e = bin(std::max(s.a.y, s.b.y)); b <= e; ++b) members_[fill[b]++] = i;
    }
  }

  // Winding numbers just left and right of `q`, a point on segment `parent`
  // with direction (dx, dy). The count is taken at q + e * (k, 1) for infinitesimal
  // e >> k > 0, so vertices at the height of `q` follow the half-open rule and
  // segments through `q` are resolved symbolically rather than by a probe.
  std::pair<int, int> side_windings(const Point& q, std::size_t parent, double dx, double dy) const {
    const auto sym = [](double ex, double ey) { return ex != 0.0 ? ex > 0.0 : ey < 0.0; };
    int w_up = 0, jump = 0;
    const auto b = static_cast<std::size_t>(bin(q.y));
    for (std::size_t k = start_[b]; k < start_[b + 1]; ++k) {
      const std::size_t i = members_[k];
      const Segment& s = segs_[i];
      const double ex = s.b.x - s.a.x, ey = s.b.y - s.a.y;
      const double len2 = ex * ex + ey * ey;
      const double side = cross(ex, ey, q.x - s.a.x, q.y - s.a.y);
      bool left;
      if (i == parent || side * side <= 1e-22 * len2) {
        const double t = ((q.x - s.a.x) * ex + (q.y - s.a.y) * ey) / len2;
        if (i != parent && (t < 0.0 || t > 1.0)) continue;
        jump += ex * dx + ey * dy > 0.0 ? 1 : -1;
        left = sym(ex, ey);
      } else {
        left = side > 0.0;
      }
      if (s.a.y <= q.y) {
        if (s.b.y > q.y && left) ++w_up;
      } else if (s.b.y <= q.y && !left) {
        --w_up;
      }
    }
    if (sym(dx, dy)) return {w_up, w_up - jump};
    return {w_up + jump, w_up};
  }

 private:
  int bin(double y) const { return std::clamp(static_cast<int>((y - y0_) / band_), 0, n_ - 1); }

  const std::vector<Segment>& segs_;
  double band_;
  double y0_;
  int n_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> members_;
};

struct SplitPoint {
  std::size_t seg;
  double t;
  Point p;
};

void add_split(std::vector<SplitPoint>& splits, const std::vector<Segment>& segs, std::size_t i, const Point& p) {
  const Segment& s = segs[i];
  if (p == s.a || p == s.b) return;
  const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
  const double t = ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / (dx * dx + dy * dy);
  if (t <= 0.0 || t >= 1.0) return;
  splits.push_back({i, t, p});
}

void intersect(const std::vector<Segment>& segs, std::size_t i, std::size_t j, std::vector<SplitPoint>& splits) {
  const Segment& s = segs[i];
  const Segment& o = segs[j];
  if (std::max(s.a.x, s.b.x) < std::min(o.a.x, o.b.x) || std::max(o.a.x, o.b.x) < std::min(s.a.x, s.b.x) ||
      std::max(s.a.y, s.b.y) < std::min(o.a.y, o.b.y) || std::max(o.a.y, o.b.y) < std::min(s.a.y, s.b.y)) {
    return;
  }
  const double rx = s.b.x - s.a.x, ry = s.b.y - s.a.y;
  const double qx = o.b.x - o.a.x, qy = o.b.y - o.a.y;
  const double denom = cross(rx, ry, qx, qy);
  const double wx = o.a.x - s.a.x, wy = o.a.y - s.a.y;
  const double lr = norm(rx, ry), lq = norm(qx, qy);

  if (std::abs(denom) <= 1e-12 * lr * lq) {
    // Parallel: only collinear overlaps matter.
    if (std::abs(cross(rx, ry, wx, wy)) > 1e-9 * lr) return;
    add_split(splits, segs, i, o.a);
    add_split(splits, segs, i, o.b);
    add_split(splits, segs, j, s.a);
    add_split(splits, segs, j, s.b);
    return;
  }
  const double t = cross(wx, wy, qx, qy) / denom;
  const double u = cross(wx, wy, rx, ry) / denom;
  const double tol_t = 1e-9 / lr, tol_u = 1e-9 / lq;
  if (t < -tol_t || t > 1.0 + tol_t || u < -tol_u || u > 1.0 + tol_u) return;

  Point x;
  if (std::abs(t) <= tol_t) x = s.a;
  else if (std::abs(t - 1.0) <= tol_t) x = s.b;
  else if (std::abs(u) <= tol_u) x = o.a;
  else if (std::abs(u - 1.0) <= tol_u) x = o.b;
  else x = snap(Point{s.a.x + t * rx, s.a.y + t * ry});
  add_split(splits, segs, i, x);
  add_split(splits, segs, j, x);
}

std::vector<Polygon> union_positive(const std::vector<Point>& raw) {
  std::vector<Segment> segs;
  segs.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Point a = raw[i];
    const Point b = raw[(i + 1) % raw.size()];
    if (!(a == b)) segs.push_back({a, b});
  }
  if (segs.size() < 3) return {};

  double total_len = 0.0;
  double x0 = segs[0].a.x, x1 = x0, y0 = segs[0].a.y, y1 = y0;
  for (const Segment& s : segs) {
    total_len += norm(s.b.x - s.a.x, s.b.y - s.a.y);
    x0 = std::min({x0, s.a.x, s.b.x});
    x1 = std::max({x1, s.a.x, s.b.x});
    y0 = std::min({y0, s.a.y, s.b.y});
    y1 = std::max({y1, s.a.y, s.b.y});
  }
  const double n = static_cast<double>(segs.size());
  const double extent = std::max(x1 - x0, y1 - y0);
  const double cell = std::max({2.0 * total_len / n, extent / 512.0, 1e-6});

  // Sweep over x: candidate pairs are segments whose x ranges overlap.
  std::vector<SplitPoint> splits;
  {
    std::vector<std::size_t> order(segs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto lo = [&](std::size_t i) { return std::min(segs[i].a.x, segs[i].b.x); };
    const auto hi = [&](std::size_t i) { return std::max(segs[i].a.x, segs[i].b.x); };
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return lo(l) != lo(r) ? lo(l) < lo(r) : l < r; });
    std::vector<std::size_t> active;
    for (std::size_t i : order) {
      const double x = lo(i);
      std::size_t keep = 0;
      for (std::size_t j : active) {
        if (hi(j) < x) continue;
        active[keep++] = j;
        intersect(segs, std::min(i, j), std::max(i, j), splits);
      }
      active.resize(keep);
      active.push_back(i);
    }
    std::sort(splits.begin(), splits.end(),
              [](const SplitPoint& l, const SplitPoint& r) { return l.seg != r.seg ? l.seg < r.seg : l.t < r.t; });
  }

  // Each piece remembers the parameter of its midpoint on the parent edge so
  // winding probes are placed relative to the unsnapped parent line.
  struct Piece {
    Point a, b;
    std::size_t parent;
    double t_mid;
  };
  std::vector<Piece> pieces;
  pieces.reserve(segs.size() * 2);
  for (std::size_t i = 0, k = 0; i < segs.size(); ++i) {
    Point prev = segs[i].a;
    double prev_t = 0.0;
    for (; k < splits.size() && splits[k].seg == i; ++k) {
      const SplitPoint& s = splits[k];
      if (s.p == prev) continue;
      pieces.push_back({prev, s.p, i, 0.5 * (prev_t + s.t)});
      prev = s.p;
      prev_t = s.t;
    }
    if (!(prev == segs[i].b)) pieces.push_back({prev, segs[i].b, i, 0.5 * (prev_t + 1.0)});
  }

  // Endpoints closer than `merge` become one vertex, so a crossing that lands
  // next to a path vertex does not leave a sliver that breaks the rings.
  {
    const double merge = std::max(4e-6, extent * 1e-9);
    std::vector<Point> ends;
    ends.reserve(2 * pieces.size());
    for (const Piece& pc : pieces) {
      ends.push_back(pc.a);
      ends.push_back(pc.b);
    }
    std::sort(ends.begin(), ends.end(), [](const Point& l, const Point& r) { return l.x != r.x ? l.x < r.x : l.y < r.y; });
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    std::vector<Point> rep(ends.size());
    for (std::size_t i = 0; i < ends.size(); ++i) {
      rep[i] = ends[i];
      for (std::size_t j = i; j-- > 0 && ends[i].x - ends[j].x <= merge;) {
        const double dx = ends[i].x - ends[j].x, dy = ends[i].y - ends[j].y;
        if (dx * dx + dy * dy <= merge * merge) {
          rep[i] = rep[j];
          break;
        }
      }
    }
    const auto canonical = [&](const Point& p) {
      const auto it = std::lower_bound(ends.begin(), ends.end(), p, [](const Point& l, const Point& r) {
        return l.x != r.x ? l.x < r.x : l.y < r.y;
      });
      return rep[static_cast<std::size_t>(it - ends.begin())];
    };
    std::vector<Piece> kept;
    kept.reserve(pieces.size());
    for (Piece pc : pieces) {
      pc.a = canonical(pc.a);
      pc.b = canonical(pc.b);
      if (!(pc.a == pc.b)) kept.push_back(pc);
    }
    pieces = std::move(kept);
  }

  const BandIndex bands(segs, std::max(cell, (y1 - y0) / 4096.0));
  struct Directed {
    PointKey from, to;
    Point a, b;
  };
  std::vector<Directed> boundary;
  for (const Piece& s : pieces) {
    const Segment& parent = segs[s.parent];
    const double dx = parent.b.x - parent.a.x, dy = parent.b.y - parent.a.y;
    const double len = norm(dx, dy);
    const Point m{parent.a.x + s.t_mid * dx, parent.a.y + s.t_mid * dy};
    const auto [wl, wr] = bands.side_windings(m, s.parent, dx / len, dy / len);
    const bool left_in = wl > 0, right_in = wr > 0;
    if (left_in == right_in) continue;
    if (left_in) boundary.push_back({key_of(s.a), key_of(s.b), s.a, s.b});
    else boundary.push_back({key_of(s.b), key_of(s.a), s.b, s.a});
  }
  std::sort(boundary.begin(), boundary.end(), [](const Directed& l, const Directed& r) {
    return l.from != r.from ? l.from < r.from : l.to < r.to;
  });
  boundary.erase(std::unique(boundary.begin(), boundary.end(),
                             [](const Directed& l, const Directed& r) { return l.from == r.from && l.to == r.to; }),
                 boundary.end());

  // `boundary` is sorted by start vertex; outgoing edges of a vertex are a range.
  const auto outgoing = [&](const PointKey& k) {
    const auto first = std::lower_bound(boundary.begin(), boundary.end(), k,
                                        [](const Directed& d, const PointKey& key) { return d.from < key; });
    std::size_t b = static_cast<std::size_t>(first - boundary.begin()), e = b;
    while (e < boundary.size() && boundary[e].from == k) ++e;
    return std::pair<std::size_t, std::size_t>{b, e};
  };

  std::vector<char> used(boundary.size(), 0);
  std::vector<Polygon> rings;
  for (std::size_t start = 0; start < boundary.size(); ++start) {
    if (used[start]) continue;
    used[start] = 1;
    Polygon ring;
    ring.points.push_back(boundary[start].a);
    std::size_t cur = start;
    bool closed = false;
    for (std::size_t guard = 0; guard <= boundary.size(); ++guard) {
      const Directed& e = boundary[cur];
      const double ux = e.a.x - e.b.x, uy = e.a.y - e.b.y;  // reversed incoming
      std::size_t best = boundary.size();
      double best_cw = 10.0;
      const auto [cb, ce] = outgoing(e.to);
      for (std::size_t cand = cb; cand < ce; ++cand) {
        if (used[cand] && cand != start) continue;
        const Directed& c = boundary[cand];
        const double vx = c.b.x - c.a.x, vy = c.b.y - c.a.y;
        double cw = -std::atan2(cross(ux, uy, vx, vy), ux * vx + uy * vy);
        if (cw <= 0.0) cw += 2.0 * std::numbers::pi;
        if (cw < best_cw) {
          best_cw = cw;
          best = cand;
        }
      }
      if (best == boundary.size()) break;
      if (best == start) {
        closed = true;
        break;
      }
      used[best] = 1;
      ring.points.push_back(boundary[best].a);
      cur = best;
    }
    if (!closed) continue;
    ring = remove_collinear(ring);
    if (ring.size() >= 3 && signed_area(ring) > 1e-9) rings.push_back(std::move(ring));
  }
  return rings;
}

}  // namespace

std::vector<Polygon> offset_polygon(const Polygon& p, double delta, double arc_tolerance) {
  Polygon ring = remove_collinear(p);
  const double area = signed_area(ring);
  if (ring.size() < 3 || std::abs(area) < 1e-12) return {};
  if (area < 0.0) ring = reversed(std::move(ring));
  if (delta == 0.0) return {ring};

  const std::size_t n = ring.size();
  const double abs_d = std::abs(delta);
  const double tol = std::clamp(arc_tolerance, 1e-6, abs_d);
  const double steps_per_turn =
      std::max(static_cast<double>(kMinArcSegments), std::numbers::pi / std::acos(1.0 - tol / abs_d));
  const double step_angle = 2.0 * std::numbers::pi / steps_per_turn;

  std::vector<Point> normals(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = ring.points[i];
    const Point& b = ring.points[(i + 1) % n];
    const double len = norm(b.x - a.x, b.y - a.y);
    normals[i] = {(b.y - a.y) / len, -(b.x - a.x) / len};
  }

  std::vector<Point> raw;
  raw.reserve(n * 4);
  auto push = [&](Point q) {
    q = snap(q);
    if (raw.empty() || !(raw.back() == q)) raw.push_back(q);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Point& v = ring.points[i];
    const Point& n1 = normals[(i + n - 1) % n];
    const Point& n2 = normals[i];
    const double sin_a = cross(n1.x, n1.y, n2.x, n2.y);
    const double cos_a = n1.x * n2.x + n1.y * n2.y;
    double theta = std::atan2(sin_a, cos_a);
    if (std::abs(sin_a) < 1e-12 && cos_a < 0.0) theta = delta > 0 ? std::numbers::pi : -std::numbers::pi;

    if (std::abs(theta) < 1e-12) {
      push({v.x + n2.x * delta, v.y + n2.y * delta});
    } else if (theta * delta < 0.0) {
      push({v.x + n1.x * delta, v.y + n1.y * delta});
      push(v);
      push({v.x + n2.x * delta, v.y + n2.y * delta});
    } else {
      const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(theta) / step_angle - 1e-9)));
      for (int k = 0; k <= steps; ++k) {
        const double phi = theta * k / steps;
        const double c = std::cos(phi), s = std::sin(phi);
        const double rx = n1.x * c - n1.y * s;
        const double ry = n1.x * s + n1.y * c;
        push({v.x + rx * delta, v.y + ry * delta});
      }
    }
  }
  while (raw.size() > 1 && raw.front() == raw.back()) raw.pop_back();
  return union_positive(raw);
}

}  // namespace textkernel
