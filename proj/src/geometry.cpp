#include "ggms/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ggms {

namespace {

double wrap_delta(double d, double s) {
  d = std::fmod(d, s);
  if (d > 0.5 * s) d -= s;
  if (d < -0.5 * s) d += s;
  return d;
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Kuhn augmenting path on the threshold graph.
bool try_augment(int u, const std::vector<std::vector<char>>& ok, std::vector<int>& match_h,
                 std::vector<char>& seen) {
  const int r = static_cast<int>(ok.size());
  for (int v = 0; v < r; ++v) {
    if (!ok[u][v] || seen[v]) continue;
    seen[v] = 1;
    if (match_h[v] < 0 || try_augment(match_h[v], ok, match_h, seen)) {
      match_h[v] = u;
      return true;
    }
  }
  return false;
}

bool perfect_matching(const std::vector<double>& dist, int r, double thr) {
  std::vector<std::vector<char>> ok(r, std::vector<char>(r, 0));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) ok[i][j] = dist[i * r + j] <= thr;
  std::vector<int> match_h(r, -1);
  for (int u = 0; u < r; ++u) {
    std::vector<char> seen(r, 0);
    if (!try_augment(u, ok, match_h, seen)) return false;
  }
  return true;
}

std::vector<Point> centred(const std::vector<Point>& P) {
  double cx = 0, cy = 0;
  for (const auto& q : P) {
    cx += q.x;
    cy += q.y;
  }
  cx /= static_cast<double>(P.size());
  cy /= static_cast<double>(P.size());
  std::vector<Point> out;
  out.reserve(P.size());
  for (const auto& q : P) out.push_back({q.x - cx, q.y - cy});
  return out;
}

}  // namespace

Point torus_delta(const Point& a, const Point& b, const Torus& t) {
  return {wrap_delta(b.x - a.x, t.s), wrap_delta(b.y - a.y, t.s)};
}

double torus_distance2(const Point& a, const Point& b, const Torus& t) {
  Point d = torus_delta(a, b, t);
  return d.x * d.x + d.y * d.y;
}

double torus_distance(const Point& a, const Point& b, const Torus& t) {
  return std::sqrt(torus_distance2(a, b, t));
}

double matching_distance(const std::vector<Point>& F, const std::vector<Point>& H) {
  if (F.size() != H.size()) throw std::invalid_argument("matching_distance: size mismatch");
  if (F.empty()) throw std::invalid_argument("matching_distance: empty sets");
  const int r = static_cast<int>(F.size());
  std::vector<double> dist(static_cast<size_t>(r) * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) dist[i * r + j] = std::hypot(F[i].x - H[j].x, F[i].y - H[j].y);
  std::vector<double> cand = dist;
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  size_t lo = 0, hi = cand.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (perfect_matching(dist, r, cand[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return cand[lo];
}

double grid_angle(std::uint32_t k) {
  std::uint32_t v = k;
  v = ((v >> 1) & 0x55555555u) | ((v & 0x55555555u) << 1);
  v = ((v >> 2) & 0x33333333u) | ((v & 0x33333333u) << 2);
  v = ((v >> 4) & 0x0F0F0F0Fu) | ((v & 0x0F0F0F0Fu) << 4);
  v = ((v >> 8) & 0x00FF00FFu) | ((v & 0x00FF00FFu) << 8);
  v = (v >> 16) | (v << 16);
  return 2.0 * std::numbers::pi * (static_cast<double>(v) / 4294967296.0);
}

double similarity(const std::vector<Point>& F, const std::vector<Point>& H, int angle_grid) {
  if (F.size() != H.size()) throw std::invalid_argument("similarity: size mismatch");
  if (F.empty()) throw std::invalid_argument("similarity: empty sets");
  if (angle_grid < 4) throw std::invalid_argument("similarity: angle_grid must be >= 4");
  const auto Fc = centred(F);
  const auto Hc = centred(H);

  std::vector<double> angles;
  angles.reserve(static_cast<size_t>(angle_grid) + F.size() * F.size());
  for (int k = 0; k < angle_grid; ++k) angles.push_back(grid_angle(static_cast<std::uint32_t>(k)));
  double scale = 0;
  for (const auto& q : Fc) scale = std::max(scale, std::hypot(q.x, q.y));
  for (const auto& q : Hc) scale = std::max(scale, std::hypot(q.x, q.y));
  const double tiny = 1e-12 * std::max(scale, 1.0);
  for (const auto& f : Fc) {
    if (std::hypot(f.x, f.y) <= tiny) continue;
    for (const auto& h : Hc) {
      if (std::hypot(h.x, h.y) <= tiny) continue;
      angles.push_back(std::atan2(f.y, f.x) - std::atan2(h.y, h.x));
    }
  }

  double best = matching_distance(Fc, Hc);
  std::vector<Point> R(Hc.size());
  for (double a : angles) {
    const double c = std::cos(a), s = std::sin(a);
    for (size_t i = 0; i < Hc.size(); ++i)
      R[i] = {c * Hc[i].x - s * Hc[i].y, s * Hc[i].x + c * Hc[i].y};
    best = std::min(best, matching_distance(Fc, R));
  }
  return best;
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Point> h(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

bool in_hull(const Point& q, const std::vector<Point>& hull, double tol) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return std::hypot(q.x - hull[0].x, q.y - hull[0].y) <= tol;
  if (hull.size() == 2) {
    const Point& a = hull[0];
    const Point& b = hull[1];
    const double dx = b.x - a.x, dy = b.y - a.y;
    double u = ((q.x - a.x) * dx + (q.y - a.y) * dy) / (dx * dx + dy * dy);
    u = std::clamp(u, 0.0, 1.0);
    return std::hypot(q.x - (a.x + u * dx), q.y - (a.y + u * dy)) <= tol;
  }
  for (size_t i = 0; i < hull.size(); ++i) {
    const Point& a = hull[i];
    const Point& b = hull[(i + 1) % hull.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (cross(a, b, q) / len < -tol) return false;
  }
  return true;
}

bool is_contiguous(const std::vector<int>& F, const std::vector<Point>& pts, const Torus& t) {
  if (F.empty()) throw std::invalid_argument("is_contiguous: empty subset");
  const Point ref = pts[F[0]];
  double cx = 0, cy = 0;
  for (int v : F) {
    Point d = torus_delta(ref, pts[v], t);
    cx += ref.x + d.x;
    cy += ref.y + d.y;
  }
  Point c{cx / static_cast<double>(F.size()), cy / static_cast<double>(F.size())};

  std::vector<Point> chart;
  chart.reserve(F.size());
  double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
  for (int v : F) {
    Point d = torus_delta(c, pts[v], t);
    Point q{c.x + d.x, c.y + d.y};
    chart.push_back(q);
    minx = std::min(minx, q.x);
    maxx = std::max(maxx, q.x);
    miny = std::min(miny, q.y);
    maxy = std::max(maxy, q.y);
  }
  if (maxx - minx > 0.5 * t.s || maxy - miny > 0.5 * t.s)
    throw NonLocalSubset("is_contiguous: subset spans more than s/2");

  const double tol = hull_tolerance(t);
  const auto hull = convex_hull(chart);
  std::vector<char> inF(pts.size(), 0);
  for (int v : F) inF[v] = 1;
  for (size_t v = 0; v < pts.size(); ++v) {
    if (inF[v]) continue;
    Point d = torus_delta(c, pts[v], t);
    Point q{c.x + d.x, c.y + d.y};
    if (q.x < minx - tol || q.x > maxx + tol || q.y < miny - tol || q.y > maxy + tol) continue;
    if (in_hull(q, hull, tol)) return false;
  }
  return true;
}

double snap_eps(double s, double eps) {
  if (!(eps > 0) || !(s > 0)) throw std::invalid_argument("snap_eps: nonpositive input");
  const double m = std::ceil(s / eps - 1e-9);
  return s / std::max(1.0, m);
}

Lattice quantize(const std::vector<Point>& pts, const Torus& t, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("quantize: eps must be positive");
  const double ratio = t.s / eps;
  const double m = std::round(ratio);
  if (m < 1 || std::abs(m * eps - t.s) > 1e-9 * t.s)
    throw std::invalid_argument("quantize: s must be a multiple of eps");
  Lattice lat;
  lat.eps = eps;
  lat.s = t.s;
  lat.M = static_cast<int>(m);
  lat.L = lat.M + 1;
  lat.vertex_of_node.assign(static_cast<size_t>(lat.M) * lat.M, -1);
  lat.node_of_vertex.resize(pts.size());
  lat.displacement.resize(pts.size());
  for (size_t v = 0; v < pts.size(); ++v) {
    const double ti = pts[v].x / eps, tj = pts[v].y / eps;
    const double fi = std::ceil(ti - 0.5), fj = std::ceil(tj - 0.5);
    lat.displacement[v] = std::hypot(pts[v].x - fi * eps, pts[v].y - fj * eps);
    const std::int64_t node = lat.node(static_cast<int>(fi), static_cast<int>(fj));
    int& slot = lat.vertex_of_node[static_cast<size_t>(node)];
    if (slot >= 0) throw CollisionError(slot, static_cast<int>(v), node);
    slot = static_cast<int>(v);
    lat.node_of_vertex[v] = node;
  }
  return lat;
}

Lattice make_lattice(int M, double eps, const std::vector<std::int64_t>& occupied_nodes) {
  if (M < 1) throw std::invalid_argument("make_lattice: M must be positive");
  Lattice lat;
  lat.eps = eps;
  lat.s = eps * M;
  lat.M = M;
  lat.L = M + 1;
  lat.vertex_of_node.assign(static_cast<size_t>(M) * M, -1);
  for (std::int64_t node : occupied_nodes) {
    int& slot = lat.vertex_of_node[static_cast<size_t>(node)];
    if (slot >= 0) throw CollisionError(slot, static_cast<int>(lat.node_of_vertex.size()), node);
    slot = static_cast<int>(lat.node_of_vertex.size());
    lat.node_of_vertex.push_back(node);
    lat.displacement.push_back(0.0);
  }
  return lat;
}

}  // namespace ggms
