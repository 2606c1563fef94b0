#include <algorithm>
#include <cmath>
#include <set>

#include "ggms/selector.hpp"

namespace ggms {

namespace {

struct Rotated {
  Pattern nodes;
  Pattern forbidden;  // lattice points of the hull that are not pattern nodes
  // Hull slice per pattern row: columns [lo, hi] hold exactly `count` nodes.
  std::vector<int> lo, hi, count;
};

void hull_slices(Rotated& rv) {
  std::vector<Point> pts;
  int mi = 0;
  for (auto [a, b] : rv.nodes) {
    pts.push_back({static_cast<double>(a), static_cast<double>(b)});
    mi = std::max(mi, a);
  }
  const auto hull = convex_hull(pts);
  const size_t n = hull.size();
  rv.lo.assign(mi + 1, 1);
  rv.hi.assign(mi + 1, 0);
  rv.count.assign(mi + 1, 0);
  for (int a = 0; a <= mi; ++a) {
    double ymin = 1e300, ymax = -1e300;
    for (size_t e = 0; e < n; ++e) {
      const Point& p = hull[e];
      const Point& q = hull[(e + 1) % n];
      if (std::abs(p.x - a) < 1e-9) ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
      if ((p.x - a) * (q.x - a) < 0) {
        const double y = p.y + (q.y - p.y) * (a - p.x) / (q.x - p.x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
    if (ymin > ymax) continue;
    rv.lo[a] = static_cast<int>(std::ceil(ymin - 1e-9));
    rv.hi[a] = static_cast<int>(std::floor(ymax + 1e-9));
  }
  for (auto [a, b] : rv.nodes) ++rv.count[a];
}

Rotated rotated_view(const Pattern& pattern, int k) {
  Rotated rv;
  rv.nodes = rotate_pattern(pattern, k);
  std::vector<Point> pts;
  int mi = 0, mj = 0;
  for (auto [a, b] : rv.nodes) {
    pts.push_back({static_cast<double>(a), static_cast<double>(b)});
    mi = std::max(mi, a);
    mj = std::max(mj, b);
  }
  const auto hull = convex_hull(pts);
  std::set<Offset> own(rv.nodes.begin(), rv.nodes.end());
  for (int a = 0; a <= mi; ++a)
    for (int b = 0; b <= mj; ++b)
      if (!own.count({a, b}) && in_hull({static_cast<double>(a), static_cast<double>(b)}, hull, 1e-9))
        rv.forbidden.emplace_back(a, b);
  return rv;
}

void check_pattern(const Lattice& lat, const Pattern& pattern) {
  if (pattern.empty()) throw std::invalid_argument("find_copies: empty pattern");
  int mi = 0, mj = 0;
  for (auto [a, b] : pattern) {
    if (a < 0 || b < 0) throw std::invalid_argument("find_copies: pattern offsets must be nonnegative");
    mi = std::max(mi, a);
    mj = std::max(mj, b);
  }
  if (2 * std::max(mi, mj) > lat.M) throw NonLocalSubset("find_copies: pattern spans more than half the torus");
}

bool placed(const Lattice& lat, const Rotated& rv, int ai, int aj) {
  for (auto [a, b] : rv.nodes)
    if (!lat.occupied(ai + a, aj + b)) return false;
  for (auto [a, b] : rv.forbidden)
    if (lat.occupied(ai + a, aj + b)) return false;
  return true;
}

int occupied_in(const std::vector<int>& cols, int from, int to) {
  return static_cast<int>(std::upper_bound(cols.begin(), cols.end(), to) -
                          std::lower_bound(cols.begin(), cols.end(), from));
}

bool placed_sliced(const Lattice& lat, const std::vector<std::vector<int>>& row, const Rotated& rv, int ai, int aj) {
  for (auto [a, b] : rv.nodes)
    if (!lat.occupied(ai + a, aj + b)) return false;
  const int M = lat.M;
  for (size_t a = 0; a < rv.count.size(); ++a) {
    if (rv.lo[a] > rv.hi[a]) continue;
    const auto& cols = row[lat.wrap(ai + static_cast<int>(a))];
    const int from = lat.wrap(aj + rv.lo[a]);
    const int to = from + (rv.hi[a] - rv.lo[a]);
    const int c = to < M ? occupied_in(cols, from, to) : occupied_in(cols, from, M - 1) + occupied_in(cols, 0, to - M);
    if (c != rv.count[a]) return false;
  }
  return true;
}

Occurrence make_occurrence(const Lattice& lat, const Rotated& rv, int ai, int aj, int k) {
  Occurrence occ{lat.wrap(ai), lat.wrap(aj), k, {}};
  for (auto [a, b] : rv.nodes) occ.vertices.push_back(lat.at(ai + a, aj + b));
  return occ;
}

// Identity first, then the rest in scan order, one per vertex set.
CopySet assemble(const Lattice& lat, const Pattern& pattern, const Rotated& rv0, bool identity_placed, int anchor_i,
                 int anchor_j, std::vector<Occurrence>&& hits) {
  CopySet cs;
  cs.pattern = pattern;
  cs.raw_placements = static_cast<std::int64_t>(hits.size());
  std::set<std::vector<int>> seen;
  auto push = [&](Occurrence&& occ) {
    auto key = occ.vertices;
    std::sort(key.begin(), key.end());
    if (seen.insert(std::move(key)).second) cs.matches.push_back(std::move(occ));
  };
  if (identity_placed) push(make_occurrence(lat, rv0, anchor_i, anchor_j, 0));
  for (auto& h : hits) push(std::move(h));
  return cs;
}

}  // namespace

CopySet find_copies(const Lattice& lat, const Pattern& pattern, int anchor_i, int anchor_j) {
  check_pattern(lat, pattern);
  const int M = lat.M;
  std::vector<Rotated> rv(4);
  for (int k = 0; k < 4; ++k) {
    rv[k].nodes = rotate_pattern(pattern, k);
    hull_slices(rv[k]);
  }

  // Occupied columns per lattice row.
  std::vector<std::vector<int>> row(M);
  for (size_t v = 0; v < lat.vertex_count(); ++v) row[lat.node_i(static_cast<int>(v))].push_back(lat.node_j(static_cast<int>(v)));
  for (auto& r : row) std::sort(r.begin(), r.end());

  std::vector<std::vector<Occurrence>> per_row(M);
#pragma omp parallel for schedule(dynamic, 16)
  for (int ai = 0; ai < M; ++ai) {
    std::vector<std::pair<int, int>> hits;  // (anchor_j, rotation)
    for (int k = 0; k < 4; ++k) {
      // Pivot on the first pattern node: its row fixes the candidate anchors.
      const auto [pi, pj] = rv[k].nodes[0];
      for (int nj : row[lat.wrap(ai + pi)]) {
        const int aj = lat.wrap(nj - pj);
        if (placed_sliced(lat, row, rv[k], ai, aj)) hits.emplace_back(aj, k);
      }
    }
    std::sort(hits.begin(), hits.end());
    for (auto [aj, k] : hits) per_row[ai].push_back(make_occurrence(lat, rv[k], ai, aj, k));
  }
  std::vector<Occurrence> all;
  for (auto& r : per_row)
    for (auto& o : r) all.push_back(std::move(o));
  return assemble(lat, pattern, rv[0], placed_sliced(lat, row, rv[0], anchor_i, anchor_j), anchor_i, anchor_j,
                  std::move(all));
}

CopySet find_copies_serial(const Lattice& lat, const Pattern& pattern, int anchor_i, int anchor_j) {
  check_pattern(lat, pattern);
  std::vector<Rotated> rv;
  for (int k = 0; k < 4; ++k) rv.push_back(rotated_view(pattern, k));
  std::vector<Occurrence> all;
  for (int ai = 0; ai < lat.M; ++ai)
    for (int aj = 0; aj < lat.M; ++aj)
      for (int k = 0; k < 4; ++k)
        if (placed(lat, rv[k], ai, aj)) all.push_back(make_occurrence(lat, rv[k], ai, aj, k));
  return assemble(lat, pattern, rv[0], placed(lat, rv[0], anchor_i, anchor_j), anchor_i, anchor_j, std::move(all));
}

Point occurrence_centroid(const Lattice& lat, const Occurrence& occ) {
  const int v0 = occ.vertices.front();
  const int i0 = lat.node_i(v0), j0 = lat.node_j(v0);
  double ci = 0, cj = 0;
  for (int v : occ.vertices) {
    int di = lat.node_i(v) - i0, dj = lat.node_j(v) - j0;
    if (2 * di > lat.M) di -= lat.M;
    if (2 * di < -lat.M) di += lat.M;
    if (2 * dj > lat.M) dj -= lat.M;
    if (2 * dj < -lat.M) dj += lat.M;
    ci += di;
    cj += dj;
  }
  const double n = static_cast<double>(occ.vertices.size());
  const double s = lat.s;
  auto wrap = [s](double x) {
    x = std::fmod(x, s);
    return x < 0 ? x + s : x;
  };
  return {wrap((i0 + ci / n) * lat.eps), wrap((j0 + cj / n) * lat.eps)};
}

std::vector<int> greedy_separated(const std::vector<Point>& centroids, const Torus& t, double w) {
  std::vector<int> kept;
  for (int a = 0; a < static_cast<int>(centroids.size()); ++a) {
    bool ok = true;
    for (int b : kept)
      if (torus_distance(centroids[a], centroids[b], t) < w) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(a);
  }
  return kept;
}

void greedy_separated(CopySet& copies, const Lattice& lat, double w) {
  std::vector<Point> c;
  for (const auto& occ : copies.matches) c.push_back(occurrence_centroid(lat, occ));
  copies.separated = greedy_separated(c, Torus{lat.s}, w);
}

namespace {

void check_pool(const SampleMatrix& X, const CopySet& copies) {
  if (copies.separated.empty()) throw std::invalid_argument("pooled_scm: no separated occurrences");
  const size_t m = copies.matches[copies.separated[0]].vertices.size();
  for (int k : copies.separated) {
    const auto& v = copies.matches.at(k).vertices;
    if (v.size() != m) throw std::invalid_argument("pooled_scm: misaligned occurrence");
    for (int x : v)
      if (x < 0 || x >= X.p) throw std::invalid_argument("pooled_scm: vertex outside sample matrix");
  }
}

}  // namespace

Mat pooled_scm(const SampleMatrix& X, const CopySet& copies) {
  check_pool(X, copies);
  const int q = static_cast<int>(copies.separated.size());
  std::vector<Mat> part(q);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < q; ++k) part[k] = sample_covariance(X, copies.matches[copies.separated[k]].vertices);
  Mat S = part[0];
  for (int k = 1; k < q; ++k) S += part[k];
  return S / static_cast<double>(q);
}

Mat pooled_scm_serial(const SampleMatrix& X, const CopySet& copies) {
  check_pool(X, copies);
  Mat S;
  for (size_t k = 0; k < copies.separated.size(); ++k) {
    Mat part = sample_covariance(X, copies.matches[copies.separated[k]].vertices);
    if (k == 0)
      S = part;
    else
      S += part;
  }
  return S / static_cast<double>(copies.separated.size());
}

}  // namespace ggms
