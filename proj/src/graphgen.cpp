#include "ggms/graphgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ggms {

double FamilyParams::side() const { return std::sqrt(static_cast<double>(p) / eta); }

void check_family(const FamilyParams& fp) {
  if (fp.p < 1 || !(fp.eta > 0) || fp.d < 1 || !(fp.beta > 0) || fp.theta < 0)
    throw std::invalid_argument("family parameters must be positive");
  if (!(fp.density_ratio() > 1.0))
    throw std::invalid_argument("family requires eta*beta^2 > d");
}

bool Adjacency::has(int u, int v) const {
  return std::binary_search(nbr[u].begin(), nbr[u].end(), v);
}

void Adjacency::add(int u, int v) {
  if (u == v || has(u, v)) return;
  nbr[u].insert(std::lower_bound(nbr[u].begin(), nbr[u].end(), v), v);
  nbr[v].insert(std::lower_bound(nbr[v].begin(), nbr[v].end(), u), u);
}

size_t Adjacency::edge_count() const {
  size_t s = 0;
  for (const auto& n : nbr) s += n.size();
  return s / 2;
}

std::vector<std::pair<int, int>> Adjacency::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < static_cast<int>(nbr.size()); ++u)
    for (int v : nbr[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

Pattern rotate_pattern(const Pattern& pat, int k) {
  Pattern out;
  out.reserve(pat.size());
  for (auto [a, b] : pat) {
    switch (((k % 4) + 4) % 4) {
      case 0: out.emplace_back(a, b); break;
      case 1: out.emplace_back(-b, a); break;
      case 2: out.emplace_back(-a, -b); break;
      default: out.emplace_back(b, -a); break;
    }
  }
  int mi = 0, mj = 0;
  if (!out.empty()) {
    mi = out[0].first;
    mj = out[0].second;
    for (auto [a, b] : out) mi = std::min(mi, a), mj = std::min(mj, b);
  }
  for (auto& [a, b] : out) a -= mi, b -= mj;
  return out;
}

std::vector<Point> sample_vertices(const FamilyParams& fp) {
  const double s = fp.side();
  std::mt19937_64 rng(fp.seed);
  std::uniform_real_distribution<double> U(0.0, s);
  std::vector<Point> pts(fp.p);
  for (auto& q : pts) {
    q.x = U(rng);
    q.y = U(rng);
    if (q.x >= s) q.x = 0.0;
    if (q.y >= s) q.y = 0.0;
  }
  return pts;
}

namespace {

bool lexless(const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

struct Cand {
  double d2;
  int u, v;  // u is the lexicographically smaller endpoint
};

template <class Fn>
void for_each_close_pair(const std::vector<Point>& pts, double beta, const Torus& t, Fn&& fn) {
  const int p = static_cast<int>(pts.size());
  const double b2 = beta * beta;
  auto consider = [&](int a, int b) {
    const double d2 = torus_distance2(pts[a], pts[b], t);
    if (d2 <= b2) fn(a, b, d2);
  };
  const int nc = static_cast<int>(std::floor(t.s / beta));
  if (nc < 3) {
    for (int a = 0; a < p; ++a)
      for (int b = a + 1; b < p; ++b) consider(a, b);
    return;
  }
  const double cs = t.s / nc;
  std::vector<std::vector<int>> cell(static_cast<size_t>(nc) * nc);
  auto cidx = [&](double x) { return std::min(nc - 1, static_cast<int>(x / cs)); };
  for (int v = 0; v < p; ++v) cell[cidx(pts[v].x) * nc + cidx(pts[v].y)].push_back(v);
  for (int ci = 0; ci < nc; ++ci)
    for (int cj = 0; cj < nc; ++cj)
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int oi = (ci + di + nc) % nc, oj = (cj + dj + nc) % nc;
          const auto& A = cell[ci * nc + cj];
          const auto& B = cell[oi * nc + oj];
          for (int a : A)
            for (int b : B)
              if (a < b) consider(a, b);
        }
}

}  // namespace

Adjacency candidate_pairs(const std::vector<Point>& pts, double beta, const Torus& t) {
  Adjacency adj(pts.size());
  for_each_close_pair(pts, beta, t, [&](int a, int b, double) { adj.add(a, b); });
  return adj;
}

Adjacency build_edges(const std::vector<Point>& pts, int d, double beta, const Torus& t) {
  const int p = static_cast<int>(pts.size());
  std::vector<Cand> cand;
  for_each_close_pair(pts, beta, t, [&](int a, int b, double d2) {
    int u = a, v = b;
    if (lexless(pts[v], pts[u])) std::swap(u, v);
    cand.push_back({d2, u, v});
  });

  std::sort(cand.begin(), cand.end(), [&](const Cand& x, const Cand& y) {
    if (x.d2 != y.d2) return x.d2 < y.d2;
    if (lexless(pts[x.u], pts[y.u])) return true;
    if (lexless(pts[y.u], pts[x.u])) return false;
    return lexless(pts[x.v], pts[y.v]);
  });

  Adjacency adj(p);
  std::vector<int> deg(p, 0);
  for (const auto& c : cand) {
    if (deg[c.u] < d && deg[c.v] < d) {
      adj.add(c.u, c.v);
      ++deg[c.u];
      ++deg[c.v];
    }
  }
  return adj;
}

GeoGraph generate(const FamilyParams& fp) {
  check_family(fp);
  GeoGraph g;
  g.params = fp;
  g.torus = Torus{fp.side()};
  g.points = sample_vertices(fp);
  g.adj = build_edges(g.points, fp.d, fp.beta, g.torus);
  return g;
}

std::vector<Pattern> make_library(const PlantSpec& spec, double pitch, double beta) {
  if (spec.pattern_size < 2 || spec.box_nodes < 2 || spec.templates < 1)
    throw std::invalid_argument("plant spec: pattern_size, box_nodes >= 2 and templates >= 1");
  if (spec.pattern_size > spec.box_nodes * spec.box_nodes)
    throw std::invalid_argument("plant spec: pattern does not fit its box");
  std::mt19937_64 rng(spec.library_seed);
  std::uniform_int_distribution<int> U(0, spec.box_nodes - 1);
  const double b2 = beta * beta / (pitch * pitch);
  std::vector<Pattern> lib;
  std::set<Pattern> seen;  // all rotations of accepted patterns
  for (int attempt = 0; static_cast<int>(lib.size()) < spec.templates; ++attempt) {
    if (attempt > 200000) throw std::runtime_error("make_library: no admissible pattern found");
    std::set<Offset> pick;
    while (static_cast<int>(pick.size()) < spec.pattern_size) pick.insert({U(rng), U(rng)});
    Pattern pat(pick.begin(), pick.end());
    pat = rotate_pattern(pat, 0);
    // Distinct candidate lengths make the greedy edge order rotation independent.
    std::vector<long> lens;
    for (size_t a = 0; a < pat.size(); ++a)
      for (size_t b = a + 1; b < pat.size(); ++b) {
        long di = pat[a].first - pat[b].first, dj = pat[a].second - pat[b].second;
        long l = di * di + dj * dj;
        if (static_cast<double>(l) <= b2 * (1 + 1e-9)) lens.push_back(l);
      }
    std::sort(lens.begin(), lens.end());
    if (std::adjacent_find(lens.begin(), lens.end()) != lens.end()) continue;
    auto canon = [](Pattern q) {
      std::sort(q.begin(), q.end());
      return q;
    };
    bool symmetric = false;
    for (int k = 1; k < 4; ++k) symmetric |= canon(rotate_pattern(pat, k)) == canon(pat);
    if (symmetric) continue;
    bool dup = false;
    for (int k = 0; k < 4; ++k) dup |= seen.count(canon(rotate_pattern(pat, k))) > 0;
    if (dup) continue;
    for (int k = 0; k < 4; ++k) seen.insert(canon(rotate_pattern(pat, k)));
    lib.push_back(pat);
  }
  return lib;
}

GeoGraph generate_planted(const FamilyParams& fp, const PlantSpec& spec) {
  check_family(fp);
  GeoGraph g;
  g.params = fp;
  const double s = fp.side();
  g.torus = Torus{s};
  const double pitch = snap_eps(s, spec.pitch);
  const int M = static_cast<int>(std::lround(s / pitch));
  g.plant_pitch = pitch;
  g.library = make_library(spec, pitch, fp.beta);

  const int m = spec.pattern_size;
  const double box = (spec.box_nodes - 1) * pitch;
  const int per_side = static_cast<int>(std::floor(s / (box + spec.moat)));
  const int Q = spec.copies < 0 ? std::min(fp.p / m, per_side * per_side) : spec.copies;
  if (Q * m > fp.p) throw std::invalid_argument("planted copies exceed p");
  const int G = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(Q)))));
  const double cell = s / G;
  if (cell < box + spec.moat) throw std::invalid_argument("planted patches do not fit on the torus");

  std::mt19937_64 rng(fp.seed);
  std::vector<int> cells(static_cast<size_t>(G) * G);
  std::iota(cells.begin(), cells.end(), 0);
  std::shuffle(cells.begin(), cells.end(), rng);
  cells.resize(Q);

  std::uniform_real_distribution<double> J(-spec.jitter, spec.jitter);
  struct Box {
    double x0, y0;
  };
  std::vector<std::vector<int>> plant_of_cell(static_cast<size_t>(G) * G);
  std::vector<Box> boxes;
  for (int q = 0; q < Q; ++q) {
    const int ci = cells[q] / G, cj = cells[q] % G;
    auto range = [&](int c) {
      const int lo = static_cast<int>(std::ceil(c * cell / pitch - 1e-9));
      const int hi = static_cast<int>(std::floor((c * cell + cell - spec.moat - box) / pitch + 1e-9));
      if (hi < lo) throw std::invalid_argument("planted patches do not fit in their cells");
      return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    Plant pl;
    pl.template_id = q % spec.templates;
    pl.anchor_i = range(ci);
    pl.anchor_j = range(cj);
    pl.rotation = std::uniform_int_distribution<int>(0, 3)(rng);
    const Pattern rot = rotate_pattern(g.library[pl.template_id], pl.rotation);
    for (auto [a, b] : rot) {
      const int ni = (pl.anchor_i + a) % M, nj = (pl.anchor_j + b) % M;
      Point pt{ni * pitch, nj * pitch};
      if (spec.jitter > 0) {
        pt.x = std::fmod(pt.x + J(rng) + s, s);
        pt.y = std::fmod(pt.y + J(rng) + s, s);
      }
      pl.vertices.push_back(static_cast<int>(g.points.size()));
      g.points.push_back(pt);
    }
    plant_of_cell[cells[q]].push_back(static_cast<int>(boxes.size()));
    boxes.push_back({pl.anchor_i * pitch, pl.anchor_j * pitch});
    g.plants.push_back(std::move(pl));
  }

  const int nb = fp.p - Q * m;
  std::uniform_real_distribution<double> U(0.0, s);
  const double reach = spec.moat + spec.jitter;
  auto clear = [&](const Point& pt) {
    const int ci = std::min(G - 1, static_cast<int>(pt.x / cell));
    const int cj = std::min(G - 1, static_cast<int>(pt.y / cell));
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int b : plant_of_cell[((ci + di + G) % G) * G + (cj + dj + G) % G]) {
          Point lo{boxes[b].x0 - reach, boxes[b].y0 - reach};
          Point d = torus_delta(lo, pt, g.torus);
          double dx = d.x < 0 ? d.x + s : d.x, dy = d.y < 0 ? d.y + s : d.y;
          if (dx <= box + 2 * reach && dy <= box + 2 * reach) return false;
        }
    return true;
  };
  for (int k = 0, tries = 0; k < nb; ++tries) {
    if (tries > 1000 * (nb + 10)) throw std::runtime_error("no room for background vertices");
    Point pt{U(rng), U(rng)};
    if (pt.x >= s) pt.x = 0;
    if (pt.y >= s) pt.y = 0;
    if (!clear(pt)) continue;
    g.points.push_back(pt);
    ++k;
  }
  g.adj = build_edges(g.points, fp.d, fp.beta, g.torus);
  return g;
}

std::string Violation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Degree: os << "degree " << value << " at vertex " << u; break;
    case Length: os << "edge (" << u << "," << v << ") length " << value; break;
    case Coupling: os << "d*theta = " << value << " not below 1/2"; break;
    case SelfLoop: os << "self-loop at " << u; break;
    case Asymmetric: os << "asymmetric entry (" << u << "," << v << ")"; break;
  }
  return os.str();
}

size_t ValidationReport::count(Violation::Kind k) const {
  return static_cast<size_t>(std::count_if(violations.begin(), violations.end(),
                                           [k](const Violation& v) { return v.kind == k; }));
}

ValidationReport validate_family(const GeoGraph& g) {
  ValidationReport rep;
  rep.density_ratio = g.params.density_ratio();
  const auto& nbr = g.adj.nbr;
  for (int u = 0; u < static_cast<int>(nbr.size()); ++u) {
    if (g.adj.degree(u) > g.params.d)
      rep.violations.push_back({Violation::Degree, u, -1, static_cast<double>(g.adj.degree(u))});
    for (int v : nbr[u]) {
      if (v == u) {
        rep.violations.push_back({Violation::SelfLoop, u, u, 0.0});
        continue;
      }
      if (!std::binary_search(nbr[v].begin(), nbr[v].end(), u))
        rep.violations.push_back({Violation::Asymmetric, u, v, 0.0});
      if (u < v) {
        const double len = torus_distance(g.points[u], g.points[v], g.torus);
        if (len > g.params.beta) rep.violations.push_back({Violation::Length, u, v, len});
      }
    }
  }
  const double dt = g.params.d * g.params.theta;
  if (!(dt < 0.5)) rep.violations.push_back({Violation::Coupling, -1, -1, dt});
  return rep;
}

}  // namespace ggms
