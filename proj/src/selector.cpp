#include "ggms/selector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

namespace ggms {

SelectorParams default_params(int p, double theta) {
  if (p < 16) throw std::invalid_argument("default_params: p >= 16");
  const double lp = std::log(static_cast<double>(p));
  SelectorParams sp;
  sp.r = std::max(2, static_cast<int>(std::ceil(std::log(lp))));
  sp.eps = 1.0 / lp;
  sp.w = sp.eps * lp * lp;
  sp.theta = theta;
  sp.detect_threshold = theta / 2;
  return sp;
}

void check_params(const SelectorParams& sp) {
  if (sp.r < 2) throw std::invalid_argument("selector: r >= 2");
  if (!(sp.eps > 0)) throw std::invalid_argument("selector: eps > 0");
  if (!(sp.w >= sp.eps)) throw std::invalid_argument("selector: w >= eps");
  if (!(sp.detect_threshold > 0 && sp.detect_threshold < sp.theta))
    throw std::invalid_argument("selector: 0 < detect_threshold < theta");
}

Template choose_template(const TemplateQuery& q) {
  const Lattice& lat = *q.lattice;
  const auto& detected = *q.detected;
  const int p = static_cast<int>(lat.vertex_count());
  int u = -1;
  for (int v = 0; v < p; ++v)
    if (!detected[v] && (u < 0 || lat.node_of_vertex[v] < lat.node_of_vertex[u])) u = v;
  if (u < 0) throw TemplateNotFound(-1, "choose_template: every vertex is detected");

  const int M = lat.M;
  const int kmax = q.k_cap > 0 ? std::min(q.k_cap, M) : M;
  const int ui = lat.node_i(u), uj = lat.node_j(u);
  std::vector<char> inF(p, 0);
  for (int k = 1; k <= kmax; k = k == kmax ? kmax + 1 : std::min(kmax, k + std::max(1, k / 8))) {
    Template t;
    t.k = k;
    t.seed_vertex = u;
    t.lo_i = lat.wrap(ui - (k - 1) / 2);
    t.lo_j = lat.wrap(uj - (k - 1) / 2);
    const int h = k / 2, mlo = (k - h) / 2;
    std::vector<std::pair<Offset, int>> cells;
    for (int v = 0; v < p; ++v) {
      const int di = lat.wrap(lat.node_i(v) - t.lo_i), dj = lat.wrap(lat.node_j(v) - t.lo_j);
      if (di < k && dj < k) cells.push_back({{di, dj}, v});
    }
    std::sort(cells.begin(), cells.end());
    int oi = k, oj = k;
    for (auto& [o, v] : cells) oi = std::min(oi, o.first), oj = std::min(oj, o.second);
    std::fill(inF.begin(), inF.end(), 0);
    bool has_u = false;
    for (size_t a = 0; a < cells.size(); ++a) {
      auto [o, v] = cells[a];
      t.F.push_back(v);
      t.pattern.emplace_back(o.first - oi, o.second - oj);
      inF[v] = 1;
      const bool mid = o.first >= mlo && o.first < mlo + h && o.second >= mlo && o.second < mlo + h;
      if (mid) {
        t.H_pos.push_back(static_cast<int>(a));
        has_u |= v == u;
      }
    }
    t.anchor_i = lat.wrap(t.lo_i + oi);
    t.anchor_j = lat.wrap(t.lo_j + oj);

    if (q.candidates) {
      t.closed = true;
      for (int v : t.F)
        for (int w : q.candidates->nbr[v])
          if (!inF[w]) {
            t.closed = false;
            break;
          }
      if (t.closed) {
        t.H_pos.resize(t.F.size());
        for (size_t a = 0; a < t.F.size(); ++a) t.H_pos[a] = static_cast<int>(a);
        t.zeta = kUnreachable;
        return t;
      }
    }
    if (static_cast<int>(t.F.size()) < q.r || !has_u) continue;
    if (mlo < q.margin_nodes) continue;
    std::vector<char> inH(p, 0);
    std::vector<int> H;
    for (int a : t.H_pos) inH[t.F[a]] = 1, H.push_back(t.F[a]);
    if (q.open_partners) {
      bool all = true;
      for (int w : (*q.open_partners)[u]) all &= inH[w] != 0;
      if (!all) continue;
    }
    if (q.truth && q.min_zeta >= 0) {
      std::vector<char> outside(p);
      for (int v = 0; v < p; ++v) outside[v] = !inF[v];
      const int hops = graph_distance(*q.truth, H, outside);
      if (hops != kUnreachable && hops - 2 < q.min_zeta) continue;
      t.zeta = hops == kUnreachable ? kUnreachable : hops - 2;
    }
    return t;
  }
  throw TemplateNotFound(u, "choose_template: no qualifying square within the size cap");
}

Detection detect_edges(const Mat& S, const std::vector<int>& H_pos, double threshold) {
  const int m = static_cast<int>(S.rows());
  std::vector<char> inH(m, 0);
  for (int a : H_pos) inH.at(a) = 1;
  std::vector<int> R;
  for (int a = 0; a < m; ++a)
    if (!inH[a]) R.push_back(a);
  auto well_posed = [](const Eigen::LLT<Mat>& llt) {
    if (llt.info() != Eigen::Success) return false;
    const Vec dg = llt.matrixLLT().diagonal();
    return dg.minCoeff() > 0 && dg.minCoeff() * dg.minCoeff() >= 1e-12 * dg.maxCoeff() * dg.maxCoeff();
  };
  const int h = static_cast<int>(H_pos.size());
  Mat SH(h, h), B(h, R.size()), SR(R.size(), R.size());
  for (int a = 0; a < h; ++a) {
    for (int b = 0; b < h; ++b) SH(a, b) = S(H_pos[a], H_pos[b]);
    for (size_t b = 0; b < R.size(); ++b) B(a, b) = S(H_pos[a], R[b]);
  }
  for (size_t a = 0; a < R.size(); ++a)
    for (size_t b = 0; b < R.size(); ++b) SR(a, b) = S(R[a], R[b]);
  Mat Mh = SH;
  if (!R.empty()) {
    Eigen::LLT<Mat> lr(SR);
    if (!well_posed(lr)) throw DetectionSkipped("detect_edges: S over F \\ H is singular");
    Mh -= B * lr.solve(B.transpose());
    Mh = 0.5 * (Mh + Mh.transpose());
  }
  Eigen::LLT<Mat> lm(Mh);
  if (!well_posed(lm)) throw DetectionSkipped("detect_edges: local Schur complement is singular");
  Detection det;
  det.J_hat = lm.solve(Mat::Identity(h, h));
  det.J_hat = 0.5 * (det.J_hat + det.J_hat.transpose());
  det.margin = det.J_hat.cwiseAbs().array() - threshold;
  det.edge.assign(h, std::vector<char>(h, 0));
  for (int a = 0; a < h; ++a)
    for (int b = 0; b < h; ++b) det.edge[a][b] = a != b && std::abs(det.J_hat(a, b)) >= threshold;
  return det;
}

Loss zero_one_loss(const Adjacency& E_hat, const Adjacency& E) {
  if (E_hat.size() != E.size()) throw std::invalid_argument("zero_one_loss: dimension mismatch");
  Loss l;
  for (auto [u, v] : E.edges()) l.missed += !E_hat.has(u, v);
  for (auto [u, v] : E_hat.edges()) l.false_edges += !E.has(u, v);
  l.loss = (l.missed + l.false_edges) > 0;
  return l;
}

namespace {

using CovarianceSource = std::function<Mat(const CopySet&)>;

Lattice quantize_halving(const GeoGraph& g, double eps) {
  double e = snap_eps(g.torus.s, eps);
  for (int attempt = 0; attempt < 40; ++attempt) {
    try {
      return quantize(g.points, g.torus, e);
    } catch (const CollisionError&) {
      e /= 2;
    }
  }
  throw std::runtime_error("la_messagge: could not find a collision-free lattice");
}

SelectionReport run(const GeoGraph& g, const SelectorParams& sp, int n, const CovarianceSource& source,
                    bool oracle) {
  const auto t0 = std::chrono::steady_clock::now();
  check_params(sp);
  const int p = static_cast<int>(g.points.size());
  const double beta = sp.pair_radius > 0 ? sp.pair_radius : g.params.beta;
  const Adjacency cand = candidate_pairs(g.points, beta, g.torus);
  const Lattice lat = quantize_halving(g, sp.eps);

  SelectionReport rep;
  rep.p = p;
  rep.n = n;
  rep.r = sp.r;
  rep.eps = lat.eps;
  rep.w = sp.w;
  rep.theta = sp.theta;

  // Per-vertex decisions aligned with cand.nbr.
  std::vector<std::vector<EdgeDecision>> dec(p);
  std::vector<std::vector<int>> open(p);
  std::vector<char> done(p, 0), gave_up(p, 0), blocked(p, 0);
  for (int v = 0; v < p; ++v) {
    dec[v].resize(cand.nbr[v].size());
    open[v] = cand.nbr[v];
    done[v] = open[v].empty();
    blocked[v] = done[v];
  }
  auto slot = [&](int u, int v) -> EdgeDecision& {
    auto it = std::lower_bound(cand.nbr[u].begin(), cand.nbr[u].end(), v);
    return dec[u][it - cand.nbr[u].begin()];
  };

  int k_cap = 0;
  if (sp.cap_k) {
    const double cap = (1.0 / lat.eps) * std::sqrt(sp.r / sp.eta) * std::log(static_cast<double>(sp.r));
    k_cap = std::max(1, static_cast<int>(std::floor(cap)));
  }

  for (int round = 0;; ++round) {
    TemplateQuery q;
    q.lattice = &lat;
    q.detected = &blocked;
    q.r = sp.r;
    q.candidates = &cand;
    q.open_partners = &open;
    q.truth = oracle && sp.min_zeta >= 0 ? &g.adj : nullptr;
    q.min_zeta = sp.min_zeta;
    q.margin_nodes = static_cast<int>(std::ceil(sp.margin / lat.eps - 1e-9));
    q.k_cap = k_cap;
    Template t;
    try {
      t = choose_template(q);
    } catch (const TemplateNotFound& e) {
      if (e.vertex < 0) break;
      gave_up[e.vertex] = blocked[e.vertex] = 1;
      continue;
    }
    RoundInfo info;
    info.seed_vertex = t.seed_vertex;
    info.k = t.k;
    info.F_size = static_cast<int>(t.F.size());
    info.H_size = static_cast<int>(t.H_pos.size());
    info.closed = t.closed;
    info.zeta = t.zeta;

    CopySet cs;
    int span = 0;
    for (auto [a, b] : t.pattern) span = std::max({span, a, b});
    if (2 * span <= lat.M) {
      cs = find_copies(lat, t.pattern, t.anchor_i, t.anchor_j);
    } else {
      cs.pattern = t.pattern;
      cs.matches.push_back({t.anchor_i, t.anchor_j, 0, t.F});
      cs.raw_placements = 1;
    }
    if (cs.matches.empty() || cs.matches[0].vertices != t.F)
      throw std::logic_error("la_messagge: template occurrence missing from its own copy set");
    greedy_separated(cs, lat, sp.w);
    info.copies_found = static_cast<int>(cs.matches.size());
    info.copies_used = static_cast<int>(cs.separated.size());
    info.low_confidence = !oracle && cs.separated.size() == 1;
    rep.copies_found += info.copies_found;
    rep.copies_used += info.copies_used;
    rep.low_confidence_rounds += info.low_confidence;

    Detection det;
    try {
      det = detect_edges(source(cs), t.H_pos, sp.detect_threshold);
    } catch (const DetectionSkipped&) {
      info.skipped = true;
      rep.rounds.push_back(info);
      gave_up[t.seed_vertex] = blocked[t.seed_vertex] = 1;
      continue;
    }

    const int h = static_cast<int>(t.H_pos.size());
    std::vector<int> touched;
    for (size_t c = 0; c < cs.matches.size(); ++c) {
      const auto& vs = cs.matches[c].vertices;
      for (int a = 0; a < h; ++a)
        for (int b = a + 1; b < h; ++b) {
          const int x = vs[t.H_pos[a]], y = vs[t.H_pos[b]];
          if (!cand.has(x, y)) continue;
          const double mg = std::abs(det.margin(a, b));
          EdgeDecision& dx = slot(x, y);
          if (dx.decided && mg <= dx.margin) continue;
          EdgeDecision nd{true, det.edge[a][b] != 0, mg, round, static_cast<int>(c)};
          if (!dx.decided) {
            open[x].erase(std::find(open[x].begin(), open[x].end(), y));
            open[y].erase(std::find(open[y].begin(), open[y].end(), x));
            touched.push_back(x);
            touched.push_back(y);
          }
          dx = nd;
          slot(y, x) = nd;
        }
    }
    for (int v : touched)
      if (open[v].empty()) done[v] = blocked[v] = 1;
    if (!done[t.seed_vertex]) gave_up[t.seed_vertex] = blocked[t.seed_vertex] = 1;
    rep.rounds.push_back(info);
  }

  rep.E_hat = Adjacency(p);
  for (int u = 0; u < p; ++u)
    for (size_t a = 0; a < cand.nbr[u].size(); ++a) {
      const int v = cand.nbr[u][a];
      if (u < v && dec[u][a].decided && dec[u][a].edge) {
        rep.E_hat.add(u, v);
        rep.edges.emplace_back(u, v);
        rep.edge_info.push_back(dec[u][a]);
      }
    }
  for (int v = 0; v < p; ++v)
    if (!done[v]) rep.undecided_vertices.push_back(v);
  const Loss l = zero_one_loss(rep.E_hat, g.adj);
  rep.zero_one_loss = l.loss;
  rep.missed_edges = l.missed;
  rep.false_edges = l.false_edges;
  rep.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace

SelectionReport la_messagge(const GeoGraph& g, const SampleMatrix& X, const SelectorParams& sp) {
  if (X.p != static_cast<int>(g.points.size())) throw std::invalid_argument("la_messagge: sample width != p");
  return run(g, sp, X.n, [&](const CopySet& cs) { return pooled_scm(X, cs); }, false);
}

SelectionReport la_messagge_oracle(const GeoGraph& g, const PrecisionModel& model, const SelectorParams& sp) {
  if (model.p != static_cast<int>(g.points.size())) throw std::invalid_argument("la_messagge: model size != p");
  auto exact = [&](const CopySet& cs) {
    Mat S;
    for (size_t k = 0; k < cs.separated.size(); ++k) {
      Mat part = model.covariance_block(cs.matches[cs.separated[k]].vertices);
      if (k == 0)
        S = part;
      else
        S += part;
    }
    return Mat(S / static_cast<double>(cs.separated.size()));
  };
  return run(g, sp, 0, exact, true);
}

}  // namespace ggms
