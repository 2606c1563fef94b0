#include "ggms/gmrf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <random>

namespace ggms {

struct PrecisionModel::Cache {
  Eigen::SimplicialLLT<SpMat> llt;
  std::once_flag cov_once;
  Mat cov;
};

namespace {

constexpr int kDenseCovarianceMax = 4000;

void require_square_same(const Mat& A, const Mat& B, const char* what) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

std::vector<int> complement_in(const std::vector<int>& F, const std::vector<int>& H) {
  std::vector<char> inH;
  int mx = -1;
  for (int v : H) mx = std::max(mx, v);
  for (int v : F) mx = std::max(mx, v);
  inH.assign(static_cast<size_t>(mx + 1), 0);
  for (int v : H) inH[v] = 1;
  std::vector<int> R;
  for (int v : F)
    if (!inH[v]) R.push_back(v);
  return R;
}

Mat gather(const Mat& A, const std::vector<int>& rows, const std::vector<int>& cols) {
  Mat out(rows.size(), cols.size());
  for (size_t a = 0; a < rows.size(); ++a)
    for (size_t b = 0; b < cols.size(); ++b) out(a, b) = A(rows[a], cols[b]);
  return out;
}

// A - B C^{-1} B^T with C SPD.
Mat schur(const Mat& A, const Mat& B, const Mat& C) {
  if (C.rows() == 0) return A;
  Eigen::LLT<Mat> llt(C);
  if (llt.info() != Eigen::Success) throw std::runtime_error("schur complement: singular block");
  Mat S = A - B * llt.solve(B.transpose());
  return 0.5 * (S + S.transpose());
}

}  // namespace

PrecisionModel assemble_precision(const Adjacency& E, double theta, int d) {
  if (!(theta >= 0.0) || d < 1) throw std::invalid_argument("assemble_precision: theta >= 0, d >= 1");
  if (d * theta >= 0.5) throw CouplingTooLarge("d*theta must be < 1/2");
  const int p = static_cast<int>(E.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(p + 2 * E.edge_count());
  for (int u = 0; u < p; ++u) {
    if (E.degree(u) > d) throw std::invalid_argument("assemble_precision: degree exceeds d");
    trip.emplace_back(u, u, 1.0);
    for (int v : E.nbr[u]) {
      if (v == u) throw std::invalid_argument("assemble_precision: self-loop");
      if (v < 0 || v >= p || !E.has(v, u)) throw std::invalid_argument("assemble_precision: asymmetric adjacency");
      if (theta != 0.0) trip.emplace_back(u, v, theta);
    }
  }
  PrecisionModel m;
  m.p = p;
  m.d = d;
  m.theta = theta;
  m.E = E;
  m.J.resize(p, p);
  m.J.setFromTriplets(trip.begin(), trip.end());
  m.J.makeCompressed();
  m.cache_ = std::make_shared<PrecisionModel::Cache>();
  m.cache_->llt.compute(m.J);
  if (m.cache_->llt.info() != Eigen::Success) throw NotPositiveDefinite("Cholesky factorisation of J failed");
  return m;
}

const Mat& PrecisionModel::covariance() const {
  if (p > kDenseCovarianceMax) throw std::length_error("dense covariance limited to p <= 4000");
  std::call_once(cache_->cov_once, [this] {
    Mat I = Mat::Identity(p, p);
    Mat C = cache_->llt.solve(I);
    cache_->cov = 0.5 * (C + C.transpose());
  });
  return cache_->cov;
}

Mat PrecisionModel::covariance_block(const std::vector<int>& idx) const {
  Mat B = Mat::Zero(p, static_cast<Eigen::Index>(idx.size()));
  for (size_t a = 0; a < idx.size(); ++a) B(idx[a], static_cast<Eigen::Index>(a)) = 1.0;
  Mat X = cache_->llt.solve(B);
  Mat out(idx.size(), idx.size());
  for (size_t a = 0; a < idx.size(); ++a)
    for (size_t b = 0; b < idx.size(); ++b) out(a, b) = X(idx[a], static_cast<Eigen::Index>(b));
  return 0.5 * (out + out.transpose());
}

Mat PrecisionModel::J_block(const std::vector<int>& rows, const std::vector<int>& cols) const {
  std::vector<int> pos(p, -1);
  for (size_t b = 0; b < cols.size(); ++b) pos[cols[b]] = static_cast<int>(b);
  Mat out = Mat::Zero(rows.size(), cols.size());
  for (size_t a = 0; a < rows.size(); ++a)
    for (SpMat::InnerIterator it(J, rows[a]); it; ++it)
      if (pos[it.row()] >= 0) out(static_cast<Eigen::Index>(a), pos[it.row()]) = it.value();
  return out;
}

Vec PrecisionModel::color(const Vec& z) const {
  // J = P^T U^T U P, so x = P^T U^{-1} z has covariance J^{-1}.
  const auto& llt = cache_->llt;
  Vec y = llt.matrixU().solve(z);
  return llt.permutationPinv() * y;
}

SampleMatrix sample(const PrecisionModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n >= 1");
  SampleMatrix out;
  out.n = n;
  out.p = model.p;
  out.seed = seed;
  out.data.resize(n, model.p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  Vec z(model.p);
  for (int i = 0; i < n; ++i) {
    for (int v = 0; v < model.p; ++v) z(v) = N(rng);
    out.data.row(i) = model.color(z).transpose();
  }
  return out;
}

Mat sample_covariance(const SampleMatrix& X, const std::vector<int>& idx) {
  Mat sub(X.n, static_cast<Eigen::Index>(idx.size()));
  for (size_t a = 0; a < idx.size(); ++a) sub.col(static_cast<Eigen::Index>(a)) = X.data.col(idx[a]);
  return (sub.transpose() * sub) / static_cast<double>(X.n);
}

Mat schur_conditional_precision(const Mat& J, const std::vector<int>& F) {
  std::vector<int> all(J.rows());
  for (int i = 0; i < J.rows(); ++i) all[i] = i;
  auto V = complement_in(all, F);
  return schur(gather(J, F, F), gather(J, F, V), gather(J, V, V));
}

Mat local_precision_estimate(const Mat& Theta_F, const std::vector<int>& H_pos) {
  std::vector<int> all(Theta_F.rows());
  for (int i = 0; i < Theta_F.rows(); ++i) all[i] = i;
  auto R = complement_in(all, H_pos);
  if (R.size() + H_pos.size() != all.size()) throw std::invalid_argument("local_precision_estimate: H must be a subset of F");
  return schur(gather(Theta_F, H_pos, H_pos), gather(Theta_F, H_pos, R), gather(Theta_F, R, R));
}

Mat truncated_local_precision(const PrecisionModel& model, const BlockIndex& block) {
  auto R = complement_in(block.F, block.H);
  return schur(model.J_block(block.H, block.H), model.J_block(block.H, R), model.J_block(R, R));
}

double log_det_spd(const Mat& A) {
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("log_det_spd: matrix not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double hellinger(const Mat& Theta1, const Mat& Theta2) {
  require_square_same(Theta1, Theta2, "hellinger");
  const double l1 = log_det_spd(Theta1), l2 = log_det_spd(Theta2);
  const double lm = log_det_spd(0.5 * (Theta1 + Theta2));
  const double h2 = -std::expm1(0.25 * (l1 + l2) - 0.5 * lm);
  return std::sqrt(std::clamp(h2, 0.0, 1.0));
}

double sym_kl(const Mat& J1, const Mat& J2) {
  require_square_same(J1, J2, "sym_kl");
  const Mat I = Mat::Identity(J1.rows(), J1.cols());
  Eigen::LLT<Mat> c1(J1), c2(J2);
  if (c1.info() != Eigen::Success || c2.info() != Eigen::Success)
    throw NotPositiveDefinite("sym_kl: precision not positive definite");
  const Mat A = J1 - J2;
  const Mat B = c2.solve(I) - c1.solve(I);
  return 0.5 * A.cwiseProduct(B.transpose()).sum();
}

int graph_distance(const Adjacency& E, const std::vector<int>& A, const std::vector<char>& in_B) {
  std::vector<int> dist(E.size(), -1);
  std::queue<int> q;
  for (int v : A) {
    if (in_B[v]) return 0;
    if (dist[v] < 0) {
      dist[v] = 0;
      q.push(v);
    }
  }
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int w : E.nbr[u]) {
      if (dist[w] >= 0) continue;
      dist[w] = dist[u] + 1;
      if (in_B[w]) return dist[w];
      q.push(w);
    }
  }
  return kUnreachable;
}

CdpResult cdp_check(const PrecisionModel& model, const BlockIndex& block, int zeta) {
  if (zeta < 0) throw std::invalid_argument("cdp_check: zeta >= 0");
  std::vector<char> inF(model.p, 0), inV(model.p, 1);
  for (int v : block.F) inF[v] = 1, inV[v] = 0;
  for (int v : block.H)
    if (!inF[v]) throw std::invalid_argument("cdp_check: H must be a subset of F");
  CdpResult res;
  res.hops = graph_distance(model.E, block.H, inV);
  if (res.hops != kUnreachable && res.hops < zeta + 2)
    throw std::invalid_argument("cdp_check: graph distance " + std::to_string(res.hops) +
                                " is below zeta + 2 = " + std::to_string(zeta + 2));
  res.rhs = std::pow(model.theta * model.d, zeta + 2);
  auto R = complement_in(block.F, block.H);
  std::vector<int> V;
  for (int v = 0; v < model.p; ++v)
    if (inV[v]) V.push_back(v);
  if (R.empty() || V.empty() || res.hops == kUnreachable) return res;
  Mat JR = model.J_block(R, R);
  Eigen::LLT<Mat> llt(JR);
  Mat M = model.J_block(block.H, R) * llt.solve(model.J_block(R, V));
  res.lhs = Eigen::BDCSVD<Mat>(M).singularValues()(0);
  return res;
}

namespace {

std::vector<Point> local_chart(const std::vector<int>& ids, const std::vector<Point>& pts, const Torus& t) {
  std::vector<Point> out;
  const Point ref = pts[ids.front()];
  for (int v : ids) {
    Point dlt = torus_delta(ref, pts[v], t);
    out.push_back({dlt.x, dlt.y});
  }
  return out;
}

}  // namespace

GammaEstimate stationarity_gamma(const PrecisionModel& model, const std::vector<Point>& pts, const Torus& t,
                                 const std::vector<AlignedPair>& pairs, int angle_grid) {
  if (pairs.empty()) throw std::invalid_argument("stationarity_gamma: no candidate pairs");
  GammaEstimate est;
  for (const auto& [F, H] : pairs) {
    if (F.size() != H.size() || F.empty()) throw std::invalid_argument("stationarity_gamma: pair size mismatch");
    const double rho = similarity(local_chart(F, pts, t), local_chart(H, pts, t), angle_grid);
    if (rho < 1e-12) {
      ++est.pairs_skipped;
      est.exact_copies = true;
      continue;
    }
    const double h = hellinger(model.covariance_block(F), model.covariance_block(H));
    est.gamma = std::max(est.gamma, h / rho);
    ++est.pairs_used;
  }
  return est;
}

GammaEstimate stationarity_gamma(const PrecisionModel& model, const GeoGraph& g, int trials, std::uint64_t seed,
                                 int angle_grid) {
  std::map<int, std::vector<int>> by_template;
  for (size_t k = 0; k < g.plants.size(); ++k) by_template[g.plants[k].template_id].push_back(static_cast<int>(k));
  std::vector<std::pair<int, int>> all;
  for (const auto& [tid, ks] : by_template)
    for (size_t a = 0; a < ks.size(); ++a)
      for (size_t b = a + 1; b < ks.size(); ++b) all.emplace_back(ks[a], ks[b]);
  if (all.empty()) throw std::invalid_argument("stationarity_gamma: need two planted copies of one pattern");
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  if (trials > 0 && static_cast<size_t>(trials) < all.size()) all.resize(trials);
  std::vector<AlignedPair> pairs;
  for (auto [a, b] : all) pairs.emplace_back(g.plants[a].vertices, g.plants[b].vertices);
  return stationarity_gamma(model, g.points, g.torus, pairs, angle_grid);
}

}  // namespace ggms
