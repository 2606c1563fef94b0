#include <cmath>
#include <random>

#include "doctest.h"
#include "ggms/gmrf.hpp"

using namespace ggms;

namespace {

Adjacency path_graph(int p) {
  Adjacency E(p);
  for (int i = 0; i + 1 < p; ++i) E.add(i, i + 1);
  return E;
}

std::vector<int> range(int a, int b) {
  std::vector<int> out;
  for (int i = a; i < b; ++i) out.push_back(i);
  return out;
}

Mat random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> N(0, 1);
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = N(rng);
  return A * A.transpose() + n * Mat::Identity(n, n);
}

// Closed-form Gaussian KL, independent of the trace identity.
double kl(const Mat& S1, const Mat& S2) {
  const double k = static_cast<double>(S1.rows());
  return 0.5 * ((S2.inverse() * S1).trace() - k + std::log(S2.determinant() / S1.determinant()));
}

}  // namespace

TEST_CASE("assemble_precision") {
  auto m = assemble_precision(path_graph(3), 0.2, 2);
  Mat expect(3, 3);
  expect << 1, 0.2, 0, 0.2, 1, 0.2, 0, 0.2, 1;
  CHECK((m.dense_J() - expect).norm() == 0.0);

  auto zero = assemble_precision(Adjacency(5), 0.3, 1);
  CHECK((zero.dense_J() - Mat::Identity(5, 5)).norm() == 0.0);
  CHECK((zero.covariance() - Mat::Identity(5, 5)).norm() == 0.0);

  // 4-regular torus grid. d*theta = 1/2 is rejected, but the spectral bound
  // still holds at the boundary.
  const int g = 6;
  Adjacency grid(g * g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      grid.add(i * g + j, ((i + 1) % g) * g + j);
      grid.add(i * g + j, i * g + (j + 1) % g);
    }
  CHECK_THROWS_AS(assemble_precision(grid, 0.125, 4), CouplingTooLarge);
  Mat Jb = Mat::Identity(g * g, g * g);
  for (auto [u, v] : grid.edges()) Jb(u, v) = Jb(v, u) = 0.125;
  CHECK(Eigen::SelfAdjointEigenSolver<Mat>(Jb).eigenvalues().minCoeff() >= 0.5 - 1e-12);
  auto m4 = assemble_precision(grid, 0.12, 4);
  Eigen::SelfAdjointEigenSolver<Mat> es(m4.dense_J());
  CHECK(es.eigenvalues().minCoeff() >= 1 - 4 * 0.12 - 1e-12);
  CHECK(m4.covariance().norm() > 0);
  Eigen::SelfAdjointEigenSolver<Mat> ce(m4.covariance());
  CHECK(ce.eigenvalues().maxCoeff() <= 1 / (1 - 4 * 0.12) + 1e-12);
  // theta*E restricted to any block is spectrally below d*theta.
  CHECK(Eigen::SelfAdjointEigenSolver<Mat>(m4.dense_J() - Mat::Identity(g * g, g * g))
            .eigenvalues()
            .cwiseAbs()
            .maxCoeff() <= 4 * 0.12 + 1e-12);

  Adjacency bad(3);
  bad.nbr[0].push_back(1);
  CHECK_THROWS_AS(assemble_precision(bad, 0.1, 2), std::invalid_argument);
  CHECK_THROWS_AS(assemble_precision(grid, 0.2, 3), std::invalid_argument);
}

TEST_CASE("covariance_block matches dense inverse") {
  auto m = assemble_precision(path_graph(30), 0.2, 2);
  Mat C = m.dense_J().inverse();
  std::vector<int> idx{3, 17, 4, 29};
  Mat B = m.covariance_block(idx);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) CHECK(B(a, b) == doctest::Approx(C(idx[a], idx[b])).epsilon(1e-13));
  CHECK((m.covariance() - C).norm() < 1e-13);
}

TEST_CASE("sample") {
  auto id = assemble_precision(Adjacency(2), 0.1, 1);
  const int n = 100000;
  auto X = sample(id, n, 99);
  Mat S = sample_covariance(X, {0, 1});
  // Sample-covariance band with r = 2, delta = 0.05; holds with probability
  // at least 1 - 2 exp(-n delta^2 / (2 r)), i.e. essentially one.
  CHECK((S - Mat::Identity(2, 2)).norm() <= 1.0 * (2 / std::sqrt(double(n)) + 0.05));

  auto one = sample(assemble_precision(path_graph(6), 0.2, 2), 1, 5);
  Mat S1 = sample_covariance(one, range(0, 6));
  Eigen::JacobiSVD<Mat> svd(S1);
  CHECK(svd.singularValues()(1) < 1e-12 * svd.singularValues()(0));

  auto m = assemble_precision(path_graph(50), 0.2, 2);
  auto a = sample(m, 20, 7), b = sample(m, 20, 7);
  CHECK((a.data - b.data).norm() == 0.0);

  // Covariance of the colouring map equals J^{-1}.
  Mat A(50, 50);
  for (int k = 0; k < 50; ++k) A.col(k) = m.color(Vec::Unit(50, k));
  CHECK((A * A.transpose() - m.dense_J().inverse()).norm() < 1e-12);
}

TEST_CASE("schur_conditional_precision") {
  Mat J(2, 2);
  J << 2, 1, 1, 2;
  Mat S = schur_conditional_precision(J, {0});
  CHECK(S(0, 0) == doctest::Approx(1.5));
  CHECK(J.inverse()(0, 0) == doctest::Approx(2.0 / 3.0));

  Mat Bd = Mat::Zero(4, 4);
  Bd.topLeftCorner(2, 2) << 3, 1, 1, 2;
  Bd.bottomRightCorner(2, 2) << 4, -1, -1, 5;
  CHECK((schur_conditional_precision(Bd, {0, 1}) - Bd.topLeftCorner(2, 2)).norm() == 0.0);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Mat A = random_spd(rng, 8);
    std::vector<int> F{trial % 8, (trial + 3) % 8, (trial + 5) % 8};
    Mat C = A.inverse();
    Mat CF(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) CF(a, b) = C(F[a], F[b]);
    Mat ours = schur_conditional_precision(A, F);
    CHECK((ours - CF.inverse()).norm() <= 1e-12 * ours.norm());
    CHECK((ours * CF - Mat::Identity(3, 3)).norm() <= 1e-10);
  }
}

TEST_CASE("local_precision_estimate") {
  auto m = assemble_precision(path_graph(40), 0.2, 2);
  const Mat& C = m.covariance();
  std::vector<int> H = range(18, 22);
  Mat JH = m.J_block(H, H);

  // F = G.
  std::vector<int> Hpos = H;
  Mat full = local_precision_estimate(C, Hpos);
  CHECK((full - JH.inverse()).norm() < 1e-13);

  // H = F.
  Mat TH = m.covariance_block(H);
  CHECK((local_precision_estimate(TH, {0, 1, 2, 3}) - TH).norm() == 0.0);

  // Middle 20. Reference value from an independent numpy evaluation.
  std::vector<int> F = range(10, 30);
  Mat est = local_precision_estimate(m.covariance_block(F), {8, 9, 10, 11});
  CHECK((est - JH.inverse()).norm() < 1e-13);

  // Truncated chain J_H - J_{H,R} J_R^{-1} J_{R,H} against Theta_H^{-1}.
  // Frozen spectral-norm errors from numpy for buffer depths 0, 3, 6.
  const double frozen[] = {0.0017424305044161366, 1.4375305501524105e-07, 1.1882606012967805e-11};
  const int zs[] = {0, 3, 6};
  Mat target = TH.inverse();
  double prev = 1e300;
  for (int z = 0; z <= 7; ++z) {
    BlockIndex blk{H, range(17 - z, 23 + z)};
    double err = Eigen::BDCSVD<Mat>(truncated_local_precision(m, blk) - target).singularValues()(0);
    CHECK(err <= prev);
    prev = err;
    for (int k = 0; k < 3; ++k)
      if (zs[k] == z) CHECK(err == doctest::Approx(frozen[k]).epsilon(1e-6));
  }
  CHECK_THROWS(local_precision_estimate(TH, {0, 7}));
}

TEST_CASE("hellinger") {
  Mat A(2, 2);
  A << 2, 0.3, 0.3, 1;
  CHECK(hellinger(A, A) == 0.0);
  Mat s1(1, 1), s2(1, 1);
  s1 << 1;
  s2 << 2;
  // scipy.integrate.quad of 1 - int sqrt(f g).
  CHECK(hellinger(s1, s2) == doctest::Approx(0.17034217500476248).epsilon(1e-9));
  CHECK_THROWS_AS(hellinger(A, s1), std::invalid_argument);
  Mat neg(1, 1);
  neg << -1;
  CHECK_THROWS_AS(hellinger(s1, neg), NotPositiveDefinite);

  // First-order term for a whitened perturbation of size 1e-3, r = 5.
  std::mt19937_64 rng(23);
  Mat T = random_spd(rng, 5);
  Eigen::SelfAdjointEigenSolver<Mat> es(T);
  Mat half = es.operatorSqrt();
  Mat D = random_spd(rng, 5) - 5 * Mat::Identity(5, 5);
  D *= 1e-3 / D.norm();
  Mat T2 = T + half * D * half;
  CHECK(std::abs(hellinger(T, T2) - D.norm() / 4) <= std::pow(5.0, 1.5) * 1e-6);

  for (int trial = 0; trial < 20; ++trial) {
    Mat P = random_spd(rng, 3), Q = random_spd(rng, 3), R = random_spd(rng, 3);
    CHECK(hellinger(P, Q) == doctest::Approx(hellinger(Q, P)).epsilon(1e-12));
    CHECK(hellinger(P, Q) <= hellinger(P, R) + hellinger(R, Q) + 1e-10);
    CHECK(hellinger(P, Q) <= 1.0);
  }
}

TEST_CASE("sym_kl") {
  Mat A(2, 2);
  A << 2, 0.3, 0.3, 1;
  CHECK(sym_kl(A, A) == 0.0);
  Mat j1(1, 1), j2(1, 1);
  j1 << 1;
  j2 << 0.5;
  CHECK(sym_kl(j1, j2) == doctest::Approx(0.25));
  Mat J1(4, 4), J2(4, 4);
  J1 << 1, .2, 0, .1, .2, 1, .3, 0, 0, .3, 1.5, .1, .1, 0, .1, 1;
  J2 << 1.2, 0, .1, 0, 0, .9, .2, 0, .1, .2, 1, 0, 0, 0, 0, 1.1;
  // Two-direction closed-form KL from numpy.
  CHECK(sym_kl(J1, J2) == doctest::Approx(0.19559072728644855).epsilon(1e-12));
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    Mat P = random_spd(rng, 4), Q = random_spd(rng, 4);
    CHECK(sym_kl(P, Q) == sym_kl(Q, P));
    CHECK(sym_kl(P, Q) > 0);
    CHECK(sym_kl(P, Q) == doctest::Approx(kl(P.inverse(), Q.inverse()) + kl(Q.inverse(), P.inverse())).epsilon(1e-10));
  }
}

TEST_CASE("graph_distance and cdp_check") {
  auto E = path_graph(10);
  std::vector<char> inB(10, 0);
  inB[7] = 1;
  CHECK(graph_distance(E, {2}, inB) == 5);
  CHECK(graph_distance(E, {7}, inB) == 0);
  Adjacency two(6);
  two.add(0, 1);
  two.add(1, 2);
  two.add(3, 4);
  two.add(4, 5);
  std::vector<char> far(6, 0);
  far[5] = 1;
  CHECK(graph_distance(two, {0}, far) == kUnreachable);

  auto sep = assemble_precision(two, 0.2, 2);
  auto r = cdp_check(sep, {{0}, {0, 1, 2}}, 3);
  CHECK(r.lhs == 0.0);

  auto zero = assemble_precision(path_graph(20), 0.0, 2);
  r = cdp_check(zero, {{9, 10}, range(6, 14)}, 2);
  CHECK(r.lhs == 0.0);
  CHECK(r.rhs == 0.0);

  auto m = assemble_precision(path_graph(60), 0.2, 2);
  for (int z : {2, 4, 6, 8}) {
    // Buffer of z + 1 vertices on each side gives hop distance z + 2.
    BlockIndex blk{range(28, 32), range(27 - z, 33 + z)};
    auto res = cdp_check(m, blk, z);
    CHECK(res.hops == z + 2);
    CHECK(res.lhs <= res.rhs);
    CHECK(res.rhs == doctest::Approx(std::pow(0.4, z + 2)));
  }
  CHECK_THROWS_AS(cdp_check(m, {range(28, 32), range(26, 34)}, 2), std::invalid_argument);
}

TEST_CASE("stationarity_gamma") {
  FamilyParams fp{400, 1.0, 3, 1.8, 0.1, 8};
  PlantSpec spec;
  spec.copies = 10;
  auto g = generate_planted(fp, spec);
  auto m = assemble_precision(g.adj, fp.theta, fp.d);
  auto est = stationarity_gamma(m, g, 20, 1);
  CHECK(est.exact_copies);
  CHECK(est.pairs_used == 0);
  CHECK(est.pairs_skipped == 20);
  CHECK(est.gamma == 0.0);

  // Single vertices have unit-free identical 1-D marginals.
  CHECK(hellinger(m.covariance_block({g.plants[0].vertices[0]}), m.covariance_block({g.plants[1].vertices[0]})) <
        1e-15);

  // Jitter moves points but not edges, so the marginals stay equal and the
  // ratio is flat (zero) across scales.
  for (double jit : {1e-3, 3e-3, 1e-2}) {
    spec.jitter = jit;
    auto gj = generate_planted(fp, spec);
    auto mj = assemble_precision(gj.adj, fp.theta, fp.d);
    auto e = stationarity_gamma(mj, gj, 20, 1);
    CHECK(e.pairs_used == 20);
    CHECK(std::isfinite(e.gamma));
    CHECK(e.gamma < 1e-6);
  }
  GeoGraph none = g;
  none.plants.resize(1);
  CHECK_THROWS_AS(stationarity_gamma(m, none, 5, 1), std::invalid_argument);
}
