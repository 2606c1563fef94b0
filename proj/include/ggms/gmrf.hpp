#pragma once
// Gaussian layer: J = I + theta*E, sampling, Schur complements, divergences.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <climits>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "ggms/graphgen.hpp"

namespace ggms {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct CouplingTooLarge : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class PrecisionModel {
 public:
  int p = 0;
  int d = 0;
  double theta = 0.0;
  Adjacency E;
  SpMat J;

  // Dense covariance, computed once (p <= 4000).
  const Mat& covariance() const;
  // Theta restricted to idx x idx via sparse solves.
  Mat covariance_block(const std::vector<int>& idx) const;
  Mat dense_J() const { return Mat(J); }
  Mat J_block(const std::vector<int>& rows, const std::vector<int>& cols) const;
  // x = A z with A A^T = J^{-1}.
  Vec color(const Vec& z) const;

 private:
  struct Cache;
  std::shared_ptr<Cache> cache_;
  friend PrecisionModel assemble_precision(const Adjacency&, double, int);
};

// Throws CouplingTooLarge if d*theta >= 1/2, std::invalid_argument on a
// malformed adjacency, NotPositiveDefinite if the factorisation fails.
PrecisionModel assemble_precision(const Adjacency& E, double theta, int d);

struct SampleMatrix {
  int n = 0;
  int p = 0;
  std::uint64_t seed = 0;
  Mat data;  // n x p, row per snapshot
};

SampleMatrix sample(const PrecisionModel& model, int n, std::uint64_t seed);

// (1/n) X_idx^T X_idx, zero-mean convention.
Mat sample_covariance(const SampleMatrix& X, const std::vector<int>& idx);

struct BlockIndex {
  std::vector<int> H;
  std::vector<int> F;  // H ⊆ F
};

// J_F - J_{F,V} J_V^{-1} J_{F,V}^T with V the complement of F.
Mat schur_conditional_precision(const Mat& J, const std::vector<int>& F);

// Theta_H - Theta_{H,R} Theta_R^{-1} Theta_{H,R}^T, R = F \ H. `H_pos` indexes
// rows of Theta_F. Empty R returns Theta_H.
Mat local_precision_estimate(const Mat& Theta_F, const std::vector<int>& H_pos);

// J_H - J_{H,R} J_R^{-1} J_{H,R}^T, R = F \ H (global vertex ids).
Mat truncated_local_precision(const PrecisionModel& model, const BlockIndex& block);

double log_det_spd(const Mat& A);
double hellinger(const Mat& Theta1, const Mat& Theta2);
double sym_kl(const Mat& J1, const Mat& J2);

inline constexpr int kUnreachable = INT_MAX;

// Hop distance from A to the nearest vertex with in_B set.
int graph_distance(const Adjacency& E, const std::vector<int>& A, const std::vector<char>& in_B);

struct CdpResult {
  double lhs = 0.0;
  double rhs = 0.0;
  int hops = kUnreachable;
};

// zeta is the buffer depth: every path from H to G \ F must have at least
// zeta + 2 edges. Throws std::invalid_argument otherwise.
CdpResult cdp_check(const PrecisionModel& model, const BlockIndex& block, int zeta);

struct GammaEstimate {
  double gamma = 0.0;
  int pairs_used = 0;
  int pairs_skipped = 0;
  bool exact_copies = false;
};

using AlignedPair = std::pair<std::vector<int>, std::vector<int>>;

GammaEstimate stationarity_gamma(const PrecisionModel& model, const std::vector<Point>& pts,
                                 const Torus& t, const std::vector<AlignedPair>& pairs,
                                 int angle_grid = 256);

// Pairs drawn from planted copies of the same library pattern.
GammaEstimate stationarity_gamma(const PrecisionModel& model, const GeoGraph& g, int trials,
                                 std::uint64_t seed, int angle_grid = 256);

}  // namespace ggms
