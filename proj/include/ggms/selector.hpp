#pragma once
// Lattice template search, copy pooling and Schur-complement edge recovery.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggms/geometry.hpp"
#include "ggms/gmrf.hpp"
#include "ggms/graphgen.hpp"

namespace ggms {

struct SelectorParams {
  int r = 2;                      // minimum template size for open templates
  double eps = 0.1;               // lattice pitch (snapped to divide s, halved on collision)
  double w = 1.0;                 // copy separation
  double theta = 0.1;             // known coupling
  double detect_threshold = 0.05;
  double pair_radius = 0.0;       // candidate-pair radius; 0 uses the graph's beta
  double margin = 0.0;            // min distance from the middle square to the edge of K
  int min_zeta = -1;              // oracle runs: BFS buffer depth on the true graph
  bool cap_k = false;             // apply k <= (1/eps) sqrt(r/eta) log r
  double eta = 1.0;
  int angle_grid = 64;
};

// r = max(2, ceil(ln ln p)), eps = 1/ln p, w = eps (ln p)^2, threshold theta/2.
SelectorParams default_params(int p, double theta = 0.1);
void check_params(const SelectorParams& sp);

struct TemplateNotFound : std::runtime_error {
  int vertex;
  TemplateNotFound(int v, const std::string& why) : std::runtime_error(why), vertex(v) {}
};
struct DetectionSkipped : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Template {
  int k = 0;
  int lo_i = 0, lo_j = 0;          // lower corner of K
  int anchor_i = 0, anchor_j = 0;  // node of pattern offset (0, 0)
  Pattern pattern;                 // pattern[a] is the node of F[a]
  std::vector<int> F;
  std::vector<int> H_pos;          // positions in F of the middle-square vertices
  bool closed = false;             // no candidate pair leaves F
  int zeta = -1;                   // hop(H, G \ F) - 2 when measured
  int seed_vertex = -1;
};

struct TemplateQuery {
  const Lattice* lattice = nullptr;
  const std::vector<char>* detected = nullptr;
  int r = 2;
  // Optional refinements; all null gives the plain size rule.
  const Adjacency* candidates = nullptr;                   // closure test
  const std::vector<std::vector<int>>* open_partners = nullptr;  // must sit in the middle square
  const Adjacency* truth = nullptr;                        // oracle buffer depth
  int min_zeta = -1;
  int margin_nodes = 0;
  int k_cap = 0;  // 0: M
};

// Seed u = first undetected vertex in row-major node order; K is the k x k
// square around u, grown until the conditions hold.
Template choose_template(const TemplateQuery& q);

struct Occurrence {
  int anchor_i = 0, anchor_j = 0;
  int rotation = 0;
  std::vector<int> vertices;  // aligned with the template pattern
};

struct CopySet {
  Pattern pattern;
  std::vector<Occurrence> matches;  // matches[0] is the template itself
  std::vector<int> separated;       // indices into matches
  std::int64_t raw_placements = 0;  // (anchor, rotation) hits before dedup
};

// Exact occupancy under 4 rotations plus lattice contiguity; deduplicated by
// vertex set. The occurrence at (anchor_i, anchor_j, 0) is listed first when
// it matches.
CopySet find_copies(const Lattice& lat, const Pattern& pattern, int anchor_i, int anchor_j);
CopySet find_copies_serial(const Lattice& lat, const Pattern& pattern, int anchor_i, int anchor_j);

// Node-coordinate centroid of an occurrence, in torus units.
Point occurrence_centroid(const Lattice& lat, const Occurrence& occ);

// Greedy in input order: keep an item iff its distance to every kept one is >= w.
std::vector<int> greedy_separated(const std::vector<Point>& centroids, const Torus& t, double w);
void greedy_separated(CopySet& copies, const Lattice& lat, double w);

// Mean of the per-occurrence SCMs over copies.separated.
Mat pooled_scm(const SampleMatrix& X, const CopySet& copies);
Mat pooled_scm_serial(const SampleMatrix& X, const CopySet& copies);

struct Detection {
  Mat J_hat;   // over H
  Mat margin;  // |J_hat| - threshold
  std::vector<std::vector<char>> edge;
};

// Inverse of the Schur complement of S onto H; throws DetectionSkipped.
Detection detect_edges(const Mat& S, const std::vector<int>& H_pos, double threshold);

struct EdgeDecision {
  bool decided = false;
  bool edge = false;
  double margin = 0.0;
  int round = -1;
  int occurrence = -1;
};

struct RoundInfo {
  int seed_vertex = -1;
  int k = 0;
  int F_size = 0;
  int H_size = 0;
  bool closed = false;
  int zeta = -1;
  int copies_found = 0;
  int copies_used = 0;
  bool low_confidence = false;
  bool skipped = false;
};

struct SelectionReport {
  int p = 0, n = 0, r = 0;
  double eps = 0.0, w = 0.0, theta = 0.0;
  Adjacency E_hat;
  std::vector<std::pair<int, int>> edges;
  std::vector<EdgeDecision> edge_info;  // aligned with edges
  std::vector<int> undecided_vertices;
  int zero_one_loss = 0;
  int missed_edges = 0;
  int false_edges = 0;
  int copies_found = 0;
  int copies_used = 0;
  int low_confidence_rounds = 0;
  double runtime_ms = 0.0;
  std::vector<RoundInfo> rounds;
};

struct Loss {
  int loss = 0;
  int missed = 0;
  int false_edges = 0;
};

Loss zero_one_loss(const Adjacency& E_hat, const Adjacency& E);

SelectionReport la_messagge(const GeoGraph& g, const SampleMatrix& X, const SelectorParams& sp);
// Exact Theta_F in place of the pooled SCM.
SelectionReport la_messagge_oracle(const GeoGraph& g, const PrecisionModel& model, const SelectorParams& sp);

}  // namespace ggms
