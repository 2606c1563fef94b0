#pragma once
// Planar and toroidal point-set primitives.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ggms {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Torus {
  double s = 1.0;
};

// Minimum-image displacement b - a on the torus.
Point torus_delta(const Point& a, const Point& b, const Torus& t);
double torus_distance(const Point& a, const Point& b, const Torus& t);
double torus_distance2(const Point& a, const Point& b, const Torus& t);

// Bottleneck assignment: min over permutations of max_i |F_i - H_pi(i)|.
double matching_distance(const std::vector<Point>& F, const std::vector<Point>& H);

// Upper bound on the rigid-motion similarity: centroid alignment plus a
// search over rotation angles. The angle set is the first `angle_grid`
// terms of the base-2 van der Corput sequence (scaled by 2*pi), so grids
// are nested, plus every angle that aligns a centred point of H with a
// centred point of F. No reflections.
double similarity(const std::vector<Point>& F, const std::vector<Point>& H, int angle_grid);

// k-th rotation angle of the nested grid.
double grid_angle(std::uint32_t k);

// Counterclockwise hull without collinear vertices. Collinear input gives
// its two extreme points; a single distinct point gives itself.
std::vector<Point> convex_hull(std::vector<Point> pts);

// Inside or within `tol` of the hull boundary.
bool in_hull(const Point& q, const std::vector<Point>& hull, double tol);

struct NonLocalSubset : std::domain_error {
  using std::domain_error::domain_error;
};

// F = G ∩ conv(F), evaluated in a chart centred at the centroid of F.
// Throws NonLocalSubset if F spans more than s/2 in either axis.
bool is_contiguous(const std::vector<int>& F, const std::vector<Point>& pts, const Torus& t);

inline double hull_tolerance(const Torus& t) { return 1e-9 * t.s; }

struct CollisionError : std::runtime_error {
  int a, b;
  std::int64_t node;
  CollisionError(int a_, int b_, std::int64_t node_)
      : std::runtime_error("vertices " + std::to_string(a_) + " and " + std::to_string(b_) +
                           " share lattice node " + std::to_string(node_)),
        a(a_), b(b_), node(node_) {}
};

// Epsilon-lattice over the torus. L = s/eps + 1 nodes per side as stated;
// node L-1 coincides with node 0 on the torus, so indices wrap with period M = L - 1.
struct Lattice {
  double eps = 0.0;
  double s = 0.0;
  int L = 0;
  int M = 0;
  std::vector<int> vertex_of_node;  // M*M, -1 if empty; node index = i*M + j
  std::vector<std::int64_t> node_of_vertex;
  std::vector<double> displacement;

  int wrap(int i) const {
    int r = i % M;
    return r < 0 ? r + M : r;
  }
  std::int64_t node(int i, int j) const {
    return static_cast<std::int64_t>(wrap(i)) * M + wrap(j);
  }
  int at(int i, int j) const { return vertex_of_node[static_cast<size_t>(node(i, j))]; }
  bool occupied(int i, int j) const { return at(i, j) >= 0; }
  int node_i(int v) const { return static_cast<int>(node_of_vertex[v] / M); }
  int node_j(int v) const { return static_cast<int>(node_of_vertex[v] % M); }
  size_t vertex_count() const { return node_of_vertex.size(); }
};

// Largest eps' <= eps that divides s.
double snap_eps(double s, double eps);

// Nearest-node rounding; exact half-integers round down. Requires s to be a
// multiple of eps (relative tolerance 1e-9). Throws CollisionError.
Lattice quantize(const std::vector<Point>& pts, const Torus& t, double eps);

// Bare occupancy lattice of period M (used by counting experiments).
Lattice make_lattice(int M, double eps, const std::vector<std::int64_t>& occupied_nodes);

}  // namespace ggms
