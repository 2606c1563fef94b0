#pragma once
// Random geometric graph families on the torus.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ggms/geometry.hpp"

namespace ggms {

struct FamilyParams {
  int p = 100;
  double eta = 1.0;
  int d = 3;
  double beta = 2.0;
  double theta = 0.1;
  std::uint64_t seed = 1;

  double side() const;
  double density_ratio() const { return eta * beta * beta / d; }  // eta*beta^2/d
};

// Throws std::invalid_argument on nonpositive values or eta*beta^2 <= d.
void check_family(const FamilyParams& fp);

struct Adjacency {
  std::vector<std::vector<int>> nbr;  // sorted

  Adjacency() = default;
  explicit Adjacency(size_t p) : nbr(p) {}
  size_t size() const { return nbr.size(); }
  bool has(int u, int v) const;
  void add(int u, int v);
  int degree(int u) const { return static_cast<int>(nbr[u].size()); }
  size_t edge_count() const;
  std::vector<std::pair<int, int>> edges() const;  // u < v, lexicographic
};

using Offset = std::pair<int, int>;
using Pattern = std::vector<Offset>;

// Lattice-offset rotation by k quarter turns, renormalised to touch (0, 0).
Pattern rotate_pattern(const Pattern& pat, int k);

struct Plant {
  int template_id = 0;
  int rotation = 0;
  int anchor_i = 0, anchor_j = 0;  // node of the rotated pattern's (0, 0)
  std::vector<int> vertices;       // vertices[a] sits at library offset a
};

struct PlantSpec {
  int pattern_size = 12;   // vertices per planted patch
  int box_nodes = 27;      // patch offsets lie in [0, box_nodes)^2
  double pitch = 0.05;     // node spacing; snapped so that it divides s
  double moat = 1.85;      // empty clearance around every patch box
  int templates = 1;       // library size
  int copies = -1;         // -1: as many as fit, at most p / pattern_size
  double jitter = 0.0;     // uniform perturbation of planted coordinates
  std::uint64_t library_seed = 1;
};

struct GeoGraph {
  FamilyParams params;
  Torus torus;
  std::vector<Point> points;
  Adjacency adj;
  // Planted-copy mode only.
  double plant_pitch = 0.0;
  std::vector<Pattern> library;
  std::vector<Plant> plants;
};

std::vector<Point> sample_vertices(const FamilyParams& fp);

// Global greedy: candidate pairs within beta sorted by length (ties by
// lexicographic coordinates), accepted while both degrees are below d.
Adjacency build_edges(const std::vector<Point>& pts, int d, double beta, const Torus& t);

// Every pair within toroidal distance beta.
Adjacency candidate_pairs(const std::vector<Point>& pts, double beta, const Torus& t);

GeoGraph generate(const FamilyParams& fp);

// Q isolated copies of library patterns at random cells and rotations,
// plus uniform background vertices outside the patch clearances.
GeoGraph generate_planted(const FamilyParams& fp, const PlantSpec& spec);

std::vector<Pattern> make_library(const PlantSpec& spec, double pitch, double beta);

struct Violation {
  enum Kind { Degree, Length, Coupling, SelfLoop, Asymmetric } kind;
  int u = -1, v = -1;
  double value = 0.0;
  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;
  double density_ratio = 0.0;
  bool ok() const { return violations.empty(); }
  size_t count(Violation::Kind k) const;
};

ValidationReport validate_family(const GeoGraph& g);

}  // namespace ggms
