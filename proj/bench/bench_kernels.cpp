// Wall-clock comparison of the parallel kernels against their serial references.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "CLI11.hpp"
#include "ggms/selector.hpp"

using namespace ggms;

namespace {

template <class F>
double best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int k = 0; k < reps; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel benchmark: find_copies and pooled_scm"};
  int M = 600, copies = 2000, n = 50, reps = 3;
  double occupancy = 0.05;
  std::uint64_t seed = 1;
  app.add_option("--lattice", M, "lattice period")->capture_default_str();
  app.add_option("--occupancy", occupancy, "fraction of occupied nodes")->capture_default_str();
  app.add_option("--copies", copies, "occurrences pooled")->capture_default_str();
  app.add_option("--n", n, "snapshots")->capture_default_str();
  app.add_option("--reps", reps, "repetitions (best is reported)")->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  std::printf("threads %d\n", omp_get_max_threads());

  // Random occupancy with a 3-node L-shaped pattern stamped on a grid.
  std::vector<char> occ(static_cast<size_t>(M) * M, 0);
  std::bernoulli_distribution coin(occupancy);
  for (auto& c : occ) c = coin(rng);
  const Pattern pat{{0, 0}, {1, 0}, {0, 2}};
  for (int i = 0; i + 4 < M; i += 12)
    for (int j = 0; j + 4 < M; j += 12) {
      for (int a = -1; a <= 2; ++a)
        for (int b = -1; b <= 3; ++b) occ[static_cast<size_t>((i + a + M) % M) * M + (j + b + M) % M] = 0;
      for (auto [a, b] : pat) occ[static_cast<size_t>(i + a) * M + j + b] = 1;
    }
  std::vector<std::int64_t> nodes;
  for (size_t k = 0; k < occ.size(); ++k)
    if (occ[k]) nodes.push_back(static_cast<std::int64_t>(k));
  const Lattice lat = make_lattice(M, 0.1, nodes);

  CopySet par, ser;
  const double t_par = best_ms(reps, [&] { par = find_copies(lat, pat, 0, 0); });
  const double t_ser = best_ms(reps, [&] { ser = find_copies_serial(lat, pat, 0, 0); });
  bool same = par.matches.size() == ser.matches.size();
  for (size_t k = 0; same && k < par.matches.size(); ++k) same = par.matches[k].vertices == ser.matches[k].vertices;
  std::printf("find_copies   L=%d vertices=%zu matches=%zu  parallel %.2f ms  serial %.2f ms  speedup %.2fx  %s\n",
              M, lat.vertex_count(), par.matches.size(), t_par, t_ser, t_ser / t_par, same ? "equal" : "MISMATCH");

  // Pooled SCM over `copies` disjoint 12-vertex occurrences.
  const int m = 12, p = copies * m;
  SampleMatrix X;
  X.n = n;
  X.p = p;
  X.data = Mat::Zero(n, p);
  std::normal_distribution<double> z;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X.data(i, j) = z(rng);
  CopySet cs;
  for (int q = 0; q < copies; ++q) {
    Occurrence o;
    for (int a = 0; a < m; ++a) o.vertices.push_back(q * m + a);
    cs.matches.push_back(std::move(o));
    cs.separated.push_back(q);
  }
  Mat Sp, Ss;
  const double s_par = best_ms(reps, [&] { Sp = pooled_scm(X, cs); });
  const double s_ser = best_ms(reps, [&] { Ss = pooled_scm_serial(X, cs); });
  std::printf("pooled_scm    copies=%d n=%d  parallel %.2f ms  serial %.2f ms  speedup %.2fx  %s\n", copies, n, s_par,
              s_ser, s_ser / s_par, Sp == Ss ? "bit-equal" : "MISMATCH");
  return same && Sp == Ss ? 0 : 1;
}
