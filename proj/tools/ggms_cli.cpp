#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ggms/bounds.hpp"
#include "ggms/gmrf.hpp"
#include "ggms/graphgen.hpp"
#include "ggms/harness.hpp"
#include "ggms/io.hpp"
#include "ggms/selector.hpp"

using namespace ggms;

namespace {

const char* kFormats = R"(File formats:
  graph (text)   first line: p s eta beta d theta seed
                 then p lines: v <id> <x> <y>
                 then one line per edge: e <u> <v>   (u < v)
  samples (CSV)  first line: n,p,seed
                 then n rows of p comma-separated values
  report (JSON)  p, n, r, eps, w, theta, copies_found, copies_used,
                 zero_one_loss, missed_edges, false_edges,
                 undecided_vertices, runtime_ms, edges: [[u,v],...]
  config (text)  one "key = value" per line; lists "p = 500, 2000";
                 integer ranges "seeds = 1..20"; '#' comments.
                 keys: p n theta d eta beta seeds r eps w threshold margin
                       asymptotic planted copies pattern_size box_nodes pitch
                       moat templates jitter library_seed l_bar out
  experiment     writes <out>/runs.json and <out>/summary.csv
Reals are written with 17 significant digits.)";

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    save_text(out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric Gaussian graphical model selection"};
  app.footer(kFormats);
  app.require_subcommand(1);

  // generate
  FamilyParams fp;
  PlantSpec plant;
  bool planted = false;
  std::string out;
  auto* gen = app.add_subcommand("generate", "Draw a random geometric graph");
  gen->add_option("--p", fp.p, "vertices")->capture_default_str();
  gen->add_option("--eta", fp.eta, "density")->capture_default_str();
  gen->add_option("--d", fp.d, "degree bound")->capture_default_str();
  gen->add_option("--beta", fp.beta, "edge length bound")->capture_default_str();
  gen->add_option("--theta", fp.theta, "coupling")->capture_default_str();
  gen->add_option("--seed", fp.seed, "graph seed")->capture_default_str();
  gen->add_flag("--planted", planted, "stamp isolated template copies");
  gen->add_option("--copies", plant.copies, "planted copies (-1: as many as fit)")->capture_default_str();
  gen->add_option("--pitch", plant.pitch, "planted lattice pitch")->capture_default_str();
  gen->add_option("--out", out, "graph file (default stdout)");

  // sample
  std::string graph_path, samples_path;
  int n = 10;
  std::uint64_t sample_seed = 1;
  double theta_override = -1;
  auto* smp = app.add_subcommand("sample", "Draw Gaussian snapshots for a graph");
  smp->add_option("--graph", graph_path, "graph file")->required();
  smp->add_option("--n", n, "snapshots")->capture_default_str();
  smp->add_option("--seed", sample_seed, "sampling seed")->capture_default_str();
  smp->add_option("--theta", theta_override, "coupling (default: graph header)");
  smp->add_option("--out", out, "samples CSV (default stdout)");

  // select
  SelectorParams sp;
  bool asymptotic = false;
  auto* sel = app.add_subcommand("select", "Recover the edge set from samples");
  sel->add_option("--graph", graph_path, "graph file (positions, and edges for scoring)")->required();
  sel->add_option("--samples", samples_path, "samples CSV")->required();
  sel->add_option("--theta", theta_override, "coupling (default: graph header)");
  sel->add_option("--r", sp.r, "minimum template size")->capture_default_str();
  sel->add_option("--eps", sp.eps, "lattice pitch")->capture_default_str();
  sel->add_option("--w", sp.w, "copy separation")->capture_default_str();
  sel->add_option("--threshold", sp.detect_threshold, "edge threshold (default theta/2)");
  sel->add_option("--margin", sp.margin, "middle-square margin")->capture_default_str();
  sel->add_flag("--asymptotic", asymptotic, "use r, eps, w from p");
  sel->add_option("--out", out, "report JSON (default stdout)");

  // bounds
  BoundInputs bi;
  double delta = 0;
  auto* bnd = app.add_subcommand("bounds", "Print the bounds table");
  bnd->add_option("--p", bi.p)->capture_default_str();
  bnd->add_option("--eta", bi.eta)->capture_default_str();
  bnd->add_option("--beta", bi.beta)->capture_default_str();
  bnd->add_option("--d", bi.d)->capture_default_str();
  bnd->add_option("--theta", bi.theta)->capture_default_str();
  bnd->add_option("--eps", bi.eps)->capture_default_str();
  bnd->add_option("--r", bi.r)->capture_default_str();
  bnd->add_option("--l_bar", bi.l_bar, "mean pairwise template distance")->capture_default_str();
  bnd->add_option("--delta", delta, "decoder unreliability")->capture_default_str();

  // experiment
  std::string config_path;
  std::map<std::string, std::string> overrides;
  auto* exp = app.add_subcommand("experiment", "Run a seeded sweep");
  exp->add_option("--config", config_path, "config file");
  for (const char* key : {"p", "n", "theta", "d", "eta", "beta", "seeds", "r", "eps", "w", "threshold", "out"})
    exp->add_option(std::string("--") + key, overrides[key], std::string("override config key ") + key);
  exp->add_option("--seed", overrides["seed"], "alias of --seeds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const GeoGraph g = planted ? generate_planted(fp, plant) : generate(fp);
      std::ostringstream os;
      write_graph(os, g);
      write_or_print(out, os.str());
      if (planted) std::cerr << "plant pitch " << format_real(g.plant_pitch) << ", copies " << g.plants.size() << '\n';
    } else if (*smp) {
      const auto g = load_graph(graph_path);
      const double theta = theta_override > 0 ? theta_override : g.params.theta;
      const auto X = sample(assemble_precision(g.adj, theta, g.params.d), n, sample_seed);
      std::ostringstream os;
      write_samples(os, X);
      write_or_print(out, os.str());
    } else if (*sel) {
      auto g = load_graph(graph_path);
      const auto X = load_samples(samples_path);
      if (X.p != g.params.p) throw std::runtime_error("samples and graph disagree on p");
      const double theta = theta_override > 0 ? theta_override : g.params.theta;
      if (asymptotic) {
        const auto keep = sp;
        sp = default_params(g.params.p, theta);
        if (sel->count("--r")) sp.r = keep.r;
        if (sel->count("--eps")) sp.eps = keep.eps;
        if (sel->count("--w")) sp.w = keep.w;
        sp.margin = keep.margin;
      }
      sp.theta = theta;
      sp.eta = g.params.eta;
      if (!sel->count("--threshold")) sp.detect_threshold = theta / 2;
      const auto rep = la_messagge(g, X, sp);
      write_or_print(out, report_to_json(rep).dump(2) + "\n");
    } else if (*bnd) {
      const auto t = bounds_table(bi);
      std::printf("inputs        p=%d eta=%g beta=%g d=%d theta=%g eps=%g r=%d l_bar=%g\n", bi.p, bi.eta, bi.beta,
                  bi.d, bi.theta, bi.eps, bi.r, bi.l_bar);
      std::printf("n_min         %.6f\n", fano_lower_bound(bi.eta, bi.beta, bi.d, bi.theta, delta));
      std::printf("family_bits   %.6f\n", t.family_bits);
      std::printf("kl_bound      %.6f\n", t.kl_bound);
      std::printf("copies_cont   %.6g\n", t.copies_continuous);
      std::printf("copies_latt   %.6g\n", t.copies_lattice);
      std::printf("copies_sep    %.6g\n", t.copies_separated);
    } else if (*exp) {
      std::string text;
      if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) throw ConfigError("cannot open config " + config_path);
        std::stringstream ss;
        ss << is.rdbuf();
        text = ss.str() + "\n";
      }
      for (const auto& [key, value] : overrides)
        if (!value.empty()) text += key + " = " + value + "\n";
      const auto cfg = parse_config(text);
      const auto res = run_experiment(cfg);
      if (res.records.empty()) throw std::runtime_error("every run was skipped");
      emit_outputs(res, cfg.out);
      std::cout << summary_csv(summarize(res.records));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
