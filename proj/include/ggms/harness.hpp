#pragma once
// Seeded parameter sweeps and their CSV/JSON artifacts.
//
// Config: one "key = value" per line, lists comma-separated ("p = 500, 2000"),
// integer ranges as "a..b", '#' starts a comment.

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "ggms/bounds.hpp"
#include "ggms/selector.hpp"
#include "json.hpp"

namespace ggms {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::vector<int> p{500};
  std::vector<int> n{10};
  std::vector<double> theta{0.1};
  std::vector<int> d{3};
  std::vector<double> eta{1.0};
  std::vector<double> beta{1.8};
  std::vector<std::uint64_t> seeds{1};

  // Selector overrides; unset keeps the mode default.
  std::optional<int> r;
  std::optional<double> eps;  // planted default: the plant pitch
  std::optional<double> w;
  std::optional<double> threshold;
  double margin = 2.0;
  bool asymptotic = false;  // default_params(p, theta) instead of planted/overrides

  bool planted = true;
  PlantSpec plant;
  double l_bar = 1.0;  // bounds table only

  std::string out = "out";
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// splitmix64 over (master, stream, params...); each stream is independent of
// the rest of the grid.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::initializer_list<double> params);

struct GridPoint {
  int p = 0, n = 0, d = 0;
  double theta = 0, eta = 0, beta = 0;
  auto key() const { return std::tie(p, n, theta, d, eta, beta); }
};

struct RunRecord {
  nlohmann::json config;  // snapshot of the whole config
  GridPoint point;
  std::uint64_t seed = 0, graph_seed = 0, sample_seed = 0;
  int true_edges = 0;
  double edge_error = 0.0;  // (missed + false) / max(1, |E|)
  SelectionReport report;
  nlohmann::json bounds;
  double wall_ms = 0.0;
};

struct SkippedRun {
  GridPoint point;
  std::uint64_t seed = 0;
  std::string reason;
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<SkippedRun> skipped;
};

// Throws if cfg.out cannot be created or written.
void preflight_output(const std::string& dir);

// Grid order: p, n, theta, d, eta, beta, then seeds. Runs execute in parallel;
// results are stored in grid order. Checks the output directory first when
// `check_output` is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool check_output = true);

struct SummaryRow {
  int p = 0, n = 0, d = 0;
  double theta = 0, eta = 0, beta = 0;
  double mean_edge_error = 0, std_edge_error = 0, mean_zero_one = 0, copies_used_mean = 0, nmin_fano = 0;
  int runs = 0;
};

// One row per grid point, sorted by (p, n, theta, d, eta, beta); sample std
// (0 for one run). CSV columns: p, n, theta, d, mean_edge_error,
// std_edge_error, mean_zero_one, copies_used_mean, nmin_fano, eta, beta, runs.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary_csv(const std::string& text);
nlohmann::json runs_json(const ExperimentResult& res);

// Writes runs.json and summary.csv into dir.
void emit_outputs(const ExperimentResult& res, const std::string& dir);

}  // namespace ggms
