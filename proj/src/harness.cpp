#include "ggms/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ggms/io.hpp"

namespace ggms {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list item in '" + v + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty value");
  return out;
}

double to_real(const std::string& s) {
  size_t pos = 0;
  double x;
  try {
    x = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
  return x;
}

long long to_int(const std::string& s) {
  size_t pos = 0;
  long long x;
  try {
    x = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("not an integer: '" + s + "'");
  return x;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

template <class T>
std::vector<T> int_list(const std::string& v) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(static_cast<T>(to_int(item)));
      continue;
    }
    const long long a = to_int(trim(item.substr(0, dots))), b = to_int(trim(item.substr(dots + 2)));
    if (b < a) throw ConfigError("empty range '" + item + "'");
    for (long long x = a; x <= b; ++x) out.push_back(static_cast<T>(x));
  }
  return out;
}

std::vector<double> real_list(const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_real(item));
  return out;
}

std::string single(const std::string& key, const std::string& v) {
  const auto items = split_list(v);
  if (items.size() != 1) throw ConfigError(key + " takes a single value");
  return items[0];
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    try {
      if (key == "p") c.p = int_list<int>(v);
      else if (key == "n") c.n = int_list<int>(v);
      else if (key == "theta") c.theta = real_list(v);
      else if (key == "d") c.d = int_list<int>(v);
      else if (key == "eta") c.eta = real_list(v);
      else if (key == "beta") c.beta = real_list(v);
      else if (key == "seeds" || key == "seed") c.seeds = int_list<std::uint64_t>(v);
      else if (key == "r") c.r = static_cast<int>(to_int(single(key, v)));
      else if (key == "eps") c.eps = to_real(single(key, v));
      else if (key == "w") c.w = to_real(single(key, v));
      else if (key == "threshold") c.threshold = to_real(single(key, v));
      else if (key == "margin") c.margin = to_real(single(key, v));
      else if (key == "asymptotic") c.asymptotic = to_bool(single(key, v));
      else if (key == "planted") c.planted = to_bool(single(key, v));
      else if (key == "copies") c.plant.copies = static_cast<int>(to_int(single(key, v)));
      else if (key == "pattern_size") c.plant.pattern_size = static_cast<int>(to_int(single(key, v)));
      else if (key == "box_nodes") c.plant.box_nodes = static_cast<int>(to_int(single(key, v)));
      else if (key == "pitch") c.plant.pitch = to_real(single(key, v));
      else if (key == "moat") c.plant.moat = to_real(single(key, v));
      else if (key == "templates") c.plant.templates = static_cast<int>(to_int(single(key, v)));
      else if (key == "jitter") c.plant.jitter = to_real(single(key, v));
      else if (key == "library_seed") c.plant.library_seed = static_cast<std::uint64_t>(to_int(single(key, v)));
      else if (key == "l_bar") c.l_bar = to_real(single(key, v));
      else if (key == "out") c.out = single(key, v);
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (c.seeds.empty()) throw ConfigError("seeds must be nonempty");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["p"] = c.p;
  j["n"] = c.n;
  j["theta"] = c.theta;
  j["d"] = c.d;
  j["eta"] = c.eta;
  j["beta"] = c.beta;
  j["seeds"] = c.seeds;
  j["r"] = c.r ? nlohmann::json(*c.r) : nlohmann::json();
  j["eps"] = c.eps ? nlohmann::json(*c.eps) : nlohmann::json();
  j["w"] = c.w ? nlohmann::json(*c.w) : nlohmann::json();
  j["threshold"] = c.threshold ? nlohmann::json(*c.threshold) : nlohmann::json();
  j["margin"] = c.margin;
  j["asymptotic"] = c.asymptotic;
  j["planted"] = c.planted;
  j["copies"] = c.plant.copies;
  j["pattern_size"] = c.plant.pattern_size;
  j["box_nodes"] = c.plant.box_nodes;
  j["pitch"] = c.plant.pitch;
  j["moat"] = c.plant.moat;
  j["templates"] = c.plant.templates;
  j["jitter"] = c.plant.jitter;
  j["library_seed"] = c.plant.library_seed;
  j["l_bar"] = c.l_bar;
  j["out"] = c.out;
  return j;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::initializer_list<double> params) {
  std::uint64_t h = splitmix64(splitmix64(master) ^ stream);
  for (double x : params) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(x));
  return h;
}

void preflight_output(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("output directory not usable: " + dir);
  const auto probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream os(probe);
    if (!(os << "ok")) throw std::runtime_error("output directory not writable: " + dir);
  }
  fs::remove(probe, ec);
}

namespace {

std::string validate_point(const GridPoint& g) {
  if (g.p < 2) return "p must be at least 2";
  if (g.n < 1) return "n must be positive";
  if (g.d < 1) return "d must be positive";
  if (!(g.theta > 0)) return "theta must be positive";
  if (!(g.d * g.theta < 0.5)) return "d*theta must be below 1/2";
  if (!(g.eta > 0) || !(g.beta > 0)) return "eta and beta must be positive";
  if (!(g.eta * g.beta * g.beta > g.d)) return "eta*beta^2 must exceed d";
  return "";
}

nlohmann::json bounds_snapshot(const GridPoint& g, const SelectionReport& rep, double l_bar) {
  auto guarded = [](auto f) {
    try {
      return nlohmann::json(f());
    } catch (const std::exception&) {
      return nlohmann::json();
    }
  };
  nlohmann::json j;
  j["n_min"] = guarded([&] { return fano_lower_bound(g.eta, g.beta, g.d, g.theta); });
  j["family_bits"] = guarded([&] { return family_log_size(g.eta, g.beta, g.d, g.p); });
  j["kl_bound"] = guarded([&] { return sym_kl_family_bound(g.p, g.d, g.theta); });
  j["copies_continuous"] = guarded([&] { return expected_copies_continuous(rep.r, rep.eps, g.eta, g.p, l_bar); });
  j["copies_lattice"] = guarded([&] { return expected_copies_lattice(rep.r, rep.eps, g.eta, g.p); });
  j["copies_separated"] = guarded([&] { return separated_copies_floor(rep.r, rep.eps, g.eta, g.p); });
  return j;
}

struct Job {
  GridPoint point;
  std::uint64_t seed;
  std::optional<RunRecord> record;
  std::string reason;
};

void execute(const ExperimentConfig& cfg, const nlohmann::json& snapshot, Job& job) {
  const auto t0 = std::chrono::steady_clock::now();
  const GridPoint& g = job.point;
  RunRecord rec;
  rec.config = snapshot;
  rec.point = g;
  rec.seed = job.seed;
  rec.graph_seed = derive_seed(job.seed, 1, {double(g.p), double(g.d), g.eta, g.beta});
  rec.sample_seed = derive_seed(job.seed, 2, {double(g.p), double(g.n), double(g.d), g.eta, g.beta, g.theta});

  FamilyParams fp;
  fp.p = g.p;
  fp.eta = g.eta;
  fp.d = g.d;
  fp.beta = g.beta;
  fp.theta = g.theta;
  fp.seed = rec.graph_seed;
  const GeoGraph graph = cfg.planted ? generate_planted(fp, cfg.plant) : generate(fp);
  const auto model = assemble_precision(graph.adj, g.theta, g.d);
  const auto X = sample(model, g.n, rec.sample_seed);

  SelectorParams sp;
  if (cfg.asymptotic) {
    sp = default_params(g.p, g.theta);
  } else {
    sp.theta = g.theta;
    sp.detect_threshold = g.theta / 2;
    sp.eps = cfg.eps.value_or(cfg.planted ? graph.plant_pitch : 0.1);
    sp.w = cfg.w.value_or(2.0);
    sp.margin = cfg.margin;
  }
  sp.eta = g.eta;
  if (cfg.r) sp.r = *cfg.r;
  if (cfg.threshold) sp.detect_threshold = *cfg.threshold;

  rec.report = la_messagge(graph, X, sp);
  rec.true_edges = static_cast<int>(graph.adj.edge_count());
  rec.edge_error = double(rec.report.missed_edges + rec.report.false_edges) / std::max(1, rec.true_edges);
  rec.bounds = bounds_snapshot(g, rec.report, cfg.l_bar);
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  job.record = std::move(rec);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool check_output) {
  if (cfg.seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (check_output) preflight_output(cfg.out);
  const auto snapshot = config_to_json(cfg);

  std::vector<Job> jobs;
  for (int p : cfg.p)
    for (int n : cfg.n)
      for (double theta : cfg.theta)
        for (int d : cfg.d)
          for (double eta : cfg.eta)
            for (double beta : cfg.beta)
              for (auto seed : cfg.seeds) jobs.push_back({GridPoint{p, n, d, theta, eta, beta}, seed, {}, ""});
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    return std::tie(a.point.p, a.point.n, a.point.theta, a.point.d, a.point.eta, a.point.beta) <
           std::tie(b.point.p, b.point.n, b.point.theta, b.point.d, b.point.eta, b.point.beta);
  });

  const int count = static_cast<int>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < count; ++k) {
    auto& job = jobs[k];
    job.reason = validate_point(job.point);
    if (!job.reason.empty()) continue;
    try {
      execute(cfg, snapshot, job);
    } catch (const std::exception& e) {
      job.reason = e.what();
    }
  }

  ExperimentResult res;
  for (auto& job : jobs) {
    if (job.record) {
      res.records.push_back(std::move(*job.record));
    } else {
      std::cerr << "skipped p=" << job.point.p << " n=" << job.point.n << " theta=" << job.point.theta
                << " d=" << job.point.d << " eta=" << job.point.eta << " beta=" << job.point.beta
                << " seed=" << job.seed << ": " << job.reason << '\n';
      res.skipped.push_back({job.point, job.seed, job.reason});
    }
  }
  return res;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  std::map<std::tuple<int, int, double, int, double, double>, std::vector<const RunRecord*>> groups;
  for (const auto& r : records)
    groups[{r.point.p, r.point.n, r.point.theta, r.point.d, r.point.eta, r.point.beta}].push_back(&r);
  std::vector<SummaryRow> rows;
  for (const auto& [key, runs] : groups) {
    SummaryRow row;
    const auto& g = runs.front()->point;
    row.p = g.p;
    row.n = g.n;
    row.theta = g.theta;
    row.d = g.d;
    row.eta = g.eta;
    row.beta = g.beta;
    row.runs = static_cast<int>(runs.size());
    const double m = static_cast<double>(runs.size());
    double sum_err = 0, sum_loss = 0, sum_used = 0;
    for (const auto* r : runs) {
      sum_err += r->edge_error;
      sum_loss += r->report.zero_one_loss;
      sum_used += r->report.copies_used;
    }
    row.mean_edge_error = sum_err / m;
    row.mean_zero_one = sum_loss / m;
    row.copies_used_mean = sum_used / m;
    double ss = 0;
    for (const auto* r : runs) ss += (r->edge_error - row.mean_edge_error) * (r->edge_error - row.mean_edge_error);
    row.std_edge_error = runs.size() > 1 ? std::sqrt(ss / (m - 1)) : 0.0;
    row.nmin_fano = fano_lower_bound(g.eta, g.beta, g.d, g.theta);
    rows.push_back(row);
  }
  return rows;
}

namespace {
const char* kSummaryHeader =
    "p,n,theta,d,mean_edge_error,std_edge_error,mean_zero_one,copies_used_mean,nmin_fano,eta,beta,runs";
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.p) + ',' + std::to_string(r.n) + ',' + format_real(r.theta) + ',' + std::to_string(r.d) +
           ',' + format_real(r.mean_edge_error) + ',' + format_real(r.std_edge_error) + ',' +
           format_real(r.mean_zero_one) + ',' + format_real(r.copies_used_mean) + ',' + format_real(r.nmin_fano) +
           ',' + format_real(r.eta) + ',' + format_real(r.beta) + ',' + std::to_string(r.runs) + '\n';
  }
  return out;
}

std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || trim(line) != kSummaryHeader) throw FormatError("summary.csv: unexpected header");
  std::vector<SummaryRow> rows;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(trim(item));
    if (f.size() != 12) throw FormatError("summary.csv: expected 12 columns");
    SummaryRow r;
    try {
      r.p = static_cast<int>(to_int(f[0]));
      r.n = static_cast<int>(to_int(f[1]));
      r.theta = to_real(f[2]);
      r.d = static_cast<int>(to_int(f[3]));
      r.mean_edge_error = to_real(f[4]);
      r.std_edge_error = to_real(f[5]);
      r.mean_zero_one = to_real(f[6]);
      r.copies_used_mean = to_real(f[7]);
      r.nmin_fano = to_real(f[8]);
      r.eta = to_real(f[9]);
      r.beta = to_real(f[10]);
      r.runs = static_cast<int>(to_int(f[11]));
    } catch (const ConfigError& e) {
      throw FormatError(std::string("summary.csv: ") + e.what());
    }
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json runs_json(const ExperimentResult& res) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : res.records) {
    nlohmann::json j;
    j["config"] = r.config;
    j["point"] = {{"p", r.point.p}, {"n", r.point.n},     {"theta", r.point.theta},
                  {"d", r.point.d}, {"eta", r.point.eta}, {"beta", r.point.beta}};
    j["seed"] = r.seed;
    j["graph_seed"] = r.graph_seed;
    j["sample_seed"] = r.sample_seed;
    j["true_edges"] = r.true_edges;
    j["edge_error"] = r.edge_error;
    j["report"] = report_to_json(r.report);
    j["bounds"] = r.bounds;
    j["wall_ms"] = r.wall_ms;
    recs.push_back(std::move(j));
  }
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : res.skipped)
    skipped.push_back({{"p", s.point.p},
                       {"n", s.point.n},
                       {"theta", s.point.theta},
                       {"d", s.point.d},
                       {"eta", s.point.eta},
                       {"beta", s.point.beta},
                       {"seed", s.seed},
                       {"reason", s.reason}});
  return {{"records", std::move(recs)}, {"skipped", std::move(skipped)}};
}

void emit_outputs(const ExperimentResult& res, const std::string& dir) {
  if (res.records.empty()) throw std::invalid_argument("emit_outputs: no records");
  preflight_output(dir);
  const auto base = std::filesystem::path(dir);
  save_text((base / "runs.json").string(), runs_json(res).dump(2) + "\n");
  save_text((base / "summary.csv").string(), summary_csv(summarize(res.records)));
}

}  // namespace ggms
