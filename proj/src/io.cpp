#include "ggms/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ggms {

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

// Next line that is not blank.
bool next_line(std::istream& is, std::string& line, int& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void fail(int lineno, const std::string& what) {
  throw FormatError("line " + std::to_string(lineno) + ": " + what);
}

}  // namespace

void write_graph(std::ostream& os, const GeoGraph& g) {
  const auto& fp = g.params;
  os << fp.p << ' ' << format_real(g.torus.s) << ' ' << format_real(fp.eta) << ' ' << format_real(fp.beta) << ' '
     << fp.d << ' ' << format_real(fp.theta) << ' ' << fp.seed << '\n';
  for (size_t v = 0; v < g.points.size(); ++v)
    os << "v " << v << ' ' << format_real(g.points[v].x) << ' ' << format_real(g.points[v].y) << '\n';
  for (auto [u, v] : g.adj.edges()) os << "e " << u << ' ' << v << '\n';
}

GeoGraph read_graph(std::istream& is) {
  GeoGraph g;
  std::string line;
  int lineno = 0;
  if (!next_line(is, line, lineno)) fail(lineno, "missing header");
  {
    std::istringstream hs(line);
    auto& fp = g.params;
    if (!(hs >> fp.p >> g.torus.s >> fp.eta >> fp.beta >> fp.d >> fp.theta >> fp.seed))
      fail(lineno, "header must be 'p s eta beta d theta seed'");
    if (fp.p < 1) fail(lineno, "p must be positive");
  }
  const int p = g.params.p;
  g.points.resize(p);
  g.adj = Adjacency(p);
  std::vector<char> seen(p, 0);
  int vertices = 0;
  while (next_line(is, line, lineno)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      int id;
      double x, y;
      if (!(ls >> id >> x >> y)) fail(lineno, "expected 'v <id> <x> <y>'");
      if (id < 0 || id >= p || seen[id]) fail(lineno, "bad or repeated vertex id");
      seen[id] = 1;
      g.points[id] = {x, y};
      ++vertices;
    } else if (tag == "e") {
      int u, v;
      if (!(ls >> u >> v)) fail(lineno, "expected 'e <u> <v>'");
      if (u < 0 || v >= p || u >= v) fail(lineno, "edge must satisfy 0 <= u < v < p");
      if (g.adj.has(u, v)) fail(lineno, "repeated edge");
      g.adj.add(u, v);
    } else {
      fail(lineno, "unknown record '" + tag + "'");
    }
  }
  if (vertices != p) fail(lineno, "expected " + std::to_string(p) + " vertex lines");
  return g;
}

void write_samples(std::ostream& os, const SampleMatrix& X) {
  os << X.n << ',' << X.p << ',' << X.seed << '\n';
  std::string row;
  for (int i = 0; i < X.n; ++i) {
    row.clear();
    for (int j = 0; j < X.p; ++j) {
      if (j) row += ',';
      row += format_real(X.data(i, j));
    }
    os << row << '\n';
  }
}

SampleMatrix read_samples(std::istream& is) {
  SampleMatrix X;
  std::string line;
  int lineno = 0;
  if (!next_line(is, line, lineno)) fail(lineno, "missing header");
  {
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream hs(line);
    if (!(hs >> X.n >> X.p >> X.seed) || X.n < 0 || X.p < 1) fail(lineno, "header must be 'n,p,seed'");
  }
  X.data.resize(X.n, X.p);
  for (int i = 0; i < X.n; ++i) {
    if (!next_line(is, line, lineno)) fail(lineno, "expected " + std::to_string(X.n) + " rows");
    const char* b = line.data();
    const char* e = b + line.size();
    for (int j = 0; j < X.p; ++j) {
      while (b < e && (*b == ' ' || *b == '\t')) ++b;
      double x;
      auto res = std::from_chars(b, e, x);
      if (res.ec != std::errc()) fail(lineno, "bad value in column " + std::to_string(j));
      X.data(i, j) = x;
      b = res.ptr;
      while (b < e && (*b == ' ' || *b == '\t' || *b == '\r')) ++b;
      if (j + 1 < X.p) {
        if (b >= e || *b != ',') fail(lineno, "expected " + std::to_string(X.p) + " columns");
        ++b;
      } else if (b != e) {
        fail(lineno, "trailing data");
      }
    }
  }
  if (next_line(is, line, lineno)) fail(lineno, "more rows than the header declares");
  return X;
}

nlohmann::json report_to_json(const SelectionReport& r) {
  nlohmann::json j;
  j["p"] = r.p;
  j["n"] = r.n;
  j["r"] = r.r;
  j["eps"] = r.eps;
  j["w"] = r.w;
  j["theta"] = r.theta;
  j["copies_found"] = r.copies_found;
  j["copies_used"] = r.copies_used;
  j["zero_one_loss"] = r.zero_one_loss;
  j["missed_edges"] = r.missed_edges;
  j["false_edges"] = r.false_edges;
  j["undecided_vertices"] = r.undecided_vertices;
  j["runtime_ms"] = r.runtime_ms;
  j["low_confidence_rounds"] = r.low_confidence_rounds;
  j["rounds"] = r.rounds.size();
  nlohmann::json edges = nlohmann::json::array();
  for (auto [u, v] : r.edges) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  return j;
}

SelectionReport report_from_json(const nlohmann::json& j) {
  SelectionReport r;
  try {
    r.p = j.at("p");
    r.n = j.at("n");
    r.r = j.at("r");
    r.eps = j.at("eps");
    r.w = j.at("w");
    r.theta = j.at("theta");
    r.copies_found = j.at("copies_found");
    r.copies_used = j.at("copies_used");
    r.zero_one_loss = j.at("zero_one_loss");
    r.missed_edges = j.at("missed_edges");
    r.false_edges = j.at("false_edges");
    r.undecided_vertices = j.at("undecided_vertices").get<std::vector<int>>();
    r.runtime_ms = j.at("runtime_ms");
    r.low_confidence_rounds = j.value("low_confidence_rounds", 0);
    r.E_hat = Adjacency(r.p);
    for (const auto& e : j.at("edges")) {
      const int u = e.at(0), v = e.at(1);
      r.edges.emplace_back(u, v);
      r.E_hat.add(u, v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report json: ") + e.what());
  }
  return r;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return is;
}

}  // namespace

void save_graph(const std::string& path, const GeoGraph& g) {
  auto os = open_out(path);
  write_graph(os, g);
}

GeoGraph load_graph(const std::string& path) {
  auto is = open_in(path);
  return read_graph(is);
}

void save_samples(const std::string& path, const SampleMatrix& X) {
  auto os = open_out(path);
  write_samples(os, X);
}

SampleMatrix load_samples(const std::string& path) {
  auto is = open_in(path);
  return read_samples(is);
}

void save_text(const std::string& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace ggms
