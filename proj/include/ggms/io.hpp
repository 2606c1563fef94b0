#pragma once
// Text, CSV and JSON serialization.
//
// Graph file:   "p s eta beta d theta seed", then p lines "v <id> <x> <y>",
//               then one line "e <u> <v>" per edge with u < v.
// Samples CSV:  "n,p,seed", then n rows of p comma-separated values.
// Reals are written with 17 significant digits.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ggms/gmrf.hpp"
#include "ggms/graphgen.hpp"
#include "ggms/selector.hpp"
#include "json.hpp"

namespace ggms {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_real(double x);

void write_graph(std::ostream& os, const GeoGraph& g);
GeoGraph read_graph(std::istream& is);

void write_samples(std::ostream& os, const SampleMatrix& X);
SampleMatrix read_samples(std::istream& is);

nlohmann::json report_to_json(const SelectionReport& r);
SelectionReport report_from_json(const nlohmann::json& j);

void save_graph(const std::string& path, const GeoGraph& g);
GeoGraph load_graph(const std::string& path);
void save_samples(const std::string& path, const SampleMatrix& X);
SampleMatrix load_samples(const std::string& path);
void save_text(const std::string& path, const std::string& text);

}  // namespace ggms
