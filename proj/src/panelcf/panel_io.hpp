#pragma once

#include "panelcf/core.hpp"

#include <istream>
#include <string>
#include <vector>

namespace panelcf {

struct PanelSchema {
  std::string unit_col = "unit";
  std::string time_col = "time";
  std::string value_col = "value";
  std::vector<std::string> exclude_units;  // rows for these units are dropped
};

// Long-format reader. Units are ordered lexicographically with the treated
// unit moved to the last row; times sort numerically when every label
// parses as a number, lexicographically otherwise.
PanelData load_panel(std::istream& source, const PanelSchema& schema, const std::string& treated,
                     Index t0, char delim = ',');

// Same, from a file; fills PanelData::source_digest with the SHA-256 of the bytes.
PanelData load_panel_file(const std::string& path, const PanelSchema& schema,
                          const std::string& treated, Index t0, char delim = ',');

// Split one delimited line, honouring double-quoted fields ("" escapes a quote).
std::vector<std::string> split_delimited(const std::string& line, char delim);

std::string sha256_hex(const std::string& bytes);

}  // namespace panelcf
