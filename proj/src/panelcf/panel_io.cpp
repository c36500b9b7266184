#include "panelcf/panel_io.hpp"

#include "panelcf/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace panelcf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

Index find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<Index>(j);
  }
  fail(ErrorCode::Parse, "column '" + name + "' not found in header");
}

}  // namespace

std::vector<std::string> split_delimited(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) fail(ErrorCode::Parse, "unterminated quoted field");
  fields.push_back(trim(cur));
  return fields;
}

PanelData load_panel(std::istream& source, const PanelSchema& schema, const std::string& treated,
                     Index t0, char delim) {
  std::string line;
  if (!std::getline(source, line)) fail(ErrorCode::Parse, "empty input");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  const auto header = split_delimited(line, delim);
  const Index uc = find_column(header, schema.unit_col);
  const Index tc = find_column(header, schema.time_col);
  const Index vc = find_column(header, schema.value_col);
  const auto need = static_cast<std::size_t>(std::max({uc, tc, vc}) + 1);

  std::map<std::pair<std::string, std::string>, double> cells;
  std::vector<std::string> units;
  std::vector<std::string> times;
  std::size_t lineno = 1;
  while (std::getline(source, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_delimited(line, delim);
    if (f.size() < need) {
      fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": expected at least " +
                                 std::to_string(need) + " fields, got " + std::to_string(f.size()));
    }
    const std::string& unit = f[uc];
    const std::string& time = f[tc];
    if (std::find(schema.exclude_units.begin(), schema.exclude_units.end(), unit) != schema.exclude_units.end()) {
      continue;
    }
    double value = 0.0;
    if (!parse_double(f[vc], value)) {
      fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": cannot parse value '" + f[vc] + "'");
    }
    if (!std::isfinite(value)) {
      fail(ErrorCode::NonFiniteInput, "line " + std::to_string(lineno) + ": non-finite value");
    }
    if (!cells.emplace(std::make_pair(unit, time), value).second) {
      fail(ErrorCode::DuplicateCell, "unit '" + unit + "', time '" + time + "' appears more than once");
    }
    units.push_back(unit);
    times.push_back(time);
  }
  if (cells.empty()) fail(ErrorCode::Parse, "no data rows");

  std::sort(units.begin(), units.end());
  units.erase(std::unique(units.begin(), units.end()), units.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  auto it = std::find(units.begin(), units.end(), treated);
  if (it == units.end()) fail(ErrorCode::UnknownTreatedUnit, "treated unit '" + treated + "' not in data");
  units.erase(it);
  units.push_back(treated);

  std::vector<double> numeric(times.size());
  bool all_numeric = true;
  for (std::size_t j = 0; j < times.size() && all_numeric; ++j) {
    all_numeric = parse_double(times[j], numeric[j]);
  }
  if (all_numeric) {
    std::vector<std::size_t> order(times.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return numeric[a] < numeric[b]; });
    std::vector<std::string> sorted;
    for (auto j : order) sorted.push_back(times[j]);
    times = std::move(sorted);
  }

  const auto n = static_cast<Index>(units.size());
  const auto t = static_cast<Index>(times.size());
  if (t0 < 1 || t0 >= t) {
    fail(ErrorCode::T0OutOfRange,
         "t0=" + std::to_string(t0) + " must satisfy 1 <= t0 < T=" + std::to_string(t));
  }
  Matrix y(n, t);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < t; ++j) {
      auto c = cells.find({units[i], times[j]});
      if (c == cells.end()) {
        fail(ErrorCode::MissingCell, "unit '" + units[i] + "', time '" + times[j] + "' is missing");
      }
      y(i, j) = c->second;
    }
  }
  return make_panel(std::move(y), std::move(units), std::move(times), t0);
}

PanelData load_panel_file(const std::string& path, const PanelSchema& schema,
                          const std::string& treated, Index t0, char delim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  std::istringstream stream(bytes);
  PanelData panel = load_panel(stream, schema, treated, t0, delim);
  panel.source_digest = sha256_hex(bytes);
  return panel;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::Io, "SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

}  // namespace panelcf
