#include "panelcf/dataset.hpp"

#include "panelcf/error.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#ifndef PANELCF_DEFAULT_DATA_DIR
#define PANELCF_DEFAULT_DATA_DIR "data"
#endif

namespace panelcf {

namespace fs = std::filesystem;
using nlohmann::json;

std::string data_dir() {
  if (const char* env = std::getenv("PANELCF_DATA_DIR"); env && *env) return env;
  return PANELCF_DEFAULT_DATA_DIR;
}

std::vector<DatasetInfo> list_datasets(const std::string& dir) {
  const fs::path manifest = fs::path(dir) / "manifest.json";
  std::ifstream in(manifest);
  if (!in) fail(ErrorCode::Io, "cannot open dataset manifest '" + manifest.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, "manifest: " + std::string(e.what()));
  }
  std::vector<DatasetInfo> out;
  try {
    for (const auto& d : doc.at("datasets")) {
      DatasetInfo info;
      info.name = d.at("name").get<std::string>();
      info.file = d.at("file").get<std::string>();
      info.schema.unit_col = d.at("unit_col").get<std::string>();
      info.schema.time_col = d.at("time_col").get<std::string>();
      info.schema.value_col = d.at("value_col").get<std::string>();
      info.schema.exclude_units = d.value("exclude_units", std::vector<std::string>{});
      const std::string delim = d.value("delimiter", std::string(","));
      if (delim.size() != 1) fail(ErrorCode::Parse, "manifest: delimiter must be one character");
      info.delimiter = delim[0];
      info.treated = d.at("treated").get<std::string>();
      info.t0 = d.at("t0").get<Index>();
      info.n = d.at("N").get<Index>();
      info.t = d.at("T").get<Index>();
      info.pcr_k = d.value("pcr_k", Index{0});
      info.description = d.value("description", std::string());
      info.source = d.value("source", std::string());
      info.path = (fs::path(dir) / info.file).string();
      info.available = fs::is_regular_file(info.path);
      out.push_back(std::move(info));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, "manifest: " + std::string(e.what()));
  }
  return out;
}

DatasetInfo find_dataset(const std::string& name, const std::string& dir) {
  for (auto& d : list_datasets(dir)) {
    if (d.name == name) return d;
  }
  fail(ErrorCode::InvalidArgument, "unknown dataset '" + name + "'");
}

PanelData load_dataset(const DatasetInfo& info) {
  if (!info.available) {
    fail(ErrorCode::Io, "dataset '" + info.name + "' is not installed (expected " + info.path + ")");
  }
  PanelData p = load_panel_file(info.path, info.schema, info.treated, info.t0, info.delimiter);
  if (p.n() != info.n || p.t() != info.t) {
    fail(ErrorCode::Parse, "dataset '" + info.name + "' has shape " + std::to_string(p.n()) + "x" +
                               std::to_string(p.t()) + ", manifest says " + std::to_string(info.n) + "x" +
                               std::to_string(info.t));
  }
  return p;
}

}  // namespace panelcf
