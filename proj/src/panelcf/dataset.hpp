#pragma once

#include "panelcf/core.hpp"
#include "panelcf/panel_io.hpp"

#include <string>
#include <vector>

namespace panelcf {

struct DatasetInfo {
  std::string name;
  std::string file;
  PanelSchema schema;
  char delimiter = ',';
  std::string treated;
  Index t0 = 0;
  Index n = 0;  // expected shape
  Index t = 0;
  Index pcr_k = 0;  // 0 = energy rule
  std::string description;
  std::string source;
  std::string path;        // resolved file path
  bool available = false;  // file present
};

// PANELCF_DATA_DIR if set, otherwise the directory compiled into the library.
std::string data_dir();

std::vector<DatasetInfo> list_datasets(const std::string& dir);
DatasetInfo find_dataset(const std::string& name, const std::string& dir);

// Loads and checks the panel against the manifest shape.
PanelData load_dataset(const DatasetInfo& info);

}  // namespace panelcf
