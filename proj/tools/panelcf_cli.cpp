// panelcf command-line front end. Talks to the library through the C API only.

#include "panelcf/panelcf.h"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct CliError {
  int exit_code;
  std::string message;
};

struct PanelDeleter {
  void operator()(pcf_panel* p) const { pcf_panel_free(p); }
};
using PanelPtr = std::unique_ptr<pcf_panel, PanelDeleter>;

struct CString {
  char* p = nullptr;
  ~CString() { pcf_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

void check(pcf_status s) {
  if (s != PCF_OK) throw CliError{pcf_status_exit_code(s), pcf_last_error_message()};
}

[[noreturn]] void config_error(const std::string& msg) { throw CliError{2, msg}; }

void write_atomic(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  const fs::path target(path);
  std::random_device rd;
  const fs::path tmp = target.string() + ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError{3, "cannot write '" + tmp.string() + "'"};
    out << content;
    out.flush();
    if (!out) throw CliError{3, "write failed for '" + tmp.string() + "'"};
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw CliError{3, "cannot rename into '" + path + "': " + ec.message()};
  }
}

struct DataFlags {
  std::string dataset;
  std::string data;
  std::string unit_col = "unit";
  std::string time_col = "time";
  std::string value_col = "value";
  std::string treated;
  int64_t t0 = -1;
  char delimiter = ',';

  void add(CLI::App* app) {
    app->add_option("--dataset", dataset, "Bundled dataset name (see `datasets`)");
    app->add_option("--data", data, "Long-format delimited file");
    app->add_option("--unit-col", unit_col, "Unit column")->capture_default_str();
    app->add_option("--time-col", time_col, "Time column")->capture_default_str();
    app->add_option("--value-col", value_col, "Outcome column")->capture_default_str();
    app->add_option("--treated", treated, "Treated unit label");
    app->add_option("--t0", t0, "Number of pretreatment periods");
    app->add_option("--delimiter", delimiter, "Field delimiter")->capture_default_str();
  }

  PanelPtr load() const {
    pcf_panel* p = nullptr;
    if (!dataset.empty() && !data.empty()) config_error("give either --dataset or --data, not both");
    if (!dataset.empty()) {
      check(pcf_bundled_load(dataset.c_str(), &p));
      return PanelPtr(p);
    }
    if (data.empty()) config_error("one of --dataset or --data is required");
    if (treated.empty()) config_error("--treated is required with --data");
    if (t0 < 0) config_error("--t0 is required with --data");
    pcf_schema schema{unit_col.c_str(), time_col.c_str(), value_col.c_str(), delimiter};
    check(pcf_panel_load(data.c_str(), &schema, treated.c_str(), t0, &p));
    return PanelPtr(p);
  }

  std::string study_name() const {
    if (!dataset.empty()) return dataset;
    return fs::path(data).stem().string();
  }
};

struct MethodFlags {
  std::string method = "ols";
  std::optional<int64_t> k;
  double energy = 0.999;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda = 1e-6;

  void add(CLI::App* app, bool symmetric_only) {
    auto* opt = app->add_option("--method", method, "Estimator")->capture_default_str();
    if (symmetric_only) {
      opt->check(CLI::IsMember({"ols", "pcr"}));
    } else {
      opt->check(CLI::IsMember({"ols", "pcr", "ridge", "lasso", "enet", "simplex"}));
    }
    app->add_option("--k", k, "PCR rank (default: spectral-energy rule)");
    app->add_option("--energy", energy, "Spectral energy threshold for the k rule")->capture_default_str();
    if (!symmetric_only) {
      app->add_option("--lambda1", lambda1, "l1 penalty (lasso, enet)")->capture_default_str();
      app->add_option("--lambda2", lambda2, "l2 penalty (ridge, enet)")->capture_default_str();
      app->add_option("--lambda", lambda, "Simplex l2 penalty")->capture_default_str();
    }
  }

  pcf_method build() const {
    pcf_method m;
    pcf_method_kind kind = PCF_METHOD_OLS;
    if (method == "pcr") kind = PCF_METHOD_PCR;
    if (method == "ridge") kind = PCF_METHOD_RIDGE;
    if (method == "lasso") kind = PCF_METHOD_LASSO;
    if (method == "enet") kind = PCF_METHOD_ENET;
    if (method == "simplex") kind = PCF_METHOD_SIMPLEX;
    pcf_method_default(&m, kind);
    if (k) {
      if (*k < 1) config_error("--k must be >= 1");
      m.k = *k;
    }
    m.energy_threshold = energy;
    m.lambda1 = lambda1;
    m.lambda2 = lambda2;
    m.lambda = lambda;
    return m;
  }
};

pcf_cov_kind parse_cov(const std::string& s) {
  if (s == "jack") return PCF_COV_JACK;
  if (s == "hrk") return PCF_COV_HRK;
  return PCF_COV_HOMO;
}

pcf_interval_select parse_interval(const std::string& s) {
  if (s == "hz") return PCF_INTERVAL_HZ;
  if (s == "vt") return PCF_INTERVAL_VT;
  if (s == "mixed") return PCF_INTERVAL_MIXED;
  return PCF_INTERVAL_ALL;
}

std::string with_extension(const std::string& path, const std::string& ext) {
  fs::path p(path);
  p.replace_extension(ext);
  return p.string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"panelcf: horizontal and vertical regression counterfactuals with model-based intervals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pcf_version()));

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Point estimates and intervals for every post-treatment period");
  DataFlags a_data;
  MethodFlags a_method;
  std::string a_interval = "all", a_cov = "homo", a_out, a_format = "json";
  double a_alpha = 0.05;
  a_data.add(analyze);
  a_method.add(analyze, false);
  analyze->add_option("--interval", a_interval, "Intervals to report")
      ->check(CLI::IsMember({"hz", "vt", "mixed", "all"}))
      ->capture_default_str();
  analyze->add_option("--cov", a_cov, "Covariance estimator")
      ->check(CLI::IsMember({"homo", "jack", "hrk"}))
      ->capture_default_str();
  analyze->add_option("--alpha", a_alpha, "Interval level theta (coverage 1 - theta)")->capture_default_str();
  analyze->add_option("--out", a_out, "Output path (stdout when omitted)");
  analyze->add_option("--format", a_format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  // compare
  auto* compare = app.add_subcommand("compare", "All six estimators, both directions, long-format CSV");
  DataFlags c_data;
  std::optional<int64_t> c_k;
  double c_energy = 0.999, c_l1 = 1.0, c_l2 = 1.0, c_lambda = 1e-6;
  std::string c_out;
  c_data.add(compare);
  compare->add_option("--k", c_k, "PCR rank (default: spectral-energy rule)");
  compare->add_option("--energy", c_energy, "Spectral energy threshold for the k rule")->capture_default_str();
  compare->add_option("--lambda1", c_l1, "l1 penalty")->capture_default_str();
  compare->add_option("--lambda2", c_l2, "l2 penalty")->capture_default_str();
  compare->add_option("--lambda", c_lambda, "Simplex l2 penalty")->capture_default_str();
  compare->add_option("--out", c_out, "Output CSV (stdout when omitted)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo coverage study at the first post-treatment period");
  DataFlags s_data;
  std::vector<std::string> s_datasets;
  int64_t s_reps = 500;
  uint64_t s_seed = 7;
  double s_energy = 0.999;
  std::string s_cov = "homo", s_out, s_json;
  unsigned s_threads = 0;
  s_data.add(simulate);
  simulate->add_option("--study", s_datasets, "Additional bundled datasets (repeatable)");
  simulate->add_option("--reps", s_reps, "Replications")->capture_default_str();
  simulate->add_option("--seed", s_seed, "Base seed; replication i uses seed + i")->capture_default_str();
  simulate->add_option("--energy", s_energy, "Spectral energy threshold for r")->capture_default_str();
  simulate->add_option("--cov", s_cov, "Covariance estimator")
      ->check(CLI::IsMember({"homo", "jack", "hrk"}))
      ->capture_default_str();
  simulate->add_option("--threads", s_threads, "Worker threads (0 = all cores)")->capture_default_str();
  simulate->add_option("--out", s_out, "Table CSV path (stdout when omitted)");
  simulate->add_option("--json", s_json, "Metadata JSON path (default: --out with .json)");

  // design
  auto* design = app.add_subcommand("design", "Design-based estimands from per-cell placebo fits");
  DataFlags d_data;
  MethodFlags d_method;
  std::string d_period, d_out, d_grid;
  d_data.add(design);
  d_method.add(design, true);
  design->add_option("--period", d_period, "Treated period label (default: first post-treatment period)");
  design->add_option("--out", d_out, "Write the estimands as JSON");
  design->add_option("--grid", d_grid, "Write the placebo grid as CSV");

  // datasets
  auto* datasets = app.add_subcommand("datasets", "List bundled datasets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "panelcf: error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*analyze) {
      PanelPtr panel = a_data.load();
      pcf_analysis_options opts{};
      opts.method = a_method.build();
      opts.cov = parse_cov(a_cov);
      opts.theta = a_alpha;
      opts.interval = parse_interval(a_interval);
      pcf_solver_default(&opts.solver);
      opts.csv = a_format == "csv";
      CString out;
      check(pcf_analyze(panel.get(), &opts, &out.p));
      write_atomic(a_out, out.str());
    } else if (*compare) {
      PanelPtr panel = c_data.load();
      pcf_compare_options opts;
      pcf_compare_default(&opts);
      if (c_k) {
        if (*c_k < 1) config_error("--k must be >= 1");
        opts.k = *c_k;
      }
      opts.energy_threshold = c_energy;
      opts.lambda1 = c_l1;
      opts.lambda2 = c_l2;
      opts.simplex_lambda = c_lambda;
      CString out;
      check(pcf_compare_csv(panel.get(), &opts, &out.p));
      write_atomic(c_out, out.str());
    } else if (*simulate) {
      if (s_reps < 1) config_error("--reps must be >= 1");
      std::vector<std::pair<std::string, PanelPtr>> studies;
      if (!s_data.dataset.empty() || !s_data.data.empty()) studies.emplace_back(s_data.study_name(), s_data.load());
      for (const auto& name : s_datasets) {
        pcf_panel* p = nullptr;
        check(pcf_bundled_load(name.c_str(), &p));
        studies.emplace_back(name, PanelPtr(p));
      }
      if (studies.empty()) config_error("no study given: use --dataset, --data or --study");
      std::vector<pcf_coverage> tables(studies.size());
      std::vector<const char*> names;
      std::string json = "[\n";
      for (std::size_t i = 0; i < studies.size(); ++i) {
        check(pcf_coverage_study(studies[i].second.get(), s_energy, s_reps, s_seed, parse_cov(s_cov), s_threads,
                                 &tables[i]));
        names.push_back(studies[i].first.c_str());
        CString js;
        check(pcf_coverage_json(&tables[i], studies[i].first.c_str(), &js.p));
        json += js.str();
        if (i + 1 < studies.size()) json += ",\n";
      }
      json += "]\n";
      CString csv;
      check(pcf_coverage_csv(tables.data(), names.data(), names.size(), &csv.p));
      write_atomic(s_out, csv.str());
      const std::string json_path = !s_json.empty() ? s_json : (s_out.empty() ? std::string() : with_extension(s_out, ".json"));
      if (!json_path.empty()) write_atomic(json_path, json);
    } else if (*design) {
      PanelPtr panel = d_data.load();
      const pcf_method m = d_method.build();
      int64_t n = 0, t = 0, t0 = 0;
      check(pcf_panel_shape(panel.get(), &n, &t, &t0));
      int64_t period = -1;
      if (!d_period.empty()) {
        for (int64_t j = 0; j < t; ++j) {
          if (d_period == pcf_panel_time_label(panel.get(), j)) period = j;
        }
        if (period < 0) config_error("period '" + d_period + "' not found");
      }
      pcf_design_result res{};
      CString js, grid;
      check(pcf_design(panel.get(), &m, period, &res, &js.p, d_grid.empty() ? nullptr : &grid.p));
      std::printf("time\t%.17g\t(%lld cells)\nunit\t%.17g\t(%lld cells)\nboth\t%.17g\t(%lld cells)\n",
                  res.time_estimand, static_cast<long long>(res.time_cells), res.unit_estimand,
                  static_cast<long long>(res.unit_cells), res.both_estimand, static_cast<long long>(res.both_cells));
      if (!d_out.empty()) write_atomic(d_out, js.str());
      if (!d_grid.empty()) write_atomic(d_grid, grid.str());
    } else if (*datasets) {
      CString out;
      check(pcf_datasets_json(&out.p));
      std::cout << "data directory: " << pcf_data_dir() << "\n" << out.str();
    }
  } catch (const CliError& e) {
    std::cerr << "panelcf: error: " << e.message << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "panelcf: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
