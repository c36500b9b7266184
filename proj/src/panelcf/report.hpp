#pragma once

// Analysis driver and serialisation of results (JSON and long-format CSV).

#include "panelcf/core.hpp"
#include "panelcf/design.hpp"
#include "panelcf/estimators.hpp"
#include "panelcf/inference.hpp"
#include "panelcf/panel_io.hpp"
#include "panelcf/sim.hpp"

#include <optional>
#include <string>
#include <vector>

namespace panelcf {

inline constexpr const char* kAnalysisSchema = "panelcf.analysis/1";
inline constexpr const char* kCoverageSchema = "panelcf.coverage/1";
inline constexpr const char* kDesignSchema = "panelcf.design/1";

// Shortest round-trip decimal; empty for NaN.
std::string format_double(double x);
// Quotes when the field holds a comma, quote or newline.
std::string csv_field(const std::string& s);

enum class IntervalSelect { Hz, Vt, Mixed, All };
std::string to_string(IntervalSelect s);

struct AnalysisConfig {
  std::string dataset;  // bundled name, empty for --data
  std::string data_path;
  PanelSchema schema;
  std::string treated;
  Index t0 = 0;
  Method method = OlsMinNorm{};
  std::string k_rule = "user";  // or "energy"
  double energy_threshold = 0.999;
  CovKind cov = CovKind::Homoskedastic;
  double theta = 0.05;
  IntervalSelect interval = IntervalSelect::All;
  double rtol = kDefaultRtol;
  SolverConfig solver;
};

struct PeriodRecord {
  std::string period_label;
  Index period = 0;
  double point_hz = 0.0;
  double point_vt = 0.0;
  std::optional<IntervalReport> report;  // absent when the method has no intervals
};

struct AnalysisRun {
  AnalysisConfig config;
  std::vector<PeriodRecord> records;
  std::string version;
  std::string input_digest;
  Index n = 0;
  Index t = 0;
  std::vector<std::string> unit_labels;
};

// One record per post-treatment period, in time order.
AnalysisRun run_analysis(const PanelData& panel, const AnalysisConfig& config);

std::string analysis_json(const AnalysisRun& run);
std::string analysis_csv(const AnalysisRun& run);
std::string interval_report_json(const IntervalReport& r, IntervalSelect select = IntervalSelect::All);

struct CompareRow {
  std::string period_label;
  std::string method;
  Direction direction = Direction::Hz;
  double point = 0.0;
};

struct CompareConfig {
  Index k = 0;  // 0 = energy rule
  double energy_threshold = 0.999;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double simplex_lambda = 1e-6;
  double rtol = kDefaultRtol;
  SolverConfig solver;
};

// All six estimators, both directions, every post-treatment period.
std::vector<CompareRow> compare_estimators(const PanelData& panel, const CompareConfig& cfg);
std::string compare_csv(const std::vector<CompareRow>& rows);

std::string coverage_json(const CoverageTable& t, const std::string& study);
// Two rows (CP, AL), columns ordered interval-major as in the usual table.
std::string coverage_csv(const std::vector<std::pair<std::string, CoverageTable>>& studies);

struct DesignSummary {
  DesignEstimate time;
  DesignEstimate unit;
  DesignEstimate both;
  Index treated_unit = 0;
  Index treated_period = 0;
};

DesignSummary design_summary(const PlaceboGrid& grid, Index treated_unit, Index treated_period);
std::string design_json(const DesignSummary& s, const PlaceboGrid& grid, const std::string& input_digest);

}  // namespace panelcf
