#include "doctest.h"

#include "json.hpp"
#include "panelcf/dataset.hpp"
#include "panelcf/design.hpp"
#include "panelcf/report.hpp"
#include "panelcf/sim.hpp"
#include "test_support.hpp"

#include <sstream>

using namespace panelcf;
using namespace pcftest;
using nlohmann::json;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

AnalysisConfig california_config(const Method& m) {
  AnalysisConfig c;
  c.dataset = "california";
  c.treated = "California";
  c.t0 = 18;
  c.method = m;
  return c;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("format helpers") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("analysis run on california") {
  auto p = try_dataset("california");
  REQUIRE(p.has_value());
  const auto run = run_analysis(*p, california_config(OlsMinNorm{}));
  REQUIRE(run.records.size() == 13);
  CHECK(run.records.front().period_label == "1988");
  CHECK(run.records.back().period_label == "2000");
  for (const auto& r : run.records) {
    REQUIRE(r.report.has_value());
    CHECK(r.report->vt_degenerate);
    CHECK(std::abs(r.point_hz - r.point_vt) <= 1e-8 * (1.0 + std::abs(r.point_hz)));
  }

  const json j = json::parse(analysis_json(run));
  CHECK(j["schema_version"] == kAnalysisSchema);
  CHECK(j["records"].size() == 13);
  CHECK(j["provenance"]["input_sha256"] == p->source_digest);
  CHECK(j["config"]["method"] == "ols");

  const auto csv = lines(analysis_csv(run));
  CHECK(csv.size() == 14);
  CHECK(csv[0].rfind("period,point_hz,point_vt", 0) == 0);
}

TEST_CASE("points only for ridge and asymmetric methods") {
  auto p = try_dataset("california");
  REQUIRE(p.has_value());
  const auto ridge = run_analysis(*p, california_config(Ridge{1.0}));
  CHECK(!ridge.records.front().report.has_value());
  const auto lasso = run_analysis(*p, california_config(Lasso{1.0, Direction::Hz}));
  CHECK(!lasso.records.front().report.has_value());
  CHECK(std::abs(lasso.records.front().point_hz - lasso.records.front().point_vt) > 1e-6);
  const json j = json::parse(analysis_json(lasso));
  CHECK(j["records"].size() == 13);
}

TEST_CASE("compare rows") {
  Matrix m(3, 4);
  m << 1, 2, 3, 4, 2, 1, 4, 3, 3, 5, 2, 6;
  const auto p = make_panel(m, {"a", "b", "c"}, {"1", "2", "3", "4"}, 2);
  const auto rows = compare_estimators(p, CompareConfig{});
  CHECK(rows.size() == 6 * 2 * 2);
  const auto csv = lines(compare_csv(rows));
  CHECK(csv.front() == "period,method,direction,point");
  CHECK(csv.size() == 25);
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    if (rows[i].method == "ols" || rows[i].method == "pcr" || rows[i].method == "ridge") {
      CHECK(std::abs(rows[i].point - rows[i + 1].point) <= 1e-8 * (1.0 + std::abs(rows[i].point)));
    }
  }
}

TEST_CASE("compare on california: symmetric agree, asymmetric differ") {
  auto p = try_dataset("california");
  REQUIRE(p.has_value());
  const auto rows = compare_estimators(*p, CompareConfig{});
  CHECK(rows.size() == 13u * 12u);
  int asym_differ = 0, asym = 0;
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    REQUIRE(rows[i].method == rows[i + 1].method);
    REQUIRE(rows[i].direction == Direction::Hz);
    const double d = std::abs(rows[i].point - rows[i + 1].point);
    if (rows[i].method == "ols" || rows[i].method == "pcr" || rows[i].method == "ridge") {
      CHECK(d <= 1e-8 * (1.0 + std::abs(rows[i].point)));
    } else {
      ++asym;
      asym_differ += d > 1e-6 ? 1 : 0;
    }
  }
  CHECK(asym_differ == asym);
}

TEST_CASE("coverage serialisation") {
  auto p = try_dataset("california");
  REQUIRE(p.has_value());
  const auto t = coverage_study(build_dgp(*p), 5, 7);
  const json j = json::parse(coverage_json(t, "california"));
  CHECK(j["schema_version"] == kCoverageSchema);
  CHECK(j["reps"] == 5);
  CHECK(j["seed"] == 7);
  CHECK(j["r"] == 3);
  const auto csv = lines(coverage_csv({{"california", t}, {"again", t}}));
  CHECK(csv.size() == 5);
  CHECK(csv[0].rfind("study,metric,hz_on_mu_hz", 0) == 0);
  CHECK(csv[1].rfind("california,CP,", 0) == 0);
  CHECK(csv[2].rfind("california,AL,", 0) == 0);
}

TEST_CASE("design json") {
  Matrix m(3, 4);
  m << 1, 2, 3, 4, 2, 1, 4, 3, 3, 5, 2, 6;
  const auto p = make_panel(m, {"a", "b", "c"}, {"1", "2", "3", "4"}, 2);
  const auto grid = placebo_fit_grid(p, OlsMinNorm{});
  const auto s = design_summary(grid, 2, 2);
  const json j = json::parse(design_json(s, grid, ""));
  CHECK(j["schema_version"] == kDesignSchema);
  CHECK(j["estimands"]["time"]["value"].get<double>() == doctest::Approx(s.time.value));
}

TEST_CASE("dataset manifest") {
  const auto all = list_datasets(data_dir());
  REQUIRE(all.size() == 3);
  const auto cal = find_dataset("california", data_dir());
  CHECK(cal.available);
  CHECK(cal.pcr_k == 3);
  CHECK_THROWS_AS(find_dataset("nope", data_dir()), Error);
}

}  // TEST_SUITE
