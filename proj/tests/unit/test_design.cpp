#include "doctest.h"

#include "panelcf/core.hpp"
#include "panelcf/design.hpp"
#include "panelcf/error.hpp"
#include "panelcf/estimators.hpp"
#include "test_support.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

using namespace panelcf;
using namespace pcftest;

namespace {

PanelData panel_from(const Matrix& m, Index t0) {
  std::vector<std::string> units, times;
  for (Index i = 0; i < m.rows(); ++i) units.push_back("u" + std::to_string(i));
  for (Index j = 0; j < m.cols(); ++j) times.push_back(std::to_string(2000 + j));
  return make_panel(m, units, times, t0);
}

}  // namespace

TEST_SUITE("design") {

TEST_CASE("2x2 hand value") {
  Matrix m(2, 2);
  m << 3.0, 7.0, 2.0, 5.0;
  const auto grid = placebo_fit_grid(panel_from(m, 1), OlsMinNorm{});
  CHECK(!grid.valid(0, 0));
  CHECK(!grid.valid(1, 0));
  CHECK(std::isnan(grid.fitted(0, 0)));
  CHECK(grid.valid(0, 1));
  CHECK(grid.fitted(0, 1) == doctest::Approx(3.0 * 5.0 / 2.0));
  CHECK(grid.fitted(1, 1) == doctest::Approx(2.0 * 7.0 / 3.0));

  // time estimand on the treated row (unit 1) is its single valid cell
  const auto t = design_estimand(grid, DesignSource::Time, 1, 1);
  CHECK(t.cells == 1);
  CHECK(t.value == doctest::Approx(2.0 * 7.0 / 3.0));
  const auto u = design_estimand(grid, DesignSource::Unit, 1, 1);
  CHECK(u.cells == 2);
  CHECK(u.value == doctest::Approx(0.5 * (7.5 + 14.0 / 3.0)));
}

TEST_CASE("realised cell matches the estimator on the same blocks") {
  std::mt19937_64 g(103);
  const Matrix m = gaussian(g, 6, 8);
  const auto p = panel_from(m, 7);
  const double cell = placebo_cell(m, 5, 7, OlsMinNorm{});
  const auto b = split_blocks(p, 7);
  CHECK(cell == doctest::Approx(fit_ols_minnorm(b, svd_decompose(b.y0)).point()).epsilon(1e-12));
  const double cell_k = placebo_cell(m, 5, 7, Pcr{2});
  CHECK(cell_k == doctest::Approx(fit_pcr(b, svd_decompose(b.y0), 2).point()).epsilon(1e-12));
}

TEST_CASE("grid cells agree with independent dense least squares") {
  std::mt19937_64 g(107);
  const Matrix m = gaussian(g, 5, 7);
  const auto grid = placebo_fit_grid(panel_from(m, 3), OlsMinNorm{});
  for (Index i = 0; i < 5; ++i) {
    for (Index t = 1; t < 7; ++t) {
      Matrix y0(4, t);
      Vector y_t(4);
      for (Index r = 0, k = 0; r < 5; ++r) {
        if (r == i) continue;
        y0.row(k) = m.row(r).head(t);
        y_t(k++) = m(r, t);
      }
      const Vector a = y0.completeOrthogonalDecomposition().solve(y_t);
      const double oracle = m.row(i).head(t).dot(a);
      CHECK(grid.valid(i, t));
      CHECK(std::abs(grid.fitted(i, t) - oracle) <= 1e-9 * (1.0 + std::abs(oracle)));
    }
  }
}

TEST_CASE("constant panel") {
  const Matrix m = Matrix::Constant(4, 5, 2.5);
  const auto grid = placebo_fit_grid(panel_from(m, 2), OlsMinNorm{});
  for (auto s : {DesignSource::Time, DesignSource::Unit, DesignSource::Both}) {
    CHECK(design_estimand(grid, s, 3, 4).value == doctest::Approx(2.5));
  }
  const auto gk = placebo_fit_grid(panel_from(m, 2), Pcr{3});
  CHECK(design_estimand(gk, DesignSource::Both, 3, 4).value == doctest::Approx(2.5));
}

TEST_CASE("zero donor block gives zero and estimands follow") {
  Matrix m = Matrix::Zero(3, 3);
  m(2, 2) = 1.0;
  const auto grid = placebo_fit_grid(panel_from(m, 2), OlsMinNorm{});
  CHECK(grid.fitted(0, 1) == 0.0);
  CHECK(design_estimand(grid, DesignSource::Both, 2, 2).cells == 6);
}

TEST_CASE("Both equals the validity-weighted average of row averages") {
  std::mt19937_64 g(109);
  const Matrix m = gaussian(g, 5, 6);
  const auto grid = placebo_fit_grid(panel_from(m, 3), OlsMinNorm{});
  const Index tp = 4;
  double num = 0.0;
  Index den = 0;
  for (Index i = 0; i < 5; ++i) {
    double row = 0.0;
    Index cnt = 0;
    for (Index t = 0; t <= tp; ++t) {
      if (!grid.valid(i, t)) continue;
      row += grid.fitted(i, t);
      ++cnt;
    }
    num += cnt * (row / cnt);
    den += cnt;
  }
  const auto both = design_estimand(grid, DesignSource::Both, 4, tp);
  CHECK(both.cells == den);
  CHECK(std::abs(both.value - num / den) < 1e-12);
}

TEST_CASE("empty average") {
  Matrix m = Matrix::Ones(3, 3);
  const auto grid = placebo_fit_grid(panel_from(m, 1), OlsMinNorm{});
  try {
    design_estimand(grid, DesignSource::Time, 2, 0);
    FAIL("expected EmptyAverage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyAverage);
  }
}

TEST_CASE("grid csv") {
  Matrix m(2, 2);
  m << 3.0, 7.0, 2.0, 5.0;
  const auto grid = placebo_fit_grid(panel_from(m, 1), OlsMinNorm{});
  std::istringstream in(grid_csv(grid));
  std::string line;
  std::getline(in, line);
  CHECK(line == "unit,time,fitted,valid");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("california grid") {
  auto p = try_dataset("california");
  REQUIRE(p.has_value());
  const auto grid = placebo_fit_grid(*p, OlsMinNorm{});
  CHECK(grid.fitted.rows() == 39);
  CHECK(grid.fitted.cols() == 31);
  CHECK(grid.valid.col(0).count() == 0);
  CHECK(grid.valid.rightCols(30).all());
  for (auto s : {DesignSource::Time, DesignSource::Unit, DesignSource::Both}) {
    CHECK(std::isfinite(design_estimand(grid, s, 38, 18).value));
  }
}

}  // TEST_SUITE
