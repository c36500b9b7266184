#pragma once

#include "panelcf/core.hpp"
#include "panelcf/estimators.hpp"

#include <string>
#include <vector>

namespace panelcf {

// Per-cell placebo fits Y*_it(0): unit i plays the treated unit at period t,
// using every other unit's history before t, its own history, and the others
// at t. Cells in the first period have no history and are masked out.
struct PlaceboGrid {
  Matrix fitted;  // N x T, NaN where invalid
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
  std::vector<std::string> unit_labels;
  std::vector<std::string> time_labels;
  Method method = OlsMinNorm{};
};

// OLS or PCR; PCR uses k_eff = min(k, rank of the cell's donor block).
PlaceboGrid placebo_fit_grid(const PanelData& panel, const Method& method, double rtol = kDefaultRtol);

// Single cell, same conventions. `period` is 0-based and must be >= 1.
double placebo_cell(const Matrix& outcomes, Index unit, Index period, const Method& method,
                    double rtol = kDefaultRtol);

enum class DesignSource { Time, Unit, Both };
std::string to_string(DesignSource s);

struct DesignEstimate {
  double value = 0.0;
  Index cells = 0;  // number of valid cells averaged
};

// Time: treated unit's row over valid t <= treated_period.
// Unit: column treated_period over all units.
// Both: every valid cell with t <= treated_period.
DesignEstimate design_estimand(const PlaceboGrid& grid, DesignSource source, Index treated_unit,
                               Index treated_period);

// Long format: unit,time,fitted,valid
std::string grid_csv(const PlaceboGrid& grid);

}  // namespace panelcf
