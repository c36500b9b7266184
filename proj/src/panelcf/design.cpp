#include "panelcf/design.hpp"

#include "panelcf/report.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace panelcf {

double placebo_cell(const Matrix& outcomes, Index unit, Index period, const Method& method, double rtol) {
  const Index n = outcomes.rows();
  if (unit < 0 || unit >= n) fail(ErrorCode::InvalidArgument, "unit index out of range");
  if (period < 1 || period >= outcomes.cols()) {
    fail(ErrorCode::InvalidArgument, "placebo period must have at least one earlier period");
  }
  Blocks b;
  b.y_n = outcomes.row(unit).head(period).transpose();
  b.y0.resize(n - 1, period);
  b.y_t.resize(n - 1);
  for (Index i = 0, r = 0; i < n; ++i) {
    if (i == unit) continue;
    b.y0.row(r) = outcomes.row(i).head(period);
    b.y_t(r) = outcomes(i, period);
    ++r;
  }
  b.period = period;
  const SpectralCache cache = svd_decompose(b.y0, rtol);
  if (cache.rank == 0) return 0.0;
  if (const auto* p = std::get_if<Pcr>(&method)) {
    if (p->k < 1) fail(ErrorCode::KOutOfRange, "k must be >= 1");
    return *fit_pcr(b, cache, std::min(p->k, cache.rank)).point_hz;
  }
  if (!std::holds_alternative<OlsMinNorm>(method)) {
    fail(ErrorCode::UnsupportedMethod, "placebo grid supports ols and pcr only");
  }
  return *fit_ols_minnorm(b, cache).point_hz;
}

PlaceboGrid placebo_fit_grid(const PanelData& panel, const Method& method, double rtol) {
  if (!std::holds_alternative<OlsMinNorm>(method) && !std::holds_alternative<Pcr>(method)) {
    fail(ErrorCode::UnsupportedMethod, "placebo grid supports ols and pcr only");
  }
  const Index n = panel.n();
  const Index t = panel.t();
  PlaceboGrid g;
  g.fitted = Matrix::Constant(n, t, std::numeric_limits<double>::quiet_NaN());
  g.valid.setConstant(n, t, false);
  g.unit_labels = panel.unit_labels;
  g.time_labels = panel.time_labels;
  g.method = method;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 1; j < t; ++j) {
      g.fitted(i, j) = placebo_cell(panel.outcomes, i, j, method, rtol);
      g.valid(i, j) = true;
    }
  }
  return g;
}

std::string to_string(DesignSource s) {
  switch (s) {
    case DesignSource::Time: return "time";
    case DesignSource::Unit: return "unit";
    case DesignSource::Both: return "both";
  }
  return "unknown";
}

DesignEstimate design_estimand(const PlaceboGrid& grid, DesignSource source, Index treated_unit,
                               Index treated_period) {
  const Index n = grid.fitted.rows();
  const Index t = grid.fitted.cols();
  if (treated_unit < 0 || treated_unit >= n || treated_period < 0 || treated_period >= t) {
    fail(ErrorCode::InvalidArgument, "treated cell outside the grid");
  }
  Index i_lo = 0, i_hi = n, t_lo = 0, t_hi = treated_period + 1;
  if (source == DesignSource::Time) {
    i_lo = treated_unit;
    i_hi = treated_unit + 1;
  } else if (source == DesignSource::Unit) {
    t_lo = treated_period;
  }
  DesignEstimate e;
  double sum = 0.0;
  for (Index i = i_lo; i < i_hi; ++i) {
    for (Index j = t_lo; j < t_hi; ++j) {
      if (!grid.valid(i, j)) continue;
      sum += grid.fitted(i, j);
      ++e.cells;
    }
  }
  if (e.cells == 0) fail(ErrorCode::EmptyAverage, to_string(source) + " estimand has no valid cells");
  e.value = sum / static_cast<double>(e.cells);
  return e;
}

std::string grid_csv(const PlaceboGrid& grid) {
  std::ostringstream os;
  os << "unit,time,fitted,valid\n";
  for (Index i = 0; i < grid.fitted.rows(); ++i) {
    for (Index j = 0; j < grid.fitted.cols(); ++j) {
      os << csv_field(grid.unit_labels[i]) << ',' << csv_field(grid.time_labels[j]) << ',';
      if (grid.valid(i, j)) os << format_double(grid.fitted(i, j));
      os << ',' << (grid.valid(i, j) ? "true" : "false") << '\n';
    }
  }
  return os.str();
}

}  // namespace panelcf
