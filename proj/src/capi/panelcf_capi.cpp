#include "panelcf/panelcf.h"

#include "panelcf/core.hpp"
#include "panelcf/dataset.hpp"
#include "panelcf/design.hpp"
#include "panelcf/error.hpp"
#include "panelcf/estimators.hpp"
#include "panelcf/inference.hpp"
#include "panelcf/panel_io.hpp"
#include "panelcf/report.hpp"
#include "panelcf/sim.hpp"

#include "json.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

struct pcf_panel {
  panelcf::PanelData data;
  std::string dataset;
  std::string path;
  panelcf::PanelSchema schema;
  std::string treated;
};

namespace {

using namespace panelcf;

thread_local std::string g_last_error;

static_assert(static_cast<int>(PCF_E_DEGENERATE_DGP) == static_cast<int>(ErrorCode::DegenerateDgp) + 1,
              "pcf_status must mirror ErrorCode");

pcf_status status_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return PCF_E_INVALID_ARGUMENT;
    case ErrorCode::Io: return PCF_E_IO;
    case ErrorCode::Parse: return PCF_E_PARSE;
    case ErrorCode::MissingCell: return PCF_E_MISSING_CELL;
    case ErrorCode::DuplicateCell: return PCF_E_DUPLICATE_CELL;
    case ErrorCode::UnknownTreatedUnit: return PCF_E_UNKNOWN_TREATED_UNIT;
    case ErrorCode::T0OutOfRange: return PCF_E_T0_OUT_OF_RANGE;
    case ErrorCode::NonFiniteInput: return PCF_E_NON_FINITE_INPUT;
    case ErrorCode::PeriodBeforeTreatment: return PCF_E_PERIOD_BEFORE_TREATMENT;
    case ErrorCode::KOutOfRange: return PCF_E_K_OUT_OF_RANGE;
    case ErrorCode::NonPositiveLambda: return PCF_E_NON_POSITIVE_LAMBDA;
    case ErrorCode::UnsupportedMethod: return PCF_E_UNSUPPORTED_METHOD;
    case ErrorCode::DimensionMismatch: return PCF_E_DIMENSION_MISMATCH;
    case ErrorCode::NotConverged: return PCF_E_NOT_CONVERGED;
    case ErrorCode::DegenerateSide: return PCF_E_DEGENERATE_SIDE;
    case ErrorCode::HrkUndefined: return PCF_E_HRK_UNDEFINED;
    case ErrorCode::NegativeVariance: return PCF_E_NEGATIVE_VARIANCE;
    case ErrorCode::EmptyAverage: return PCF_E_EMPTY_AVERAGE;
    case ErrorCode::DegenerateDgp: return PCF_E_DEGENERATE_DGP;
  }
  return PCF_E_INTERNAL;
}

template <class F>
pcf_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return PCF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PCF_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PCF_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PCF_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Direction to_direction(pcf_direction d) { return d == PCF_DIR_VT ? Direction::Vt : Direction::Hz; }

CovKind to_cov(pcf_cov_kind c) {
  switch (c) {
    case PCF_COV_HOMO: return CovKind::Homoskedastic;
    case PCF_COV_JACK: return CovKind::Jackknife;
    case PCF_COV_HRK: return CovKind::Hrk;
  }
  fail(ErrorCode::InvalidArgument, "unknown covariance kind");
}

SolverConfig to_solver(const pcf_solver* s) {
  SolverConfig cfg;
  if (s) {
    cfg.max_iters = s->max_iters;
    cfg.tol = s->tol;
  }
  validate(cfg);
  return cfg;
}

struct ResolvedMethod {
  Method method;
  std::string k_rule = "user";
};

ResolvedMethod to_method(const pcf_method* m, const PanelData& panel) {
  need(m, "method");
  const Direction d = to_direction(m->direction);
  switch (m->kind) {
    case PCF_METHOD_OLS: return {OlsMinNorm{}};
    case PCF_METHOD_PCR: {
      if (m->k < 0) fail(ErrorCode::KOutOfRange, "k must be >= 1");
      if (m->k > 0) return {Pcr{m->k}};
      const SpectralCache c = svd_decompose(split_blocks(panel, panel.t0).y0);
      return {Pcr{energy_rank(c, m->energy_threshold)}, "energy"};
    }
    case PCF_METHOD_RIDGE: return {Ridge{m->lambda2}};
    case PCF_METHOD_LASSO: return {Lasso{m->lambda1, d}};
    case PCF_METHOD_ENET: return {ElasticNet{m->lambda1, m->lambda2, d}};
    case PCF_METHOD_SIMPLEX: return {Simplex{m->lambda, d}};
  }
  fail(ErrorCode::UnsupportedMethod, "unknown method kind");
}

CoverageTable from_c(const pcf_coverage& c) {
  CoverageTable t;
  for (int k = 0; k < 3; ++k) {
    for (int e = 0; e < 3; ++e) {
      t.cp[k][e] = c.cp[k][e];
      t.al[k][e] = c.al[k][e];
    }
    t.unusable[k] = c.unusable[k];
  }
  t.reps = c.reps;
  t.seed = c.seed;
  t.r = c.r;
  t.sigma2_t = c.sigma2_t;
  t.sigma2_n = c.sigma2_n;
  t.energy_threshold = c.energy_threshold;
  t.theta = c.theta;
  t.cov = to_cov(c.cov);
  t.fallback_count = c.fallback_count;
  t.mean_jack_bias_hz = c.jack_bias_hz;
  t.mean_jack_bias_vt = c.jack_bias_vt;
  return t;
}

}  // namespace

extern "C" {

int pcf_status_exit_code(pcf_status status) {
  if (status == PCF_OK) return 0;
  if (status == PCF_E_INTERNAL) return 1;
  switch (category_of(static_cast<ErrorCode>(static_cast<int>(status) - 1))) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Numerical: return 4;
  }
  return 1;
}

const char* pcf_status_name(pcf_status status) {
  if (status == PCF_OK) return "Ok";
  if (status == PCF_E_INTERNAL || status < PCF_OK || status > PCF_E_INTERNAL) return "Internal";
  return to_string(static_cast<ErrorCode>(static_cast<int>(status) - 1)).data();
}

const char* pcf_last_error_message(void) { return g_last_error.c_str(); }

const char* pcf_version(void) { return PANELCF_VERSION; }

void pcf_string_free(char* s) { std::free(s); }

void pcf_method_default(pcf_method* m, pcf_method_kind kind) {
  if (!m) return;
  m->kind = kind;
  m->k = 0;
  m->energy_threshold = 0.999;
  m->lambda1 = 1.0;
  m->lambda2 = 1.0;
  m->lambda = 1e-6;
  m->direction = PCF_DIR_HZ;
}

void pcf_solver_default(pcf_solver* s) {
  if (!s) return;
  const SolverConfig cfg;
  s->max_iters = cfg.max_iters;
  s->tol = cfg.tol;
}

pcf_status pcf_panel_load(const char* path, const pcf_schema* schema, const char* treated, int64_t t0,
                          pcf_panel** out) {
  return guarded([&] {
    need(path, "path");
    need(schema, "schema");
    need(treated, "treated");
    need(out, "out");
    *out = nullptr;
    auto p = std::make_unique<pcf_panel>();
    if (schema->unit_col) p->schema.unit_col = schema->unit_col;
    if (schema->time_col) p->schema.time_col = schema->time_col;
    if (schema->value_col) p->schema.value_col = schema->value_col;
    const char delim = schema->delimiter ? schema->delimiter : ',';
    p->data = load_panel_file(path, p->schema, treated, t0, delim);
    p->path = path;
    p->treated = treated;
    *out = p.release();
  });
}

pcf_status pcf_panel_from_matrix(const double* values, int64_t n, int64_t t, int64_t t0, pcf_panel** out) {
  return guarded([&] {
    need(values, "values");
    need(out, "out");
    *out = nullptr;
    if (n < 2 || t < 2) fail(ErrorCode::InvalidArgument, "matrix must be at least 2 x 2");
    Matrix y = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values, n, t);
    std::vector<std::string> units, times;
    for (int64_t i = 0; i < n; ++i) units.push_back("unit" + std::to_string(i + 1));
    for (int64_t j = 0; j < t; ++j) times.push_back(std::to_string(j + 1));
    auto p = std::make_unique<pcf_panel>();
    p->treated = units.back();
    p->data = make_panel(std::move(y), std::move(units), std::move(times), t0);
    *out = p.release();
  });
}

pcf_status pcf_bundled_load(const char* name, pcf_panel** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = nullptr;
    const DatasetInfo info = find_dataset(name, data_dir());
    auto p = std::make_unique<pcf_panel>();
    p->data = load_dataset(info);
    p->dataset = info.name;
    p->path = info.path;
    p->schema = info.schema;
    p->treated = info.treated;
    *out = p.release();
  });
}

void pcf_panel_free(pcf_panel* panel) { delete panel; }

pcf_status pcf_panel_shape(const pcf_panel* panel, int64_t* n, int64_t* t, int64_t* t0) {
  return guarded([&] {
    need(panel, "panel");
    if (n) *n = panel->data.n();
    if (t) *t = panel->data.t();
    if (t0) *t0 = panel->data.t0;
  });
}

const char* pcf_panel_unit_label(const pcf_panel* panel, int64_t i) {
  if (!panel || i < 0 || i >= panel->data.n()) return nullptr;
  return panel->data.unit_labels[static_cast<std::size_t>(i)].c_str();
}

const char* pcf_panel_time_label(const pcf_panel* panel, int64_t j) {
  if (!panel || j < 0 || j >= panel->data.t()) return nullptr;
  return panel->data.time_labels[static_cast<std::size_t>(j)].c_str();
}

const char* pcf_panel_digest(const pcf_panel* panel) { return panel ? panel->data.source_digest.c_str() : nullptr; }

pcf_status pcf_panel_values(const pcf_panel* panel, double* values) {
  return guarded([&] {
    need(panel, "panel");
    need(values, "values");
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values, panel->data.n(),
                                                                                      panel->data.t()) =
        panel->data.outcomes;
  });
}

const char* pcf_data_dir(void) {
  thread_local std::string dir;
  dir = data_dir();
  return dir.c_str();
}

pcf_status pcf_datasets_json(char** out) {
  return guarded([&] {
    need(out, "out");
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& d : list_datasets(data_dir())) {
      arr.push_back({{"name", d.name},
                     {"file", d.file},
                     {"available", d.available},
                     {"N", d.n},
                     {"T", d.t},
                     {"t0", d.t0},
                     {"treated", d.treated},
                     {"description", d.description},
                     {"source", d.source}});
    }
    *out = dup_string(arr.dump(2) + "\n");
  });
}

pcf_status pcf_fit_points(const pcf_panel* panel, int64_t period, const pcf_method* method,
                          const pcf_solver* solver, double* point_hz, double* point_vt) {
  return guarded([&] {
    need(panel, "panel");
    const SolverConfig cfg = to_solver(solver);
    const Method m = to_method(method, panel->data).method;
    const Blocks b = split_blocks(panel->data, period);
    const SpectralCache c = svd_decompose(b.y0);
    double hz = 0.0, vt = 0.0;
    if (is_symmetric(m)) {
      const FitResult f = fit(b, c, m, cfg);
      hz = *f.point_hz;
      vt = *f.point_vt;
    } else {
      hz = *fit(b, c, with_direction(m, Direction::Hz), cfg).point_hz;
      vt = *fit(b, c, with_direction(m, Direction::Vt), cfg).point_vt;
    }
    if (point_hz) *point_hz = hz;
    if (point_vt) *point_vt = vt;
  });
}

pcf_status pcf_analyze_period(const pcf_panel* panel, int64_t period, const pcf_method* method, pcf_cov_kind cov,
                              double theta, pcf_interval_report* out) {
  return guarded([&] {
    need(panel, "panel");
    need(out, "out");
    const Method m = to_method(method, panel->data).method;
    const IntervalReport r = analyze_period(split_blocks(panel->data, period), m, to_cov(cov), theta);
    pcf_interval_report o{};
    o.point = r.point;
    o.point_hz = r.point_hz;
    o.point_vt = r.point_vt;
    o.v_hz = r.v_hz;
    o.v_vt = r.v_vt;
    o.v_mix = r.v_mix;
    o.v_mix_raw = r.v_mix_raw;
    o.trace_term = r.trace_term;
    o.v_mix_min = r.bounds.v_mix_min;
    o.v_mix_max = r.bounds.v_mix_max;
    o.theta = r.theta;
    o.z = r.z;
    if (r.ci_hz) {
      o.has_ci_hz = 1;
      o.ci_hz_lo = r.ci_hz->lo;
      o.ci_hz_hi = r.ci_hz->hi;
    }
    if (r.ci_vt) {
      o.has_ci_vt = 1;
      o.ci_vt_lo = r.ci_vt->lo;
      o.ci_vt_hi = r.ci_vt->hi;
    }
    if (r.ci_mix) {
      o.has_ci_mix = 1;
      o.ci_mix_lo = r.ci_mix->lo;
      o.ci_mix_hi = r.ci_mix->hi;
    }
    o.mix_fallback_used = r.mix_fallback_used;
    o.hz_degenerate = r.hz_degenerate;
    o.vt_degenerate = r.vt_degenerate;
    o.hz_negative_variance = r.hz_negative_variance;
    o.vt_negative_variance = r.vt_negative_variance;
    o.rank_used = r.rank_used;
    *out = o;
  });
}

pcf_status pcf_analyze(const pcf_panel* panel, const pcf_analysis_options* opts, char** out) {
  return guarded([&] {
    need(panel, "panel");
    need(opts, "options");
    need(out, "out");
    AnalysisConfig cfg;
    cfg.dataset = panel->dataset;
    cfg.data_path = panel->path;
    cfg.schema = panel->schema;
    cfg.treated = panel->treated;
    cfg.t0 = panel->data.t0;
    const ResolvedMethod rm = to_method(&opts->method, panel->data);
    cfg.method = rm.method;
    cfg.k_rule = rm.k_rule;
    cfg.energy_threshold = opts->method.energy_threshold;
    cfg.cov = to_cov(opts->cov);
    cfg.theta = opts->theta;
    switch (opts->interval) {
      case PCF_INTERVAL_HZ: cfg.interval = IntervalSelect::Hz; break;
      case PCF_INTERVAL_VT: cfg.interval = IntervalSelect::Vt; break;
      case PCF_INTERVAL_MIXED: cfg.interval = IntervalSelect::Mixed; break;
      case PCF_INTERVAL_ALL: cfg.interval = IntervalSelect::All; break;
      default: fail(ErrorCode::InvalidArgument, "unknown interval selection");
    }
    cfg.solver = to_solver(&opts->solver);
    if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must be in (0, 1)");
    const AnalysisRun run = run_analysis(panel->data, cfg);
    *out = dup_string(opts->csv ? analysis_csv(run) : analysis_json(run));
  });
}

void pcf_compare_default(pcf_compare_options* o) {
  if (!o) return;
  o->k = 0;
  o->energy_threshold = 0.999;
  o->lambda1 = 1.0;
  o->lambda2 = 1.0;
  o->simplex_lambda = 1e-6;
  pcf_solver_default(&o->solver);
}

pcf_status pcf_compare_csv(const pcf_panel* panel, const pcf_compare_options* opts, char** out) {
  return guarded([&] {
    need(panel, "panel");
    need(opts, "options");
    need(out, "out");
    CompareConfig cfg;
    cfg.k = opts->k;
    cfg.energy_threshold = opts->energy_threshold;
    cfg.lambda1 = opts->lambda1;
    cfg.lambda2 = opts->lambda2;
    cfg.simplex_lambda = opts->simplex_lambda;
    cfg.solver = to_solver(&opts->solver);
    if (cfg.k < 0) fail(ErrorCode::KOutOfRange, "k must be >= 1");
    *out = dup_string(compare_csv(compare_estimators(panel->data, cfg)));
  });
}

pcf_status pcf_coverage_study(const pcf_panel* panel, double energy_threshold, int64_t reps, uint64_t seed,
                              pcf_cov_kind cov, unsigned threads, pcf_coverage* out) {
  return guarded([&] {
    need(panel, "panel");
    need(out, "out");
    if (reps < 1) fail(ErrorCode::InvalidArgument, "reps must be >= 1");
    const DgpSpec dgp = build_dgp(panel->data, energy_threshold);
    const CoverageTable t = coverage_study(dgp, reps, seed, to_cov(cov), 0.05, threads);
    pcf_coverage c{};
    for (int k = 0; k < 3; ++k) {
      for (int e = 0; e < 3; ++e) {
        c.cp[k][e] = t.cp[k][e];
        c.al[k][e] = t.al[k][e];
      }
      c.unusable[k] = t.unusable[k];
    }
    c.reps = t.reps;
    c.seed = t.seed;
    c.r = t.r;
    c.sigma2_t = t.sigma2_t;
    c.sigma2_n = t.sigma2_n;
    c.energy_threshold = t.energy_threshold;
    c.theta = t.theta;
    c.cov = cov;
    c.fallback_count = t.fallback_count;
    c.jack_bias_hz = t.mean_jack_bias_hz;
    c.jack_bias_vt = t.mean_jack_bias_vt;
    *out = c;
  });
}

pcf_status pcf_coverage_json(const pcf_coverage* table, const char* study, char** out) {
  return guarded([&] {
    need(table, "table");
    need(out, "out");
    *out = dup_string(coverage_json(from_c(*table), study ? study : ""));
  });
}

pcf_status pcf_coverage_csv(const pcf_coverage* tables, const char* const* studies, size_t count, char** out) {
  return guarded([&] {
    need(tables, "tables");
    need(studies, "studies");
    need(out, "out");
    std::vector<std::pair<std::string, CoverageTable>> rows;
    for (size_t i = 0; i < count; ++i) rows.emplace_back(studies[i] ? studies[i] : "", from_c(tables[i]));
    *out = dup_string(coverage_csv(rows));
  });
}

pcf_status pcf_design(const pcf_panel* panel, const pcf_method* method, int64_t treated_period,
                      pcf_design_result* out, char** json, char** grid_csv_out) {
  return guarded([&] {
    need(panel, "panel");
    need(out, "out");
    const Method m = to_method(method, panel->data).method;
    const PlaceboGrid grid = placebo_fit_grid(panel->data, m);
    const Index period = treated_period < 0 ? panel->data.t0 : treated_period;
    const DesignSummary s = design_summary(grid, panel->data.treated_unit, period);
    *out = {s.time.value, s.unit.value, s.both.value, s.time.cells, s.unit.cells, s.both.cells};
    std::string j = json ? design_json(s, grid, panel->data.source_digest) : std::string();
    std::string g = grid_csv_out ? grid_csv(grid) : std::string();
    if (json) *json = dup_string(j);
    if (grid_csv_out) *grid_csv_out = dup_string(g);
  });
}

}  // extern "C"
