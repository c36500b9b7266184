#ifndef PANELCF_PANELCF_H
#define PANELCF_PANELCF_H

/* C interface to the panelcf counterfactual toolkit.
 *
 * Every fallible call returns a pcf_status. On failure the message is kept
 * per thread and can be read with pcf_last_error_message() until the next
 * call on the same thread. Strings returned through char** out-parameters
 * are owned by the caller and released with pcf_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PANELCF_BUILDING_LIBRARY)
#define PCF_API __declspec(dllexport)
#else
#define PCF_API __declspec(dllimport)
#endif
#else
#define PCF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pcf_panel pcf_panel;

typedef enum pcf_status {
  PCF_OK = 0,
  PCF_E_INVALID_ARGUMENT,
  PCF_E_IO,
  PCF_E_PARSE,
  PCF_E_MISSING_CELL,
  PCF_E_DUPLICATE_CELL,
  PCF_E_UNKNOWN_TREATED_UNIT,
  PCF_E_T0_OUT_OF_RANGE,
  PCF_E_NON_FINITE_INPUT,
  PCF_E_PERIOD_BEFORE_TREATMENT,
  PCF_E_K_OUT_OF_RANGE,
  PCF_E_NON_POSITIVE_LAMBDA,
  PCF_E_UNSUPPORTED_METHOD,
  PCF_E_DIMENSION_MISMATCH,
  PCF_E_NOT_CONVERGED,
  PCF_E_DEGENERATE_SIDE,
  PCF_E_HRK_UNDEFINED,
  PCF_E_NEGATIVE_VARIANCE,
  PCF_E_EMPTY_AVERAGE,
  PCF_E_DEGENERATE_DGP,
  PCF_E_INTERNAL
} pcf_status;

/* 0 for PCF_OK, 2 configuration, 3 data, 4 numerical, 1 internal. */
PCF_API int pcf_status_exit_code(pcf_status status);
PCF_API const char* pcf_status_name(pcf_status status);
PCF_API const char* pcf_last_error_message(void);
PCF_API const char* pcf_version(void);
PCF_API void pcf_string_free(char* s);

typedef enum pcf_method_kind {
  PCF_METHOD_OLS = 0,
  PCF_METHOD_PCR,
  PCF_METHOD_RIDGE,
  PCF_METHOD_LASSO,
  PCF_METHOD_ENET,
  PCF_METHOD_SIMPLEX
} pcf_method_kind;

typedef enum pcf_direction { PCF_DIR_HZ = 0, PCF_DIR_VT } pcf_direction;
typedef enum pcf_cov_kind { PCF_COV_HOMO = 0, PCF_COV_JACK, PCF_COV_HRK } pcf_cov_kind;
typedef enum pcf_interval_select {
  PCF_INTERVAL_HZ = 0,
  PCF_INTERVAL_VT,
  PCF_INTERVAL_MIXED,
  PCF_INTERVAL_ALL
} pcf_interval_select;

typedef struct pcf_method {
  pcf_method_kind kind;
  int64_t k;               /* PCR rank; 0 selects the spectral-energy rule */
  double energy_threshold; /* used when k == 0 */
  double lambda1;
  double lambda2;
  double lambda; /* simplex ridge term */
  pcf_direction direction;
} pcf_method;

/* Defaults: k by the 0.999 energy rule, lambda1 = lambda2 = 1, simplex lambda = 1e-6, HZ. */
PCF_API void pcf_method_default(pcf_method* m, pcf_method_kind kind);

typedef struct pcf_solver {
  int64_t max_iters;
  double tol;
} pcf_solver;

PCF_API void pcf_solver_default(pcf_solver* s);

typedef struct pcf_schema {
  const char* unit_col;
  const char* time_col;
  const char* value_col;
  char delimiter;
} pcf_schema;

/* ---- panels ---- */

PCF_API pcf_status pcf_panel_load(const char* path, const pcf_schema* schema, const char* treated, int64_t t0,
                                  pcf_panel** out);
/* Row-major N x T values; the last row is the treated unit. */
PCF_API pcf_status pcf_panel_from_matrix(const double* values, int64_t n, int64_t t, int64_t t0,
                                         pcf_panel** out);
/* Loads a dataset listed in the manifest of pcf_data_dir(). */
PCF_API pcf_status pcf_bundled_load(const char* name, pcf_panel** out);
PCF_API void pcf_panel_free(pcf_panel* panel);

PCF_API pcf_status pcf_panel_shape(const pcf_panel* panel, int64_t* n, int64_t* t, int64_t* t0);
PCF_API const char* pcf_panel_unit_label(const pcf_panel* panel, int64_t i);
PCF_API const char* pcf_panel_time_label(const pcf_panel* panel, int64_t j);
/* Hex SHA-256 of the input file, empty for in-memory panels. */
PCF_API const char* pcf_panel_digest(const pcf_panel* panel);
/* Copies the N x T outcomes row-major into values (n*t doubles). */
PCF_API pcf_status pcf_panel_values(const pcf_panel* panel, double* values);

PCF_API const char* pcf_data_dir(void);
/* JSON array describing the manifest entries and whether each file is present. */
PCF_API pcf_status pcf_datasets_json(char** out);

/* ---- estimation ---- */

/* period is a 0-based column index >= t0. Asymmetric methods are fitted in
 * both directions; the direction field is ignored. */
PCF_API pcf_status pcf_fit_points(const pcf_panel* panel, int64_t period, const pcf_method* method,
                                  const pcf_solver* solver, double* point_hz, double* point_vt);

typedef struct pcf_interval_report {
  double point;
  double point_hz;
  double point_vt;
  double v_hz;
  double v_vt;
  double v_mix; /* after fallback */
  double v_mix_raw;
  double trace_term;
  double v_mix_min;
  double v_mix_max;
  double theta;
  double z;
  int has_ci_hz;
  int has_ci_vt;
  int has_ci_mix;
  double ci_hz_lo, ci_hz_hi;
  double ci_vt_lo, ci_vt_hi;
  double ci_mix_lo, ci_mix_hi;
  int mix_fallback_used;
  int hz_degenerate;
  int vt_degenerate;
  int hz_negative_variance;
  int vt_negative_variance;
  int64_t rank_used;
} pcf_interval_report;

/* OLS and PCR only. */
PCF_API pcf_status pcf_analyze_period(const pcf_panel* panel, int64_t period, const pcf_method* method,
                                      pcf_cov_kind cov, double theta, pcf_interval_report* out);

typedef struct pcf_analysis_options {
  pcf_method method;
  pcf_cov_kind cov;
  double theta;
  pcf_interval_select interval;
  pcf_solver solver;
  int csv; /* 0 = JSON, 1 = CSV */
} pcf_analysis_options;

/* Every post-treatment period, serialised. */
PCF_API pcf_status pcf_analyze(const pcf_panel* panel, const pcf_analysis_options* opts, char** out);

typedef struct pcf_compare_options {
  int64_t k; /* 0 = energy rule */
  double energy_threshold;
  double lambda1;
  double lambda2;
  double simplex_lambda;
  pcf_solver solver;
} pcf_compare_options;

PCF_API void pcf_compare_default(pcf_compare_options* o);
/* Long CSV: period,method,direction,point. */
PCF_API pcf_status pcf_compare_csv(const pcf_panel* panel, const pcf_compare_options* opts, char** out);

/* ---- simulation ---- */

typedef struct pcf_coverage {
  double cp[3][3]; /* [interval hz/vt/mix][estimand hz/vt/mix] */
  double al[3][3];
  int64_t unusable[3];
  int64_t reps;
  uint64_t seed;
  int64_t r;
  double sigma2_t;
  double sigma2_n;
  double energy_threshold;
  double theta;
  pcf_cov_kind cov;
  int64_t fallback_count;
  double jack_bias_hz;
  double jack_bias_vt;
} pcf_coverage;

/* Uses the first post-treatment period. threads = 0 picks the hardware count. */
PCF_API pcf_status pcf_coverage_study(const pcf_panel* panel, double energy_threshold, int64_t reps, uint64_t seed,
                                      pcf_cov_kind cov, unsigned threads, pcf_coverage* out);
PCF_API pcf_status pcf_coverage_json(const pcf_coverage* table, const char* study, char** out);
PCF_API pcf_status pcf_coverage_csv(const pcf_coverage* tables, const char* const* studies, size_t count,
                                    char** out);

/* ---- design-based estimands ---- */

typedef struct pcf_design_result {
  double time_estimand;
  double unit_estimand;
  double both_estimand;
  int64_t time_cells;
  int64_t unit_cells;
  int64_t both_cells;
} pcf_design_result;

/* treated_period < 0 selects the first post-treatment period. json and
 * grid_csv may be NULL. */
PCF_API pcf_status pcf_design(const pcf_panel* panel, const pcf_method* method, int64_t treated_period,
                              pcf_design_result* out, char** json, char** grid_csv);

#ifdef __cplusplus
}
#endif

#endif
