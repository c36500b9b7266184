/* Exercises the shared library through the public header only, from C. */
#include "panelcf/panelcf.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static size_t count_lines(const char* s) {
  size_t n = 0;
  for (; *s; ++s) n += *s == '\n';
  return n;
}

static void toy_panel(pcf_panel** out) {
  const double v[] = {1, 2, 3, 4, 2, 1, 4, 3, 5, 3, 2, 8, 3, 5, 2, 6};
  EXPECT(pcf_panel_from_matrix(v, 4, 4, 2, out) == PCF_OK);
}

static void test_status(void) {
  EXPECT(pcf_status_exit_code(PCF_OK) == 0);
  EXPECT(pcf_status_exit_code(PCF_E_INVALID_ARGUMENT) == 2);
  EXPECT(pcf_status_exit_code(PCF_E_MISSING_CELL) == 3);
  EXPECT(pcf_status_exit_code(PCF_E_HRK_UNDEFINED) == 4);
  EXPECT(pcf_status_exit_code(PCF_E_INTERNAL) == 1);
  EXPECT(strcmp(pcf_status_name(PCF_E_HRK_UNDEFINED), "HrkUndefined") == 0);
  EXPECT(strlen(pcf_version()) > 0);
}

static void test_matrix_panel(void) {
  pcf_panel* p = NULL;
  int64_t n, t, t0;
  double hz, vt;
  pcf_method m;
  pcf_interval_report rep;
  double values[16];
  toy_panel(&p);
  EXPECT(pcf_panel_shape(p, &n, &t, &t0) == PCF_OK);
  EXPECT(n == 4 && t == 4 && t0 == 2);
  EXPECT(pcf_panel_values(p, values) == PCF_OK);
  EXPECT(values[15] == 6.0);
  EXPECT(strcmp(pcf_panel_digest(p), "") == 0);

  pcf_method_default(&m, PCF_METHOD_OLS);
  EXPECT(pcf_fit_points(p, 2, &m, NULL, &hz, &vt) == PCF_OK);
  EXPECT(fabs(hz - vt) <= 1e-8 * (1.0 + fabs(hz)));

  pcf_method_default(&m, PCF_METHOD_LASSO);
  m.lambda1 = 0.1;
  EXPECT(pcf_fit_points(p, 2, &m, NULL, &hz, &vt) == PCF_OK);
  EXPECT(isfinite(hz) && isfinite(vt));

  pcf_method_default(&m, PCF_METHOD_PCR);
  m.k = 1;
  EXPECT(pcf_analyze_period(p, 3, &m, PCF_COV_HOMO, 0.05, &rep) == PCF_OK);
  EXPECT(rep.rank_used == 1);
  EXPECT(rep.has_ci_hz && rep.ci_hz_lo <= rep.point && rep.point <= rep.ci_hz_hi);
  EXPECT(rep.v_mix_min <= rep.v_mix_raw + 1e-10 && rep.v_mix_raw <= rep.v_mix_max + 1e-10);

  EXPECT(pcf_fit_points(p, 1, &m, NULL, &hz, &vt) == PCF_E_PERIOD_BEFORE_TREATMENT);
  EXPECT(strlen(pcf_last_error_message()) > 0);
  m.k = 9;
  EXPECT(pcf_fit_points(p, 2, &m, NULL, &hz, &vt) == PCF_E_K_OUT_OF_RANGE);
  pcf_method_default(&m, PCF_METHOD_RIDGE);
  m.lambda2 = -1.0;
  EXPECT(pcf_fit_points(p, 2, &m, NULL, &hz, &vt) == PCF_E_NON_POSITIVE_LAMBDA);
  EXPECT(pcf_fit_points(NULL, 2, &m, NULL, &hz, &vt) == PCF_E_INVALID_ARGUMENT);
  pcf_panel_free(p);

  EXPECT(pcf_panel_from_matrix(values, 4, 4, 4, &p) == PCF_E_T0_OUT_OF_RANGE);
  values[3] = NAN;
  EXPECT(pcf_panel_from_matrix(values, 4, 4, 2, &p) == PCF_E_NON_FINITE_INPUT);
}

static void test_compare_and_design(void) {
  pcf_panel* p = NULL;
  pcf_compare_options o;
  pcf_method m;
  pcf_design_result d;
  char* csv = NULL;
  char* json = NULL;
  char* grid = NULL;
  toy_panel(&p);
  pcf_compare_default(&o);
  EXPECT(pcf_compare_csv(p, &o, &csv) == PCF_OK);
  EXPECT(csv && count_lines(csv) == 1 + 6 * 2 * 2);
  pcf_string_free(csv);

  pcf_method_default(&m, PCF_METHOD_OLS);
  EXPECT(pcf_design(p, &m, -1, &d, &json, &grid) == PCF_OK);
  EXPECT(d.unit_cells == 4);
  EXPECT(d.time_cells == 2);
  EXPECT(isfinite(d.both_estimand));
  EXPECT(json && json[0] == '{');
  EXPECT(grid && count_lines(grid) == 1 + 16);
  pcf_string_free(json);
  pcf_string_free(grid);
  pcf_method_default(&m, PCF_METHOD_LASSO);
  EXPECT(pcf_design(p, &m, -1, &d, NULL, NULL) == PCF_E_UNSUPPORTED_METHOD);
  pcf_panel_free(p);
}

static void test_bundled(void) {
  pcf_panel* p = NULL;
  pcf_analysis_options o;
  pcf_interval_report rep;
  pcf_coverage cov;
  char* out = NULL;
  const char* studies[1] = {"california"};
  int64_t n, t, t0;
  int i, j;

  EXPECT(pcf_datasets_json(&out) == PCF_OK);
  EXPECT(out && strstr(out, "california") != NULL);
  pcf_string_free(out);

  EXPECT(pcf_bundled_load("no_such_study", &p) != PCF_OK);
  if (pcf_bundled_load("california", &p) != PCF_OK) {
    fprintf(stderr, "california not installed: %s\n", pcf_last_error_message());
    ++failures;
    return;
  }
  EXPECT(pcf_panel_shape(p, &n, &t, &t0) == PCF_OK);
  EXPECT(n == 39 && t == 31 && t0 == 18);
  EXPECT(strcmp(pcf_panel_unit_label(p, n - 1), "California") == 0);
  EXPECT(strcmp(pcf_panel_time_label(p, 0), "1970") == 0);
  EXPECT(strlen(pcf_panel_digest(p)) == 64);

  memset(&o, 0, sizeof o);
  pcf_method_default(&o.method, PCF_METHOD_OLS);
  pcf_solver_default(&o.solver);
  o.cov = PCF_COV_HRK;
  o.theta = 0.05;
  o.interval = PCF_INTERVAL_ALL;
  EXPECT(pcf_analyze(p, &o, &out) == PCF_E_HRK_UNDEFINED);
  EXPECT(strstr(pcf_last_error_message(), "VT") != NULL);

  o.cov = PCF_COV_JACK;
  EXPECT(pcf_analyze(p, &o, &out) == PCF_OK);
  EXPECT(out && out[0] == '{');
  pcf_string_free(out);
  o.csv = 1;
  EXPECT(pcf_analyze(p, &o, &out) == PCF_OK);
  EXPECT(out && count_lines(out) == 14);
  pcf_string_free(out);

  EXPECT(pcf_analyze_period(p, 18, &o.method, PCF_COV_HOMO, 0.05, &rep) == PCF_OK);
  EXPECT(rep.vt_degenerate == 1 && rep.hz_degenerate == 0);

  EXPECT(pcf_coverage_study(p, 0.999, 20, 7, PCF_COV_HOMO, 2, &cov) == PCF_OK);
  EXPECT(cov.r == 3 && cov.reps == 20);
  for (i = 0; i < 3; ++i)
    for (j = 0; j < 3; ++j) EXPECT(cov.cp[i][j] >= 0.0 && cov.cp[i][j] <= 1.0);
  EXPECT(pcf_coverage_csv(&cov, studies, 1, &out) == PCF_OK);
  EXPECT(out && count_lines(out) == 3);
  pcf_string_free(out);
  EXPECT(pcf_coverage_json(&cov, "california", &out) == PCF_OK);
  pcf_string_free(out);
  EXPECT(pcf_coverage_study(p, 0.999, 0, 7, PCF_COV_HOMO, 1, &cov) == PCF_E_INVALID_ARGUMENT);
  pcf_panel_free(p);
}

int main(void) {
  test_status();
  test_matrix_panel();
  test_compare_and_design();
  test_bundled();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
