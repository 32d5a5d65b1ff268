#ifndef FORCHHEIMER_H
#define FORCHHEIMER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FmStatus {
  FM_STATUS_OK = 0,
  FM_STATUS_NULL_POINTER = 1,
  FM_STATUS_INVALID_ARGUMENT = 2,
  FM_STATUS_DOMAIN = 3,
  FM_STATUS_NUMERICAL = 4,
  FM_STATUS_IO = 5,
  FM_STATUS_PANIC = 6,
} FmStatus;

// A parsed flow law.
typedef struct FmLaw FmLaw;

// Result of a convergence study.
typedef struct FmReport FmReport;

// Study settings. `dt > 0` selects a fixed step; otherwise the step is
// `min(dt_cap, h^2)`.
typedef struct FmStudyConfig {
  double t_final;
  double dt;
  double dt_cap;
  double picard_tol;
  size_t picard_max;
  // Nonzero selects the monolithic block solve.
  int32_t monolithic;
} FmStudyConfig;

// One report row. Rates are NaN on the first row.
typedef struct FmReportRow {
  size_t n;
  double h;
  double dt;
  double err_p;
  double rate_p;
  double err_s;
  double rate_s;
  double err_u;
  double rate_u;
  double picard_avg;
  size_t picard_max;
  size_t steps;
  double mass_balance;
} FmReportRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer is
// valid until the next call into this library on the same thread.
const char *fm_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void fm_string_free(char *s);

// Parses a law such as `"1:0,1:1"`.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum FmStatus fm_law_parse(const char *spec, struct FmLaw **out);

// Builds `g(s) = sum coefficients[i] * s^exponents[i]`.
//
// # Safety
// Both arrays must hold `len` values; `out` must be writable.
enum FmStatus fm_law_new(const double *coefficients,
                         const double *exponents,
                         size_t len,
                         struct FmLaw **out);

// # Safety
// `law` must be null or a handle from `fm_law_parse`/`fm_law_new`, not yet freed.
void fm_law_free(struct FmLaw *law);

// # Safety
// `law` must be a live handle; `out` must be writable.
enum FmStatus fm_law_g(const struct FmLaw *law, double s, double *out);

// Root of `s g(s) = xi`.
//
// # Safety
// `law` must be a live handle; `out` must be writable.
enum FmStatus fm_law_solve_s(const struct FmLaw *law, double xi, double *out);

// `K(xi)`.
//
// # Safety
// `law` must be a live handle; `out` must be writable.
enum FmStatus fm_law_conductivity(const struct FmLaw *law, double xi, double *out);

// `H(xi) = int_0^xi 2 t K(t) dt`.
//
// # Safety
// `law` must be a live handle; `out` must be writable.
enum FmStatus fm_law_energy_density(const struct FmLaw *law, double xi, double *out);

// Degeneracy exponents `a` and `beta = 2 - a`.
//
// # Safety
// `law` must be a live handle; `a` and `beta` must be writable.
enum FmStatus fm_law_degeneracy(const struct FmLaw *law, double *a, double *beta);

// Default study settings: `T = 1`, `dt = min(1e-2, h^2)`, tolerance `1e-6`, 50 iterations.
struct FmStudyConfig fm_study_config_default(void);

// Runs the manufactured-solution study on `n x n` meshes.
//
// # Safety
// `law` must be a live handle, `meshes` must hold `len` values, `config` may be
// null for defaults, and `out` must be writable.
enum FmStatus fm_study_run(const struct FmLaw *law,
                           const size_t *meshes,
                           size_t len,
                           const struct FmStudyConfig *config,
                           struct FmReport **out);

// # Safety
// `report` must be null or a handle from `fm_study_run`, not yet freed.
void fm_report_free(struct FmReport *report);

// Number of rows, or 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
size_t fm_report_num_rows(const struct FmReport *report);

// # Safety
// `report` must be a live handle; `out` must be writable.
enum FmStatus fm_report_row(const struct FmReport *report, size_t index, struct FmReportRow *out);

// CSV rendering; free with `fm_string_free`.
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum FmStatus fm_report_to_csv(const struct FmReport *report, char **out);

// Markdown rendering; free with `fm_string_free`.
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum FmStatus fm_report_to_markdown(const struct FmReport *report, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FORCHHEIMER_H */
