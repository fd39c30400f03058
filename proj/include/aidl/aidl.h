/*
 * aidl — a solver-aided, hierarchical 2D CAD language.
 *
 * C interface to the compiler, constraint solver and renderer. All entry
 * points take program text (or a solved-model JSON document) and return an
 * opaque run handle carrying diagnostics and output artifacts. Handles own
 * their memory; strings returned from a run stay valid until the run is
 * freed. The library keeps no global state and runs are independent.
 */
#ifndef AIDL_H
#define AIDL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes in the CLI:
 * 0 success, 1 validation error, 2 I/O error, 3 solve failure. */
typedef enum aidl_status {
  AIDL_OK = 0,
  AIDL_ERROR_VALIDATION = 1,
  AIDL_ERROR_IO = 2,
  AIDL_ERROR_SOLVE = 3,
  AIDL_ERROR_ARGUMENT = 4
} aidl_status;

typedef struct aidl_options aidl_options;
typedef struct aidl_run aidl_run;

const char* aidl_version(void);

/* --- options ------------------------------------------------------------ */

aidl_options* aidl_options_new(void);
void aidl_options_free(aidl_options* opts);

/* Known keys: tol_residual, max_newton, max_outer, rank_tol, chord_tol,
 * join_tol. Returns AIDL_ERROR_ARGUMENT for unknown keys or out-of-range
 * values (all must be positive). */
aidl_status aidl_options_set(aidl_options* opts, const char* key, double value);

/* --- runs ----------------------------------------------------------------
 * `name` labels the source in diagnostics (usually the file path).
 * `opts` may be NULL for defaults. Returns NULL only on allocation failure. */

/* parse + elaborate + validate + lower deferred constraints; no solving */
aidl_run* aidl_check(const char* name, const char* source, const aidl_options* opts);

/* full pipeline: check, hierarchical solve, boolean post-process; on success
 * the solved-model JSON is available */
aidl_run* aidl_solve(const char* name, const char* source, const aidl_options* opts);

/* solve + deterministic SVG render */
aidl_run* aidl_render(const char* name, const char* source, const aidl_options* opts);

/* render straight from a solved-model JSON document */
aidl_run* aidl_render_model_json(const char* name, const char* json,
                                 const aidl_options* opts);

/* canonical reformat of a valid program (NULL output on errors) */
aidl_run* aidl_format(const char* name, const char* source, const aidl_options* opts);

void aidl_run_free(aidl_run* run);

/* --- results -------------------------------------------------------------- */

aidl_status aidl_run_status(const aidl_run* run);

size_t aidl_run_diagnostic_count(const aidl_run* run);
/* One machine-readable JSON record per diagnostic:
 * {code, severity, message, file, line, col, end_line, end_col, path} */
const char* aidl_run_diagnostic_json(const aidl_run* run, size_t index);
const char* aidl_run_diagnostic_text(const aidl_run* run, size_t index);

/* Solved-model JSON document (model tree + solve report + scene); NULL unless
 * a solve succeeded. */
const char* aidl_run_model_json(const aidl_run* run);

/* SVG document; NULL unless produced by a render entry point. */
const char* aidl_run_svg(const aidl_run* run);

/* One-line JSON run summary: file, command, status, exit_code and, after a
 * solve, residual_max, iteration counts and per-node stage records. */
const char* aidl_run_report_json(const aidl_run* run);

/* Canonical program text from aidl_format; NULL on errors. */
const char* aidl_run_formatted(const aidl_run* run);

#ifdef __cplusplus
}
#endif

#endif /* AIDL_H */
