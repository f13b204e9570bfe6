#ifndef MINLP_CONFLICT_H
#define MINLP_CONFLICT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Return code of every fallible call.
 */
typedef enum {
  MINLP_ERROR_OK = 0,
  MINLP_ERROR_NULL_POINTER = 1,
  MINLP_ERROR_INVALID_UTF8 = 2,
  MINLP_ERROR_LOAD_FAILED = 3,
  MINLP_ERROR_INVALID_ARGUMENT = 4,
  MINLP_ERROR_SOLVE_FAILED = 5,
  MINLP_ERROR_NO_SOLUTION = 6,
  MINLP_ERROR_BUFFER_TOO_SMALL = 7,
  MINLP_ERROR_PANIC = 8,
} MinlpError;

typedef enum {
  MINLP_CONFLICT_MODE_NO_CONFLICT = 0,
  MINLP_CONFLICT_MODE_CONF_GRAPH = 1,
  MINLP_CONFLICT_MODE_DUAL_RAY = 2,
  MINLP_CONFLICT_MODE_DUAL_RAY_LOC = 3,
} MinlpConflictMode;

typedef enum {
  MINLP_SOLVE_STATUS_OPTIMAL = 0,
  MINLP_SOLVE_STATUS_INFEASIBLE = 1,
  MINLP_SOLVE_STATUS_LIMIT = 2,
} MinlpSolveStatus;

/**
 * Opaque instance handle.
 */
typedef struct MinlpInstance MinlpInstance;

/**
 * Opaque result handle.
 */
typedef struct MinlpResult MinlpResult;

/**
 * Limits for [`minlp_solve`]; non-positive time and negative node limits mean none.
 */
typedef struct {
  MinlpConflictMode conflict;
  double time_limit;
  int64_t node_limit;
} MinlpOptions;

/**
 * Search statistics of a finished solve.
 */
typedef struct {
  uint64_t nodes;
  uint64_t lp_iterations;
  double time_s;
  uint64_t confs_glb;
  uint64_t confs_loc;
  uint64_t proofs_rejected;
  uint64_t lift_root;
  uint64_t lift_half;
  uint64_t lift_partial;
  uint64_t lift_none;
} MinlpStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *minlp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *minlp_version(void);

/**
 * Loads an instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
MinlpError minlp_instance_load(const char *path, MinlpInstance **out);

/**
 * Parses an instance from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
MinlpError minlp_instance_parse(const char *json, MinlpInstance **out);

/**
 * Releases an instance; null is ignored.
 *
 * # Safety
 * `inst` must come from `minlp_instance_load`/`minlp_instance_parse` and not be freed twice.
 */
void minlp_instance_free(MinlpInstance *inst);

/**
 * Number of variables (a nonlinear objective adds one); 0 for null.
 *
 * # Safety
 * `inst` must be null or a live instance handle.
 */
size_t minlp_instance_num_vars(const MinlpInstance *inst);

/**
 * Default options: dual-ray analysis with local proofs, no limits.
 */
MinlpOptions minlp_options_default(void);

/**
 * Solves an instance.
 *
 * # Safety
 * `inst` must be a live instance handle, `options` null or valid, and `out` a valid pointer.
 */
MinlpError minlp_solve(const MinlpInstance *inst, const MinlpOptions *options, MinlpResult **out);

/**
 * Releases a result; null is ignored.
 *
 * # Safety
 * `result` must come from `minlp_solve` and not be freed twice.
 */
void minlp_result_free(MinlpResult *result);

/**
 * Final status of a solve.
 *
 * # Safety
 * `result` must be a live result handle and `out` a valid pointer.
 */
MinlpError minlp_result_status(const MinlpResult *result, MinlpSolveStatus *out);

/**
 * Objective value of the incumbent; `NoSolution` if there is none.
 *
 * # Safety
 * `result` must be a live result handle and `out` a valid pointer.
 */
MinlpError minlp_result_objective(const MinlpResult *result, double *out);

/**
 * Copies the incumbent into `buf`, which must hold `len >= num_vars` values.
 *
 * # Safety
 * `result` must be a live result handle and `buf` valid for `len` writes.
 */
MinlpError minlp_result_solution(const MinlpResult *result, double *buf, size_t len);

/**
 * Search and conflict statistics.
 *
 * # Safety
 * `result` must be a live result handle and `out` a valid pointer.
 */
MinlpError minlp_result_stats(const MinlpResult *result, MinlpStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINLP_CONFLICT_H */
