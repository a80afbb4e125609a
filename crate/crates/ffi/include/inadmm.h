#ifndef INADMM_H
#define INADMM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Which control iterate to copy out of a report.
typedef enum InadmmField {
  INADMM_FIELD_U = 0,
  INADMM_FIELD_Z = 1,
  INADMM_FIELD_LAMBDA = 2,
} InadmmField;

// Outer-loop method.
typedef enum InadmmMethod {
  INADMM_METHOD_INEXACT = 0,
  INADMM_METHOD_EXACT = 1,
  INADMM_METHOD_PROJECTED_GRADIENT = 2,
} InadmmMethod;

// Result codes.
typedef enum InadmmStatus {
  INADMM_STATUS_OK = 0,
  INADMM_STATUS_NULL_POINTER = 1,
  INADMM_STATUS_INVALID_ARGUMENT = 2,
  INADMM_STATUS_DIMENSION = 3,
  INADMM_STATUS_NUMERIC = 4,
  INADMM_STATUS_NOT_CONVERGED = 5,
  INADMM_STATUS_IO = 6,
  INADMM_STATUS_PANIC = 7,
} InadmmStatus;

typedef enum InadmmThetaKind {
  INADMM_THETA_KIND_GEOMETRIC = 0,
  INADMM_THETA_KIND_ALGEBRAIC = 1,
  INADMM_THETA_KIND_FIXED = 2,
} InadmmThetaKind;

// Opaque discretized problem.
typedef struct InadmmProblem InadmmProblem;

// Opaque solver result.
typedef struct InadmmReport InadmmReport;

// Solver parameters. `theta_param` is `q` (geometric), `alpha`
// (algebraic) or the fixed tolerance; `theta0 <= 0` selects the default.
typedef struct InadmmParams {
  double beta0;
  double beta1;
  double eta_base;
  // An [`InadmmThetaKind`] value.
  uint32_t theta_kind;
  double theta_param;
  double theta0;
  double tol;
  uint32_t max_outer;
  double exact_threshold;
} InadmmParams;

// One outer iteration. `err_u` is NaN when no exact control is known.
typedef struct InadmmRecord {
  uint32_t k;
  double beta;
  double theta;
  uint32_t cg_iterations;
  double pr;
  double dr;
  double srd;
  double obj;
  double err_u;
  double wall_ms;
} InadmmRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *inadmm_last_error(void);

// Library version as a static NUL-terminated string.
const char *inadmm_version(void);

// Default parameters for shipped experiment `example` (1..4).
//
// # Safety
// `out` must be null or point to writable memory for one `InadmmParams`.
enum InadmmStatus inadmm_params_default(uint32_t example, struct InadmmParams *out);

// Builds shipped experiment `example` (1..4) on an `m x m` mesh with `n_t`
// time steps. `gamma_s` is used by examples 3 and 4 and must be 0 otherwise.
//
// # Safety
// `out` must be null or point to writable memory for one pointer.
enum InadmmStatus inadmm_problem_new(uint32_t example,
                                     double gamma_s,
                                     uint32_t m,
                                     uint32_t n_t,
                                     struct InadmmProblem **out);

// # Safety
// `problem` must be null or a handle from [`inadmm_problem_new`] not yet freed.
void inadmm_problem_free(struct InadmmProblem *problem);

// Control nodes per time level (0 for a null handle).
//
// # Safety
// `problem` must be null or a live handle.
uintptr_t inadmm_problem_control_nodes(const struct InadmmProblem *problem);

// Number of time steps (0 for a null handle).
//
// # Safety
// `problem` must be null or a live handle.
uintptr_t inadmm_problem_time_steps(const struct InadmmProblem *problem);

// Runs `method` (an [`InadmmMethod`] value) on `problem`. On success `*out` owns a new report.
//
// # Safety
// `problem` must be a live handle, `params` must point to a valid
// `InadmmParams`, `out` to writable memory for one pointer.
enum InadmmStatus inadmm_solve(const struct InadmmProblem *problem,
                               const struct InadmmParams *params,
                               uint32_t method,
                               struct InadmmReport **out);

// # Safety
// `report` must be null or a handle from [`inadmm_solve`] not yet freed.
void inadmm_report_free(struct InadmmReport *report);

// Number of outer iterations (0 for a null handle).
//
// # Safety
// `report` must be null or a live handle.
uintptr_t inadmm_report_iterations(const struct InadmmReport *report);

// 1 if the stopping test was met, 0 otherwise (including null).
//
// # Safety
// `report` must be null or a live handle.
int32_t inadmm_report_converged(const struct InadmmReport *report);

// Average CG steps per outer iteration.
//
// # Safety
// `report` must be null or a live handle.
double inadmm_report_cg_average(const struct InadmmReport *report);

// Copies record `index` (0-based) into `out`.
//
// # Safety
// `report` must be a live handle and `out` writable for one record.
enum InadmmStatus inadmm_report_record(const struct InadmmReport *report,
                                       uintptr_t index,
                                       struct InadmmRecord *out);

// Copies the final `field` (an [`InadmmField`] value) into `buf`, time level by time level
// (levels `1..=n_t`, control nodes fastest). `len` must equal
// `control_nodes * time_steps`.
//
// # Safety
// `report` must be a live handle and `buf` writable for `len` doubles.
enum InadmmStatus inadmm_report_copy_field(const struct InadmmReport *report,
                                           uint32_t field,
                                           double *buf,
                                           uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INADMM_H */
