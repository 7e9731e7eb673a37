/* C ABI for the avgcycles averaging/verification pipeline. Generated by cbindgen; do not edit. */

#ifndef AVGCYCLES_H
#define AVGCYCLES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes for every FFI entry point.
typedef enum AvgStatus {
  AvgStatus_Ok = 0,
  AvgStatus_NullArgument = 1,
  AvgStatus_InvalidUtf8 = 2,
  AvgStatus_ParseError = 3,
  AvgStatus_CenterConditionViolated = 4,
  AvgStatus_GNearZero = 5,
  AvgStatus_QuadratureFailure = 6,
  AvgStatus_DomainExceeded = 7,
  AvgStatus_IndexOutOfRange = 8,
  AvgStatus_ZeroPolynomial = 9,
  AvgStatus_NonpositiveRadius = 10,
  AvgStatus_RadiusCollapse = 11,
  AvgStatus_StepFailure = 12,
  AvgStatus_SymmetryViolation = 13,
  AvgStatus_DegreeExceeded = 14,
  AvgStatus_DuplicateTerm = 15,
  AvgStatus_Panic = 16,
  AvgStatus_InvalidArgument = 17,
} AvgStatus;

// Return-map verification outcome.
typedef struct AvgCycleReport AvgCycleReport;

// The unperturbed flow factor r₀(θ; z)/z.
typedef struct AvgFlowFactor AvgFlowFactor;

// The averaged polynomial h(z).
typedef struct AvgPolynomial AvgPolynomial;

// A validated problem: center parameters, switching line, branch polynomials.
typedef struct AvgProblem AvgProblem;

// Positive-zero isolation outcome.
typedef struct AvgRootReport AvgRootReport;

// The table of averaged-function coefficients k_{i,j}.
typedef struct AvgTable AvgTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Human-readable message for the most recent failing call on this thread.
// Valid until the next failing call on the same thread. Never NULL.
const char *avg_last_error_message(void);

// Toolkit version as a static NUL-terminated string (do not free).
const char *avg_version(void);

// Parse and validate a JSON problem configuration.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
enum AvgStatus avg_problem_parse(const char *json, struct AvgProblem **out);

// Serialize the problem back to canonical JSON (caller frees the string).
//
// # Safety
// `problem` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_problem_to_json(const struct AvgProblem *problem, char **out);

// # Safety
// See crate-level conventions; NULL is allowed.
void avg_problem_free(struct AvgProblem *problem);

// Release a string returned through an out-pointer.
//
// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void avg_string_free(char *s);

// Build the unperturbed flow factor for the problem's switching line.
// `tol` is the absolute quadrature tolerance (e.g. 1e-12).
//
// # Safety
// `problem` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_flow_factor_build(const struct AvgProblem *problem,
                                     double tol,
                                     struct AvgFlowFactor **out);

// Evaluate the flow factor at an angle inside its domain.
//
// # Safety
// `ff` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_flow_factor_value(const struct AvgFlowFactor *ff, double theta, double *out);

// # Safety
// See crate-level conventions; NULL is allowed.
void avg_flow_factor_free(struct AvgFlowFactor *ff);

// Compute all averaged-function coefficients k_{i,j}.
// `threads` = 0 selects single-threaded execution.
//
// # Safety
// `problem` and `ff` must be live handles; `out` must be a valid pointer.
enum AvgStatus avg_table_compute(const struct AvgProblem *problem,
                                 const struct AvgFlowFactor *ff,
                                 double tol,
                                 bool fast_symmetry,
                                 size_t threads,
                                 struct AvgTable **out);

// Fetch one table entry (value and quadrature error estimate).
//
// # Safety
// `table` must be a live handle; `value_out` and `err_out` must be valid.
enum AvgStatus avg_table_entry(const struct AvgTable *table,
                               uint32_t i,
                               uint32_t j,
                               double *value_out,
                               double *err_out);

// # Safety
// See crate-level conventions; NULL is allowed.
void avg_table_free(struct AvgTable *table);

// Group the table into the averaged polynomial h(z) = Σ k_{i,j} z^{i+2j}.
//
// # Safety
// `table` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_assemble(const struct AvgTable *table, struct AvgPolynomial **out);

// Coefficient of zⁿ (0 when absent).
//
// # Safety
// `h` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_polynomial_coeff(const struct AvgPolynomial *h, uint32_t n, double *out);

// Evaluate h(z).
//
// # Safety
// `h` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_polynomial_eval(const struct AvgPolynomial *h, double z, double *out);

// # Safety
// See crate-level conventions; NULL is allowed.
void avg_polynomial_free(struct AvgPolynomial *h);

// Isolate positive zeros of h. `z_max <= 0` selects the automatic bound.
//
// # Safety
// `h` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_roots_isolate(const struct AvgPolynomial *h,
                                 double tol,
                                 double z_max,
                                 struct AvgRootReport **out);

// Number of isolated zeros.
//
// # Safety
// `report` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_root_report_len(const struct AvgRootReport *report, size_t *out);

// Sign-variation bound on the number of positive zeros.
//
// # Safety
// `report` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_root_report_bound(const struct AvgRootReport *report, uint32_t *out);

// Fetch zero #idx (ascending order): location, h′ there, simplicity flag.
//
// # Safety
// `report` must be a live handle; out-pointers must be valid.
enum AvgStatus avg_root_report_get(const struct AvgRootReport *report,
                                   size_t idx,
                                   double *z_out,
                                   double *deriv_out,
                                   bool *simple_out);

// # Safety
// See crate-level conventions; NULL is allowed.
void avg_root_report_free(struct AvgRootReport *report);

// Return-map displacement r(α+2π; z, ε) − z.
//
// # Safety
// `problem` and `ff` must be live handles; `out` must be a valid pointer.
enum AvgStatus avg_displacement(const struct AvgProblem *problem,
                                const struct AvgFlowFactor *ff,
                                double z,
                                double eps,
                                double tol,
                                double *out);

// Locate return-map fixed points near each predicted zero over the ε ladder
// `epsilons[0..n_eps]` (strictly decreasing). Zero/negative tolerances pick
// the defaults (1e-11 integrator, 1e-10 fixed-point, window 50·ε).
//
// # Safety
// Handles must be live; `epsilons` must point to `n_eps` readable doubles;
// `out` must be a valid pointer.
enum AvgStatus avg_verify(const struct AvgProblem *problem,
                          const struct AvgFlowFactor *ff,
                          const struct AvgRootReport *predicted,
                          const double *epsilons,
                          size_t n_eps,
                          double integrator_tol,
                          double fixpoint_tol,
                          double capture_window,
                          struct AvgCycleReport **out);

// Number of predicted zeros whose fixed point was verified at every ε.
//
// # Safety
// `report` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_cycle_report_count_verified(const struct AvgCycleReport *report, size_t *out);

// Full verification report as JSON (caller frees the string).
//
// # Safety
// `report` must be a live handle; `out` must be a valid pointer.
enum AvgStatus avg_cycle_report_to_json(const struct AvgCycleReport *report, char **out);

// # Safety
// See crate-level conventions; NULL is allowed.
void avg_cycle_report_free(struct AvgCycleReport *report);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* AVGCYCLES_H */
