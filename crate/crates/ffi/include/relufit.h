#ifndef RELUFIT_H
#define RELUFIT_H

/* Generated by cbindgen from relufit-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum RelufitStatus {
  RelufitOk = 0,
  RelufitNullArgument = 1,
  RelufitInvalidArgument = 2,
  RelufitBufferTooSmall = 3,
  RelufitDivergence = 4,
  RelufitRuntimeError = 5,
} RelufitStatus;

/**
 * A generated dataset together with its planted vector.
 */
typedef struct RelufitDataset RelufitDataset;

/**
 * A recorded solve trace.
 */
typedef struct RelufitTrace RelufitTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static C string.
 */
const char *relufit_version(void);

/**
 * Message of the most recent error on this thread (empty if none). The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *relufit_last_error_message(void);

/**
 * Generates a planted dataset: `sparsity = 0` plants a dense vector,
 * otherwise exactly `sparsity` nonzeros; labels are exact ReLU responses.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives an owned handle
 * that must be released with [`relufit_dataset_free`].
 */
enum RelufitStatus relufit_dataset_generate(size_t d,
                                            size_t sparsity,
                                            double norm,
                                            size_t n,
                                            uint64_t seed,
                                            struct RelufitDataset **out);

/**
 * Releases a dataset handle; a null pointer is a no-op.
 *
 * # Safety
 * `handle` must come from this library and not have been freed already.
 */
void relufit_dataset_free(struct RelufitDataset *handle);

/**
 * Sample count and dimension of a dataset.
 *
 * # Safety
 * All pointers must be valid.
 */
enum RelufitStatus relufit_dataset_dims(const struct RelufitDataset *handle, size_t *n, size_t *d);

/**
 * Copies the planted vector into `buf` (length must be at least `d`).
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
enum RelufitStatus relufit_dataset_planted(const struct RelufitDataset *handle,
                                           double *buf,
                                           size_t len);

/**
 * Runs projected gradient descent from the origin on a dataset.
 *
 * `constraint_kind`: 0 none, 1 l2, 2 l1, 3 sparsity. A nonpositive
 * `radius` (or `k = 0`) selects the natural level from the dataset's
 * planted vector. The solution is written into `solution` (length `d`);
 * when `trace_out` is non-null it receives an owned trace handle.
 *
 * # Safety
 * `handle` and `solution` must be valid; `solution_len >= d`.
 */
enum RelufitStatus relufit_solve(const struct RelufitDataset *handle,
                                 int constraint_kind,
                                 double radius,
                                 size_t k,
                                 size_t max_iters,
                                 double step_size,
                                 double target_rel_err,
                                 double *solution,
                                 size_t solution_len,
                                 struct RelufitTrace **trace_out);

/**
 * Releases a trace handle; a null pointer is a no-op.
 *
 * # Safety
 * `handle` must come from this library and not have been freed already.
 */
void relufit_trace_free(struct RelufitTrace *handle);

/**
 * Number of recorded iterates (iterations run plus one); 0 for null.
 *
 * # Safety
 * `handle` must be valid or null.
 */
size_t relufit_trace_len(const struct RelufitTrace *handle);

/**
 * Iterate index at which a stopping rule fired, or -1.
 *
 * # Safety
 * `handle` must be valid or null.
 */
int64_t relufit_trace_converged_at(const struct RelufitTrace *handle);

/**
 * Copies per-iterate relative errors (present when the dataset carried a
 * planted vector) into `buf`; use [`relufit_trace_len`] to size it.
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
enum RelufitStatus relufit_trace_rel_errs(const struct RelufitTrace *handle,
                                          double *buf,
                                          size_t len);

/**
 * Copies per-iterate loss values into `buf`.
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
enum RelufitStatus relufit_trace_losses(const struct RelufitTrace *handle, double *buf, size_t len);

/**
 * Euclidean projection onto a constraint set, written into `out`
 * (length `d`). Constraint encoding matches [`relufit_solve`], but the
 * level must be explicit (no planted vector is available here).
 *
 * # Safety
 * `v` and `out` must point to `d` readable/writable doubles.
 */
enum RelufitStatus relufit_project(int constraint_kind,
                                   double radius,
                                   size_t k,
                                   const double *v,
                                   size_t d,
                                   double *out);

/**
 * Closed-form minimal-sample value for the l1 descent cone at an
 * `s`-sparse anchor in dimension `d`.
 *
 * # Safety
 * `out` must be valid.
 */
enum RelufitStatus relufit_width_analytic_l1(size_t d, size_t s, double *out);

/**
 * `phi(t) = sqrt(2) Gamma((t+1)/2) / Gamma(t/2)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum RelufitStatus relufit_phi_gamma(double t, double *out);

/**
 * Monte Carlo minimal-sample estimate. `cone_kind`: 0 full space,
 * 1 subspace of dimension `structural_dim`, 2 l1 cone at a
 * `structural_dim`-sparse anchor.
 *
 * # Safety
 * Output pointers must be valid.
 */
enum RelufitStatus relufit_width_mc(int cone_kind,
                                    size_t d,
                                    size_t structural_dim,
                                    size_t num_samples,
                                    uint64_t seed,
                                    double *n0,
                                    double *omega_sq_mc,
                                    double *stderr_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELUFIT_H */
