#ifndef QCONTACT_H
#define QCONTACT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum QcStatus {
  QC_STATUS_OK = 0,
  QC_STATUS_NULL_POINTER = 1,
  QC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Unknown builtin, malformed JSON or an invalid model description.
   */
  QC_STATUS_CONFIG_ERROR = 3,
  /**
   * The point is outside the model's domain, e.g. a singular Lagrangian.
   */
  QC_STATUS_EVALUATION_ERROR = 4,
  QC_STATUS_INTEGRATION_ERROR = 5,
  /**
   * The output buffer is smaller than the data; nothing was written.
   */
  QC_STATUS_BUFFER_TOO_SMALL = 6,
  QC_STATUS_PANIC = 99,
} QcStatus;

/**
 * A model loaded from the builtin registry or a JSON description.
 */
typedef struct QcModel QcModel;

/**
 * Samples of one integrated trajectory.
 */
typedef struct QcTrajectory QcTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *qc_last_error_message(void);

/**
 * Loads a builtin model such as `"e1"` or `"rocket(5000, 9.81)"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a writable pointer.
 */
enum QcStatus qc_model_from_builtin(const char *spec, struct QcModel **out);

/**
 * Builds a model from a JSON configuration document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum QcStatus qc_model_from_json(const char *json, struct QcModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from a `qc_model_from_*` call and not be used again.
 */
void qc_model_free(struct QcModel *model);

/**
 * Writes `n` and `qcount`; the state dimension is `2n + qcount`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum QcStatus qc_model_dims(const struct QcModel *model, size_t *n, size_t *qcount);

/**
 * Copies the model's default initial state into `out`.
 *
 * # Safety
 * `out` must hold `capacity` doubles.
 */
enum QcStatus qc_model_initial_state(const struct QcModel *model, double *out, size_t capacity);

/**
 * Evaluates the model's vector field at `x` (length `len`).
 *
 * # Safety
 * `x` must hold `len` doubles and `out` `capacity` doubles.
 */
enum QcStatus qc_model_vector_field(const struct QcModel *model,
                                    const double *x,
                                    size_t len,
                                    double *out,
                                    size_t capacity);

/**
 * Evaluates the Hamiltonian, or the energy of a Lagrangian model.
 *
 * # Safety
 * `x` must hold `len` doubles and `out` must be writable.
 */
enum QcStatus qc_model_hamiltonian(const struct QcModel *model,
                                   const double *x,
                                   size_t len,
                                   double *out);

/**
 * `X_H(H) + H sum_i R_i(H)` at `x`.
 *
 * # Safety
 * `x` must hold `len` doubles and `out` must be writable.
 */
enum QcStatus qc_model_dissipation_residual(const struct QcModel *model,
                                            const double *x,
                                            size_t len,
                                            double *out);

/**
 * Integrates the model's field with the adaptive Dormand-Prince method.
 *
 * `initial` may be null to start from the model's default state.
 * A positive `sample_interval` samples on that grid; otherwise every
 * accepted step is kept.
 *
 * # Safety
 * `initial` must be null or hold `len` doubles; `out` must be writable.
 */
enum QcStatus qc_simulate(const struct QcModel *model,
                          const double *initial,
                          size_t len,
                          double t0,
                          double t1,
                          double abs_tol,
                          double rel_tol,
                          double sample_interval,
                          struct QcTrajectory **out);

/**
 * Number of samples, or zero for a null handle.
 *
 * # Safety
 * `traj` must be null or a live trajectory.
 */
size_t qc_trajectory_len(const struct QcTrajectory *traj);

/**
 * State dimension of each sample, or zero for a null handle.
 *
 * # Safety
 * `traj` must be null or a live trajectory.
 */
size_t qc_trajectory_dim(const struct QcTrajectory *traj);

/**
 * Copies the sample times.
 *
 * # Safety
 * `out` must hold `capacity` doubles.
 */
enum QcStatus qc_trajectory_times(const struct QcTrajectory *traj, double *out, size_t capacity);

/**
 * Copies the states row by row, `len * dim` values.
 *
 * # Safety
 * `out` must hold `capacity` doubles.
 */
enum QcStatus qc_trajectory_states(const struct QcTrajectory *traj, double *out, size_t capacity);

/**
 * Releases a trajectory. Null is ignored.
 *
 * # Safety
 * `traj` must come from `qc_simulate` and not be used again.
 */
void qc_trajectory_free(struct QcTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCONTACT_H */
