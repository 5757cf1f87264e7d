#ifndef MPTROM_H
#define MPTROM_H

/* Generated by cbindgen from mptrom-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum MptromStatus {
  MPTROM_STATUS_OK = 0,
  MPTROM_STATUS_INVALID_ARGUMENT = 1,
  MPTROM_STATUS_NULL_POINTER = 2,
  MPTROM_STATUS_NUMERICAL_FAILURE = 3,
  MPTROM_STATUS_IO_FAILURE = 4,
} MptromStatus;

/**
 * Boundary-layer grading schemes, mirroring the library's options.
 */
typedef enum MptromScheme {
  MPTROM_SCHEME_UNIFORM = 0,
  MPTROM_SCHEME_GEOMETRIC_DECREASING = 1,
  MPTROM_SCHEME_GEOMETRIC_INCREASING = 2,
} MptromScheme;

/**
 * Tensor evaluation strategies.
 */
typedef enum MptromMethod {
  MPTROM_METHOD_IM = 0,
  MPTROM_METHOD_FMM = 1,
  MPTROM_METHOD_MM = 2,
} MptromMethod;

/**
 * Opaque full-order model handle.
 */
typedef struct MptromModel MptromModel;

/**
 * Opaque spectral signature handle.
 */
typedef struct MptromSignature MptromSignature;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message on this thread into `buffer` (truncated to
 * `length` bytes including the terminator). Returns the full message length.
 *
 * # Safety
 * `buffer` must point to at least `length` writable bytes, or be null.
 */
uintptr_t mptrom_last_error(char *buffer, uintptr_t length);

/**
 * Builds the radially reduced conducting sphere model.
 *
 * `target_omega` fixes the skin depth the boundary layers resolve;
 * `order_p`, `layers` and the two element counts control the
 * discretization. Pass 0 for `order_p`, `n_interior`, `n_exterior` to take
 * the defaults (3, 16, 30).
 *
 * # Safety
 * `out` must be a valid pointer to a model-handle slot.
 */
enum MptromStatus mptrom_sphere_model_new(double alpha,
                                          double sigma_star,
                                          double mu_r,
                                          double epsilon,
                                          double target_omega,
                                          enum MptromScheme scheme,
                                          uintptr_t layers,
                                          uintptr_t order_p,
                                          uintptr_t n_interior,
                                          uintptr_t n_exterior,
                                          struct MptromModel **out);

/**
 * Loads a model from a JSON manifest plus Matrix Market files.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum MptromStatus mptrom_model_from_manifest(const char *path, struct MptromModel **out);

/**
 * Degrees of freedom of a model.
 *
 * # Safety
 * Both pointers must be valid.
 */
enum MptromStatus mptrom_model_ndofs(const struct MptromModel *model, uintptr_t *out);

/**
 * Releases a model handle. Null is a no-op.
 *
 * # Safety
 * `model` must come from this library and not be freed twice.
 */
void mptrom_model_free(struct MptromModel *model);

/**
 * Runs the reduced-order frequency sweep: `n_snapshots` log-spaced
 * full-order solves over `[omega_min, omega_max]`, truncated SVD at
 * `tol_sigma`, online evaluation of `n_output` log-spaced frequencies with
 * the chosen method.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum MptromStatus mptrom_signature_compute(const struct MptromModel *model,
                                           double omega_min,
                                           double omega_max,
                                           uintptr_t n_snapshots,
                                           uintptr_t n_output,
                                           enum MptromMethod method,
                                           double tol_sigma,
                                           double rel_tol,
                                           struct MptromSignature **out);

/**
 * Number of frequencies in a signature.
 *
 * # Safety
 * Both pointers must be valid.
 */
enum MptromStatus mptrom_signature_len(const struct MptromSignature *signature, uintptr_t *out);

/**
 * One sweep row: the frequency plus the six independent entries of the real
 * part (`11, 22, 33, 12, 13, 23`) and of the imaginary part, in that order.
 *
 * # Safety
 * `re` and `im` must each point to six writable doubles.
 */
enum MptromStatus mptrom_signature_row(const struct MptromSignature *signature,
                                       uintptr_t index,
                                       double *omega,
                                       double *re,
                                       double *im);

/**
 * Releases a signature handle. Null is a no-op.
 *
 * # Safety
 * `signature` must come from this library and not be freed twice.
 */
void mptrom_signature_free(struct MptromSignature *signature);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPTROM_H */
