#ifndef SPECTRA_H
#define SPECTRA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define SPECTRA_STRATEGY_ORDERED 0

#define SPECTRA_STRATEGY_SECANT 1

#define SPECTRA_STRATEGY_STRICT 2

#define SPECTRA_PAIRS_ALL 0

#define SPECTRA_PAIRS_DYADIC 1

#define SPECTRA_PAIRS_AUTO 2

typedef enum SpectraStatus {
  SPECTRA_STATUS_OK = 0,
  /**
   * Malformed spec, matrix, grid or argument.
   */
  SPECTRA_STATUS_BAD_INPUT = 1,
  /**
   * A numerical check failed: no convergence, ambiguous crossing, ...
   */
  SPECTRA_STATUS_NUMERICAL = 2,
  SPECTRA_STATUS_NULL_POINTER = 3,
  SPECTRA_STATUS_BUFFER_TOO_SMALL = 4,
  SPECTRA_STATUS_PANIC = 5,
} SpectraStatus;

/**
 * Opaque branch handle.
 */
typedef struct SpectraBranch SpectraBranch;

/**
 * Opaque family handle.
 */
typedef struct SpectraFamily SpectraFamily;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or "" after a success.
 * Valid until the next `spectra_*` call on this thread.
 */
const char *spectra_last_error(void);

/**
 * Builds a family from a NUL-terminated JSON spec. `seed` fills in a
 * missing random seed.
 *
 * # Safety
 * `json` must be a valid C string and `out` a writable pointer.
 */
enum SpectraStatus spectra_family_from_json(const char *json,
                                            uint64_t seed,
                                            struct SpectraFamily **out);

/**
 * # Safety
 * `family` must come from `spectra_family_from_json` and not be freed yet.
 */
void spectra_family_free(struct SpectraFamily *family);

/**
 * # Safety
 * Pointers must be valid; either output may be NULL.
 */
enum SpectraStatus spectra_family_dims(const struct SpectraFamily *family,
                                       size_t *matrix_dim,
                                       size_t *param_dim);

/**
 * Ascending eigenvalues of `A(t)` for a one-parameter family into
 * `out[0..N]`.
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum SpectraStatus spectra_family_eigenvalues(const struct SpectraFamily *family,
                                              double t,
                                              double *out,
                                              size_t len);

/**
 * Weyl check for two `n×n` Hermitian matrices given row-major as real and
 * imaginary parts (`*_im` may be NULL for real input).
 *
 * # Safety
 * Non-NULL arrays must hold `n*n` doubles; outputs must be writable.
 */
enum SpectraStatus spectra_weyl_check(const double *a_re,
                                      const double *a_im,
                                      const double *b_re,
                                      const double *b_im,
                                      size_t n,
                                      double *gap,
                                      double *bound,
                                      bool *holds);

/**
 * Samples the family on `grid` and follows a continuous selection from
 * 0-based ordered index `start_index`. `switch_tol <= 0` picks the default.
 *
 * # Safety
 * `grid` must hold `nodes` doubles and `out` be writable.
 */
enum SpectraStatus spectra_track(const struct SpectraFamily *family,
                                 const double *grid,
                                 size_t nodes,
                                 size_t start_index,
                                 uint32_t strategy,
                                 double switch_tol,
                                 struct SpectraBranch **out);

/**
 * # Safety
 * `branch` must come from `spectra_track` and not be freed yet.
 */
void spectra_branch_free(struct SpectraBranch *branch);

/**
 * Number of nodes, or 0 for NULL.
 *
 * # Safety
 * `branch` must be valid or NULL.
 */
size_t spectra_branch_len(const struct SpectraBranch *branch);

/**
 * Copies nodes and values; either output may be NULL.
 *
 * # Safety
 * Non-NULL outputs must hold `len` doubles.
 */
enum SpectraStatus spectra_branch_data(const struct SpectraBranch *branch,
                                       double *grid,
                                       double *values,
                                       size_t len);

/**
 * Number of switches between ordered indices along the branch.
 *
 * # Safety
 * `branch` must be valid or NULL.
 */
size_t spectra_branch_switches(const struct SpectraBranch *branch);

/**
 * Grid Hölder constant of a branch at exponent `alpha`; the witness pair
 * goes to `witness[0..2]` when non-NULL.
 *
 * # Safety
 * `constant` must be writable; `witness`, if non-NULL, must hold 2 doubles.
 */
enum SpectraStatus spectra_holder_constant(const struct SpectraBranch *branch,
                                           double alpha,
                                           uint32_t pair_policy,
                                           double *constant,
                                           double *witness);

/**
 * Library version as a static C string.
 */
const char *spectra_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRA_H */
