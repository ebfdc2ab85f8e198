#ifndef FRAME_RECON_H
#define FRAME_RECON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FrStatus {
  FR_STATUS_OK = 0,
  FR_STATUS_NULL_POINTER = 1,
  FR_STATUS_INVALID_ARGUMENT = 2,
  FR_STATUS_DIMENSION_MISMATCH = 3,
  FR_STATUS_SINGULAR_GRAM = 4,
  FR_STATUS_SINGULAR_OPERATOR = 5,
  FR_STATUS_NUMERICAL_FAILURE = 6,
  FR_STATUS_PANIC = 7,
} FrStatus;

typedef enum FrPatternKind {
  FR_PATTERN_KIND_JITTERED = 0,
  FR_PATTERN_KIND_ROSETTE = 1,
  FR_PATTERN_KIND_SPIRAL = 2,
  FR_PATTERN_KIND_POLAR = 3,
  FR_PATTERN_KIND_INTEGER_GRID = 4,
} FrPatternKind;

typedef enum FrFunction {
  FR_FUNCTION_F1 = 0,
  FR_FUNCTION_F2 = 1,
} FrFunction;

typedef enum FrMethod {
  FR_METHOD_AF = 0,
  FR_METHOD_CC = 1,
} FrMethod;

/**
 * Opaque sampling pattern.
 */
typedef struct FrPattern FrPattern;

/**
 * Opaque reconstruction result.
 */
typedef struct FrReconstruction FrReconstruction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *fr_last_error(void);

/**
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum FrStatus fr_pattern_jittered(size_t m1,
                                  size_t m2,
                                  double bound,
                                  uint64_t seed,
                                  struct FrPattern **out);

/**
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum FrStatus fr_pattern_integer_grid(size_t m1, size_t m2, struct FrPattern **out);

/**
 * # Safety
 * `t` must point to `len` doubles; `out` must be valid for a pointer write.
 */
enum FrStatus fr_pattern_rosette(double k_max,
                                 double w1,
                                 double w2,
                                 const double *t,
                                 size_t len,
                                 struct FrPattern **out);

/**
 * # Safety
 * `theta` must point to `len` doubles; `out` must be valid for a pointer write.
 */
enum FrStatus fr_pattern_spiral(double c, const double *theta, size_t len, struct FrPattern **out);

/**
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum FrStatus fr_pattern_polar(double c, size_t r, size_t t, struct FrPattern **out);

/**
 * Desk-scale preset with `side * side` nodes.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum FrStatus fr_pattern_preset(enum FrPatternKind kind,
                                size_t side,
                                uint64_t seed,
                                struct FrPattern **out);

/**
 * # Safety
 * `lambda1` and `lambda2` must each point to `len` doubles; `out` must be
 * valid for a pointer write.
 */
enum FrStatus fr_pattern_custom(const double *lambda1,
                                const double *lambda2,
                                size_t len,
                                struct FrPattern **out);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `pattern` must be null or a live handle.
 */
size_t fr_pattern_len(const struct FrPattern *pattern);

/**
 * # Safety
 * `pattern` must be a live handle; `lambda1`, `lambda2` valid for writes.
 */
enum FrStatus fr_pattern_node(const struct FrPattern *pattern,
                              size_t index,
                              double *lambda1,
                              double *lambda2);

/**
 * # Safety
 * `pattern` must be null or a handle not yet freed.
 */
void fr_pattern_free(struct FrPattern *pattern);

/**
 * Closed-form `⟨f, ψ_j⟩` for every node; `len` must equal the node count.
 *
 * # Safety
 * `pattern` must be a live handle; `re` and `im` must each be writable for `len` doubles.
 */
enum FrStatus fr_frame_coefficients(const struct FrPattern *pattern,
                                    enum FrFunction f,
                                    double *re,
                                    double *im,
                                    size_t len);

/**
 * Reconstructs `f` from its frame data on `pattern`.
 *
 * `n = 0` chooses the reconstruction side from the node count, which must
 * then be a perfect square. `rel_tol <= 0` selects the default cutoff and
 * `grid` is the evaluation resolution per axis. A singular C-C operator is
 * not an error: the result reports it and its MSE is NaN.
 *
 * # Safety
 * `pattern` must be a live handle; `out` must be valid for a pointer write.
 */
enum FrStatus fr_reconstruct(const struct FrPattern *pattern,
                             enum FrFunction f,
                             enum FrMethod method,
                             size_t n,
                             double rel_tol,
                             size_t grid,
                             struct FrReconstruction **out);

/**
 * Mean-square error on the evaluation grid; NaN when singular or null.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
double fr_reconstruction_mse(const struct FrReconstruction *r);

/**
 * 1 if the C-C operator was singular, 0 otherwise (or for null).
 *
 * # Safety
 * `r` must be null or a live handle.
 */
int32_t fr_reconstruction_is_singular(const struct FrReconstruction *r);

/**
 * Reconstruction side `n` actually used.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t fr_reconstruction_n(const struct FrReconstruction *r);

/**
 * Number of coefficients (0 when singular).
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t fr_reconstruction_coefficient_count(const struct FrReconstruction *r);

/**
 * Copies the coefficients; `len` must equal the coefficient count.
 *
 * # Safety
 * `r` must be a live handle; `re` and `im` must each be writable for `len` doubles.
 */
enum FrStatus fr_reconstruction_coefficients(const struct FrReconstruction *r,
                                             double *re,
                                             double *im,
                                             size_t len);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void fr_reconstruction_free(struct FrReconstruction *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAME_RECON_H */
