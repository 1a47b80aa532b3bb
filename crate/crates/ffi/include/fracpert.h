#ifndef FRACPERT_H
#define FRACPERT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FracpertStatus {
  FRACPERT_STATUS_OK = 0,
  FRACPERT_STATUS_NULL_POINTER = 1,
  FRACPERT_STATUS_INVALID_ARGUMENT = 2,
  FRACPERT_STATUS_DOMAIN = 3,
  FRACPERT_STATUS_NON_CONVERGENCE = 4,
  FRACPERT_STATUS_SINGULAR = 5,
  FRACPERT_STATUS_HYPOTHESIS_VIOLATED = 6,
  FRACPERT_STATUS_QUADRATURE_STALLED = 7,
  FRACPERT_STATUS_TAIL_TOO_LARGE = 8,
  FRACPERT_STATUS_TERM_CAP = 9,
  FRACPERT_STATUS_PANIC = 10,
} FracpertStatus;

/**
 * Which unperturbed family to evaluate.
 */
typedef enum FracpertFamily {
  FRACPERT_FAMILY_COSINE = 0,
  FRACPERT_FAMILY_SINE = 1,
  FRACPERT_FAMILY_RIEMANN_LIOUVILLE = 2,
} FracpertFamily;

/**
 * Square real matrix.
 */
typedef struct FracpertMatrix FracpertMatrix;

/**
 * Perturbed cosine and sine families sampled on a time grid.
 */
typedef struct FracpertSeries FracpertSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t fracpert_last_error(char *buf, size_t len);

/**
 * Static, NUL-terminated name of a status code.
 */
const char *fracpert_status_name(int status);

/**
 * New `dim x dim` matrix from `dim * dim` row-major values.
 *
 * # Safety
 * `values` must point to `dim * dim` doubles; `out` must be writable.
 */
enum FracpertStatus fracpert_matrix_new(size_t dim,
                                        const double *values,
                                        struct FracpertMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void fracpert_matrix_free(struct FracpertMatrix *m);

/**
 * Dimension of a matrix, 0 for null.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t fracpert_matrix_dim(const struct FracpertMatrix *m);

/**
 * Copies the entries row-major into `out`, which holds `len` doubles.
 *
 * # Safety
 * `m` must be a live handle and `out` valid for `len` doubles.
 */
enum FracpertStatus fracpert_matrix_read(const struct FracpertMatrix *m, double *out, size_t len);

/**
 * # Safety
 * `out` must be writable.
 */
enum FracpertStatus fracpert_gamma(double x, double *out);

/**
 * Two-parameter Mittag-Leffler function `E_{a,b}(z)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FracpertStatus fracpert_ml_scalar(double a, double b, double z, double *out);

/**
 * Unperturbed family of `a` at time `t`.
 *
 * # Safety
 * `a` must be a live handle and `out` writable.
 */
enum FracpertStatus fracpert_family(enum FracpertFamily family,
                                    double alpha,
                                    double t,
                                    const struct FracpertMatrix *a,
                                    struct FracpertMatrix **out);

/**
 * `(lambda^alpha I - a)^-1`.
 *
 * # Safety
 * `a` must be a live handle and `out` writable.
 */
enum FracpertStatus fracpert_resolvent(double lambda,
                                       double alpha,
                                       const struct FracpertMatrix *a,
                                       struct FracpertMatrix **out);

/**
 * Neumann series for `(lambda^alpha I - a - b)^-1`. `theta` and `n_terms`
 * may be null.
 *
 * # Safety
 * Handles must be live; non-null output pointers must be writable.
 */
enum FracpertStatus fracpert_neumann_resolvent(double lambda,
                                               double alpha,
                                               const struct FracpertMatrix *a,
                                               const struct FracpertMatrix *b,
                                               double tol,
                                               struct FracpertMatrix **out,
                                               double *theta,
                                               size_t *n_terms);

/**
 * Perturbed families of `a + b` on `n_times` sample times, summed to
 * tolerance `tol` with the default quadrature.
 *
 * # Safety
 * `times` must hold `n_times` doubles; handles must be live; `out` writable.
 */
enum FracpertStatus fracpert_series_new(double alpha,
                                        const double *times,
                                        size_t n_times,
                                        const struct FracpertMatrix *a,
                                        const struct FracpertMatrix *b,
                                        double tol,
                                        struct FracpertSeries **out);

/**
 * # Safety
 * `s` must be null or a live series handle.
 */
void fracpert_series_free(struct FracpertSeries *s);

/**
 * Number of sample times, 0 for null.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t fracpert_series_len(const struct FracpertSeries *s);

/**
 * Terms summed for the cosine and sine families.
 *
 * # Safety
 * `s` must be a live handle; outputs writable.
 */
enum FracpertStatus fracpert_series_terms(const struct FracpertSeries *s,
                                          size_t *cosine_terms,
                                          size_t *sine_terms);

/**
 * Copy of `C(t_index; A + B)`.
 *
 * # Safety
 * `s` must be a live handle; `out` writable.
 */
enum FracpertStatus fracpert_series_cosine(const struct FracpertSeries *s,
                                           size_t index,
                                           struct FracpertMatrix **out);

/**
 * Copy of `S(t_index; A + B)`.
 *
 * # Safety
 * `s` must be a live handle; `out` writable.
 */
enum FracpertStatus fracpert_series_sine(const struct FracpertSeries *s,
                                         size_t index,
                                         struct FracpertMatrix **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACPERT_H */
