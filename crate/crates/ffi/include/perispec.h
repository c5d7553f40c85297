/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef PERISPEC_H
#define PERISPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum PerispecStatus {
  PERISPEC_STATUS_OK = 0,
  PERISPEC_STATUS_INPUT_ERROR = 1,
  PERISPEC_STATUS_DOMAIN_ERROR = 2,
  PERISPEC_STATUS_NUMERIC_ERROR = 3,
  PERISPEC_STATUS_STRUCTURAL_ERROR = 4,
  PERISPEC_STATUS_NULL_POINTER = 5,
  PERISPEC_STATUS_BUFFER_TOO_SMALL = 6,
  PERISPEC_STATUS_PANIC = 7,
} PerispecStatus;

/**
 * Opaque block Jacobi matrix.
 */
typedef struct PerispecBlockJacobi PerispecBlockJacobi;

/**
 * Opaque periodic Jacobi matrix.
 */
typedef struct PerispecPeriodicJacobi PerispecPeriodicJacobi;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread as a NUL-terminated string,
 * truncating to `cap` bytes. Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be valid for `cap` writes, or null with `cap == 0`.
 */
size_t perispec_last_error(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *perispec_version(void);

/**
 * Builds a period-`p` Jacobi matrix from `a[0..p]` (positive) and `b[0..p]`.
 *
 * # Safety
 * `a` and `b` must point to `p` doubles; `out` must be writable.
 */
enum PerispecStatus perispec_periodic_jacobi_new(const double *a,
                                                 const double *b,
                                                 size_t p,
                                                 struct PerispecPeriodicJacobi **out);

/**
 * # Safety
 * `h` must come from [`perispec_periodic_jacobi_new`] and not be used again.
 */
void perispec_periodic_jacobi_free(struct PerispecPeriodicJacobi *h);

/**
 * Discriminant coefficients, constant term first (`p + 1` values).
 *
 * # Safety
 * `h` must be a live handle; `out` valid for `cap` writes; `len` writable.
 */
enum PerispecStatus perispec_discriminant(const struct PerispecPeriodicJacobi *h,
                                          double *out,
                                          size_t cap,
                                          size_t *len);

/**
 * Band edges as `lo₀, hi₀, lo₁, hi₁, …` (`2p` values).
 *
 * # Safety
 * As for [`perispec_discriminant`].
 */
enum PerispecStatus perispec_bands(const struct PerispecPeriodicJacobi *h,
                                   double *out,
                                   size_t cap,
                                   size_t *len);

/**
 * Half-line m-function at `E = re + i·im`.
 *
 * # Safety
 * `h` must be a live handle; `m_re` and `m_im` writable.
 */
enum PerispecStatus perispec_periodic_m(const struct PerispecPeriodicJacobi *h,
                                        double re,
                                        double im,
                                        double *m_re,
                                        double *m_im);

/**
 * Parses `{"l":…,"blocks":[{"A":…,"B":…}],"tail":"free"|"none"}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` writable.
 */
enum PerispecStatus perispec_block_jacobi_from_json(const char *json,
                                                    struct PerispecBlockJacobi **out);

/**
 * # Safety
 * `h` must come from [`perispec_block_jacobi_from_json`] and not be used again.
 */
void perispec_block_jacobi_free(struct PerispecBlockJacobi *h);

/**
 * Both sides of the P₂ sum rule and `|lhs − rhs|`.
 *
 * # Safety
 * `h` must be a live handle; the three outputs writable.
 */
enum PerispecStatus perispec_sumrule_p2(const struct PerispecBlockJacobi *h,
                                        double *lhs,
                                        double *rhs,
                                        double *residual);

/**
 * The C₀ quantities `Z`, `E₀`, `A₀` and `Z − A₀ − E₀`.
 *
 * # Safety
 * `h` must be a live handle; the four outputs writable.
 */
enum PerispecStatus perispec_sumrule_c0(const struct PerispecBlockJacobi *h,
                                        double *z,
                                        double *e0,
                                        double *a0,
                                        double *residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERISPEC_H */
