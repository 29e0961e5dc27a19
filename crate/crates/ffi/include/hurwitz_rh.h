#ifndef HURWITZ_RH_H
#define HURWITZ_RH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum HrhStatus {
  HrhStatus_Ok = 0,
  HrhStatus_NullPointer = 1,
  HrhStatus_BufferTooSmall = 2,
  HrhStatus_InvalidInput = 3,
  HrhStatus_Unsupported = 4,
  HrhStatus_OnDivisor = 5,
  HrhStatus_NumericalFailure = 6,
  HrhStatus_ConsistencyFailure = 7,
  HrhStatus_Panic = 8,
} HrhStatus;

/**
 * Which sectorial solution to evaluate.
 */
typedef enum HrhSide {
  HrhSide_Right = 0,
  HrhSide_Left = 1,
} HrhSide;

/**
 * Opaque handle: a covering with its kernel data.
 */
typedef struct HrhSurface HrhSurface;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds the two-sheeted covering branched at `re[k] + i·im[k]`, `k < n`, with
 * admissible line angle `phi`. On success `*out` owns a handle to be released
 * with [`hrh_surface_free`].
 *
 * # Safety
 * `re` and `im` must point to `n` readable doubles; `out` must be writable.
 */
enum HrhStatus hrh_surface_hyperelliptic(const double *re,
                                         const double *im,
                                         size_t n,
                                         double phi,
                                         struct HrhSurface **out);

/**
 * # Safety
 * `s` must come from [`hrh_surface_hyperelliptic`] and not be used afterwards.
 */
void hrh_surface_free(struct HrhSurface *s);

/**
 * Number of branch points (0 for a null handle).
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t hrh_surface_size(const struct HrhSurface *s);

/**
 * Genus of the surface (0 for a null handle).
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t hrh_surface_genus(const struct HrhSurface *s);

/**
 * Branch points in the internal (ordered) indexing.
 *
 * # Safety
 * `re`/`im` must hold `len` writable doubles.
 */
enum HrhStatus hrh_branch_points(const struct HrhSurface *s, double *re, double *im, size_t len);

/**
 * Exact Stokes matrix, row-major `n×n` integers.
 *
 * # Safety
 * `out` must hold `len` writable `int64_t`.
 */
enum HrhStatus hrh_stokes_matrix(const struct HrhSurface *s, int64_t *out, size_t len);

/**
 * Exact connection matrix, row-major `n×n` integers.
 *
 * # Safety
 * `out` must hold `len` writable `int64_t`.
 */
enum HrhStatus hrh_connection_matrix(const struct HrhSurface *s, int64_t *out, size_t len);

/**
 * Eigenvalues of `V`, sorted, checked against the predicted spectrum to `tol`.
 *
 * # Safety
 * `re`/`im` must hold `len` writable doubles.
 */
enum HrhStatus hrh_spectrum(const struct HrhSurface *s,
                            double tol,
                            double *re,
                            double *im,
                            size_t len);

/**
 * `Ψ^{r/l}(z)`, row-major `n×n`, with `arg z` taken in `(φ − π, φ + π]`.
 *
 * # Safety
 * `re`/`im` must hold `len` writable doubles.
 */
enum HrhStatus hrh_psi(const struct HrhSurface *s,
                       double z_re,
                       double z_im,
                       enum HrhSide side,
                       double *re,
                       double *im,
                       size_t len);

/**
 * Relative residuals of `Ψ^l = Ψ^r S` on `l_+` and `Ψ^l = Ψ^r Sᵀ` on `l_−` at `|z| = modulus`.
 *
 * # Safety
 * `plus` and `minus` must be writable.
 */
enum HrhStatus hrh_verify_stokes(const struct HrhSurface *s,
                                 double modulus,
                                 double *plus,
                                 double *minus);

/**
 * Message of the last failure on this thread, or null. Valid until the next call
 * into the library from the same thread.
 */
const char *hrh_last_error(void);

/**
 * Static description of a status code.
 */
const char *hrh_status_str(enum HrhStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HURWITZ_RH_H */
