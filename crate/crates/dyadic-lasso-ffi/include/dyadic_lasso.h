#ifndef DYADIC_LASSO_H
#define DYADIC_LASSO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum dl_status {
  DL_OK = 0,
  /**
   * Invalid parameter, configuration, or dimension.
   */
  DL_ERR_PARAM = 1,
  /**
   * Solver did not reach its tolerance.
   */
  DL_ERR_SOLVER = 2,
  /**
   * Outside the valid regime of the requested procedure.
   */
  DL_ERR_REGIME = 3,
  /**
   * A required pointer was null.
   */
  DL_ERR_NULL = 4,
  /**
   * Internal panic; state may be inconsistent.
   */
  DL_ERR_INTERNAL = 5,
} dl_status;

/**
 * Opaque dictionary handle.
 */
typedef struct dl_dictionary dl_dictionary;

/**
 * Opaque fit handle (single-level or selected).
 */
typedef struct dl_fit dl_fit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread. Valid until the
 * next failing call; never null.
 */
const char *dl_last_error_message(void);

/**
 * Crate version as a static string.
 */
const char *dl_version(void);

/**
 * Orthonormal sequence dictionary with `p` columns.
 */
enum dl_status dl_dictionary_orthonormal(uintptr_t p, struct dl_dictionary **out);

/**
 * Haar system on the regular grid of size `n` (a power of two).
 */
enum dl_status dl_dictionary_haar(uintptr_t n, struct dl_dictionary **out);

/**
 * Fourier system with `p` columns on the regular grid of size `n`.
 */
enum dl_status dl_dictionary_fourier(uintptr_t n, uintptr_t p, struct dl_dictionary **out);

/**
 * Seeded Gaussian design with `p` columns on `n` points.
 */
enum dl_status dl_dictionary_gaussian(uintptr_t n,
                                      uintptr_t p,
                                      uint64_t seed,
                                      struct dl_dictionary **out);

/**
 * All distinct Heaviside columns on the regular 1-d grid of size `n`.
 */
enum dl_status dl_dictionary_heaviside_grid(uintptr_t n, struct dl_dictionary **out);

/**
 * Number of columns.
 */
uintptr_t dl_dictionary_len(const struct dl_dictionary *dict);

/**
 * Number of design points.
 */
uintptr_t dl_dictionary_n(const struct dl_dictionary *dict);

void dl_dictionary_free(struct dl_dictionary *dict);

/**
 * Coordinate-descent Lasso fit of `y` (length = number of design
 * points) at penalty `lambda`. `tol <= 0` or `max_iter == 0` select
 * the defaults.
 */
enum dl_status dl_lasso_cd(const struct dl_dictionary *dict,
                           const double *y,
                           uintptr_t y_len,
                           double lambda,
                           double tol,
                           uintptr_t max_iter,
                           struct dl_fit **out);

/**
 * Selected Lasso over the dyadic truncation levels up to `p_max` at
 * noise level `eps`; the chosen level is readable via `dl_fit_p_hat`.
 */
enum dl_status dl_selected_lasso(const struct dl_dictionary *dict,
                                 const double *y,
                                 uintptr_t y_len,
                                 double eps,
                                 uintptr_t p_max,
                                 double tol,
                                 struct dl_fit **out);

/**
 * Number of coefficients in the fit.
 */
uintptr_t dl_fit_num_coeffs(const struct dl_fit *fit);

/**
 * Copy the coefficients into `buf` (capacity `buf_len`); returns the
 * number written.
 */
uintptr_t dl_fit_coeffs(const struct dl_fit *fit, double *buf, uintptr_t buf_len);

/**
 * Penalized objective value at the fit.
 */
double dl_fit_objective(const struct dl_fit *fit);

/**
 * Optimality certificate (maximal subgradient violation).
 */
double dl_fit_kkt_violation(const struct dl_fit *fit);

/**
 * l1 norm of the coefficients.
 */
double dl_fit_l1_norm(const struct dl_fit *fit);

/**
 * Coordinate passes spent by the solver.
 */
uintptr_t dl_fit_iterations(const struct dl_fit *fit);

/**
 * Selected truncation level, or 0 for a single-level fit.
 */
uintptr_t dl_fit_p_hat(const struct dl_fit *fit);

void dl_fit_free(struct dl_fit *fit);

/**
 * Half-threshold `sign(y_j) max(|y_j| - lambda/2, 0)` written in place
 * over `out` (length `len`).
 */
enum dl_status dl_soft_threshold(const double *y, uintptr_t len, double lambda, double *out);

/**
 * `lambda_p = 4 eps (sqrt(ln p) + 1)`.
 */
enum dl_status dl_lambda_p(uintptr_t p, double eps, double *out);

/**
 * `pen(p) = 5 eps^2 ln p`.
 */
enum dl_status dl_pen_p(uintptr_t p, double eps, double *out);

/**
 * `lambda = (28 sigma / sqrt(n)) (sqrt((d+1) ln(n+1)) + 4)`.
 */
enum dl_status dl_lambda_nn(uintptr_t n, uintptr_t d, double sigma, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYADIC_LASSO_H */
