#ifndef PERISCOPE_H
#define PERISCOPE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PeriscopeStatus {
  PERISCOPE_STATUS_OK = 0,
  PERISCOPE_STATUS_NULL_POINTER = 1,
  PERISCOPE_STATUS_INVALID_ARGUMENT = 2,
  PERISCOPE_STATUS_INVARIANT = 3,
  PERISCOPE_STATUS_SCHEMA = 4,
  PERISCOPE_STATUS_IO = 5,
  PERISCOPE_STATUS_JSON = 6,
  PERISCOPE_STATUS_DIVERGED = 7,
  PERISCOPE_STATUS_NON_FINITE_START = 8,
  PERISCOPE_STATUS_DEGENERATE_DATA = 9,
  PERISCOPE_STATUS_COVARIANCE_UNAVAILABLE = 10,
  PERISCOPE_STATUS_POSITIVITY = 11,
  PERISCOPE_STATUS_UNSUPPORTED_WAVELET = 12,
  PERISCOPE_STATUS_CSV = 13,
  PERISCOPE_STATUS_CONFIG = 14,
  PERISCOPE_STATUS_BUFFER_TOO_SMALL = 15,
  PERISCOPE_STATUS_UTF8 = 16,
  PERISCOPE_STATUS_PANIC = 99,
} PeriscopeStatus;

typedef enum PeriscopeKind {
  PERISCOPE_KIND_PGARCH = 0,
  PERISCOPE_KIND_PACD = 1,
} PeriscopeKind;

typedef enum PeriscopeFamily {
  PERISCOPE_FAMILY_OMEGA = 0,
  PERISCOPE_FAMILY_ALPHA = 1,
  PERISCOPE_FAMILY_BETA = 2,
  PERISCOPE_FAMILY_LAMBDA = 3,
  PERISCOPE_FAMILY_GAMMA = 4,
  PERISCOPE_FAMILY_DELTA = 5,
  PERISCOPE_FAMILY_SIGMA_SQ = 6,
} PeriscopeFamily;

/**
 * A fitted model with its asymptotic covariance.
 */
typedef struct PeriscopeFit PeriscopeFit;

/**
 * A model specification.
 */
typedef struct PeriscopeModel PeriscopeModel;

/**
 * A Fourier or wavelet reduction of a fit.
 */
typedef struct PeriscopeReduction PeriscopeReduction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *periscope_last_error_message(void);

void periscope_clear_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *periscope_version(void);

/**
 * Builds a PGARCH model from three arrays of length `nu`. `ged_shape > 0`
 * selects GED innovations with that shape; otherwise standard normal.
 */
enum PeriscopeStatus periscope_model_pgarch(size_t nu,
                                            const double *omega,
                                            const double *alpha,
                                            const double *beta,
                                            double ged_shape,
                                            uint64_t seed,
                                            struct PeriscopeModel **out);

/**
 * Builds a PACD model with seasonal gamma innovations from four arrays of length `nu`.
 */
enum PeriscopeStatus periscope_model_pacd(size_t nu,
                                          const double *lambda,
                                          const double *gamma,
                                          const double *delta,
                                          const double *sigma_sq,
                                          uint64_t seed,
                                          struct PeriscopeModel **out);

/**
 * Parses a model JSON document. `fit_out` may be NULL; otherwise it
 * receives the fit section, or NULL if the document has none.
 */
enum PeriscopeStatus periscope_model_from_json(const char *json,
                                               struct PeriscopeModel **out,
                                               struct PeriscopeFit **fit_out);

/**
 * Serializes a model; release the string with [`periscope_string_free`].
 */
enum PeriscopeStatus periscope_model_to_json(const struct PeriscopeModel *model, char **out);

void periscope_string_free(char *s);

void periscope_model_free(struct PeriscopeModel *model);

/**
 * Period of the model, or 0 for a NULL handle.
 */
size_t periscope_model_nu(const struct PeriscopeModel *model);

enum PeriscopeStatus periscope_model_kind(const struct PeriscopeModel *model,
                                          enum PeriscopeKind *out);

/**
 * Copies the `nu` seasonal values of one family into `out`.
 */
enum PeriscopeStatus periscope_model_param(const struct PeriscopeModel *model,
                                           enum PeriscopeFamily fam,
                                           double *out,
                                           size_t out_len);

/**
 * Simulates `n_total - burn_in` observations into `x_out` and the
 * conditional variance or duration into `scale_out` (may be NULL).
 */
enum PeriscopeStatus periscope_simulate(const struct PeriscopeModel *model,
                                        size_t n_total,
                                        size_t burn_in,
                                        uint64_t seed,
                                        double *x_out,
                                        double *scale_out,
                                        size_t out_len);

/**
 * Quasi-likelihood fit of a series whose length is a multiple of `nu`.
 */
enum PeriscopeStatus periscope_fit(enum PeriscopeKind k,
                                   const double *x,
                                   size_t len,
                                   size_t nu,
                                   struct PeriscopeFit **out);

void periscope_fit_free(struct PeriscopeFit *fit);

/**
 * A new model handle holding the fitted parameters.
 */
enum PeriscopeStatus periscope_fit_model(const struct PeriscopeFit *fit,
                                         struct PeriscopeModel **out);

/**
 * Minimized quasi-likelihood objective, NaN for a NULL handle.
 */
double periscope_fit_objective(const struct PeriscopeFit *fit);

/**
 * Serializes the fitted model together with its covariance.
 */
enum PeriscopeStatus periscope_fit_to_json(const struct PeriscopeFit *fit, char **out);

/**
 * Reduces a fit. `method` is `"fourier"` or `"wavelet:<family>"`, e.g. `"wavelet:LA(5)"`.
 */
enum PeriscopeStatus periscope_reduce(const struct PeriscopeFit *fit,
                                      const char *method,
                                      double alpha,
                                      struct PeriscopeReduction **out);

void periscope_reduction_free(struct PeriscopeReduction *r);

/**
 * Number of retained coefficients, or 0 for a NULL handle.
 */
size_t periscope_reduction_n_parameters(const struct PeriscopeReduction *r);

/**
 * A new model handle holding the reduced parameters.
 */
enum PeriscopeStatus periscope_reduction_model(const struct PeriscopeReduction *r,
                                               struct PeriscopeModel **out);

/**
 * Coefficients, Z-scores and retained flags (1/0) of one family. Each
 * buffer needs room for the transform length: `nu` for Fourier, the
 * extended power-of-two length for wavelets. Any output may be NULL.
 */
enum PeriscopeStatus periscope_reduction_coefficients(const struct PeriscopeReduction *r,
                                                      enum PeriscopeFamily fam,
                                                      double *coefs,
                                                      double *z,
                                                      uint8_t *retained,
                                                      size_t len,
                                                      size_t *n_written);

/**
 * Forecasts `horizon` steps of `y^2` (PGARCH) or `u` (PACD) after the end
 * of `x`, whose first element is season 0.
 */
enum PeriscopeStatus periscope_forecast(const struct PeriscopeModel *model,
                                        const double *x,
                                        size_t len,
                                        size_t horizon,
                                        double *out);

/**
 * Fourier coefficients of `x` (length `n`) into `out` (length `n`).
 */
enum PeriscopeStatus periscope_fourier_analyze(const double *x, size_t n, double *out);

enum PeriscopeStatus periscope_fourier_synthesize(const double *f, size_t n, double *out);

/**
 * Forward DWT of a power-of-two length signal with the named wavelet (e.g. `"D(5)"`).
 */
enum PeriscopeStatus periscope_dwt(const double *x, size_t n, const char *wavelet, double *out);

enum PeriscopeStatus periscope_idwt(const double *w, size_t n, const char *wavelet, double *out);

/**
 * Ljung-Box statistic and p-value at `lag`.
 */
enum PeriscopeStatus periscope_ljung_box(const double *x,
                                         size_t n,
                                         size_t lag,
                                         double *q,
                                         double *p_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERISCOPE_H */
