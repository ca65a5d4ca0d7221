#ifndef ANDERSON_BAND_H
#define ANDERSON_BAND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an API call.
 */
typedef enum {
  AB_STATUS_OK = 0,
  AB_STATUS_INVALID_ARGUMENT = 1,
  AB_STATUS_NOT_HYPERBOLIC = 2,
  AB_STATUS_DEGENERATE = 3,
  AB_STATUS_CONE_CONSTRUCTION = 4,
  AB_STATUS_BUDGET = 5,
  AB_STATUS_NULL_POINTER = 6,
  AB_STATUS_OUT_OF_RANGE = 7,
  AB_STATUS_PANIC = 8,
} AbStatus;

typedef enum {
  AB_VERDICT_CERTIFIED_UH = 0,
  AB_VERDICT_CERTIFIED_NOT_UH = 1,
  AB_VERDICT_UNDETERMINED = 2,
} AbVerdict;

/**
 * Opaque certification report handle.
 */
typedef struct AbCertReport AbCertReport;

/**
 * Opaque eigenvalue list handle.
 */
typedef struct AbEigenList AbEigenList;

/**
 * Opaque spectrum handle.
 */
typedef struct AbSpectrum AbSpectrum;

/**
 * Two-site Bernoulli model: site `j` carries `c_j` or `c_j + lambda_j`,
 * the latter with probability `p_j`.
 */
typedef struct {
  double lambda0;
  double lambda1;
  double c0;
  double c1;
  double p0;
  double p1;
} AbParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * successful one. Valid until the next call on the same thread.
 */
const char *ab_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ab_version(void);

/**
 * Almost-sure spectrum of the model. Release with [`ab_spectrum_free`].
 *
 * # Safety
 * `params` must be null or point to an `AbParams`; `out` must be null or
 * writable.
 */
AbStatus ab_spectrum(const AbParams *params, AbSpectrum **out);

/**
 * # Safety
 * `s` must be null or a live handle from [`ab_spectrum`].
 */
size_t ab_spectrum_band_count(const AbSpectrum *s);

/**
 * # Safety
 * `s` must be null or a live handle from [`ab_spectrum`].
 */
size_t ab_spectrum_gap_count(const AbSpectrum *s);

/**
 * Endpoints of band `index`, in increasing order.
 *
 * # Safety
 * `s` must be null or a live handle; `lo` and `hi` must be null or writable.
 */
AbStatus ab_spectrum_band(const AbSpectrum *s, size_t index, double *lo, double *hi);

/**
 * Endpoints of gap `index`; the outer gaps have infinite ends.
 *
 * # Safety
 * `s` must be null or a live handle; `lo` and `hi` must be null or writable.
 */
AbStatus ab_spectrum_gap(const AbSpectrum *s, size_t index, double *lo, double *hi);

/**
 * # Safety
 * `s` must be null or a handle from [`ab_spectrum`] not yet freed.
 */
void ab_spectrum_free(AbSpectrum *s);

/**
 * Certify uniform hyperbolicity at `energy` for the period-`m` family
 * whose site `j` takes `offsets[j]` or `offsets[j] + lambdas[j]`.
 * Words up to `budget` letters are searched for witnesses.
 *
 * # Safety
 * `lambdas` and `offsets` must point to `m` readable doubles; `out` must be
 * null or writable.
 */
AbStatus ab_certify(const double *lambdas,
                    const double *offsets,
                    size_t m,
                    double energy,
                    size_t budget,
                    AbCertReport **out);

/**
 * Verdict of the report; a null handle reads as undetermined.
 *
 * # Safety
 * `r` must be null or a live handle from [`ab_certify`].
 */
AbVerdict ab_cert_report_verdict(const AbCertReport *r);

/**
 * Cone margin of a positive certificate, NaN otherwise.
 *
 * # Safety
 * `r` must be null or a live handle from [`ab_certify`].
 */
double ab_cert_report_margin(const AbCertReport *r);

/**
 * Number of letters in the witness word, 0 when there is none.
 *
 * # Safety
 * `r` must be null or a live handle from [`ab_certify`].
 */
size_t ab_cert_report_witness_len(const AbCertReport *r);

/**
 * Copy the witness word (member indices) into `buf`, which must hold at
 * least [`ab_cert_report_witness_len`] entries.
 *
 * # Safety
 * `r` must be null or a live handle; `buf` must be null or hold `cap`
 * writable entries.
 */
AbStatus ab_cert_report_witness(const AbCertReport *r, size_t *buf, size_t cap);

/**
 * # Safety
 * `r` must be null or a handle from [`ab_certify`] not yet freed.
 */
void ab_cert_report_free(AbCertReport *r);

/**
 * Eigenvalues of the Dirichlet box Hamiltonian on `n_sites` sites for the
 * potential drawn from `seed`. Release with [`ab_eigen_list_free`].
 *
 * # Safety
 * `params` must be null or point to an `AbParams`; `out` must be null or
 * writable.
 */
AbStatus ab_finite_volume_eigenvalues(const AbParams *params,
                                      size_t n_sites,
                                      uint64_t seed,
                                      AbEigenList **out);

/**
 * # Safety
 * `e` must be null or a live handle.
 */
size_t ab_eigen_list_len(const AbEigenList *e);

/**
 * Sorted eigenvalues, owned by the handle.
 *
 * # Safety
 * `e` must be null or a live handle.
 */
const double *ab_eigen_list_values(const AbEigenList *e);

/**
 * # Safety
 * `e` must be null or a handle not yet freed.
 */
void ab_eigen_list_free(AbEigenList *e);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANDERSON_BAND_H */
