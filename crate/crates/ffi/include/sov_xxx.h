#ifndef SOV_XXX_H
#define SOV_XXX_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SovStatus {
  SOV_STATUS_OK = 0,
  SOV_STATUS_NULL_POINTER = 1,
  SOV_STATUS_INVALID_ARGUMENT = 2,
  // sampling, pole collision, degenerate nodes, non-convergence
  SOV_STATUS_NUMERICAL = 3,
  SOV_STATUS_OUT_OF_RANGE = 4,
  SOV_STATUS_BUFFER_TOO_SMALL = 5,
  SOV_STATUS_PANIC = 6,
} SovStatus;

typedef enum SovOperator {
  SOV_OPERATOR_SIGMA_MINUS = 0,
  SOV_OPERATOR_SIGMA_Z = 1,
  SOV_OPERATOR_SIGMA_PLUS = 2,
} SovOperator;

typedef enum SovFormat {
  SOV_FORMAT_JSON = 0,
  SOV_FORMAT_CSV = 1,
} SovFormat;

// Chain parameters: η, ξ_1..ξ_N and the genericity margin.
typedef struct SovParams SovParams;

// Full spectrum of a chain together with its SoV basis.
typedef struct SovSpectrum SovSpectrum;

typedef struct SovComplex {
  double re;
  double im;
} SovComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message of this thread into `buf` (NUL-terminated).
// Returns the message length without the NUL; 0 when there is none.
//
// # Safety
// `buf` must point to `cap` writable bytes or be null.
size_t sov_last_error(char *buf, size_t cap);

// Static description of a status code.
const char *sov_status_str(enum SovStatus status);

// Parameters from explicit η and ξ arrays of length `n`.
//
// # Safety
// `xi` must point to `n` values; `out` must be writable.
enum SovStatus sov_params_new(struct SovComplex eta,
                              const struct SovComplex *xi,
                              size_t n,
                              double margin,
                              struct SovParams **out_params);

// Seeded generic draw with η = 1.
//
// # Safety
// `out_params` must be writable.
enum SovStatus sov_params_sample(size_t n_sites,
                                 uint64_t seed,
                                 double margin,
                                 struct SovParams **out_params);

// # Safety
// `params` must come from this library and not be used afterwards.
void sov_params_free(struct SovParams *params);

// # Safety
// `params` must be a live handle.
enum SovStatus sov_params_n_sites(const struct SovParams *params, size_t *out_n);

// # Safety
// `params` must be a live handle; `out_xi` must hold `cap` values.
enum SovStatus sov_params_xi(const struct SovParams *params, struct SovComplex *out_xi, size_t cap);

// All 2^N eigen-records of the antiperiodic transfer matrix.
//
// # Safety
// `params` must be a live handle; `out_spectrum` must be writable.
enum SovStatus sov_spectrum_new(const struct SovParams *params,
                                uint64_t seed,
                                struct SovSpectrum **out_spectrum);

// # Safety
// `spectrum` must come from this library and not be used afterwards.
void sov_spectrum_free(struct SovSpectrum *spectrum);

// # Safety
// `spectrum` must be a live handle.
enum SovStatus sov_spectrum_len(const struct SovSpectrum *spectrum, size_t *out_len);

// Number of Bethe roots R of record `index`.
//
// # Safety
// `spectrum` must be a live handle.
enum SovStatus sov_spectrum_degree(const struct SovSpectrum *spectrum,
                                   size_t index,
                                   size_t *out_degree);

// τ(λ) of record `index`.
//
// # Safety
// `spectrum` must be a live handle.
enum SovStatus sov_spectrum_tau(const struct SovSpectrum *spectrum,
                                size_t index,
                                struct SovComplex lambda,
                                struct SovComplex *out_tau);

// Bethe roots of record `index`. `out_len` receives R even when the buffer
// is too small.
//
// # Safety
// `spectrum` must be a live handle; `out_roots` must hold `cap` values.
enum SovStatus sov_spectrum_roots(const struct SovSpectrum *spectrum,
                                  size_t index,
                                  struct SovComplex *out_roots,
                                  size_t cap,
                                  size_t *out_len);

// ⟨Q_τ|Q_τ⟩ from the Gaudin determinant.
//
// # Safety
// `spectrum` must be a live handle.
enum SovStatus sov_gaudin_norm(const struct SovSpectrum *spectrum,
                               size_t index,
                               struct SovComplex *out_norm);

// ⟨Q_bra| op_site |Q_ket⟩ by the determinant formulas; `site` is 1-based.
//
// # Safety
// `spectrum` must be a live handle.
enum SovStatus sov_form_factor(const struct SovSpectrum *spectrum,
                               size_t bra,
                               size_t ket,
                               size_t site,
                               enum SovOperator op,
                               struct SovComplex *out_value);

// Same value from dense eigenvectors, for cross-checking.
//
// # Safety
// `spectrum` must be a live handle.
enum SovStatus sov_form_factor_dense(const struct SovSpectrum *spectrum,
                                     size_t bra,
                                     size_t ket,
                                     size_t site,
                                     enum SovOperator op,
                                     struct SovComplex *out_value);

// Run every suite and return the report text. Free it with
// [`sov_string_free`]. `out_pass` receives whether every check passed.
//
// # Safety
// `out_report` and `out_pass` must be writable.
enum SovStatus sov_run_all(size_t n_sites,
                           uint64_t seed,
                           double margin,
                           enum SovFormat format,
                           char **out_report,
                           bool *out_pass);

// # Safety
// `s` must come from this library and not be used afterwards.
void sov_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOV_XXX_H */
