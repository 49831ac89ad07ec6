/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef ONEBIT_H
#define ONEBIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ObStatus {
  OB_STATUS_OK = 0,
  OB_STATUS_NULL_POINTER = 1,
  OB_STATUS_INVALID_ARGUMENT = 2,
  OB_STATUS_SINGULAR_COVARIANCE = 3,
  OB_STATUS_LENGTH_MISMATCH = 4,
  OB_STATUS_INVALID_CONFIG = 5,
  OB_STATUS_PANIC = 6,
} ObStatus;

typedef enum ObPriorKind {
  // Parameters are the lower and upper bounds.
  OB_PRIOR_KIND_UNIFORM = 0,
  // Parameters are the mean and standard deviation.
  OB_PRIOR_KIND_GAUSSIAN = 1,
} ObPriorKind;

// Noise covariance with its Cholesky factor.
typedef struct ObNoiseModel ObNoiseModel;

// Precomputed reduced-form quantities for one covariance.
typedef struct ObRecoveryCache ObRecoveryCache;

typedef struct ObRecoveryInfo {
  double theta_hat;
  double objective;
  size_t iterations;
  bool fast_path;
  bool consistent;
  bool hit_iteration_cap;
} ObRecoveryInfo;

typedef struct ObSimSummary {
  double nmse;
  double median_nmse;
  size_t trials;
  size_t capped_steps;
} ObSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *ob_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ob_version(void);

// White noise `σ_v² I_n`.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum ObStatus ob_noise_white(size_t n, double sigma_v, struct ObNoiseModel **out);

// Toeplitz noise `(p_tot / n) ρ^|i−j|`.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum ObStatus ob_noise_colored(size_t n, double p_tot, double rho, struct ObNoiseModel **out);

// Arbitrary SPD covariance given as `n × n` row-major values.
//
// # Safety
// `values` must hold `n * n` doubles; `out` must be writable.
enum ObStatus ob_noise_from_covariance(size_t n, const double *values, struct ObNoiseModel **out);

// # Safety
// `noise` must be null or a pointer from an `ob_noise_*` constructor that
// has not been freed.
void ob_noise_free(struct ObNoiseModel *noise);

// Sensor count, or 0 for a null handle.
//
// # Safety
// `noise` must be null or a live handle.
size_t ob_noise_dim(const struct ObNoiseModel *noise);

// Trace of the covariance, or NaN for a null handle.
//
// # Safety
// `noise` must be null or a live handle.
double ob_noise_total_power(const struct ObNoiseModel *noise);

// Builds the recovery cache; the noise handle may be freed afterwards.
//
// # Safety
// `noise` must be a live handle and `out` writable.
enum ObStatus ob_cache_new(const struct ObNoiseModel *noise, struct ObRecoveryCache **out);

// # Safety
// `cache` must be null or a live handle from [`ob_cache_new`].
void ob_cache_free(struct ObRecoveryCache *cache);

// Sensor count, or 0 for a null handle.
//
// # Safety
// `cache` must be null or a live handle.
size_t ob_cache_dim(const struct ObRecoveryCache *cache);

// Writes the fusion weights `η` into `eta_out[0..n]`.
//
// # Safety
// `cache` must be live and `eta_out` valid for `n` writes.
enum ObStatus ob_cache_eta(const struct ObRecoveryCache *cache, double *eta_out, size_t n);

// Weighted least-squares estimate `ηᵀz`.
//
// # Safety
// `cache` must be live, `z` valid for `n` reads and `theta_out` writable.
enum ObStatus ob_estimate_theta(const struct ObRecoveryCache *cache,
                                const double *z,
                                size_t n,
                                double *theta_out);

// Sign quantizer `r_i = sgn(z_i − τ_i)` with `sgn(0) = +1`.
//
// # Safety
// `z` and `tau` must be valid for `n` reads and `bits_out` for `n` writes.
enum ObStatus ob_quantize(const double *z, const double *tau, size_t n, int8_t *bits_out);

// Recovers the unquantized readings from one frame of bits and thresholds.
// `z_out` receives the minimizer; `info_out` the estimate and diagnostics.
//
// # Safety
// `cache` must be live; `tau`, `bits` valid for `n` reads; `z_out` valid for
// `n` writes or null; `info_out` writable.
enum ObStatus ob_solve_cqp(const struct ObRecoveryCache *cache,
                           const double *tau,
                           const int8_t *bits,
                           size_t n,
                           double *z_out,
                           struct ObRecoveryInfo *info_out);

// Mutual information in bits between the parameter and one sign bit.
//
// # Safety
// `mi_out` must be writable.
enum ObStatus ob_mutual_information(enum ObPriorKind prior,
                                    double param_a,
                                    double param_b,
                                    double tau,
                                    double sigma_v,
                                    double *mi_out);

// Runs a Monte Carlo simulation from a JSON config, the same schema the
// command-line tool reads.
//
// # Safety
// `config_json` must be a NUL-terminated string and `out` writable.
enum ObStatus ob_simulate_json(const char *config_json, struct ObSimSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONEBIT_H */
