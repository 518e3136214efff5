#ifndef DUALITY_LAB_H
#define DUALITY_LAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DlStatus {
  DL_STATUS_OK = 0,
  DL_STATUS_NULL_POINTER = 1,
  DL_STATUS_INVALID_PARAMETER = 2,
  DL_STATUS_DOMAIN = 3,
  DL_STATUS_NUMERICAL = 4,
  DL_STATUS_CONFIG = 5,
  DL_STATUS_BUFFER_TOO_SMALL = 6,
  DL_STATUS_PANIC = 7,
  DL_STATUS_OTHER = 8,
} DlStatus;

/**
 * Time scale of the two-type Moran chain against Kingman's coalescent.
 */
typedef enum DlMoranScale {
  /**
   * Jump rate `k(N-k)`, dual to Kingman at rate `n(n-1)`.
   */
  DL_MORAN_SCALE_LADDER = 0,
  /**
   * Jump rate `(N²/2)(k/N)(1-k/N)`, dual to Kingman at half speed.
   */
  DL_MORAN_SCALE_PRINTED = 1,
} DlMoranScale;

/**
 * A generator matrix over an enumerated state space.
 */
typedef struct DlGenerator DlGenerator;

/**
 * Mean and standard error of a Monte Carlo estimate.
 */
typedef struct DlEstimate {
  double mean;
  double se;
  uint64_t n;
} DlEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if it succeeded.
 * The pointer stays valid until the next call on this thread.
 */
const char *dl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dl_version(void);

/**
 * Generator of the inclusion process SIP(m) with `n` particles on `d` sites.
 *
 * # Safety
 * `out` must be valid for a write of one pointer.
 */
enum DlStatus dl_generator_new_sip(size_t d, double m, uint64_t n, struct DlGenerator **out);

/**
 * Generator of the `d`-type Moran model with `n` individuals and mutation rate `theta`.
 *
 * # Safety
 * `out` must be valid for a write of one pointer.
 */
enum DlStatus dl_generator_new_moran(uint64_t n, size_t d, double theta, struct DlGenerator **out);

/**
 * Generator of Kingman's block-counting chain with mutation `theta` and
 * selection `sigma`, truncated at `n_max`.
 *
 * # Safety
 * `out` must be valid for a write of one pointer.
 */
enum DlStatus dl_generator_new_kingman(double theta,
                                       double sigma,
                                       uint64_t n_max,
                                       struct DlGenerator **out);

/**
 * Releases a generator. Null is ignored.
 *
 * # Safety
 * `g` must be null or a handle from a `dl_generator_new_*` function not yet freed.
 */
void dl_generator_free(struct DlGenerator *g);

/**
 * Number of states, and the length of each state vector.
 *
 * # Safety
 * `g` must be a live handle; `states` and `dim` must be writable.
 */
enum DlStatus dl_generator_shape(const struct DlGenerator *g, size_t *states, size_t *dim);

/**
 * Copies the rate matrix, row-major, into `buf` of `len` doubles
 * (`len` must be at least `states²`).
 *
 * # Safety
 * `g` must be a live handle and `buf` valid for `len` writes.
 */
enum DlStatus dl_generator_rates(const struct DlGenerator *g, double *buf, size_t len);

/**
 * Copies state `i` into `buf` of `len` entries (at least the state dimension).
 *
 * # Safety
 * `g` must be a live handle and `buf` valid for `len` writes.
 */
enum DlStatus dl_generator_state(const struct DlGenerator *g, size_t i, uint64_t *buf, size_t len);

/**
 * `E_{k0}[f(X_t)]` where `f` is given by its values on the states, in index order.
 *
 * # Safety
 * `g` must be a live handle, `f` hold `f_len` doubles, `k0` hold `k0_len`
 * entries, and `out` be writable.
 */
enum DlStatus dl_generator_expectation(const struct DlGenerator *g,
                                       const double *f,
                                       size_t f_len,
                                       const uint64_t *k0,
                                       size_t k0_len,
                                       double t,
                                       double *out);

/**
 * Largest entry of `K·D_N - D_N·K̂ᵀ` for the two-type Moran chain with `n`
 * individuals against Kingman's coalescent.
 *
 * # Safety
 * `out` must be writable.
 */
enum DlStatus dl_check_moran_kingman(uint64_t n, enum DlMoranScale scale, double *out);

/**
 * Largest entry of the SIP(m) self-duality residual on `d` sites with `n` particles.
 *
 * # Safety
 * `out` must be writable.
 */
enum DlStatus dl_check_sip_self_duality(size_t d, double m, uint64_t n, double *out);

/**
 * Neutral Wright-Fisher moment through SIP(0): `E_ξ[D(ξ_t, x) 1{all sites occupied}]`
 * for a start `xi` occupying every one of the `d` sites.
 *
 * # Safety
 * `x` and `xi` must hold `d` entries each and `out` be writable.
 */
enum DlStatus dl_limiting_moment(const double *x,
                                 const uint64_t *xi,
                                 size_t d,
                                 double t,
                                 double *out);

/**
 * Product-gamma duality function `D(x, k)` for `d` types with mutation rate `theta`.
 *
 * # Safety
 * `x` and `k` must hold `d` entries each and `out` be writable.
 */
enum DlStatus dl_product_gamma(double theta,
                               size_t d,
                               const double *x,
                               const uint64_t *k,
                               double *out);

/**
 * Monte Carlo estimate of `E_x[D(X_t, k)]` for the `d`-type Wright-Fisher
 * diffusion with mutation `theta` and the product-gamma duality function.
 *
 * # Safety
 * `x` and `k` must hold `d` entries each and `out` be writable.
 */
enum DlStatus dl_estimate_wright_fisher(double theta,
                                        size_t d,
                                        const double *x,
                                        const uint64_t *k,
                                        double t,
                                        double dt,
                                        uint64_t n_paths,
                                        uint64_t seed,
                                        struct DlEstimate *out);

/**
 * Runs a `duality-lab` command with an optional JSON config file (null for
 * defaults) and output directory (null for the config's `out`). Writes the
 * command's exit status (0 pass, 1 failed check, 2 rejected config) to
 * `exit_status`; the return value reports only failures of the call itself.
 *
 * # Safety
 * `command` must be a NUL-terminated string; `config_path` and `out_dir` null
 * or NUL-terminated; `exit_status` writable.
 */
enum DlStatus dl_run_command(const char *command,
                             const char *config_path,
                             const char *out_dir,
                             int32_t *exit_status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DUALITY_LAB_H */
