#ifndef ADIABATIC_QJUMP_H
#define ADIABATIC_QJUMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AqjStatus {
  AQJ_STATUS_OK = 0,
  AQJ_STATUS_NULL_POINTER = 1,
  AQJ_STATUS_INVALID_ARGUMENT = 2,
  AQJ_STATUS_UNSUPPORTED_ORDER = 3,
  AQJ_STATUS_UNKNOWN_KEY = 4,
  AQJ_STATUS_ZERO_PROBABILITY = 5,
  AQJ_STATUS_EMPTY_ENSEMBLE = 6,
  AQJ_STATUS_TOO_FEW_SAMPLES = 7,
  AQJ_STATUS_IO = 8,
  AQJ_STATUS_SERIALIZATION = 9,
  AQJ_STATUS_PANIC = 10,
} AqjStatus;

/**
 * Simulation parameters; created with default parameters by [`aqj_config_new`].
 */
typedef struct AqjConfig AqjConfig;

/**
 * Finished trajectory ensemble of one dynamics order.
 */
typedef struct AqjEnsemble AqjEnsemble;

/**
 * Dynamical frame of order n at time t. Kets are given in the diabatic
 * basis ordered (e, g).
 */
typedef struct AqjFrame {
  uint32_t order;
  double t;
  double energy_g;
  double energy_e;
  double omega01;
  double ket_e_re[2];
  double ket_e_im[2];
  double ket_g_re[2];
  double ket_g_im[2];
  double w_ge_re;
  double w_ge_im;
  double m1;
  double m2_re;
  double m2_im;
  double alpha;
} AqjFrame;

/**
 * Fluctuation-theorem statistics of an ensemble. `ift_mean` and `ift_sem`
 * are NaN when the work order differs from the dynamics order.
 */
typedef struct AqjReport {
  uint32_t dynamics_order;
  uint32_t work_order;
  uint64_t n_traj;
  double beta;
  double delta_f;
  double jarzynski_mean;
  double jarzynski_mean_sem;
  double jarzynski_deviation;
  double jarzynski_deviation_sem;
  double ift_mean;
  double ift_sem;
  double mean_work;
  double mean_work_sem;
  double second_moment;
  double second_moment_sem;
} AqjReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *aqj_version(void);

/**
 * Message of the last failing call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *aqj_last_error_message(void);

/**
 * New configuration with default parameters. Never returns NULL.
 */
struct AqjConfig *aqj_config_new(void);

/**
 * # Safety
 * `config` must be NULL or a handle from [`aqj_config_new`] not yet freed.
 */
void aqj_config_free(struct AqjConfig *config);

/**
 * Sets a parameter by key (`beta`, `n_steps`, `n_order`, ...) from text.
 *
 * # Safety
 * `config` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum AqjStatus aqj_config_set(struct AqjConfig *config, const char *key, const char *value);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum AqjStatus aqj_config_validate(const struct AqjConfig *config);

/**
 * Fills `out` with the order-`n` frame at time `t`.
 *
 * # Safety
 * `config` must be a live handle and `out` valid for writes.
 */
enum AqjStatus aqj_frame_at(const struct AqjConfig *config,
                            double t,
                            uint32_t n,
                            struct AqjFrame *out);

/**
 * Runs trajectories 0..n_traj with order-`order` dynamics on `workers`
 * threads (0 picks a default) and stores a new handle in `*out`.
 *
 * # Safety
 * `config` must be a live handle and `out` valid for writes.
 */
enum AqjStatus aqj_ensemble_run(const struct AqjConfig *config,
                                uint32_t order,
                                uint64_t n_traj,
                                size_t workers,
                                struct AqjEnsemble **out);

/**
 * Number of trajectories in the ensemble, 0 for NULL.
 *
 * # Safety
 * `ensemble` must be NULL or a live handle.
 */
uint64_t aqj_ensemble_len(const struct AqjEnsemble *ensemble);

/**
 * Copies the first `len` work samples, with heats assigned in frame
 * `n_prime`, into `out`.
 *
 * # Safety
 * `ensemble` must be a live handle and `out` valid for `len` writes.
 */
enum AqjStatus aqj_ensemble_work(const struct AqjEnsemble *ensemble,
                                 uint32_t n_prime,
                                 double *out,
                                 size_t len);

/**
 * Jarzynski, IFT and moment statistics with work assigned in frame `n_prime`.
 *
 * # Safety
 * `ensemble` must be a live handle and `out` valid for writes.
 */
enum AqjStatus aqj_ensemble_report(const struct AqjEnsemble *ensemble,
                                   uint32_t n_prime,
                                   struct AqjReport *out);

/**
 * # Safety
 * `ensemble` must be NULL or a handle from [`aqj_ensemble_run`] not yet freed.
 */
void aqj_ensemble_free(struct AqjEnsemble *ensemble);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADIABATIC_QJUMP_H */
