#ifndef EIT_BEC_H
#define EIT_BEC_H

#include <stddef.h>
#include <stdint.h>

/**
 * Result codes shared by all entry points.
 */
typedef enum EitStatus {
  EIT_STATUS_OK = 0,
  EIT_STATUS_NULL_POINTER = 1,
  EIT_STATUS_INVALID_ARGUMENT = 2,
  EIT_STATUS_VALIDATION = 3,
  EIT_STATUS_STABILITY = 4,
  EIT_STATUS_NON_FINITE = 5,
  EIT_STATUS_GRID_MISMATCH = 6,
  EIT_STATUS_STOPPED_LIGHT = 7,
  EIT_STATUS_UNSUPPORTED = 8,
  EIT_STATUS_IO = 9,
  EIT_STATUS_FORMAT = 10,
  EIT_STATUS_OUT_OF_RANGE = 11,
  EIT_STATUS_BUFFER_TOO_SMALL = 12,
  EIT_STATUS_PANIC = 13,
} EitStatus;

/**
 * Parsed simulation configuration.
 */
typedef struct EitConfig EitConfig;

/**
 * Completed run holding its envelope snapshots.
 */
typedef struct EitRun EitRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a configuration from NUL-terminated text in the `key = value`
 * format used by the CLI.
 *
 * # Safety
 * `text` must be a valid C string; `out` must be writable.
 */
enum EitStatus eit_config_parse(const char *text, struct EitConfig **out);

/**
 * # Safety
 * `config` must come from [`eit_config_parse`] and not be freed twice.
 */
void eit_config_free(struct EitConfig *config);

/**
 * Runs the configured solver tier to completion.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum EitStatus eit_run(const struct EitConfig *config, struct EitRun **out);

/**
 * # Safety
 * `run` must come from [`eit_run`] and not be freed twice.
 */
void eit_run_free(struct EitRun *run);

/**
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum EitStatus eit_run_snapshot_count(const struct EitRun *run, uintptr_t *out);

/**
 * Number of grid points per snapshot.
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum EitStatus eit_run_grid_len(const struct EitRun *run, uintptr_t *out);

/**
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum EitStatus eit_run_snapshot_time(const struct EitRun *run, uintptr_t index, double *out);

/**
 * Copies snapshot `index` as interleaved `(re, im)` doubles into `buf`,
 * which must hold `2 * grid_len` values.
 *
 * # Safety
 * `buf` must be valid for `buf_len` writes of `double`.
 */
enum EitStatus eit_run_copy_envelope(const struct EitRun *run,
                                     uintptr_t index,
                                     double *buf,
                                     uintptr_t buf_len);

/**
 * `c G^2 / (g^2|alpha|^2 + G^2)`.
 */
double eit_group_velocity(double g_control, double g, double alpha_mag, double c);

/**
 * `W(t)` for the config's control schedule.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum EitStatus eit_integral_weight(const struct EitConfig *config, double t, double *out);

/**
 * `(mu + u12|alpha|^2)(W(t) - t)` for the config's parameters and schedule.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum EitStatus eit_global_phase(const struct EitConfig *config, double t, double *out);

/**
 * Message for the last failing call on this thread; empty after success.
 * Valid until the next call on the same thread.
 */
const char *eit_last_error_message(void);

/**
 * Library version as a static C string.
 */
const char *eit_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EIT_BEC_H */
