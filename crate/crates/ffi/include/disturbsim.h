#ifndef DISTURBSIM_H
#define DISTURBSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_ARGUMENT = 1,
  DS_STATUS_INVALID_UTF8 = 2,
  DS_STATUS_CONFIG = 3,
  DS_STATUS_PARSE = 4,
  DS_STATUS_IO = 5,
  DS_STATUS_DOMAIN = 6,
  DS_STATUS_SOLVER = 7,
  DS_STATUS_PROTOCOL = 8,
  DS_STATUS_INVARIANT = 9,
  DS_STATUS_PANIC = 10,
} DsStatus;

/**
 * Statistics of one finished run.
 */
typedef struct DsReport DsReport;

/**
 * A loaded simulation config. Runs do not consume it.
 */
typedef struct DsSimulation DsSimulation;

/**
 * BlockHammer epoch-feasibility verdict. When `feasible` is false,
 * `activations` is the best count any epoch mix reaches and `witness` is
 * zero.
 */
typedef struct DsFeasibility {
  bool feasible;
  uint64_t activations;
  uint64_t target;
  /**
   * Epochs of each type T0..T4 in the witness mix.
   */
  uint64_t witness[5];
} DsFeasibility;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread; never null.
 */
const char *ds_last_error(void);

/**
 * Library version as a static string.
 */
const char *ds_version(void);

/**
 * Parses a JSON config. Relative paths inside it resolve against the
 * current directory.
 *
 * # Safety
 * `json` is a nul-terminated string; `out` is writable.
 */
enum DsStatus ds_simulation_from_json(const char *json, struct DsSimulation **out);

/**
 * Loads a JSON config file.
 *
 * # Safety
 * `path` is a nul-terminated string; `out` is writable.
 */
enum DsStatus ds_simulation_from_file(const char *path, struct DsSimulation **out);

/**
 * # Safety
 * `sim` is null or a live handle.
 */
enum DsStatus ds_simulation_set_seed(struct DsSimulation *sim, uint64_t seed);

/**
 * # Safety
 * `sim` is null or a live handle.
 */
enum DsStatus ds_simulation_set_duration(struct DsSimulation *sim, uint64_t duration_ps);

/**
 * Runs the simulation to completion. The handle stays usable.
 *
 * # Safety
 * `sim` is a live handle; `out` is writable.
 */
enum DsStatus ds_simulation_run(const struct DsSimulation *sim, struct DsReport **out);

/**
 * # Safety
 * `sim` is null or a handle not yet freed.
 */
void ds_simulation_free(struct DsSimulation *sim);

/**
 * Stats as pretty JSON, owned by the report. Null if `report` is null.
 *
 * # Safety
 * `report` is null or a live handle.
 */
const char *ds_report_json(const struct DsReport *report);

/**
 * Number of invariant violations the run found.
 *
 * # Safety
 * `report` is a live handle; `out` is writable.
 */
enum DsStatus ds_report_violations(const struct DsReport *report, uint64_t *out);

/**
 * Writes stats.json and the CSV tables into `dir`.
 *
 * # Safety
 * `report` is a live handle; `dir` is a nul-terminated string.
 */
enum DsStatus ds_report_write(const struct DsReport *report, const char *dir);

/**
 * # Safety
 * `report` is null or a handle not yet freed.
 */
void ds_report_free(struct DsReport *report);

/**
 * Solves PARA's p_th for a target p_rh.
 *
 * # Safety
 * `p_th` is writable.
 */
enum DsStatus ds_para_solve(uint64_t n_rh,
                            uint64_t t_refw_ps,
                            uint64_t t_rc_ps,
                            uint64_t hc_deadline,
                            double target_prh,
                            double *p_th);

/**
 * Worst-case success probability at `p_th`.
 *
 * # Safety
 * `out` is writable.
 */
enum DsStatus ds_para_p_rh(double p_th,
                           uint64_t n_rh,
                           uint64_t t_refw_ps,
                           uint64_t t_rc_ps,
                           uint64_t hc_deadline,
                           double *out);

/**
 * Ratio of p_rh to the estimate that ignores failed attempts and slack.
 *
 * # Safety
 * `out` is writable.
 */
enum DsStatus ds_para_k_factor(double p_th,
                               uint64_t n_rh,
                               uint64_t t_refw_ps,
                               uint64_t t_rc_ps,
                               uint64_t hc_deadline,
                               double *out);

/**
 * Derives the double-sided BlockHammer config for `n_rh` (default timing,
 * with t_refw replaced when non-zero) and checks epoch feasibility.
 *
 * # Safety
 * `out` is writable.
 */
enum DsStatus ds_blockhammer_feasibility(uint64_t n_rh,
                                         uint64_t t_refw_ps,
                                         struct DsFeasibility *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISTURBSIM_H */
