#ifndef SPREADHYDRO_H
#define SPREADHYDRO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum ShStatus {
  SH_STATUS_OK = 0,
  SH_STATUS_NULL_POINTER = 1,
  SH_STATUS_INVALID_UTF8 = 2,
  /**
   * The configuration did not parse or validate.
   */
  SH_STATUS_CONFIG = 3,
  /**
   * Parameters rejected by a solver or simulator.
   */
  SH_STATUS_INVALID_ARGUMENT = 4,
  SH_STATUS_IO = 5,
  /**
   * A simulation or solver failed while running.
   */
  SH_STATUS_RUNTIME = 6,
  SH_STATUS_OUT_OF_RANGE = 7,
  SH_STATUS_PANIC = 8,
} ShStatus;

/**
 * A parsed and validated experiment configuration.
 */
typedef struct ShConfig ShConfig;

/**
 * Criteria produced by one command.
 */
typedef struct ShRun ShRun;

/**
 * PDE solution values on the node grid at the stored times.
 */
typedef struct ShSolution ShSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sh_version(void);

/**
 * Copies the calling thread's last error message into `buf` and returns
 * the buffer size it needs. An empty message means the last call succeeded.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t sh_last_error_message(char *buf, size_t len);

/**
 * Parses and validates a JSON configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ShStatus sh_config_parse(const char *json, struct ShConfig **out);

/**
 * Overrides the seed and, when `replicas` is nonzero, the replica count.
 *
 * # Safety
 * `config` must come from [`sh_config_parse`].
 */
enum ShStatus sh_config_override(struct ShConfig *config, uint64_t seed, uint64_t replicas);

/**
 * # Safety
 * `config` must be null or come from [`sh_config_parse`], and not be used afterwards.
 */
void sh_config_free(struct ShConfig *config);

/**
 * Runs a command (`"verify-hydro"`, `"solve-pde"`, `"run"`, ...) writing
 * artifacts under `out_dir`. `threads == 0` uses every core. Criterion
 * failures are not errors: inspect the returned run.
 *
 * # Safety
 * Strings must be NUL-terminated, `config` valid and `out` a valid pointer.
 */
enum ShStatus sh_run(const struct ShConfig *config,
                     const char *command,
                     const char *out_dir,
                     size_t threads,
                     struct ShRun **out);

/**
 * Number of criteria evaluated; 0 for a null handle.
 *
 * # Safety
 * `run` must be null or come from [`sh_run`].
 */
size_t sh_run_criteria_count(const struct ShRun *run);

/**
 * 1 when every criterion passed, 0 otherwise (including a null handle).
 *
 * # Safety
 * `run` must be null or come from [`sh_run`].
 */
int32_t sh_run_passed(const struct ShRun *run);

/**
 * Verdict of criterion `index` in `passed` and its `PASS/FAIL name: detail`
 * line copied into `buf`; `needed` receives the buffer size the line needs.
 *
 * # Safety
 * `run` must come from [`sh_run`], `passed` and `needed` must be valid or
 * null, and `buf` null or valid for `len` bytes.
 */
enum ShStatus sh_run_criterion(const struct ShRun *run,
                               size_t index,
                               int32_t *passed,
                               char *buf,
                               size_t len,
                               size_t *needed);

/**
 * # Safety
 * `run` must be null or come from [`sh_run`], and not be used afterwards.
 */
void sh_run_free(struct ShRun *run);

/**
 * Solves the configuration's PDE (heat, right-sided or centered, by
 * process) on its grid refined `level` times.
 *
 * # Safety
 * `config` must come from [`sh_config_parse`] and `out` be a valid pointer.
 */
enum ShStatus sh_pde_solve(const struct ShConfig *config, size_t level, struct ShSolution **out);

/**
 * Grid shape: node count, first node, spacing and number of stored times.
 *
 * # Safety
 * `solution` must come from [`sh_pde_solve`]; output pointers may be null.
 */
enum ShStatus sh_solution_shape(const struct ShSolution *solution,
                                size_t *nodes,
                                double *u_min,
                                double *du,
                                size_t *times);

/**
 * Time of stored profile `k` in `time`, and its values copied into
 * `values`, which must hold `len >= nodes` doubles.
 *
 * # Safety
 * `solution` must come from [`sh_pde_solve`], `time` be valid or null and
 * `values` valid for `len` doubles.
 */
enum ShStatus sh_solution_profile(const struct ShSolution *solution,
                                  size_t k,
                                  double *time,
                                  double *values,
                                  size_t len);

/**
 * # Safety
 * `solution` must be null or come from [`sh_pde_solve`], and not be used afterwards.
 */
void sh_solution_free(struct ShSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPREADHYDRO_H */
