/* C interface for the sparse-resilience library. */

#ifndef SPARSE_RESILIENCE_H
#define SPARSE_RESILIENCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum SrStatus {
  SrStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  SrStatus_NullArgument = 1,
  /**
   * Dimensions or tolerance values are invalid.
   */
  SrStatus_InvalidArgument = 2,
  /**
   * The eigensolver failed to converge on the given data.
   */
  SrStatus_EigenSolverFailed = 3,
  /**
   * Any other internal failure.
   */
  SrStatus_Internal = 4,
} SrStatus;

/**
 * Opaque report handle; query it with the `sr_report_*` accessors.
 */
typedef struct SrReport SrReport;

/**
 * Opaque system handle (`(A, C)` pair).
 */
typedef struct SrSystem SrSystem;

/**
 * Numerical tolerances; obtain defaults from [`sr_config_default`].
 */
typedef struct SrConfig {
  double rank_rtol;
  double zero_atol;
  double zero_rtol;
  double eig_cluster_tol;
} SrConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default tolerances.
 */
struct SrConfig sr_config_default(void);

/**
 * Create a system from row-major `A` (`n x n`) and `C` (`q x n`).
 * Returns null when a pointer is null or a dimension is zero.
 *
 * # Safety
 * `a` must point to at least `n * n` readable doubles and `c` to at least
 * `q * n`; both must remain valid for the duration of the call.
 */
struct SrSystem *sr_system_new(uintptr_t n, uintptr_t q, const double *a, const double *c);

/**
 * The built-in discretized pendulum benchmark system (n = 2, q = 3).
 */
struct SrSystem *sr_system_pendulum(void);

/**
 * Release a system handle. Null is accepted and ignored.
 *
 * # Safety
 * `sys` must be null or a pointer obtained from `sr_system_new` /
 * `sr_system_pendulum` that has not been freed yet.
 */
void sr_system_free(struct SrSystem *sys);

/**
 * Model-based sparse observability index of the system, written to
 * `out_index` (`-1` when the system is unobservable with all sensors).
 *
 * # Safety
 * `sys` and `out_index` must be valid; `cfg` may be null for defaults.
 */
enum SrStatus sr_delta_max(const struct SrSystem *sys,
                           const struct SrConfig *cfg,
                           int64_t *out_index);

/**
 * Data-driven index from attack-free data. `x` is `(t+1) x n` row-major
 * (one state per row), `y` is `t x q` row-major. On success `*out_report`
 * owns a report handle; free it with `sr_report_free`.
 *
 * # Safety
 * `x` must point to `(t+1)*n` readable doubles, `y` to `t*q`; `out_report`
 * must be a valid destination pointer; `cfg` may be null for defaults.
 */
enum SrStatus sr_rho_max_attack_free(uintptr_t n,
                                     uintptr_t q,
                                     uintptr_t t,
                                     const double *x,
                                     const double *y,
                                     const struct SrConfig *cfg,
                                     struct SrReport **out_report);

/**
 * Data-driven index from poisoned data. `assumed_l` is the attack budget
 * the caller assumes; pass a negative value to leave it unspecified.
 *
 * # Safety
 * Same as [`sr_rho_max_attack_free`].
 */
enum SrStatus sr_rho_max_poisoned(uintptr_t n,
                                  uintptr_t q,
                                  uintptr_t t,
                                  const double *x,
                                  const double *y,
                                  int64_t assumed_l,
                                  const struct SrConfig *cfg,
                                  struct SrReport **out_report);

/**
 * The computed index (`-1` when the data are not informative for any rho).
 *
 * # Safety
 * `report` must be a live handle from an `sr_rho_max_*` call.
 */
int64_t sr_report_rho_max(const struct SrReport *report);

/**
 * Whether the multiplicity-one polynomial path produced the result.
 *
 * # Safety
 * `report` must be a live handle from an `sr_rho_max_*` call.
 */
bool sr_report_fast_path_used(const struct SrReport *report);

/**
 * Whether `X^-` lacked full row rank (data not informative for any rho).
 *
 * # Safety
 * `report` must be a live handle from an `sr_rho_max_*` call.
 */
bool sr_report_rank_deficient(const struct SrReport *report);

/**
 * Admissibility of the assumed attack budget: 1 if `l <= rho_max`, 0 if
 * not, -1 when no budget was supplied.
 *
 * # Safety
 * `report` must be a live handle from an `sr_rho_max_*` call.
 */
int32_t sr_report_l_admissible(const struct SrReport *report);

/**
 * Release a report handle. Null is accepted and ignored.
 *
 * # Safety
 * `report` must be null or a pointer obtained from an `sr_rho_max_*` call
 * that has not been freed yet.
 */
void sr_report_free(struct SrReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSE_RESILIENCE_H */
