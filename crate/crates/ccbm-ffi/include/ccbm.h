#ifndef CCBM_H
#define CCBM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every ABI call.
 */
typedef enum {
  CCBM_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8, unknown name, or malformed config text.
   */
  CCBM_STATUS_BAD_ARGUMENT = 1,
  /**
   * Mesh generation or deformation failed.
   */
  CCBM_STATUS_MESH_ERROR = 2,
  /**
   * A linear solve failed its residual contract.
   */
  CCBM_STATUS_SOLVE_ERROR = 3,
  /**
   * The descent loop failed (step collapse).
   */
  CCBM_STATUS_DESCENT_ERROR = 4,
  /**
   * A panic was caught at the boundary.
   */
  CCBM_STATUS_PANIC = 5,
} CcbmStatus;

/**
 * Why a finished run stopped.
 */
typedef enum {
  CCBM_STOP_REASON_CONVERGED = 0,
  CCBM_STOP_REASON_PLATEAU = 1,
  CCBM_STOP_REASON_ITER_BUDGET = 2,
} CcbmStopReason;

/**
 * Opaque handle to a completed run.
 */
typedef struct CcbmRun CcbmRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. Never null; empty
 * before any failure. Valid until the next failing call on this thread.
 */
const char *ccbm_last_error(void);

/**
 * Flux constant for concentric circles (plane). Fails for r >= R or r <= 0.
 */
CcbmStatus ccbm_lambda_annulus_2d(double r, double big_r, double *out);

/**
 * Flux constant for concentric spheres (space). Fails for r >= R or r <= 0.
 */
CcbmStatus ccbm_lambda_annulus_3d(double r, double big_r, double *out);

/**
 * Closed-form complex potential between concentric circles of radii r < R,
 * evaluated at radius rho.
 */
CcbmStatus ccbm_radial_solution(double r,
                                double big_r,
                                double lambda,
                                double rho,
                                double *out_re,
                                double *out_im);

/**
 * Run a named scenario to completion in memory.
 *
 * `config` may be null or point to flat `key = value` lines overriding the
 * preset (same keys as the CLI config file). On success `*out` owns the
 * run; release it with `ccbm_run_free`.
 */
CcbmStatus ccbm_run_preset(const char *name, const char *config, CcbmRun **out);

/**
 * Release a run handle. Null is a no-op.
 */
void ccbm_run_free(CcbmRun *run);

/**
 * Number of history rows (accepted moves plus the stopping row).
 */
uintptr_t ccbm_run_rows(const CcbmRun *run);

/**
 * Why the run stopped.
 */
CcbmStatus ccbm_run_stop_reason(const CcbmRun *run, CcbmStopReason *out);

/**
 * Copy one history row as 8 doubles:
 * k, J, J_KV, grad_norm, v_inf_sigma, t, d_H, wall_ms.
 */
CcbmStatus ccbm_run_row(const CcbmRun *run, uintptr_t row, double *out);

/**
 * Number of vertices on the final free boundary.
 */
uintptr_t ccbm_run_boundary_len(const CcbmRun *run);

/**
 * Copy the final free boundary as interleaved x, y pairs (CCW, not
 * closed). `cap` counts doubles; needs 2 * boundary_len.
 */
CcbmStatus ccbm_run_boundary(const CcbmRun *run, double *out, uintptr_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCBM_H */
