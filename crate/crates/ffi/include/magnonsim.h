#ifndef MAGNONSIM_H
#define MAGNONSIM_H

/* Generated by cbindgen from magnonsim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  MAGNONSIM_STATUS_OK = 0,
  /**
   * Null pointer, invalid UTF-8 or an out-of-domain argument.
   */
  MAGNONSIM_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed or inconsistent configuration.
   */
  MAGNONSIM_STATUS_CONFIG_ERROR = 2,
  /**
   * Numerical failure during execution.
   */
  MAGNONSIM_STATUS_NUMERICAL_ERROR = 3,
  /**
   * A panic was caught at the boundary.
   */
  MAGNONSIM_STATUS_INTERNAL_ERROR = 4,
} MagnonsimStatus;

/**
 * An experiment run: configuration plus, after execution, the CSV table
 * and JSON summary.
 */
typedef struct MagnonsimRun MagnonsimRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent error on this thread. The pointer stays valid
 * until the next failing call on the same thread. Never null.
 */
const char *magnonsim_last_error(void);

/**
 * Library version as a static string.
 */
const char *magnonsim_version(void);

/**
 * Collective ladder amplitude `<j,m+1|I+|j,m>`.
 */
MagnonsimStatus magnonsim_ladder_element(double j, double m, double *out);

/**
 * Generalized Rabi frequency `sqrt(delta^2 + omega^2)` (MHz).
 */
double magnonsim_generalized_rabi(double delta_mhz, double rabi_mhz);

/**
 * Magnon Rabi frequency of the `m -> m+1` transition (MHz).
 */
MagnonsimStatus magnonsim_magnon_rabi(double a_perp_mhz,
                                      double rabi_mhz,
                                      double chi_mhz,
                                      double j,
                                      double m,
                                      double *out);

/**
 * Hartmann-Hahn resonance `w_n + a_par S0` (MHz).
 */
double magnonsim_hh_resonance(double larmor_mhz, double a_par_mhz, double s0);

/**
 * Effective nucleus numbers from the differential Knight shift.
 */
MagnonsimStatus magnonsim_estimate_nuclei(double delta_nu_mhz,
                                          double hyperfine_total_mhz,
                                          double abundance,
                                          double *out_species,
                                          double *out_total);

/**
 * Geometric Knight-shift enhancement factor `8 / sqrt(27)`.
 */
double magnonsim_knight_factor(void);

/**
 * Strain-induced non-collinear coupling in kHz.
 */
MagnonsimStatus magnonsim_strain_noncollinear(double a_mhz,
                                              double b_q_mhz,
                                              double larmor_mhz,
                                              double *out);

/**
 * Quadrupolar-limited dephasing time in us.
 */
MagnonsimStatus magnonsim_quadrupolar_t2(double fwhm_khz, double moment_ratio, double *out);

/**
 * Spin initialization fidelity bound `1 - I_end / I0`.
 */
MagnonsimStatus magnonsim_init_fidelity(double i0, double i_end, double *out);

/**
 * Quality factor from a fitted relaxation time.
 */
MagnonsimStatus magnonsim_estimate_q(double t1_us,
                                     double f_rabi_mhz,
                                     bool spin_locked,
                                     double *out);

/**
 * Quantization-axis tilt from the in-plane g-factors (rad).
 */
MagnonsimStatus magnonsim_tilt_from_g(double g_110, double g_m110, double *out);

/**
 * Create a run handle for `kind` in {"novel", "esr", "ramsey",
 * "tomography"}; `config_json` may be null for defaults. Returns null on
 * error (see [`magnonsim_last_error`]).
 *
 * # Safety
 * `kind` and (when non-null) `config_json` must be NUL-terminated strings
 * valid for the duration of the call.
 */
MagnonsimRun *magnonsim_run_new(const char *kind, const char *config_json);

/**
 * Add a dotted-path override, e.g. `"n_samples=10"`.
 *
 * # Safety
 * `run` must be a live handle from [`magnonsim_run_new`]; `assignment` a
 * valid NUL-terminated string.
 */
MagnonsimStatus magnonsim_run_set(MagnonsimRun *run, const char *assignment);

/**
 * Execute the run; on success the CSV and summary become available.
 *
 * # Safety
 * `run` must be a live handle from [`magnonsim_run_new`].
 */
MagnonsimStatus magnonsim_run_execute(MagnonsimRun *run);

/**
 * CSV result table of an executed run; null if not executed. Valid until
 * the handle is freed or executed again.
 *
 * # Safety
 * `run` must be a live handle from [`magnonsim_run_new`].
 */
const char *magnonsim_run_csv(const MagnonsimRun *run);

/**
 * JSON summary of an executed run; null if not executed.
 *
 * # Safety
 * `run` must be a live handle from [`magnonsim_run_new`].
 */
const char *magnonsim_run_summary(const MagnonsimRun *run);

/**
 * Release a run handle. Null is a no-op.
 *
 * # Safety
 * `run` must be null or a handle from [`magnonsim_run_new`] not yet freed.
 */
void magnonsim_run_free(MagnonsimRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAGNONSIM_H */
