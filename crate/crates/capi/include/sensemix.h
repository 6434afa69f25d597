#ifndef SENSEMIX_H
#define SENSEMIX_H

/* Generated by cbindgen from the sensemix-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible entry point.
enum SmxStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  SMX_STATUS_OK = 0,
  SMX_STATUS_NULL_POINTER = 1,
  SMX_STATUS_INVALID_ARGUMENT = 2,
  SMX_STATUS_INFEASIBLE = 3,
  SMX_STATUS_NUMERIC_FAILURE = 4,
  SMX_STATUS_BUFFER_TOO_SMALL = 5,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SmxStatus SmxStatus;
#else
typedef int32_t SmxStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Opaque detection scenario handle. Create with `smx_scenario_new`, release
// with `smx_scenario_free`.
typedef struct SmxScenario SmxScenario;

// One atom of an optimal randomized power plan.
typedef struct SmxPlanAtom {
  // Probability of transmitting this atom's covariance in a block.
  double weight;
  // Transmit power spent by the atom.
  double power;
  // Post-processing SNR the atom achieves.
  double rho;
  // Detection probability at that SNR.
  double pd;
} SmxPlanAtom;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Human-readable description of a status code. The pointer is static and
// must not be freed.
const char *smx_status_message(SmxStatus status);

// Create a detection scenario from a row-major Hermitian gram matrix.
//
// `gram_re` points at `dim * dim` real parts; `gram_im` may be null for a
// real matrix, otherwise it points at `dim * dim` imaginary parts.
//
// # Safety
// `gram_re` (and `gram_im` when non-null) must be readable for
// `dim * dim` doubles; `out` must be writable. The returned handle must be
// released with `smx_scenario_free` exactly once.
SmxStatus smx_scenario_new(const double *gram_re,
                           const double *gram_im,
                           size_t dim,
                           double mean_square_amp,
                           size_t snapshots,
                           double noise_psd,
                           double pfa,
                           double power_budget,
                           struct SmxScenario **out);

// Release a scenario handle. Null is ignored.
//
// # Safety
// `scenario` must be null or a handle from `smx_scenario_new` that has not
// been freed yet.
void smx_scenario_free(struct SmxScenario *scenario);

// Detection scale of a scenario: snr_scale times the top gram eigenvalue.
//
// # Safety
// `scenario` and `out` must be valid pointers.
SmxStatus smx_scenario_alpha(const struct SmxScenario *scenario, double *out);

// Detection probability of the threshold detector at SNR `rho` and false
// alarm rate `pfa`. Returns NaN for out-of-range inputs.
double smx_pd_closed_form(double rho, double pfa);

// Power where the detection curve switches from convex to concave; 0 when
// it is concave everywhere.
//
// # Safety
// `out` must be a valid pointer.
SmxStatus smx_inflection_power(double alpha, double pfa, double *out);

// Power where the chord from zero touches the detection curve tangentially;
// 0 when the curve is concave everywhere.
//
// # Safety
// `out` must be a valid pointer.
SmxStatus smx_tangent_power(double alpha, double pfa, double *out);

// Optimal randomized power plan for the scenario at `budget`.
//
// On success `*len` holds the number of atoms written (1 or 2) and
// `*expected_pd` the plan's expected detection probability. When `cap` is
// too small, returns `SMX_STATUS_BUFFER_TOO_SMALL` with `*len` set to the
// required count and nothing written.
//
// # Safety
// `scenario` must be a live handle; `atoms` must be writable for `cap`
// entries; `len` and `expected_pd` must be valid pointers.
SmxStatus smx_plan(const struct SmxScenario *scenario,
                   double budget,
                   struct SmxPlanAtom *atoms,
                   size_t cap,
                   size_t *len,
                   double *expected_pd);

// Minimize expected performance over a design grid subject to a mean-cost
// budget. `costs` and `perfs` are parallel arrays of length `n`. At most
// two designs carry weight: `out_index`/`out_weight` must have room for two
// entries, `*out_atoms` reports how many are used, and `*out_value` the
// optimal expected performance.
//
// # Safety
// `costs` and `perfs` must be readable for `n` doubles; `out_index` and
// `out_weight` writable for two entries; `out_value` and `out_atoms` valid.
SmxStatus smx_solve_budget(const double *costs,
                           const double *perfs,
                           size_t n,
                           double budget,
                           double *out_value,
                           size_t *out_index,
                           double *out_weight,
                           size_t *out_atoms);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SENSEMIX_H */
