#ifndef GSPREP_H
#define GSPREP_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define GSPREP_ABI_VERSION 1

typedef enum GsprepFormat {
  GSPREP_FORMAT_CSV = 0,
  GSPREP_FORMAT_JSON = 1,
} GsprepFormat;

typedef enum GsprepStatus {
  GSPREP_STATUS_OK = 0,
  GSPREP_STATUS_NULL_POINTER = 1,
  GSPREP_STATUS_INVALID_ARGUMENT = 2,
  GSPREP_STATUS_PARSE = 3,
  GSPREP_STATUS_CAPACITY_EXCEEDED = 4,
  GSPREP_STATUS_IO = 5,
  GSPREP_STATUS_INTERNAL = 6,
  GSPREP_STATUS_PANIC = 7,
} GsprepStatus;

/**
 * Opaque experiment configuration.
 */
typedef struct GsprepExperiment GsprepExperiment;

/**
 * Opaque Hamiltonian with its spectral decomposition.
 */
typedef struct GsprepHamiltonian GsprepHamiltonian;

/**
 * Opaque set of report rows.
 */
typedef struct GsprepReport GsprepReport;

/**
 * Outcome of one run. `energy_error` is NaN when the run produced no
 * energy estimate.
 */
typedef struct GsprepRunSummary {
  bool success;
  double fidelity;
  double energy_error;
  double hamsim_time;
  uint64_t trial_calls;
  uint64_t walk_steps;
  uint64_t gate_proxy;
  uint32_t qubits_peak;
} GsprepRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

uint32_t gsprep_abi_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *gsprep_last_error_message(void);

/**
 * Random Hermitian instance of dimension `dim` (a power of two) and gap `gap`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum GsprepStatus gsprep_hamiltonian_random(size_t dim,
                                            double gap,
                                            uint64_t seed,
                                            struct GsprepHamiltonian **out);

/**
 * Diagonal instance with the given eigenvalues (each in `[0, 0.95]`).
 *
 * # Safety
 * `values` must point to `len` doubles and `out` must be valid for writes.
 */
enum GsprepStatus gsprep_hamiltonian_diagonal(const double *values,
                                              size_t len,
                                              struct GsprepHamiltonian **out);

/**
 * # Safety
 * `h` must come from this library and not be used afterwards; null is ignored.
 */
void gsprep_hamiltonian_free(struct GsprepHamiltonian *h);

/**
 * # Safety
 * `h` must be a live handle or null.
 */
size_t gsprep_hamiltonian_dim(const struct GsprepHamiltonian *h);

/**
 * # Safety
 * `h` must be a live handle and `energy`, `gap` valid for writes (either may
 * be null).
 */
enum GsprepStatus gsprep_hamiltonian_spectrum_info(const struct GsprepHamiltonian *h,
                                                   double *energy,
                                                   double *gap);

/**
 * Copies up to `len` ascending eigenvalues into `buf`; returns the number
 * written through `written`.
 *
 * # Safety
 * `buf` must hold `len` doubles; `written` may be null.
 */
enum GsprepStatus gsprep_hamiltonian_eigenvalues(const struct GsprepHamiltonian *h,
                                                 double *buf,
                                                 size_t len,
                                                 size_t *written);

/**
 * Known-energy preparation with guess `E = lambda_0 - energy_guess_error`;
 * the gap bound is the true gap and the overlap bound is `overlap`.
 *
 * # Safety
 * `h` must be a live handle and `out` valid for writes.
 */
enum GsprepStatus gsprep_prepare_known(const struct GsprepHamiltonian *h,
                                       double overlap,
                                       double eps,
                                       double energy_guess_error,
                                       uint64_t seed,
                                       struct GsprepRunSummary *out);

/**
 * Unknown-energy preparation: grid search when `kappa` is negative, the
 * combined pipeline otherwise.
 *
 * # Safety
 * `h` must be a live handle and `out` valid for writes.
 */
enum GsprepStatus gsprep_prepare_unknown(const struct GsprepHamiltonian *h,
                                         double overlap,
                                         double eps,
                                         double kappa,
                                         uint64_t seed,
                                         struct GsprepRunSummary *out);

/**
 * Ground-energy estimate to precision `xi`; `kappa < 0` selects the grid
 * variant. The estimate is written to `energy` (NaN on failure).
 *
 * # Safety
 * `h` must be a live handle; `out` and `energy` valid for writes (`energy`
 * may be null).
 */
enum GsprepStatus gsprep_estimate_energy(const struct GsprepHamiltonian *h,
                                         double overlap,
                                         double xi,
                                         double kappa,
                                         uint64_t seed,
                                         double *energy,
                                         struct GsprepRunSummary *out);

/**
 * Parses an experiment description (TOML text, NUL-terminated).
 *
 * # Safety
 * `text` must be a valid C string and `out` valid for writes.
 */
enum GsprepStatus gsprep_experiment_from_toml(const char *text, struct GsprepExperiment **out);

/**
 * # Safety
 * `e` must come from this library and not be used afterwards; null is ignored.
 */
void gsprep_experiment_free(struct GsprepExperiment *e);

/**
 * Runs every point and trial; `threads = 0` uses one worker per core.
 *
 * # Safety
 * `e` must be a live handle and `out` valid for writes.
 */
enum GsprepStatus gsprep_experiment_run(const struct GsprepExperiment *e,
                                        size_t threads,
                                        struct GsprepReport **out);

/**
 * # Safety
 * `r` must be a live handle or null.
 */
size_t gsprep_report_len(const struct GsprepReport *r);

/**
 * # Safety
 * `r` must be a live handle and `out` valid for writes.
 */
enum GsprepStatus gsprep_report_row(const struct GsprepReport *r,
                                    size_t index,
                                    struct GsprepRunSummary *out);

/**
 * Renders the report; `*text` stays valid until the next render or until
 * the report is freed.
 *
 * # Safety
 * `r` must be a live handle and `text` valid for writes.
 */
enum GsprepStatus gsprep_report_render(struct GsprepReport *r,
                                       enum GsprepFormat format,
                                       const char **text);

/**
 * # Safety
 * `r` must come from this library and not be used afterwards; null is ignored.
 */
void gsprep_report_free(struct GsprepReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSPREP_H */
