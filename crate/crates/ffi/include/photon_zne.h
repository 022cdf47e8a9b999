#ifndef PHOTON_ZNE_H
#define PHOTON_ZNE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PzStatus {
  PZ_STATUS_OK = 0,
  PZ_STATUS_NULL_POINTER = 1,
  PZ_STATUS_INVALID_ARGUMENT = 2,
  // Post-selection or extrapolation became numerically degenerate.
  PZ_STATUS_DEGENERATE = 3,
  PZ_STATUS_PANIC = 4,
} PzStatus;

typedef enum PzBasis {
  PZ_BASIS_X = 0,
  PZ_BASIS_Y = 1,
  PZ_BASIS_Z = 2,
} PzBasis;

// Opaque chip layout.
typedef struct PzChip PzChip;

// Opaque result of one VQE run.
typedef struct PzVqeResult PzVqeResult;

// Inputs for [`pz_run_vqe`]. A non-positive `shots` selects exact
// probabilities; `eps2` is ignored when `k1 == 0`.
typedef struct PzVqeParams {
  double m;
  double eps1;
  double eps2;
  size_t k0;
  size_t k1;
  double shots;
  uint64_t master_seed;
  uint64_t run_index;
} PzVqeParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until
// the next failing call on the same thread.
const char *pz_last_error_message(void);

struct PzChip *pz_chip_new(void);

// # Safety
// `chip` must be null or come from [`pz_chip_new`] and not be freed twice.
void pz_chip_free(struct PzChip *chip);

// Post-selected outcome probabilities `(p00, p01, p10, p11)` and the
// success probability for preparation phases `prep[0..4]`. `basis` is a
// [`PzBasis`] value.
//
// # Safety
// `prep` must point to 4 doubles and `out_probs` to space for 4.
enum PzStatus pz_outcome_probabilities(const struct PzChip *chip,
                                       const double *prep,
                                       uint32_t basis,
                                       double epsilon,
                                       double *out_probs,
                                       double *out_success);

// # Safety
// `chip` and `out` must be valid.
enum PzStatus pz_hom_visibility(const struct PzChip *chip, double epsilon, double *out);

// # Safety
// `out` must be valid for a write.
enum PzStatus pz_exact_ground_energy(double m, double *out);

// # Safety
// Each probability pointer must point to 4 doubles.
enum PzStatus pz_energy_from_probs(const double *px,
                                   const double *py,
                                   const double *pz,
                                   double m,
                                   double *out);

// # Safety
// Each count pointer must point to 4 integers.
enum PzStatus pz_energy_from_counts(const uint64_t *cx,
                                    const uint64_t *cy,
                                    const uint64_t *cz,
                                    double m,
                                    double *out_value,
                                    double *out_std);

// Two-point extrapolation to zero noise.
//
// # Safety
// Output pointers must be valid.
enum PzStatus pz_linear_zne(double e1,
                            double std1,
                            double e2,
                            double std2,
                            double eps1,
                            double eps2,
                            double *out_value,
                            double *out_std);

// # Safety
// `out` must be valid for a write.
enum PzStatus pz_zne_variance(double var1, double var2, double eps1, double eps2, double *out);

// Basis measurements spent by `k0` unmitigated and `k1` mitigated
// iterations at `n` measurements per unmitigated iteration.
//
// # Safety
// `out` must be valid for a write.
enum PzStatus pz_measurements_used(size_t k0, size_t k1, size_t n, size_t *out);

// Noise level set by a half-wave plate at angle `theta` (radians).
double pz_epsilon_of_theta(double theta);

// Runs one VQE instance with default optimizer settings. On success
// `*out` owns a result handle.
//
// # Safety
// `chip`, `params` and `out` must be valid.
enum PzStatus pz_run_vqe(const struct PzChip *chip,
                         const struct PzVqeParams *params,
                         struct PzVqeResult **out);

// # Safety
// `result` must be null or come from [`pz_run_vqe`] and not be freed twice.
void pz_vqe_result_free(struct PzVqeResult *result);

// Trailing-window energy of the final stage.
//
// # Safety
// All pointers must be valid.
enum PzStatus pz_vqe_result_energy(const struct PzVqeResult *result,
                                   double *out_value,
                                   double *out_std);

// Number of recorded iterations, or 0 for a null handle.
//
// # Safety
// `result` must be null or valid.
size_t pz_vqe_result_iterations(const struct PzVqeResult *result);

// Estimate and cumulative measurement count of iteration `index`.
//
// # Safety
// All pointers must be valid.
enum PzStatus pz_vqe_result_iteration(const struct PzVqeResult *result,
                                      size_t index,
                                      double *out_estimate,
                                      size_t *out_measurements);

// Final preparation phases.
//
// # Safety
// `out_phases` must have room for 4 doubles.
enum PzStatus pz_vqe_result_phases(const struct PzVqeResult *result, double *out_phases);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOTON_ZNE_H */
