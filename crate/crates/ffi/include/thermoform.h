#ifndef THERMOFORM_H
#define THERMOFORM_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum ThermoStatus {
  THERMO_STATUS_OK = 0,
  THERMO_STATUS_NULL_ARGUMENT = 1,
  // A buffer is too small or an argument is out of range.
  THERMO_STATUS_INVALID_ARGUMENT = 2,
  THERMO_STATUS_VALIDATION = 3,
  // The solver target is out of range or only reached asymptotically.
  THERMO_STATUS_SOLVER = 4,
  THERMO_STATUS_NO_CONVERGENCE = 5,
  THERMO_STATUS_PANIC = 6,
} ThermoStatus;

// A shift-invariant Markov measure.
typedef struct ThermoMeasure ThermoMeasure;

// A locally constant potential on a fixed system.
typedef struct ThermoPotential ThermoPotential;

// A subshift of finite type.
typedef struct ThermoSft ThermoSft;

typedef struct ThermoMaximization {
  double beta;
  double ground_entropy;
  bool unique;
  size_t critical_edge_count;
  size_t cycle_length;
} ThermoMaximization;

typedef struct ThermoSolveResult {
  double t;
  double achieved;
  double residual;
  double bracket_lo;
  double bracket_hi;
  size_t iterations;
} ThermoSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into this library on the thread.
const char *thermo_last_error(void);

// Builds a system from a row-major `alphabet * alphabet` 0/1 matrix.
//
// # Safety
// `transitions` must point to `alphabet * alphabet` bytes.
enum ThermoStatus thermo_sft_new(size_t alphabet,
                                 const uint8_t *transitions,
                                 struct ThermoSft **out);

// # Safety
// `out` must be writable.
enum ThermoStatus thermo_sft_full_shift(size_t alphabet, struct ThermoSft **out);

// # Safety
// `out` must be writable.
enum ThermoStatus thermo_sft_golden_mean(struct ThermoSft **out);

// # Safety
// `sft` must come from this library and not be used afterwards. Null is a
// no-op.
void thermo_sft_free(struct ThermoSft *sft);

// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_sft_alphabet_size(const struct ThermoSft *sft, size_t *out);

// Topological entropy in nats.
//
// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_sft_entropy(const struct ThermoSft *sft, double *out);

// Number of admissible blocks of length `k`, which is also the number of
// values a memory-`k` potential takes.
//
// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_sft_block_count(const struct ThermoSft *sft, size_t k, size_t *out);

// Potential of memory `memory` with one value per admissible block, blocks
// in lexicographic order.
//
// # Safety
// `values` must point to `len` doubles.
enum ThermoStatus thermo_potential_new(const struct ThermoSft *sft,
                                       size_t memory,
                                       const double *values,
                                       size_t len,
                                       struct ThermoPotential **out);

// `0` on the fixed point `p p`, `-1` on every other 2-block.
//
// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_potential_fixed_point(const struct ThermoSft *sft,
                                               size_t p,
                                               struct ThermoPotential **out);

// # Safety
// `phi` must come from this library and not be used afterwards. Null is a
// no-op.
void thermo_potential_free(struct ThermoPotential *phi);

// Pressure in nats.
//
// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_pressure(const struct ThermoSft *sft,
                                  const struct ThermoPotential *phi,
                                  double *out);

// Equilibrium state as a Markov measure. `pressure_out` may be null.
//
// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_equilibrium(const struct ThermoSft *sft,
                                     const struct ThermoPotential *phi,
                                     double *pressure_out,
                                     struct ThermoMeasure **out);

// # Safety
// `mu` must come from this library and not be used afterwards. Null is a
// no-op.
void thermo_measure_free(struct ThermoMeasure *mu);

// Block length of the measure's states.
//
// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_measure_order(const struct ThermoMeasure *mu, size_t *out);

// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_measure_state_count(const struct ThermoMeasure *mu, size_t *out);

// Entropy in nats.
//
// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_measure_entropy(const struct ThermoMeasure *mu, double *out);

// Copies the stationary vector into `out[0..state_count]`.
//
// # Safety
// `out` must point to `len` writable doubles.
enum ThermoStatus thermo_measure_stationary(const struct ThermoMeasure *mu,
                                            double *out,
                                            size_t len);

// Copies the transition matrix, row-major, into
// `out[0..state_count * state_count]`.
//
// # Safety
// `out` must point to `len` writable doubles.
enum ThermoStatus thermo_measure_kernel(const struct ThermoMeasure *mu, double *out, size_t len);

// `int phi dmu`.
//
// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_measure_integrate(const struct ThermoMeasure *mu,
                                           const struct ThermoPotential *phi,
                                           double *out);

// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_max_ergodic_average(const struct ThermoSft *sft,
                                             const struct ThermoPotential *phi,
                                             struct ThermoMaximization *out);

// Finds `t >= 0` where the equilibrium state of `t phi` has entropy `target`.
//
// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_solve_entropy(const struct ThermoSft *sft,
                                       const struct ThermoPotential *phi,
                                       double target,
                                       struct ThermoSolveResult *out);

// Finds `t >= 0` where the equilibrium state of `psi + t phi` has
// `h + int psi` equal to `target`.
//
// # Safety
// Pointers must be valid or null.
enum ThermoStatus thermo_solve_pressure(const struct ThermoSft *sft,
                                        const struct ThermoPotential *psi,
                                        const struct ThermoPotential *phi,
                                        double target,
                                        struct ThermoSolveResult *out);

// Loads a JSON config and returns its system and the named potential.
// `phi_out` may be null when only the system is wanted.
//
// # Safety
// `path` and `name` must be NUL-terminated strings; `name` may be null.
enum ThermoStatus thermo_config_load(const char *path,
                                     const char *name,
                                     struct ThermoSft **sft_out,
                                     struct ThermoPotential **phi_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THERMOFORM_H */
