#ifndef MOLCAV_H
#define MOLCAV_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MolcavStatus {
  MOLCAV_STATUS_OK = 0,
  MOLCAV_STATUS_NULL_POINTER = 1,
  MOLCAV_STATUS_INVALID_ARGUMENT = 2,
  // Physical parameters failed validation.
  MOLCAV_STATUS_INVALID_PARAMETER = 3,
  // The requested quantity is undefined at an unstable point.
  MOLCAV_STATUS_UNSTABLE = 4,
  // Steady state, Lyapunov solve or entanglement evaluation failed.
  MOLCAV_STATUS_NUMERICAL = 5,
  MOLCAV_STATUS_CONFIG = 6,
  MOLCAV_STATUS_IO = 7,
  MOLCAV_STATUS_OUT_OF_RANGE = 8,
  MOLCAV_STATUS_PANIC = 9,
} MolcavStatus;

typedef enum MolcavMode {
  MOLCAV_MODE_EFFECTIVE = 0,
  MOLCAV_MODE_LASER = 1,
} MolcavMode;

typedef enum MolcavPair {
  MOLCAV_PAIR_CAVITY_B1 = 0,
  MOLCAV_PAIR_CAVITY_B2 = 1,
  MOLCAV_PAIR_B1B2 = 2,
} MolcavPair;

typedef enum MolcavFormat {
  MOLCAV_FORMAT_CSV = 0,
  MOLCAV_FORMAT_JSON = 1,
} MolcavFormat;

// Result of one point evaluation; holds one entry per steady-state branch.
typedef struct MolcavPoint MolcavPoint;

typedef struct MolcavSweep MolcavSweep;

typedef struct MolcavTable MolcavTable;

// Physical parameters. Frequencies in THz except `g_v` (GHz); `omega` and
// `delta` in units of `nu_v`. NaN in `m_fraction`, `temperature`, `n1` or
// `n2` means "not set".
typedef struct MolcavParams {
  double nu_p;
  double nu_v;
  double nu_l;
  double kappa;
  double gamma1;
  double gamma2;
  double g_v;
  double omega;
  double drive_phase;
  double delta;
  uint32_t n_molecules;
  uint32_t m_split;
  double m_fraction;
  double temperature;
  double n1;
  double n2;
} MolcavParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *molcav_version(void);

// Message describing the last failure on this thread, or an empty string.
// Valid until the next library call on the same thread.
const char *molcav_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library.
void molcav_string_free(char *s);

// Mean thermal occupation of a mode at `nu_thz` THz and `temperature` K.
double molcav_thermal_occupation(double nu_thz, double temperature);

// Fills `out` with the default cavity-dominated parameter set.
//
// # Safety
// `out` must be valid for writes.
enum MolcavStatus molcav_params_default(struct MolcavParams *out);

// Solves the steady state(s) and fluctuations at one parameter point.
//
// # Safety
// `params` must point to a valid struct; `out` must be valid for writes.
enum MolcavStatus molcav_evaluate(const struct MolcavParams *params,
                                  enum MolcavMode mode,
                                  struct MolcavPoint **out);

// # Safety
// `point` must be null or a handle from [`molcav_evaluate`].
void molcav_point_free(struct MolcavPoint *point);

// Number of steady-state branches (1 except in the bistable laser regime).
//
// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_point_branch_count(const struct MolcavPoint *point, size_t *out);

// Stability flag and spectral abscissa of the drift matrix.
//
// # Safety
// Pointers must be valid; `abscissa` may be null.
enum MolcavStatus molcav_point_stability(const struct MolcavPoint *point,
                                         size_t branch_index,
                                         bool *stable,
                                         double *abscissa);

// Logarithmic negativity of `pair`. `eta_minus` may be null.
//
// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_point_log_negativity(const struct MolcavPoint *point,
                                              size_t branch_index,
                                              enum MolcavPair pair,
                                              double *value,
                                              double *eta_minus);

// Copies the 6x6 steady-state covariance, row-major, into `out[36]`.
// Quadrature order: X_B1, Y_B1, X_B2, Y_B2, X_a, Y_a.
//
// # Safety
// `out` must be valid for 36 writes.
enum MolcavStatus molcav_point_covariance(const struct MolcavPoint *point,
                                          size_t branch_index,
                                          double *out);

// # Safety
// `name` must be a NUL-terminated string; `out` valid for writes.
enum MolcavStatus molcav_sweep_from_preset(const char *name, struct MolcavSweep **out);

// Parses a TOML sweep configuration.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` valid for writes.
enum MolcavStatus molcav_sweep_from_toml(const char *toml, struct MolcavSweep **out);

// Applies a `path=value` override such as `base.kappa=20` or
// `axes.0.count=11`. The sweep is unchanged on failure.
//
// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_sweep_set(struct MolcavSweep *sweep, const char *assignment);

// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_sweep_grid_size(const struct MolcavSweep *sweep, uint64_t *out);

// Serializes the sweep as TOML. Release with [`molcav_string_free`].
//
// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_sweep_to_toml(const struct MolcavSweep *sweep, char **out);

// Runs the sweep on `jobs` threads (0 picks a default).
//
// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_sweep_run(const struct MolcavSweep *sweep,
                                   size_t jobs,
                                   struct MolcavTable **out);

// # Safety
// `sweep` must be null or a handle from this library.
void molcav_sweep_free(struct MolcavSweep *sweep);

// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_table_row_count(const struct MolcavTable *table, size_t *out);

// Value of axis `axis` at row `row`.
//
// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_table_axis_value(const struct MolcavTable *table,
                                          size_t row,
                                          size_t axis,
                                          double *out);

// Logarithmic negativity of `pair` at `row`. Returns `Unstable` when the
// row has no value (unstable or failed point).
//
// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_table_log_negativity(const struct MolcavTable *table,
                                              size_t row,
                                              enum MolcavPair pair,
                                              double *out);

// Largest negativity of `pair` over stable rows within the coupling cap.
// `row` may be null. Returns `Unstable` if no row qualifies.
//
// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_table_max(const struct MolcavTable *table,
                                   enum MolcavPair pair,
                                   double *value,
                                   uint64_t *row);

// Writes the table to `path` as CSV or JSON.
//
// # Safety
// Pointers must be valid.
enum MolcavStatus molcav_table_write(const struct MolcavTable *table,
                                     const char *path,
                                     enum MolcavFormat format);

// # Safety
// `table` must be null or a handle from this library.
void molcav_table_free(struct MolcavTable *table);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOLCAV_H */
