#ifndef BEC_TELEPORT_H
#define BEC_TELEPORT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes.
typedef enum BtStatus {
  BT_STATUS_OK = 0,
  BT_STATUS_NULL_POINTER = 1,
  BT_STATUS_INVALID_UTF8 = 2,
  BT_STATUS_CONFIG = 3,
  BT_STATUS_PRECONDITION = 4,
  BT_STATUS_NUMERIC = 5,
  BT_STATUS_IO = 6,
  BT_STATUS_BUFFER_TOO_SMALL = 7,
  BT_STATUS_PANIC = 8,
} BtStatus;

// Opaque protocol configuration.
typedef struct BtProtocol BtProtocol;

// Opaque pure state in a truncated Fock basis.
typedef struct BtState BtState;

// Aggregate results of a protocol run.
typedef struct BtSummary {
  uint64_t trials;
  double success_rate;
  double success_stderr;
  // NaN when no trial was corrected.
  double mean_fidelity;
  double mean_fidelity_all;
  double expected_success_rate;
  uint64_t branch_histogram[4];
} BtSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Free with [`bt_string_free`].
char *bt_last_error_message(void);

// # Safety
// `s` must come from this library and not have been freed.
void bt_string_free(char *s);

// Library version as a static NUL-terminated string.
const char *bt_version(void);

// Collides `|alpha>|beta>` for `t = pi/(2 kappa)` with per-mode cutoff `n_max`.
//
// # Safety
// `out` must be valid for writes.
enum BtStatus bt_channel_generate(double alpha_re,
                                  double alpha_im,
                                  double beta_re,
                                  double beta_im,
                                  double e0_over_hbar,
                                  double kappa,
                                  size_t n_max,
                                  struct BtState **out);

// # Safety
// `state` must come from this library and not have been freed; NULL is ignored.
void bt_state_free(struct BtState *state);

// # Safety
// `state` must be a live handle; outputs must be valid for writes.
enum BtStatus bt_state_shape(const struct BtState *state,
                             size_t *modes,
                             size_t *n_max,
                             size_t *dim);

// Copies amplitudes as interleaved `(re, im)` pairs; `len` counts doubles
// and must be at least `2 * dim`.
//
// # Safety
// `state` must be a live handle and `buf` valid for `len` doubles.
enum BtStatus bt_state_amplitudes(const struct BtState *state, double *buf, size_t len);

// # Safety
// Both handles must be live; `out` valid for writes.
enum BtStatus bt_state_fidelity(const struct BtState *a, const struct BtState *b, double *out);

// Entropy in bits of the first mode of a two-mode state.
//
// # Safety
// `state` must be live; `out` valid for writes.
enum BtStatus bt_state_entanglement(const struct BtState *state, double *out);

// JSON form `{"modes", "n_max", "amplitudes"}`. Free with [`bt_string_free`].
//
// # Safety
// `state` must be live; `out` valid for writes.
enum BtStatus bt_state_to_json(const struct BtState *state, char **out);

// Protocol configuration from JSON; missing keys take their defaults.
//
// # Safety
// `json` must be NUL-terminated; `out` valid for writes.
enum BtStatus bt_protocol_from_json(const char *json, struct BtProtocol **out);

// # Safety
// `protocol` must come from this library and not have been freed; NULL is ignored.
void bt_protocol_free(struct BtProtocol *protocol);

// Runs all configured trials.
//
// # Safety
// `protocol` must be live; `out` valid for writes.
enum BtStatus bt_protocol_run(const struct BtProtocol *protocol, struct BtSummary *out);

// Even-count probability; `kind` is `"number"`, `"coherent"` or `"squeezed_vacuum"`.
//
// # Safety
// `kind` must be NUL-terminated; `out` valid for writes.
enum BtStatus bt_p_even(const char *kind, double parameter, double *out);

// `(1 + p_even + p_d + p_even p_d) / 4`.
//
// # Safety
// `out` must be valid for writes.
enum BtStatus bt_total_efficiency(double p_even, double p_d, double *out);

// Lower and upper adiabatic potentials at `z' = 2 k_L z`.
//
// # Safety
// `lower` and `upper` must be valid for writes.
enum BtStatus bt_lattice_bands(double u1,
                               double theta,
                               double k_l,
                               double b_parallel,
                               double b_perp,
                               double gyro,
                               double z_prime,
                               double *lower,
                               double *upper);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEC_TELEPORT_H */
