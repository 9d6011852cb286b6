/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef TWODEMON_H
#define TWODEMON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TdStatus {
  TD_STATUS_OK = 0,
  TD_STATUS_NULL_POINTER = 1,
  TD_STATUS_INVALID_UTF8 = 2,
  // invalid input: out-of-range parameter, malformed protocol or profile
  TD_STATUS_VALIDATION = 3,
  // solver non-convergence or impossible post-selection
  TD_STATUS_NUMERICAL = 4,
  // the work curve never meets the classical limit
  TD_STATUS_NO_CROSSING = 5,
  TD_STATUS_PANIC = 6,
} TdStatus;

// Opaque device noise profile.
typedef struct TdProfile TdProfile;

// Opaque work-extraction protocol.
typedef struct TdProtocol TdProtocol;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into this library on the same thread.
const char *td_last_error_message(void);

// The built-in σ_z/σ_x protocol on the infinite-temperature qubit.
struct TdProtocol *td_protocol_canonical(void);

// Parses a protocol JSON document.
enum TdStatus td_protocol_from_json(const char *json, struct TdProtocol **out);

void td_protocol_free(struct TdProtocol *p);

// Average work through a single dephasing channel of strength `gamma`.
enum TdStatus td_average_work(const struct TdProtocol *p, double gamma, double *out);

// Average work with superposed channels and post-selection on `|+⟩`.
enum TdStatus td_average_work_superposed(const struct TdProtocol *p, double gamma, double *out);

// Mean post-selection success probability.
enum TdStatus td_success_probability(const struct TdProtocol *p, double gamma, double *out);

// Effective dephasing strength `2γ/(4−γ)` after post-selection.
enum TdStatus td_gamma_prime(double gamma, double *out);

// Optimal classical (hidden-state) work from the SDP.
enum TdStatus td_classical_limit(const struct TdProtocol *p, double *out);

// Dephasing strengths where the single-channel and superposed work meet
// the classical limit. Returns `TD_STATUS_NO_CROSSING` if either has none;
// outputs are written only on success.
enum TdStatus td_thresholds(const struct TdProtocol *p, double *gamma_th, double *gamma_s);

// Bundled profile by name: `ibmq_jakarta` (or `ibmq`), `ionq`.
enum TdStatus td_profile_builtin(const char *name, struct TdProfile **out);

// Parses and validates a device profile JSON document.
enum TdStatus td_profile_from_json(const char *json, struct TdProfile **out);

void td_profile_free(struct TdProfile *p);

// Average work from the engine circuit. A null `profile` runs the ideal
// circuit in the CNOT basis, otherwise the profile's noise model and native
// gate set. `shots == 0` gives exact expectations; otherwise counts are
// sampled from `seed`.
enum TdStatus td_circuit_work(const struct TdProtocol *p,
                              const struct TdProfile *profile,
                              double gamma,
                              bool postselect,
                              uint64_t shots,
                              uint64_t seed,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWODEMON_H */
