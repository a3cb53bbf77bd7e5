#ifndef MZISIM_H
#define MZISIM_H

/* Generated by cbindgen from mzisim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible entry points.
 */
typedef enum MzisimStatus {
  MZISIM_STATUS_OK = 0,
  MZISIM_STATUS_NULL_POINTER = 1,
  MZISIM_STATUS_INVALID_ARGUMENT = 2,
  MZISIM_STATUS_DOMAIN_ERROR = 3,
  MZISIM_STATUS_UNSUPPORTED_CONFIGURATION = 4,
  MZISIM_STATUS_COMPUTE_ERROR = 5,
} MzisimStatus;

/**
 * Opaque circuit handle.
 */
typedef struct MzisimCircuit MzisimCircuit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *mzisim_version(void);

/**
 * Free-space polarization rotator (1 path).
 */
struct MzisimCircuit *mzisim_circuit_free_rotator(void);

/**
 * Nested MZI with first-splitter reflection `r1`, last-splitter reflection
 * `r4`, and the tagging rotator at `position` 0..=5 (0 = none).
 * Returns null on invalid arguments.
 */
struct MzisimCircuit *mzisim_circuit_nmzi(double r1, double r4, uint32_t position);

/**
 * Post-selected communication device (`r4 = t1`, `t4 = r1`), optionally
 * with the receiver's absorbing object inserted.
 */
struct MzisimCircuit *mzisim_circuit_nmzi_comm(double r1, bool blocked);

/**
 * Chained nested MZI with `n` outer and `m` inner splitters.
 */
struct MzisimCircuit *mzisim_circuit_chained_nmzi(uint32_t n,
                                                  uint32_t m,
                                                  bool blocked,
                                                  bool tagged);

/**
 * Chained MZI with `n` splitters.
 */
struct MzisimCircuit *mzisim_circuit_cmzi(uint32_t n, bool blocked, bool tagged);

/**
 * Rebuild a circuit from its JSON document.
 *
 * # Safety
 * `json` must be a valid NUL-terminated C string.
 */
struct MzisimCircuit *mzisim_circuit_from_json(const char *json);

/**
 * Serialize a circuit to JSON; free the result with `mzisim_string_free`.
 *
 * # Safety
 * `circuit` must be a live handle from this library.
 */
char *mzisim_circuit_to_json(const struct MzisimCircuit *circuit);

/**
 * Number of spatial paths (outcome buffers have twice this length).
 *
 * # Safety
 * `circuit` must be a live handle from this library.
 */
uintptr_t mzisim_circuit_n_paths(const struct MzisimCircuit *circuit);

/**
 * Release a circuit handle (null is a no-op).
 *
 * # Safety
 * `circuit` must be a handle from this library that has not been freed.
 */
void mzisim_circuit_free(struct MzisimCircuit *circuit);

/**
 * Release a string returned by this library (null is a no-op).
 *
 * # Safety
 * `s` must originate from this library and not have been freed.
 */
void mzisim_string_free(char *s);

/**
 * Detection probabilities of a single photon injected in `input_path` with
 * the input polarization. `probs` must hold `2 * n_paths` doubles; the
 * absorbed probability is written to `absorbed`.
 *
 * # Safety
 * `circuit` must be a live handle; `probs` must point to writable memory of
 * length `2 * mzisim_circuit_n_paths(circuit)`; `absorbed` must be writable.
 */
enum MzisimStatus mzisim_evolve_probabilities(const struct MzisimCircuit *circuit,
                                              uintptr_t input_path,
                                              double theta,
                                              double *probs,
                                              double *absorbed);

/**
 * Classical Fisher information over all outcomes.
 *
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum MzisimStatus mzisim_fisher(const struct MzisimCircuit *circuit,
                                uintptr_t input_path,
                                double theta,
                                double *out);

/**
 * Fisher information restricted to `outcome_count` outcome indices (with
 * the negative-measurement term); a null/empty set means all outcomes.
 *
 * # Safety
 * `circuit` must be a live handle; `outcomes` must point to
 * `outcome_count` readable indices when non-null; `out` must be writable.
 */
enum MzisimStatus mzisim_fisher_restricted(const struct MzisimCircuit *circuit,
                                           uintptr_t input_path,
                                           double theta,
                                           const uintptr_t *outcomes,
                                           uintptr_t outcome_count,
                                           double *out);

/**
 * Shannon mutual information under a uniform prior; `diagonal_prior`
 * selects the signed-diagonal integration variable instead of theta.
 *
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum MzisimStatus mzisim_shannon_mi(const struct MzisimCircuit *circuit,
                                    uintptr_t input_path,
                                    uintptr_t nodes,
                                    bool diagonal_prior,
                                    double *out);

/**
 * Free-space Fisher benchmark `4 / (1 - theta^2)`.
 */
double mzisim_fisher_free(double theta);

/**
 * Closed-form inner-arm mutual information as a function of `t1`.
 */
double mzisim_shannon_closed_inner(double t1);

/**
 * Second-order model of the inner-arm mutual information.
 */
double mzisim_shannon_taylor(double t1);

/**
 * [6/4] Pade model of the inner-arm mutual information.
 */
double mzisim_shannon_pade(double t1);

/**
 * Inverse standard normal CDF.
 *
 * # Safety
 * `out` must be writable.
 */
enum MzisimStatus mzisim_inverse_normal_cdf(double p, double *out);

/**
 * Detection probabilities of the chained nested MZI at theta = 0.
 *
 * # Safety
 * `p_d1`, `p_d2` and `absorbed` must be writable.
 */
enum MzisimStatus mzisim_chained_detection_probs(uint32_t n,
                                                 uint32_t m,
                                                 bool blocked,
                                                 double *p_d1,
                                                 double *p_d2,
                                                 double *absorbed);

/**
 * Full protocol report as a JSON string (see the library documentation for
 * the schema); free with `mzisim_string_free`. Returns null on invalid
 * arguments.
 */
char *mzisim_protocol_report_json(double epsilon, double t1, double theta_w);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MZISIM_H */
