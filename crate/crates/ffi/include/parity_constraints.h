/* C interface to the parity-constraints library. */

#ifndef PARITY_CONSTRAINTS_H
#define PARITY_CONSTRAINTS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PcDistribution {
  PC_DISTRIBUTION_NORMAL = 0,
  PC_DISTRIBUTION_UNIFORM = 1,
  PC_DISTRIBUTION_BIMODAL = 2,
} PcDistribution;

/**
 * Result codes. Capacity and configuration errors share their values with
 * the CLI exit codes.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_INVALID_ARGUMENT = 1,
  PC_STATUS_CAPACITY = 2,
  PC_STATUS_CONFIG = 3,
  PC_STATUS_PARSE = 4,
  PC_STATUS_IO = 5,
  PC_STATUS_NULL_POINTER = 6,
  PC_STATUS_INTERNAL = 7,
} PcStatus;

/**
 * Homogeneous bound report.
 */
typedef struct PcBounds PcBounds;

/**
 * Logical Ising instance.
 */
typedef struct PcInstance PcInstance;

typedef struct PcSpectrum {
  double l0;
  double e;
  double gap;
} PcSpectrum;

typedef struct PcBoundsSummary {
  size_t n;
  size_t q;
  double l0;
  double e;
  double gap;
  double p0;
  double trivial;
  double c_hat;
  size_t k_max_used;
  /**
   * Nonzero when every defect count was included.
   */
  uint8_t certified;
} PcBoundsSummary;

typedef struct PcGumbel {
  double alpha;
  double beta;
  double m;
} PcGumbel;

typedef struct PcC1Sdp {
  double primal;
  double dual;
  double a1_plus;
  double c1_sdp;
  size_t edges;
} PcC1Sdp;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length without
 * the terminator, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
size_t pc_last_error_message(char *buf, size_t len);

/**
 * Samples couplings with mean-to-spread ratio `ratio` on `K_n`, or on
 * `G(n, p_edge)` when `p_edge` lies in `[0, 1]`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PcStatus pc_instance_sample(enum PcDistribution dist,
                                 double ratio,
                                 size_t n,
                                 double p_edge,
                                 uint64_t seed,
                                 struct PcInstance **out);

/**
 * MaxCut encoding of `G(n, p_edge)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PcStatus pc_instance_maxcut_er(size_t n,
                                    double p_edge,
                                    uint64_t seed,
                                    struct PcInstance **out);

/**
 * Parses an instance document (JSON, 1-based edges).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PcStatus pc_instance_from_json(const char *json, struct PcInstance **out);

/**
 * Serializes an instance; release the string with [`pc_string_free`].
 *
 * # Safety
 * `inst` must come from this library and `out` must be valid.
 */
enum PcStatus pc_instance_to_json(const struct PcInstance *inst, char **out);

/**
 * Number of logical spins, or 0 for a null handle.
 *
 * # Safety
 * `inst` must come from this library or be null.
 */
size_t pc_instance_n(const struct PcInstance *inst);

/**
 * # Safety
 * `inst` must come from this library or be null; it must not be used afterwards.
 */
void pc_instance_free(struct PcInstance *inst);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void pc_string_free(char *s);

/**
 * Ground energy, first excited energy and gap.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PcStatus pc_spectrum(const struct PcInstance *inst, struct PcSpectrum *out);

/**
 * Bound families for defect counts up to `k_max`; a negative `k_max`
 * requests the full range.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PcStatus pc_bounds_compute(const struct PcInstance *inst,
                                int64_t k_max,
                                struct PcBounds **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PcStatus pc_bounds_summary(const struct PcBounds *b, struct PcBoundsSummary *out);

/**
 * `a_k` for `1 <= k <= k_max_used`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PcStatus pc_bounds_a(const struct PcBounds *b, size_t k, double *out);

/**
 * Lower bound `c_-k` for `1 <= k <= k_max_used`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PcStatus pc_bounds_lower(const struct PcBounds *b, size_t k, double *out);

/**
 * Upper bound `c_i` for `0 <= i <= k_max_used`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PcStatus pc_bounds_upper(const struct PcBounds *b, size_t i, double *out);

/**
 * # Safety
 * `b` must come from this library or be null; it must not be used afterwards.
 */
void pc_bounds_free(struct PcBounds *b);

/**
 * Standard normal quantile.
 *
 * # Safety
 * `out` must be valid.
 */
enum PcStatus pc_probit(double p, double *out);

/**
 * Gumbel parameters for the minimum of `m` standard normals.
 *
 * # Safety
 * `out` must be valid.
 */
enum PcStatus pc_gumbel_params(double m, struct PcGumbel *out);

/**
 * Expected minimum of `m` independent `N(0, sigma^2)` variables.
 *
 * # Safety
 * `out` must be valid.
 */
enum PcStatus pc_expected_min_independent(double m, double sigma, double *out);

/**
 * Leading-order growth of `l0 - a1` for the SK model.
 */
double pc_f1_scaling(size_t n, double delta);

/**
 * SDP lower bound on `c_-1` for MaxCut on `G(n, p_edge)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum PcStatus pc_c1_sdp_maxcut_er(size_t n, double p_edge, uint64_t seed, struct PcC1Sdp *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARITY_CONSTRAINTS_H */
