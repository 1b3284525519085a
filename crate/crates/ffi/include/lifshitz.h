/* C interface to the lifshitz Anderson-Bernoulli spectral library. */

#ifndef LIFSHITZ_H
#define LIFSHITZ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Call outcome.
typedef enum LifStatus {
  // Success.
  LIF_STATUS_OK = 0,
  // A required pointer argument was null.
  LIF_STATUS_NULL_POINTER = 1,
  // A parameter was outside its documented domain.
  LIF_STATUS_INVALID_ARGUMENT = 2,
  // An internal computation failed.
  LIF_STATUS_RUNTIME_ERROR = 3,
} LifStatus;

// Opaque model-parameter handle (lattice size, zero-site probability,
// potential height).
typedef struct LifParams LifParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Allocates a parameter handle for an L-site lattice with P[V = 0] = p
// and potential height b at occupied sites. Writes the handle to `out`.
//
// # Safety
// `out` must be a valid pointer. The returned handle must be released
// with [`lif_params_free`].
enum LifStatus lif_params_new(uint64_t sites, double p, double b, struct LifParams **out);

// Releases a handle from [`lif_params_new`]. Null is a no-op.
//
// # Safety
// `params` must be a handle produced by [`lif_params_new`] that has not
// been freed, or null.
void lif_params_free(struct LifParams *params);

// Counts eigenvalues strictly below `epsilon` for the realization drawn
// from (seed, index), streaming over the lattice in O(1) memory.
//
// # Safety
// `params` must be a live handle; `out_count` must be valid.
enum LifStatus lif_count_below(const struct LifParams *params,
                               uint64_t seed,
                               uint64_t index,
                               double epsilon,
                               uint64_t *out_count);

// Length of the longest zero-potential run of the realization drawn
// from (seed, index); 0 when every site is occupied.
//
// # Safety
// `params` must be a live handle; `out_len` must be valid.
enum LifStatus lif_longest_zero_run(const struct LifParams *params,
                                    uint64_t seed,
                                    uint64_t index,
                                    uint64_t *out_len);

// Lower IDS envelope q p^T / (1 - p^T) with T = pi/sqrt(epsilon).
// NaN unless epsilon > 0 and 0 < p < 1.
double lif_lower_bound_ids(double epsilon, double p);

// Upper IDS envelope q p^(T - pi^2/b) / (p^2 (1 - p^(T + C sqrt(eps)))).
// NaN unless epsilon > 0, 0 < p < 1, b > 0, c >= 0.
double lif_upper_bound_ids(double epsilon, double p, double b, double c);

// Finite-volume lower coefficient with the run-length sum truncated at
// ell0 (may be +inf). NaN unless epsilon > 0, 0 < p < 1, ell0 >= 0.
double lif_finite_lower_coeff(double epsilon, double p, double ell0);

// Energy of the w-th sine mode on a zero run of `len` sites:
// 4 sin^2(w pi / (2 (len+1))). NaN unless 1 <= w <= len.
double lif_sine_energy(uint64_t len, uint64_t w);

// Longest-run threshold (ln n - ln y) / ln(1/p).
// NaN unless y > 0, n > 0, 0 < p < 1.
double lif_run_threshold(double y, double n, double p);

// Limit probability 1 - e^{-y} of exceeding the threshold. NaN for
// negative y.
double lif_run_limit_probability(double y);

// Library version as a static NUL-terminated string.
const char *lif_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LIFSHITZ_H */
