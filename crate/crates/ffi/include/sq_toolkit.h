#ifndef SQ_TOOLKIT_H
#define SQ_TOOLKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum SqStatus {
  SQ_STATUS_OK = 0,
  SQ_STATUS_NULL_POINTER = 1,
  SQ_STATUS_INVALID_ARGUMENT = 2,
  SQ_STATUS_INVALID_STATE = 3,
  SQ_STATUS_NOT_BIPARTITE = 4,
  SQ_STATUS_DIMENSION_MISMATCH = 5,
  SQ_STATUS_STATE_TOO_LARGE = 6,
  SQ_STATUS_BUFFER_TOO_SMALL = 7,
  SQ_STATUS_PANIC = 8,
} SqStatus;

/**
 * Opaque two-particle collision model.
 */
typedef struct SqCollisionModel SqCollisionModel;

/**
 * Opaque pure state.
 */
typedef struct SqState SqState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *sq_last_error_message(void);

/**
 * Builds a state from `n_factors` dims and `2 * n_amplitudes` interleaved
 * doubles. The amplitudes must already be normalized.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be writable.
 */
enum SqStatus sq_state_new(const size_t *factor_dims,
                           size_t n_factors,
                           const double *amplitudes,
                           size_t n_amplitudes,
                           struct SqState **out);

/**
 * Seeded random state; `product` draws independent local states.
 *
 * # Safety
 * `factor_dims` must hold `n_factors` entries; `out` must be writable.
 */
enum SqStatus sq_state_random(const size_t *factor_dims,
                              size_t n_factors,
                              uint64_t seed,
                              bool product,
                              struct SqState **out);

/**
 * Releases a state; null is ignored.
 *
 * # Safety
 * `state` must come from this library and not be used afterwards.
 */
void sq_state_free(struct SqState *state);

/**
 * Total Hilbert-space dimension.
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum SqStatus sq_state_dim(const struct SqState *state, size_t *out);

/**
 * Number of tensor factors.
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum SqStatus sq_state_n_factors(const struct SqState *state, size_t *out);

/**
 * Copies `2 * dim` interleaved doubles into `out`, which holds `capacity`
 * doubles. `written` receives the required length even when the buffer is
 * too small.
 *
 * # Safety
 * `out` must be writable for `capacity` doubles.
 */
enum SqStatus sq_state_amplitudes(const struct SqState *state,
                                  double *out,
                                  size_t capacity,
                                  size_t *written);

/**
 * Nonzero Schmidt weights of a bipartite state, descending. `rank`
 * receives their count even when the buffer is too small.
 *
 * # Safety
 * `weights` must be writable for `capacity` doubles.
 */
enum SqStatus sq_schmidt_weights(const struct SqState *state,
                                 double *weights,
                                 size_t capacity,
                                 size_t *rank);

/**
 * Closed-form S_q (nats) of a bipartite state.
 *
 * # Safety
 * `state` must be a live handle; `value` must be writable.
 */
enum SqStatus sq_closed_form(const struct SqState *state, double *value);

/**
 * Numerical S_q (nats) of a state with any number of factors.
 *
 * # Safety
 * `state` must be a live handle; `value` must be writable.
 */
enum SqStatus sq_search_value(const struct SqState *state,
                              size_t restarts,
                              size_t max_iters,
                              double tol,
                              uint64_t seed,
                              double *value);

/**
 * Reference model: two `d`-level particles with levels `0, 1, …, d−1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SqStatus sq_model_reference(size_t d,
                                 uint64_t interaction_seed,
                                 double coupling,
                                 double duration,
                                 struct SqCollisionModel **out);

/**
 * Model with explicit single-particle energies.
 *
 * # Safety
 * `energies_1` and `energies_2` must hold `d1` and `d2` doubles.
 */
enum SqStatus sq_model_new(size_t d1,
                           const double *energies_1,
                           size_t d2,
                           const double *energies_2,
                           double coupling,
                           uint64_t interaction_seed,
                           double duration,
                           struct SqCollisionModel **out);

/**
 * Releases a model; null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void sq_model_free(struct SqCollisionModel *model);

/**
 * Out-state of one collision of two single-particle states.
 *
 * # Safety
 * All handles must be live; `out` must be writable.
 */
enum SqStatus sq_collide(const struct SqCollisionModel *model,
                         const struct SqState *in1,
                         const struct SqState *in2,
                         struct SqState **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQ_TOOLKIT_H */
