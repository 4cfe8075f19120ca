#ifndef HAMSIM_H
#define HAMSIM_H

/* Generated by cbindgen from the hamsim-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum HsStatus {
  // The call succeeded.
  HS_OK = 0,
  // A required pointer argument was null.
  HS_NULL_POINTER = 1,
  // A scalar argument was outside its documented domain.
  HS_INVALID_ARGUMENT = 2,
  // Two objects that must share a dimension do not.
  HS_DIMENSION_MISMATCH = 3,
  // A dense-operator routine was asked to exceed its size cap.
  HS_DIMENSION_CAP = 4,
  // An operator that must be Hermitian is not.
  HS_NOT_HERMITIAN = 5,
  // A part that must be a projector is not.
  HS_NOT_PROJECTOR = 6,
  // A part that must be a reflection is not.
  HS_NOT_REFLECTION = 7,
  // A request exceeded a documented precision or search budget.
  HS_PRECISION_BUDGET = 8,
  // An iterative numerical routine failed to converge.
  HS_NO_CONVERGENCE = 9,
  // Malformed text input.
  HS_PARSE = 10,
  // An I/O operation failed.
  HS_IO = 11,
  // The library caught an internal panic; state may be inconsistent.
  HS_INTERNAL = 12,
} HsStatus;

// Opaque pair of projector parts whose sum is the evolved generator.
typedef struct HsParts HsParts;

// Opaque complex state vector.
typedef struct HsState HsState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a seeded random unit state on `dim` sites.  Identical
// `(dim, seed)` pairs produce identical states on every platform.
//
// # Safety
// `out` must be a valid pointer; on success it receives a handle that must
// be released with [`hs_state_free`].
enum HsStatus hs_state_random(size_t dim, uint64_t seed, struct HsState **out);

// Creates a state from component arrays of length `dim`; `im` may be null
// for a real vector.  The amplitudes are taken as given (no normalisation).
//
// # Safety
// `re` (and `im` when non-null) must point to `dim` readable doubles; `out`
// must be valid and receives a handle to release with [`hs_state_free`].
enum HsStatus hs_state_from_components(const double *re,
                                       const double *im,
                                       size_t dim,
                                       struct HsState **out);

// Returns the dimension of `state`, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle from this library.
size_t hs_state_dim(const struct HsState *state);

// Copies the components of `state` into caller-provided arrays of its
// dimension; either destination may be null to skip that half.
//
// # Safety
// `state` must be a live handle; non-null destinations must hold as many
// writable doubles as the state dimension.
enum HsStatus hs_state_components(const struct HsState *state, double *re, double *im);

// Euclidean distance between two states of equal dimension.
//
// # Safety
// `a` and `b` must be live handles; `out` must be a valid pointer.
enum HsStatus hs_state_distance(const struct HsState *a, const struct HsState *b, double *out);

// Releases a state handle; null is ignored.
//
// # Safety
// `state` must be null or a handle not yet freed.
void hs_state_free(struct HsState *state);

// Builds the odd/even projector decomposition of the scaled closed-chain
// Laplacian on `length` sites (`scale = 0.5` makes both parts exact
// projectors; other scales are rejected by the series evolvers).
//
// # Safety
// `out` must be a valid pointer; on success it receives a handle to release
// with [`hs_parts_free`].
enum HsStatus hs_laplacian_parts(size_t length, double scale, struct HsParts **out);

// Returns the dimension the parts act on, or 0 for a null handle.
//
// # Safety
// `parts` must be null or a live handle from this library.
size_t hs_parts_dim(const struct HsParts *parts);

// Releases a parts handle; null is ignored.
//
// # Safety
// `parts` must be null or a handle not yet freed.
void hs_parts_free(struct HsParts *parts);

// Product-formula evolution of `x` under the part sum for time `t` with `m`
// steps; `order` selects the formula (1 = sequential, 2 = symmetric).
//
// # Safety
// `parts` and `x` must be live handles; `out` must be valid and receives a
// new state handle on success.
enum HsStatus hs_evolve_trotter(const struct HsParts *parts,
                                double t,
                                uint64_t m,
                                uint32_t order,
                                const struct HsState *x,
                                struct HsState **out);

// Projection-operator series evolution of `x` for time `t`, stepping at most
// `dt_cap` per step with truncation order `p`.
//
// # Safety
// `parts` and `x` must be live handles; `out` must be valid and receives a
// new state handle on success.
enum HsStatus hs_evolve_projection_series(const struct HsParts *parts,
                                          double t,
                                          double dt_cap,
                                          size_t p,
                                          const struct HsState *x,
                                          struct HsState **out);

// Reflection-operator series evolution of `x` for time `t` (same generator:
// each projector `P` is lifted to the reflection `1 − 2P` internally),
// stepping at most `dt_cap` per step with truncation order `p`.
//
// # Safety
// `parts` and `x` must be live handles; `out` must be valid and receives a
// new state handle on success.
enum HsStatus hs_evolve_reflection_series(const struct HsParts *parts,
                                          double t,
                                          double dt_cap,
                                          size_t p,
                                          const struct HsState *x,
                                          struct HsState **out);

// Stepped Chebyshev evolution of `x` for time `t` to target accuracy `eps`.
//
// # Safety
// `parts` and `x` must be live handles; `out` must be valid and receives a
// new state handle on success.
enum HsStatus hs_evolve_chebyshev(const struct HsParts *parts,
                                  double t,
                                  double eps,
                                  const struct HsState *x,
                                  struct HsState **out);

// Dense reference evolution of `x` for time `t` by full diagonalisation.
//
// # Safety
// `parts` and `x` must be live handles; `out` must be valid and receives a
// new state handle on success.
enum HsStatus hs_evolve_exact(const struct HsParts *parts,
                              double t,
                              const struct HsState *x,
                              struct HsState **out);

// Fills `out[0..=order]` with Bessel values `J_0(t) .. J_order(t)` from the
// backward-recursion table.
//
// # Safety
// `out` must point to `order + 1` writable doubles.
enum HsStatus hs_bessel_table(double t, size_t order, double *out);

// Runs the discrete search walk over `items` elements; on success writes the
// number of walk applications and the final marked-state probability.
//
// # Safety
// Non-null destinations must be valid pointers; either may be null to skip
// that output.
enum HsStatus hs_grover_search(size_t items, uint64_t *steps, double *success);

// Returns the library version as a static string.
const char *hs_version(void);

// Returns the static name of a status code.
const char *hs_status_name(enum HsStatus status);

// Returns the message recorded by the most recent failing call on this
// thread; the pointer stays valid until the next failing call on the same
// thread.
const char *hs_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAMSIM_H */
