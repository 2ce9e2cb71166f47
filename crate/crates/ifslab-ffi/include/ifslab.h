#ifndef IFSLAB_H
#define IFSLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum IfslabStatus {
  IFSLAB_STATUS_OK = 0,
  IFSLAB_STATUS_NULL_ARGUMENT = 1,
  IFSLAB_STATUS_INVALID_UTF8 = 2,
  IFSLAB_STATUS_PARSE_ERROR = 3,
  IFSLAB_STATUS_RUNTIME_ERROR = 4,
  IFSLAB_STATUS_UNSUPPORTED = 5,
} IfslabStatus;

// Opaque compact-set approximation.
typedef struct IfslabSet IfslabSet;

// Opaque system handle: the map family, its space, an optional target set
// and, for presets, the canonical refutation recipe.
typedef struct IfslabSystem IfslabSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Crate version as a static NUL-terminated string.
const char *ifslab_version(void);

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `cap`). Returns the full message length in bytes.
//
// # Safety
// `buf` must point to `cap` writable bytes, or be null (length query).
size_t ifslab_last_error(char *buf, size_t cap);

// Build a system from a gallery preset name (`cantor`,
// `cantor-simplified`, `sierpinski-carpet`, `sierpinski-triangle`,
// `kwietniak`, `circle:<json>`, `line:<json>`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be a valid pointer.
// A returned handle must be released with [`ifslab_system_free`].
enum IfslabStatus ifslab_system_preset(const char *name, struct IfslabSystem **out);

// Build a system from an inline JSON descriptor (the same schema the
// experiment configs use under `"inline"`).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
enum IfslabStatus ifslab_system_from_json(const char *json, struct IfslabSystem **out);

// # Safety
// `sys` must come from a constructor of this library and not already be
// freed; null is a no-op.
void ifslab_system_free(struct IfslabSystem *sys);

// Chart dimension of the system's space (1 or 2), or 0 for null.
//
// # Safety
// `sys` must be a live handle or null.
int32_t ifslab_system_dim(const struct IfslabSystem *sys);

// Number of maps in the family, or 0 for null.
//
// # Safety
// `sys` must be a live handle or null.
size_t ifslab_system_map_count(const struct IfslabSystem *sys);

// Clone the system's designated target set into a new handle.
//
// # Safety
// `sys` must be a live handle; `out` a valid pointer. Free the result with
// [`ifslab_set_free`].
enum IfslabStatus ifslab_system_target(const struct IfslabSystem *sys, struct IfslabSet **out);

// Build a compact-set approximation on the system's space from parallel
// coordinate arrays. `ys` may be null on 1-D charts; `infinity` may be
// null when no point at infinity occurs.
//
// # Safety
// `xs` (and `ys`/`infinity` when non-null) must point to `n` readable
// elements; `out` must be valid. Free the result with [`ifslab_set_free`].
enum IfslabStatus ifslab_set_new(const struct IfslabSystem *sys,
                                 const double *xs,
                                 const double *ys,
                                 const uint8_t *infinity,
                                 size_t n,
                                 double epsilon,
                                 struct IfslabSet **out);

// # Safety
// `set` must come from this library and not already be freed; null is a
// no-op.
void ifslab_set_free(struct IfslabSet *set);

// Number of points, or 0 for null.
//
// # Safety
// `set` must be a live handle or null.
size_t ifslab_set_len(const struct IfslabSet *set);

// Resolution of the approximation, or NaN for null.
//
// # Safety
// `set` must be a live handle or null.
double ifslab_set_resolution(const struct IfslabSet *set);

// Copy up to `cap` points into the provided arrays (any of which may be
// null to skip that column). Returns the number of points written.
//
// # Safety
// Non-null output arrays must have room for `cap` elements.
size_t ifslab_set_points(const struct IfslabSet *set,
                         double *xs,
                         double *ys,
                         uint8_t *infinity,
                         size_t cap);

// Hausdorff distance between two clouds on the same space.
//
// # Safety
// `a`, `b` must be live handles; `out` a valid pointer.
enum IfslabStatus ifslab_hausdorff_distance(const struct IfslabSet *a,
                                            const struct IfslabSet *b,
                                            double *out);

// One application of the Barnsley-Hutchinson operator at resolution
// `epsilon`.
//
// # Safety
// `sys`, `s` must be live handles; `out` a valid pointer.
enum IfslabStatus ifslab_apply_operator(const struct IfslabSystem *sys,
                                        const struct IfslabSet *s,
                                        double epsilon,
                                        struct IfslabSet **out);

// Iterate the operator `n` steps from `s0`. When the system carries a
// target and `out_distances` is non-null it receives `n + 1` per-step
// Hausdorff distances; `out_final` (if non-null) receives the final step.
//
// # Safety
// `out_distances`, when non-null, must have room for `n + 1` doubles.
enum IfslabStatus ifslab_iterate_orbit(const struct IfslabSystem *sys,
                                       const struct IfslabSet *s0,
                                       size_t n,
                                       double epsilon,
                                       double *out_distances,
                                       struct IfslabSet **out_final);

// Classify convergence of the singleton orbit of `(x, y)` toward the
// system target: 0 converged, 1 diverged, 2 inconclusive.
//
// # Safety
// `sys` must be a live handle; `out_verdict` a valid pointer.
enum IfslabStatus ifslab_pointwise_test(const struct IfslabSystem *sys,
                                        double x,
                                        double y,
                                        uint8_t use_y,
                                        uint8_t infinity,
                                        size_t n_max,
                                        double tol,
                                        double epsilon,
                                        int32_t *out_verdict);

// Run the canonical strict-attraction refutation of a preset system:
// builds the witnessing sequence into the `10 * epsilon` neighborhood of
// the repellor and iterates the operator on the witness tail. Only preset
// handles carry a witness recipe.
//
// # Safety
// `sys` must be a live handle; output pointers may be null to skip.
enum IfslabStatus ifslab_refute_strict(const struct IfslabSystem *sys,
                                       size_t n_max,
                                       double epsilon,
                                       uint8_t *out_refuted,
                                       double *out_x0_distance,
                                       double *out_min_distance);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IFSLAB_H */
