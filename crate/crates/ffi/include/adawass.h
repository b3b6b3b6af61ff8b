#ifndef ADAWASS_H
#define ADAWASS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call. Numeric values match the exit codes of the `aw`
 * command-line tool where they overlap.
 */
typedef enum AwStatus {
  AW_STATUS_OK = 0,
  AW_STATUS_NULL_POINTER = 1,
  AW_STATUS_INVALID_INPUT = 2,
  AW_STATUS_SHAPE_MISMATCH = 3,
  AW_STATUS_SIZE_LIMIT = 4,
  AW_STATUS_NUMERICAL = 5,
  AW_STATUS_PANIC = 6,
} AwStatus;

/**
 * Opaque common-space flow.
 */
typedef struct AwFlow AwFlow;

/**
 * Opaque scenario tree.
 */
typedef struct AwTree AwTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * owned by the library and valid until the next call on this thread.
 */
const char *aw_last_error_message(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void aw_string_free(char *s);

/**
 * Parses and validates a tree.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AwStatus aw_tree_from_json(const char *json, struct AwTree **out);

/**
 * # Safety
 * `tree` must come from this library and not have been freed. NULL is ignored.
 */
void aw_tree_free(struct AwTree *tree);

/**
 * Serializes a tree; release the result with [`aw_string_free`].
 *
 * # Safety
 * `tree` must be a live handle; `out` must be writable.
 */
enum AwStatus aw_tree_to_json(const struct AwTree *tree, char **out);

/**
 * Number of nodes including the root.
 *
 * # Safety
 * `tree` must be a live handle; `out` must be writable.
 */
enum AwStatus aw_tree_num_nodes(const struct AwTree *tree, size_t *out);

/**
 * Adapted Wasserstein distance of order `p`.
 *
 * # Safety
 * `x`, `y` must be live handles; `out` must be writable.
 */
enum AwStatus aw_distance(const struct AwTree *x, const struct AwTree *y, double p, double *out);

/**
 * Optimal bicausal plan as JSON; release with [`aw_string_free`].
 *
 * # Safety
 * `x`, `y` must be live handles; `out` must be writable.
 */
enum AwStatus aw_plan_json(const struct AwTree *x, const struct AwTree *y, double p, char **out);

/**
 * Whether `x` and `y` define the same process up to `tol`.
 *
 * # Safety
 * `x`, `y` must be live handles; `out` must be writable.
 */
enum AwStatus aw_equivalent(const struct AwTree *x, const struct AwTree *y, double tol, bool *out);

/**
 * Canonical representative as a new handle.
 *
 * # Safety
 * `tree` must be a live handle; `out` must be writable.
 */
enum AwStatus aw_canonicalize(const struct AwTree *tree, double tol, struct AwTree **out);

/**
 * Geodesic flow between `x` and `y` on the grid `grid[0..grid_len]`.
 * `max_leaves == 0` selects the default size guard.
 *
 * # Safety
 * `x`, `y` must be live handles, `grid` must point to `grid_len` doubles,
 * `out` must be writable.
 */
enum AwStatus aw_geodesic(const struct AwTree *x,
                          const struct AwTree *y,
                          double p,
                          const double *grid,
                          size_t grid_len,
                          size_t max_leaves,
                          struct AwFlow **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AwStatus aw_flow_from_json(const char *json, struct AwFlow **out);

/**
 * # Safety
 * `flow` must be a live handle; `out` must be writable.
 */
enum AwStatus aw_flow_to_json(const struct AwFlow *flow, char **out);

/**
 * Particle-level energy of a flow.
 *
 * # Safety
 * `flow` must be a live handle; `out` must be writable.
 */
enum AwStatus aw_flow_energy(const struct AwFlow *flow, double p, double *out);

/**
 * Number of grid points of a flow.
 *
 * # Safety
 * `flow` must be a live handle; `out` must be writable.
 */
enum AwStatus aw_flow_grid_len(const struct AwFlow *flow, size_t *out);

/**
 * The process of a flow at grid index `k` as a new tree handle.
 *
 * # Safety
 * `flow` must be a live handle; `out` must be writable.
 */
enum AwStatus aw_flow_process_at(const struct AwFlow *flow, size_t k, struct AwTree **out);

/**
 * # Safety
 * `flow` must come from this library and not have been freed. NULL is ignored.
 */
void aw_flow_free(struct AwFlow *flow);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADAWASS_H */
