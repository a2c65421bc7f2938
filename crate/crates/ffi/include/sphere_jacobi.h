#ifndef SPHERE_JACOBI_H
#define SPHERE_JACOBI_H

/* Generated by cbindgen from the sphere-jacobi-ffi sources; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SjStatus {
  SJ_STATUS_OK = 0,
  SJ_STATUS_NULL_POINTER = 1,
  SJ_STATUS_INVALID_ARGUMENT = 2,
  SJ_STATUS_GEOMETRY = 3,
  SJ_STATUS_NUMERICAL = 4,
  SJ_STATUS_IO = 5,
  SJ_STATUS_PANIC = 6,
} SjStatus;

typedef enum SjBackend {
  /**
   * Closed-form spectrum of the equator and Clifford families.
   */
  SJ_BACKEND_ANALYTIC = 0,
  /**
   * Finite-volume discretization at the given resolution.
   */
  SJ_BACKEND_NUMERIC = 1,
} SjBackend;

/**
 * Opaque hypersurface handle.
 */
typedef struct SjSurface SjSurface;

/**
 * Scalar shape data at one chart point.
 */
typedef struct SjShape {
  double mean_curvature;
  double norm_a2;
  double sqrt_det_metric;
} SjShape;

typedef struct SjConeVerdict {
  size_t n;
  double link_bound;
  double threshold;
  double margin;
  bool stable_possible;
} SjConeVerdict;

typedef struct SjSsyConstants {
  double coefficient;
  double remainder;
  bool admissible;
} SjSsyConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sj_version(void);

/**
 * Message of the last failed call on this thread, empty after a success.
 * Valid until the next call on the same thread.
 */
const char *sj_last_error(void);

/**
 * The totally geodesic equator `S^n ⊂ S^{n+1}`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SjStatus sj_surface_equator(uint32_t n, struct SjSurface **out);

/**
 * The Clifford hypersurface `S^k(√(k/n)) × S^l(√(l/n))`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SjStatus sj_surface_clifford(uint32_t k, uint32_t l, struct SjSurface **out);

/**
 * Loads a surface from a chart file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum SjStatus sj_surface_load(const char *path, struct SjSurface **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `surface` must come from a constructor and not have been freed.
 */
void sj_surface_free(struct SjSurface *surface);

/**
 * # Safety
 * `surface` must be a live handle and `out` valid for writes.
 */
enum SjStatus sj_surface_dim(const struct SjSurface *surface, size_t *out);

/**
 * Area by tensor Gauss-Legendre quadrature with `nodes_per_axis` nodes.
 *
 * # Safety
 * `surface` must be a live handle and `out` valid for writes.
 */
enum SjStatus sj_surface_area(const struct SjSurface *surface, size_t nodes_per_axis, double *out);

/**
 * Shape data at parameter `u` (length `len`, equal to the dimension) of
 * chart `chart`.
 *
 * # Safety
 * `surface` must be a live handle, `u` valid for `len` reads and `out`
 * valid for writes.
 */
enum SjStatus sj_surface_shape_at(const struct SjSurface *surface,
                                  size_t chart,
                                  const double *u,
                                  size_t len,
                                  struct SjShape *out);

/**
 * First eigenvalue of the stability operator. `backend` is an
 * `SjBackend` value; `resolution` is ignored by the analytic backend.
 *
 * # Safety
 * `surface` must be a live handle and `out` valid for writes.
 */
enum SjStatus sj_first_eigenvalue(const struct SjSurface *surface,
                                  uint32_t backend,
                                  size_t resolution,
                                  double *out);

/**
 * Stability verdict for minimal cones over `n`-dimensional links.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SjStatus sj_cone_verdict(size_t n, struct SjConeVerdict *out);

/**
 * Absorption constants `(1+a)/(1+2/n−a)` and `1 + 1/a`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SjStatus sj_ssy_constants(size_t n, double a, double alpha, struct SjSsyConstants *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPHERE_JACOBI_H */
