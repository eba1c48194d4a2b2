#ifndef ROUGH_CONTACT_H
#define ROUGH_CONTACT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>


/**
 * Result code returned by every fallible function in this interface.
 */
typedef enum {
  /**
   * The call succeeded.
   */
  RC_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RC_NULL_ARGUMENT = 1,
  /**
   * A scalar argument or the problem geometry was rejected.
   */
  RC_INVALID_ARGUMENT = 2,
  /**
   * An iterative solver failed to converge.
   */
  RC_SOLVER_FAILURE = 3,
  /**
   * Reading or writing a file failed.
   */
  RC_IO_FAILURE = 4,
  /**
   * A string argument was not valid UTF-8.
   */
  RC_INVALID_UTF8 = 5,
  /**
   * The library panicked; treat the handle as poisoned.
   */
  RC_PANIC = 6,
} RcStatus;

/**
 * Micro contact solver bound to one surface and one elastic pairing.
 *
 * The handle keeps a warm-started active set, so repeated solves at nearby
 * displacements are cheap. It is not safe to share one handle across
 * threads without external locking.
 */
typedef struct RcSolver RcSolver;

/**
 * Rough topography handle.
 */
typedef struct RcSurface RcSurface;

/**
 * Point-contact summary filled by the solve calls.
 */
typedef struct {
  /**
   * Total normal force carried by the patch.
   */
  double total_force;
  /**
   * Force divided by the nominal patch area.
   */
  double mean_pressure;
  /**
   * Fraction of cells in contact.
   */
  double area_fraction;
  /**
   * Half-space approach actually imposed. Equals the requested
   * displacement for a raw solve; includes the elastic correction for a
   * corrected solve.
   */
  double displacement;
  /**
   * Inner iterations: active-set/CG steps for a raw solve, fixed-point
   * sweeps for a corrected solve.
   */
  uintptr_t iterations;
} RcContact;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message of the most recent failure on this thread, or null
 * when every call so far succeeded. The pointer stays valid until the next
 * failing call on the same thread; do not free it.
 */
const char *rc_last_error(void);

/**
 * Combines two linear-elastic half-spaces into the equivalent single
 * half-space moduli. Outputs may individually be null when not wanted.
 *
 * # Safety
 * Non-null output pointers must refer to writable doubles.
 */
RcStatus rc_composite_moduli(double e1,
                             double nu1,
                             double e2,
                             double nu2,
                             double *e,
                             double *g,
                             double *nu);

/**
 * Flat-punch pressure factor for a patch at refinement level `n`.
 *
 * Levels up to 6 use the dense path; beyond that the matrix-free path is
 * taken automatically. The value depends only on `n`, so compute it once
 * and reuse it across surfaces.
 *
 * # Safety
 * `alpha` must be a writable double.
 */
RcStatus rc_flat_punch_alpha(uint32_t n, double *alpha);

/**
 * Generates a self-affine topography by random midpoint displacement on a
 * `(2^n + 1)` square grid. `lateral_size` is the patch edge length; pass a
 * non-positive value for the default. Heights are shifted to a zero minimum
 * and scaled so the tallest summit is `max_height`.
 *
 * # Safety
 * `out` must be a writable pointer slot; the handle written into it must be
 * released with [`rc_surface_free`].
 */
RcStatus rc_surface_generate(uint32_t n,
                             double hurst,
                             uint64_t seed,
                             double max_height,
                             double lateral_size,
                             RcSurface **out);

/**
 * Loads a surface from a whitespace-separated `x y z` file written by
 * [`rc_surface_write_xyz`] or a compatible tool.
 *
 * # Safety
 * `path` must be a null-terminated string, `out` a writable pointer slot;
 * release the handle with [`rc_surface_free`].
 */
RcStatus rc_surface_read_xyz(const char *path, RcSurface **out);

/**
 * Writes the surface as `x y z` rows, one grid point per line.
 *
 * # Safety
 * `surface` must be a live handle and `path` a null-terminated string.
 */
RcStatus rc_surface_write_xyz(const RcSurface *surface, const char *path);

/**
 * Number of grid points along one edge.
 *
 * # Safety
 * `surface` must be a live handle.
 */
uintptr_t rc_surface_grid(const RcSurface *surface);

/**
 * Mean, root-mean-square, and maximum height of the topography.
 *
 * # Safety
 * `surface` must be a live handle; non-null outputs must be writable.
 */
RcStatus rc_surface_stats(const RcSurface *surface, double *mean, double *rms, double *max);

/**
 * Copies the heights row by row into `buffer`, which holds `len` doubles.
 * `len` must be at least grid squared.
 *
 * # Safety
 * `surface` must be a live handle and `buffer` writable for `len` doubles.
 */
RcStatus rc_surface_heights(const RcSurface *surface, double *buffer, uintptr_t len);

/**
 * Releases a surface handle. Null is ignored.
 *
 * # Safety
 * `surface` must come from this library and must not be used afterwards.
 */
void rc_surface_free(RcSurface *surface);

/**
 * Creates a contact solver for `surface` pressed against a half-space with
 * the composite of the two given elastic pairings. `alpha` is the
 * flat-punch factor from [`rc_flat_punch_alpha`] for the surface's
 * refinement level.
 *
 * # Safety
 * `surface` must be a live handle and `out` a writable pointer slot;
 * release the handle with [`rc_solver_free`]. The surface may be freed
 * independently once the solver exists.
 */
RcStatus rc_solver_new(const RcSurface *surface,
                       double e1,
                       double nu1,
                       double e2,
                       double nu2,
                       double alpha,
                       RcSolver **out);

/**
 * Solves the patch at the imposed half-space approach `displacement`
 * without the finite-thickness correction.
 *
 * # Safety
 * `solver` must be a live handle and `contact` writable.
 */
RcStatus rc_solver_solve(RcSolver *solver, double displacement, RcContact *contact);

/**
 * Solves the patch at the macroscopic normal gap `g_n`, iterating the
 * mean-field elastic correction so the reported pressure is consistent
 * with the finite patch depth. Gaps at or below zero return a zero-contact
 * result.
 *
 * # Safety
 * `solver` must be a live handle and `contact` writable.
 */
RcStatus rc_solver_solve_corrected(RcSolver *solver, double g_n, RcContact *contact);

/**
 * Discards the solver's warm-started active set, forcing the next solve to
 * start from scratch. Useful before jumping to a much smaller displacement.
 *
 * # Safety
 * `solver` must be a live handle.
 */
RcStatus rc_solver_reset(RcSolver *solver);

/**
 * Releases a solver handle. Null is ignored.
 *
 * # Safety
 * `solver` must come from this library and must not be used afterwards.
 */
void rc_solver_free(RcSolver *solver);

/**
 * Sweeps the corrected micro response over `steps` displacements up to
 * `delta_max` and fits `p = a * g^b` to the resulting gap curve. Outputs
 * may individually be null when not wanted.
 *
 * # Safety
 * `surface` must be a live handle; non-null outputs must be writable.
 */
RcStatus rc_offline_power_law(const RcSurface *surface,
                              double e1,
                              double nu1,
                              double e2,
                              double nu2,
                              double alpha,
                              double delta_max,
                              uintptr_t steps,
                              double *a,
                              double *b,
                              double *r2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROUGH_CONTACT_H */
