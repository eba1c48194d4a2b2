//! C interface to the rough-contact micro solver.
//!
//! Every object crossing the boundary is an opaque handle created and
//! destroyed here; every fallible call returns an [`RcStatus`] and leaves a
//! human-readable message retrievable through [`rc_last_error`] on failure.
//! The generated header lives in `include/rough_contact.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use rough_contact::bem::{
    corrected_pressure, flat_punch_alpha, MicroSolver, MAX_CORRECTION_ITERATIONS, TOL_CORRECTION,
};
use rough_contact::coupling::build_offline_curve;
use rough_contact::surface::{
    generate_rmd, read_surface_xyz, surface_stats, write_surface_xyz, RoughSurface,
};
use rough_contact::{composite_moduli, CompositeElastic, Error};

/// Result code returned by every fallible function in this interface.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RcStatus {
    /// The call succeeded.
    RcOk = 0,
    /// A required pointer argument was null.
    RcNullArgument = 1,
    /// A scalar argument or the problem geometry was rejected.
    RcInvalidArgument = 2,
    /// An iterative solver failed to converge.
    RcSolverFailure = 3,
    /// Reading or writing a file failed.
    RcIoFailure = 4,
    /// A string argument was not valid UTF-8.
    RcInvalidUtf8 = 5,
    /// The library panicked; treat the handle as poisoned.
    RcPanic = 6,
}

/// Point-contact summary filled by the solve calls.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RcContact {
    /// Total normal force carried by the patch.
    pub total_force: f64,
    /// Force divided by the nominal patch area.
    pub mean_pressure: f64,
    /// Fraction of cells in contact.
    pub area_fraction: f64,
    /// Half-space approach actually imposed. Equals the requested
    /// displacement for a raw solve; includes the elastic correction for a
    /// corrected solve.
    pub displacement: f64,
    /// Inner iterations: active-set/CG steps for a raw solve, fixed-point
    /// sweeps for a corrected solve.
    pub iterations: usize,
}

/// Rough topography handle.
pub struct RcSurface {
    inner: Arc<RoughSurface>,
}

/// Micro contact solver bound to one surface and one elastic pairing.
///
/// The handle keeps a warm-started active set, so repeated solves at nearby
/// displacements are cheap. It is not safe to share one handle across
/// threads without external locking.
pub struct RcSolver {
    solver: MicroSolver,
    alpha: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

fn fail(status: RcStatus, message: impl Into<Vec<u8>>) -> RcStatus {
    let text = CString::new(message).unwrap_or_else(|_| CString::new("invalid message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
    status
}

fn fail_with(e: Error) -> RcStatus {
    let status = match e {
        Error::Parameter(_) | Error::Shape(_) | Error::Mesh(_) | Error::Fit(_) => {
            RcStatus::RcInvalidArgument
        }
        Error::DensePathRefused { .. } => RcStatus::RcInvalidArgument,
        Error::Solver { .. } | Error::Correction { .. } | Error::Nonconvergence { .. } => {
            RcStatus::RcSolverFailure
        }
        Error::Format { .. } | Error::Io(_) => RcStatus::RcIoFailure,
    };
    fail(status, e.to_string())
}

/// Runs `body` with panics converted into [`RcStatus::RcPanic`].
fn guarded(body: impl FnOnce() -> RcStatus) -> RcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(RcStatus::RcPanic, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be non-null (checked by callers through the macro below).
unsafe fn path_from(ptr: *const c_char) -> Result<&'static Path, RcStatus> {
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(fail(RcStatus::RcInvalidUtf8, "path is not valid UTF-8")),
    }
}

macro_rules! require {
    ($ptr:expr) => {
        if $ptr.is_null() {
            return fail(RcStatus::RcNullArgument, concat!(stringify!($ptr), " is null"));
        }
    };
}

/// Returns the message of the most recent failure on this thread, or null
/// when every call so far succeeded. The pointer stays valid until the next
/// failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn rc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Combines two linear-elastic half-spaces into the equivalent single
/// half-space moduli. Outputs may individually be null when not wanted.
///
/// # Safety
/// Non-null output pointers must refer to writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_composite_moduli(
    e1: f64,
    nu1: f64,
    e2: f64,
    nu2: f64,
    e: *mut f64,
    g: *mut f64,
    nu: *mut f64,
) -> RcStatus {
    clear_error();
    guarded(|| match composite_moduli(e1, nu1, e2, nu2) {
        Ok(c) => {
            if !e.is_null() {
                *e = c.e;
            }
            if !g.is_null() {
                *g = c.g;
            }
            if !nu.is_null() {
                *nu = c.nu;
            }
            RcStatus::RcOk
        }
        Err(err) => fail_with(err),
    })
}

/// Flat-punch pressure factor for a patch at refinement level `n`.
///
/// Levels up to 6 use the dense path; beyond that the matrix-free path is
/// taken automatically. The value depends only on `n`, so compute it once
/// and reuse it across surfaces.
///
/// # Safety
/// `alpha` must be a writable double.
#[no_mangle]
pub unsafe extern "C" fn rc_flat_punch_alpha(n: u32, alpha: *mut f64) -> RcStatus {
    clear_error();
    require!(alpha);
    guarded(|| match flat_punch_alpha(n) {
        Ok(a) => {
            *alpha = a;
            RcStatus::RcOk
        }
        Err(e) => fail_with(e),
    })
}

/// Generates a self-affine topography by random midpoint displacement on a
/// `(2^n + 1)` square grid. `lateral_size` is the patch edge length; pass a
/// non-positive value for the default. Heights are shifted to a zero minimum
/// and scaled so the tallest summit is `max_height`.
///
/// # Safety
/// `out` must be a writable pointer slot; the handle written into it must be
/// released with [`rc_surface_free`].
#[no_mangle]
pub unsafe extern "C" fn rc_surface_generate(
    n: u32,
    hurst: f64,
    seed: u64,
    max_height: f64,
    lateral_size: f64,
    out: *mut *mut RcSurface,
) -> RcStatus {
    clear_error();
    require!(out);
    guarded(|| match generate_rmd(n, hurst, seed, max_height) {
        Ok(mut s) => {
            if lateral_size > 0.0 {
                s = s.with_lateral_size(lateral_size);
            }
            *out = Box::into_raw(Box::new(RcSurface { inner: Arc::new(s) }));
            RcStatus::RcOk
        }
        Err(e) => fail_with(e),
    })
}

/// Loads a surface from a whitespace-separated `x y z` file written by
/// [`rc_surface_write_xyz`] or a compatible tool.
///
/// # Safety
/// `path` must be a null-terminated string, `out` a writable pointer slot;
/// release the handle with [`rc_surface_free`].
#[no_mangle]
pub unsafe extern "C" fn rc_surface_read_xyz(
    path: *const c_char,
    out: *mut *mut RcSurface,
) -> RcStatus {
    clear_error();
    require!(path);
    require!(out);
    guarded(|| {
        let path = match path_from(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match read_surface_xyz(path) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(RcSurface { inner: Arc::new(s) }));
                RcStatus::RcOk
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Writes the surface as `x y z` rows, one grid point per line.
///
/// # Safety
/// `surface` must be a live handle and `path` a null-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rc_surface_write_xyz(
    surface: *const RcSurface,
    path: *const c_char,
) -> RcStatus {
    clear_error();
    require!(surface);
    require!(path);
    guarded(|| {
        let path = match path_from(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match write_surface_xyz(&(*surface).inner, path) {
            Ok(()) => RcStatus::RcOk,
            Err(e) => fail_with(e),
        }
    })
}

/// Number of grid points along one edge.
///
/// # Safety
/// `surface` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_surface_grid(surface: *const RcSurface) -> usize {
    if surface.is_null() {
        return 0;
    }
    (*surface).inner.grid()
}

/// Mean, root-mean-square, and maximum height of the topography.
///
/// # Safety
/// `surface` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_surface_stats(
    surface: *const RcSurface,
    mean: *mut f64,
    rms: *mut f64,
    max: *mut f64,
) -> RcStatus {
    clear_error();
    require!(surface);
    guarded(|| {
        let stats = surface_stats(&(*surface).inner);
        if !mean.is_null() {
            *mean = stats.mean;
        }
        if !rms.is_null() {
            *rms = stats.rms;
        }
        if !max.is_null() {
            *max = stats.max;
        }
        RcStatus::RcOk
    })
}

/// Copies the heights row by row into `buffer`, which holds `len` doubles.
/// `len` must be at least grid squared.
///
/// # Safety
/// `surface` must be a live handle and `buffer` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_surface_heights(
    surface: *const RcSurface,
    buffer: *mut f64,
    len: usize,
) -> RcStatus {
    clear_error();
    require!(surface);
    require!(buffer);
    guarded(|| {
        let heights = (*surface).inner.heights();
        if len < heights.len() {
            return fail(
                RcStatus::RcInvalidArgument,
                format!("buffer holds {len} values, surface needs {}", heights.len()),
            );
        }
        std::ptr::copy_nonoverlapping(heights.as_ptr(), buffer, heights.len());
        RcStatus::RcOk
    })
}

/// Releases a surface handle. Null is ignored.
///
/// # Safety
/// `surface` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rc_surface_free(surface: *mut RcSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// Creates a contact solver for `surface` pressed against a half-space with
/// the composite of the two given elastic pairings. `alpha` is the
/// flat-punch factor from [`rc_flat_punch_alpha`] for the surface's
/// refinement level.
///
/// # Safety
/// `surface` must be a live handle and `out` a writable pointer slot;
/// release the handle with [`rc_solver_free`]. The surface may be freed
/// independently once the solver exists.
#[no_mangle]
pub unsafe extern "C" fn rc_solver_new(
    surface: *const RcSurface,
    e1: f64,
    nu1: f64,
    e2: f64,
    nu2: f64,
    alpha: f64,
    out: *mut *mut RcSolver,
) -> RcStatus {
    clear_error();
    require!(surface);
    require!(out);
    guarded(|| {
        if !(alpha.is_finite() && alpha > 0.0) {
            return fail(RcStatus::RcInvalidArgument, "alpha must be positive");
        }
        let elastic = match composite_moduli(e1, nu1, e2, nu2) {
            Ok(c) => c,
            Err(e) => return fail_with(e),
        };
        match MicroSolver::new(Arc::clone(&(*surface).inner), &elastic) {
            Ok(solver) => {
                *out = Box::into_raw(Box::new(RcSolver { solver, alpha }));
                RcStatus::RcOk
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Solves the patch at the imposed half-space approach `displacement`
/// without the finite-thickness correction.
///
/// # Safety
/// `solver` must be a live handle and `contact` writable.
#[no_mangle]
pub unsafe extern "C" fn rc_solver_solve(
    solver: *mut RcSolver,
    displacement: f64,
    contact: *mut RcContact,
) -> RcStatus {
    clear_error();
    require!(solver);
    require!(contact);
    guarded(|| match (*solver).solver.solve(displacement) {
        Ok(sol) => {
            *contact = RcContact {
                total_force: sol.total_force,
                mean_pressure: sol.mean_pressure,
                area_fraction: sol.area_fraction,
                displacement,
                iterations: sol.iterations,
            };
            RcStatus::RcOk
        }
        Err(e) => fail_with(e),
    })
}

/// Solves the patch at the macroscopic normal gap `g_n`, iterating the
/// mean-field elastic correction so the reported pressure is consistent
/// with the finite patch depth. Gaps at or below zero return a zero-contact
/// result.
///
/// # Safety
/// `solver` must be a live handle and `contact` writable.
#[no_mangle]
pub unsafe extern "C" fn rc_solver_solve_corrected(
    solver: *mut RcSolver,
    g_n: f64,
    contact: *mut RcContact,
) -> RcStatus {
    clear_error();
    require!(solver);
    require!(contact);
    guarded(|| {
        let handle = &mut *solver;
        match corrected_pressure(
            &mut handle.solver,
            handle.alpha,
            g_n,
            TOL_CORRECTION,
            MAX_CORRECTION_ITERATIONS,
        ) {
            Ok(res) => {
                *contact = RcContact {
                    total_force: res.solution.total_force,
                    mean_pressure: res.pressure,
                    area_fraction: res.solution.area_fraction,
                    displacement: res.displacement,
                    iterations: res.iterations,
                };
                RcStatus::RcOk
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Discards the solver's warm-started active set, forcing the next solve to
/// start from scratch. Useful before jumping to a much smaller displacement.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_solver_reset(solver: *mut RcSolver) -> RcStatus {
    clear_error();
    require!(solver);
    (*solver).solver.reset_warm_start();
    RcStatus::RcOk
}

/// Releases a solver handle. Null is ignored.
///
/// # Safety
/// `solver` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rc_solver_free(solver: *mut RcSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Sweeps the corrected micro response over `steps` displacements up to
/// `delta_max` and fits `p = a * g^b` to the resulting gap curve. Outputs
/// may individually be null when not wanted.
///
/// # Safety
/// `surface` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_offline_power_law(
    surface: *const RcSurface,
    e1: f64,
    nu1: f64,
    e2: f64,
    nu2: f64,
    alpha: f64,
    delta_max: f64,
    steps: usize,
    a: *mut f64,
    b: *mut f64,
    r2: *mut f64,
) -> RcStatus {
    clear_error();
    require!(surface);
    guarded(|| {
        let elastic: CompositeElastic = match composite_moduli(e1, nu1, e2, nu2) {
            Ok(c) => c,
            Err(e) => return fail_with(e),
        };
        let curve = match build_offline_curve(
            Arc::clone(&(*surface).inner),
            &elastic,
            alpha,
            delta_max,
            steps,
        ) {
            Ok(c) => c,
            Err(e) => return fail_with(e),
        };
        if !a.is_null() {
            *a = curve.fit.a;
        }
        if !b.is_null() {
            *b = curve.fit.b;
        }
        if !r2.is_null() {
            *r2 = curve.fit.r2;
        }
        RcStatus::RcOk
    })
}
