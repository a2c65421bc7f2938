//! C interface to `sphere_jacobi`.
//!
//! Surfaces are opaque `SjSurface` handles created by the constructors and
//! released with [`sj_surface_free`]. Every function returns an
//! [`SjStatus`]; on failure [`sj_last_error`] describes the error for the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sphere_jacobi::estimates::{ssy_constants, ConeVerdict};
use sphere_jacobi::geometry::{
    clifford_hypersurface, equator, load_chart_file, CliffordSpec, GeometryError,
    ParametrizedHypersurface,
};
use sphere_jacobi::operators::analytic_laplace_spectrum;
use sphere_jacobi::{assemble_jacobi, first_stability_eigenvalue, EigenSource};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Geometry = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SjBackend {
    /// Closed-form spectrum of the equator and Clifford families.
    Analytic = 0,
    /// Finite-volume discretization at the given resolution.
    Numeric = 1,
}

/// Opaque hypersurface handle.
pub struct SjSurface {
    inner: ParametrizedHypersurface,
}

/// Scalar shape data at one chart point.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SjShape {
    pub mean_curvature: f64,
    pub norm_a2: f64,
    pub sqrt_det_metric: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SjConeVerdict {
    pub n: usize,
    pub link_bound: f64,
    pub threshold: f64,
    pub margin: f64,
    pub stable_possible: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SjSsyConstants {
    pub coefficient: f64,
    pub remainder: f64,
    pub admissible: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(message).expect("nul bytes removed"));
}

struct Failure(SjStatus, String);

impl Failure {
    fn new(status: SjStatus, message: impl ToString) -> Self {
        Failure(status, message.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SjStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            SjStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            SjStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(SjStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn surface_ref<'a>(s: *const SjSurface) -> Result<&'a ParametrizedHypersurface, Failure> {
    non_null(s, "surface")?;
    Ok(&(*s).inner)
}

unsafe fn emit(out: *mut *mut SjSurface, surface: ParametrizedHypersurface) {
    *out = Box::into_raw(Box::new(SjSurface { inner: surface }));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sj_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// The totally geodesic equator `S^n ⊂ S^{n+1}`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sj_surface_equator(n: u32, out: *mut *mut SjSurface) -> SjStatus {
    guard(|| {
        non_null(out, "out")?;
        if n == 0 {
            return Err(Failure::new(SjStatus::InvalidArgument, "n must be at least 1"));
        }
        emit(out, equator(n));
        Ok(())
    })
}

/// The Clifford hypersurface `S^k(√(k/n)) × S^l(√(l/n))`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sj_surface_clifford(k: u32, l: u32, out: *mut *mut SjSurface) -> SjStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = CliffordSpec::new(k, l).map_err(|e| Failure::new(SjStatus::InvalidArgument, e))?;
        emit(out, clifford_hypersurface(spec));
        Ok(())
    })
}

/// Loads a surface from a chart file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sj_surface_load(path: *const c_char, out: *mut *mut SjSurface) -> SjStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|e| Failure::new(SjStatus::InvalidArgument, e))?;
        let surface = load_chart_file(path).map_err(|e| {
            let status = match e {
                GeometryError::Io(_) => SjStatus::Io,
                _ => SjStatus::Geometry,
            };
            Failure::new(status, format!("{path}: {e}"))
        })?;
        emit(out, surface);
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `surface` must come from a constructor and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sj_surface_free(surface: *mut SjSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// # Safety
/// `surface` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sj_surface_dim(surface: *const SjSurface, out: *mut usize) -> SjStatus {
    guard(|| {
        let s = surface_ref(surface)?;
        non_null(out, "out")?;
        *out = s.dim();
        Ok(())
    })
}

/// Area by tensor Gauss-Legendre quadrature with `nodes_per_axis` nodes.
///
/// # Safety
/// `surface` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sj_surface_area(
    surface: *const SjSurface,
    nodes_per_axis: usize,
    out: *mut f64,
) -> SjStatus {
    guard(|| {
        let s = surface_ref(surface)?;
        non_null(out, "out")?;
        if nodes_per_axis == 0 {
            return Err(Failure::new(SjStatus::InvalidArgument, "nodes_per_axis must be positive"));
        }
        *out = s.area(nodes_per_axis).map_err(|e| Failure::new(SjStatus::Geometry, e))?;
        Ok(())
    })
}

/// Shape data at parameter `u` (length `len`, equal to the dimension) of
/// chart `chart`.
///
/// # Safety
/// `surface` must be a live handle, `u` valid for `len` reads and `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sj_surface_shape_at(
    surface: *const SjSurface,
    chart: usize,
    u: *const f64,
    len: usize,
    out: *mut SjShape,
) -> SjStatus {
    guard(|| {
        let s = surface_ref(surface)?;
        non_null(u, "u")?;
        non_null(out, "out")?;
        if len != s.dim() {
            return Err(Failure::new(
                SjStatus::InvalidArgument,
                format!("expected {} parameters, got {len}", s.dim()),
            ));
        }
        let u = std::slice::from_raw_parts(u, len);
        let shape = s.shape_at(chart, u).map_err(|e| Failure::new(SjStatus::Geometry, e))?;
        *out = SjShape {
            mean_curvature: shape.mean_curvature,
            norm_a2: shape.norm_a2,
            sqrt_det_metric: shape.sqrt_det_metric,
        };
        Ok(())
    })
}

/// First eigenvalue of the stability operator. `backend` is an
/// `SjBackend` value; `resolution` is ignored by the analytic backend.
///
/// # Safety
/// `surface` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sj_first_eigenvalue(
    surface: *const SjSurface,
    backend: u32,
    resolution: usize,
    out: *mut f64,
) -> SjStatus {
    guard(|| {
        let s = surface_ref(surface)?;
        non_null(out, "out")?;
        let backend = match backend {
            0 => SjBackend::Analytic,
            1 => SjBackend::Numeric,
            other => {
                return Err(Failure::new(SjStatus::InvalidArgument, format!("unknown backend {other}")))
            }
        };
        let result = match backend {
            SjBackend::Analytic => {
                let spectrum = analytic_laplace_spectrum(s.family())
                    .map_err(|e| Failure::new(SjStatus::InvalidArgument, e))?;
                first_stability_eigenvalue(EigenSource::Analytic(&spectrum))
            }
            SjBackend::Numeric => {
                let op = assemble_jacobi(s, resolution).map_err(|e| {
                    Failure::new(SjStatus::InvalidArgument, e)
                })?;
                first_stability_eigenvalue(EigenSource::Numeric(&op))
            }
        }
        .map_err(|e| Failure::new(SjStatus::Numerical, e))?;
        *out = result.lambda1;
        Ok(())
    })
}

/// Stability verdict for minimal cones over `n`-dimensional links.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sj_cone_verdict(n: usize, out: *mut SjConeVerdict) -> SjStatus {
    guard(|| {
        non_null(out, "out")?;
        if n == 0 {
            return Err(Failure::new(SjStatus::InvalidArgument, "n must be at least 1"));
        }
        let v = ConeVerdict::new(n);
        *out = SjConeVerdict {
            n: v.n,
            link_bound: v.link_bound,
            threshold: v.threshold,
            margin: v.margin,
            stable_possible: v.stable_possible,
        };
        Ok(())
    })
}

/// Absorption constants `(1+a)/(1+2/n−a)` and `1 + 1/a`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sj_ssy_constants(
    n: usize,
    a: f64,
    alpha: f64,
    out: *mut SjSsyConstants,
) -> SjStatus {
    guard(|| {
        non_null(out, "out")?;
        let c = ssy_constants(n, a, alpha).map_err(|e| Failure::new(SjStatus::InvalidArgument, e))?;
        *out = SjSsyConstants {
            coefficient: c.coefficient,
            remainder: c.remainder,
            admissible: c.admissible,
        };
        Ok(())
    })
}
