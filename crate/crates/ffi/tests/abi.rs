use std::ffi::{CStr, CString};
use std::ptr;

use sphere_jacobi_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sj_last_error()) }.to_string_lossy().into_owned()
}

struct Handle(*mut SjSurface);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { sj_surface_free(self.0) }
    }
}

fn clifford(k: u32, l: u32) -> Handle {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sj_surface_clifford(k, l, &mut out) }, SjStatus::Ok);
    assert!(!out.is_null());
    Handle(out)
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sj_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn analytic_and_numeric_eigenvalues() {
    let h = clifford(1, 1);
    let mut dim = 0usize;
    assert_eq!(unsafe { sj_surface_dim(h.0, &mut dim) }, SjStatus::Ok);
    assert_eq!(dim, 2);
    let mut exact = 0.0;
    let status = unsafe { sj_first_eigenvalue(h.0, SjBackend::Analytic as u32, 0, &mut exact) };
    assert_eq!(status, SjStatus::Ok);
    assert_eq!(exact, -4.0);
    let mut numeric = 0.0;
    let status = unsafe { sj_first_eigenvalue(h.0, SjBackend::Numeric as u32, 24, &mut numeric) };
    assert_eq!(status, SjStatus::Ok, "{}", last_error());
    assert!((numeric + 4.0).abs() < 1e-8);

    let mut eq = ptr::null_mut();
    assert_eq!(unsafe { sj_surface_equator(3, &mut eq) }, SjStatus::Ok);
    let eq = Handle(eq);
    let mut lambda = 0.0;
    assert_eq!(
        unsafe { sj_first_eigenvalue(eq.0, SjBackend::Analytic as u32, 0, &mut lambda) },
        SjStatus::Ok
    );
    assert_eq!(lambda, -3.0);
}

#[test]
fn area_and_shape() {
    let h = clifford(1, 1);
    let mut area = 0.0;
    assert_eq!(unsafe { sj_surface_area(h.0, 16, &mut area) }, SjStatus::Ok);
    assert!((area - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-9);
    let u = [0.3, 1.2];
    let mut shape = SjShape::default();
    assert_eq!(
        unsafe { sj_surface_shape_at(h.0, 0, u.as_ptr(), 2, &mut shape) },
        SjStatus::Ok
    );
    assert!(shape.mean_curvature.abs() < 1e-6);
    assert!((shape.norm_a2 - 2.0).abs() < 1e-6);
}

#[test]
fn errors_are_reported_not_raised() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sj_surface_clifford(0, 2, &mut out) }, SjStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { sj_surface_equator(2, ptr::null_mut()) }, SjStatus::NullPointer);
    let mut x = 0.0;
    assert_eq!(
        unsafe { sj_surface_area(ptr::null(), 8, &mut x) },
        SjStatus::NullPointer
    );
    let h = clifford(1, 1);
    assert_eq!(
        unsafe { sj_first_eigenvalue(h.0, 7, 16, &mut x) },
        SjStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { sj_first_eigenvalue(h.0, SjBackend::Numeric as u32, 4, &mut x) },
        SjStatus::InvalidArgument
    );
    let u = [0.1];
    let mut shape = SjShape::default();
    assert_eq!(
        unsafe { sj_surface_shape_at(h.0, 0, u.as_ptr(), 1, &mut shape) },
        SjStatus::InvalidArgument
    );
    let missing = CString::new("/nonexistent/chart.txt").unwrap();
    assert_eq!(unsafe { sj_surface_load(missing.as_ptr(), &mut out) }, SjStatus::Io);
    assert!(last_error().contains("chart.txt"));
    assert_eq!(unsafe { sj_cone_verdict(3, &mut SjConeVerdict::default()) }, SjStatus::Ok);
    assert!(last_error().is_empty());
    unsafe { sj_surface_free(ptr::null_mut()) };
}

#[test]
fn cone_and_ssy_constants() {
    let mut v = SjConeVerdict::default();
    for n in 1..=10 {
        assert_eq!(unsafe { sj_cone_verdict(n, &mut v) }, SjStatus::Ok);
        assert_eq!(v.stable_possible, n >= 6);
        assert_eq!(v.margin, ((n * n) as f64 - 6.0 * n as f64 + 1.0) / 4.0);
    }
    let mut c = SjSsyConstants::default();
    assert_eq!(unsafe { sj_ssy_constants(2, 0.25, 2.0, &mut c) }, SjStatus::Ok);
    assert!((c.coefficient - 1.25 / 1.75).abs() < 1e-15);
    assert!(c.admissible);
    assert_eq!(unsafe { sj_ssy_constants(2, 0.75, 2.0, &mut c) }, SjStatus::Ok);
    assert!(!c.admissible);
    assert_eq!(unsafe { sj_ssy_constants(2, -1.0, 2.0, &mut c) }, SjStatus::InvalidArgument);
}

#[test]
fn loads_chart_files() {
    let h = clifford(1, 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("torus.txt");
    let surface = sphere_jacobi::clifford_hypersurface(sphere_jacobi::CliffordSpec::new(1, 1).unwrap());
    let mut file = std::fs::File::create(&path).unwrap();
    sphere_jacobi::geometry::write_chart_file(&surface, 48, &mut file).unwrap();
    drop(file);
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sj_surface_load(c_path.as_ptr(), &mut out) }, SjStatus::Ok, "{}", last_error());
    let loaded = Handle(out);
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        sj_surface_area(h.0, 16, &mut a);
        sj_surface_area(loaded.0, 16, &mut b);
    }
    assert!((a - b).abs() / a < 1e-3, "{a} vs {b}");
}
