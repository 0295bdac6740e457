use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use polyvem_ffi::*;

fn last_error() -> String {
    let p = pv_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn space(p1: u32, p2: u32, r: u32) -> PvSpace {
    PvSpace { p1, p2, r, enhanced: false }
}

#[test]
fn generate_solve_free() {
    let family = CString::new("square").unwrap();
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { pv_mesh_generate(family.as_ptr(), 3, 0, &mut mesh) }, PvStatus::Ok);
    assert!(pv_last_error_message().is_null());
    assert_eq!(unsafe { pv_mesh_num_cells(mesh) }, 64);
    assert_eq!(unsafe { pv_mesh_num_vertices(mesh) }, 81);

    let sol = CString::new("sin").unwrap();
    let mut report = PvReport::default();
    let status = unsafe { pv_solve_manufactured(mesh, space(1, 1, 1), sol.as_ptr(), &mut report) };
    assert_eq!(status, PvStatus::Ok);
    // one DOF per vertex, boundary included
    assert_eq!(report.n_dof, 81);
    assert!(report.energy_err > 0.0 && report.energy_err < report.energy_norm);
    assert!(report.relative_residual <= 1e-8);
    unsafe { pv_mesh_free(mesh) };
}

#[test]
fn patch_test_through_arrays() {
    // two quads and a triangle covering [0,2]x[0,1]
    let xy = [0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 1.0, 1.1, 1.0, 2.0, 1.0];
    let offsets = [0usize, 4, 7, 10];
    let indices = [0usize, 1, 4, 3, 1, 2, 5, 1, 5, 4];
    let mut mesh = ptr::null_mut();
    let status = unsafe { pv_mesh_from_arrays(xy.as_ptr(), 6, offsets.as_ptr(), indices.as_ptr(), 3, &mut mesh) };
    assert_eq!(status, PvStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { pv_mesh_num_cells(mesh) }, 3);
    let sol = CString::new("poly-patch").unwrap();
    let mut report = PvReport::default();
    let status = unsafe { pv_solve_manufactured(mesh, space(1, 1, 2), sol.as_ptr(), &mut report) };
    assert_eq!(status, PvStatus::Ok, "{}", last_error());
    assert!(report.energy_err <= 1e-7 * report.energy_norm);
    unsafe { pv_mesh_free(mesh) };
}

#[test]
fn error_codes_and_messages() {
    let mut mesh = ptr::null_mut();
    let bad = CString::new("triangles").unwrap();
    assert_eq!(unsafe { pv_mesh_generate(bad.as_ptr(), 1, 0, &mut mesh) }, PvStatus::InvalidInput);
    assert!(mesh.is_null());
    assert!(last_error().contains("triangles"));

    assert_eq!(unsafe { pv_mesh_generate(ptr::null(), 1, 0, &mut mesh) }, PvStatus::NullPointer);
    let family = CString::new("hex").unwrap();
    assert_eq!(unsafe { pv_mesh_generate(family.as_ptr(), 1, 0, ptr::null_mut()) }, PvStatus::NullPointer);

    let mut n = 0usize;
    assert_eq!(unsafe { pv_local_dim(space(2, 3, 2), 4, &mut n) }, PvStatus::InvalidInput);
    assert!(!last_error().is_empty());

    // clockwise cell
    let xy = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
    let offsets = [0usize, 3];
    let indices = [0usize, 2, 1];
    let status = unsafe { pv_mesh_from_arrays(xy.as_ptr(), 3, offsets.as_ptr(), indices.as_ptr(), 1, &mut mesh) };
    assert_eq!(status, PvStatus::InvalidInput);
    assert!(mesh.is_null());

    let sol = CString::new("sin").unwrap();
    let mut report = PvReport::default();
    assert_eq!(
        unsafe { pv_solve_manufactured(ptr::null(), space(1, 1, 1), sol.as_ptr(), &mut report) },
        PvStatus::NullPointer
    );
    unsafe { pv_mesh_free(ptr::null_mut()) };
}

#[test]
fn local_dim_matches_known_counts() {
    let mut n = 0usize;
    assert_eq!(unsafe { pv_local_dim(space(2, 2, 4), 4, &mut n) }, PvStatus::Ok);
    assert_eq!(n, 25);
    assert_eq!(unsafe { pv_local_dim(space(1, 1, 1), 7, &mut n) }, PvStatus::Ok);
    assert_eq!(n, 7);
    assert_eq!(unsafe { pv_local_dim(space(2, 2, 3), 5, &mut n) }, PvStatus::Ok);
    assert_eq!(n, 20);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(pv_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// The generated header must be valid C and C++.
#[test]
fn header_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("polyvem.h");
    assert!(header.exists(), "header not generated");
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = std::process::Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(_) => eprintln!("{compiler} not available, skipping"),
        }
    }
}
