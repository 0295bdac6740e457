//! C interface to `polyvem`.
//!
//! Meshes are opaque handles created by `pv_mesh_*` constructors and
//! released with `pv_mesh_free`. Every fallible call returns a `PvStatus`;
//! on failure `pv_last_error_message` describes the most recent error on
//! the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polyvem::mesh::{generate, Mesh, MeshFamily};
use polyvem::solver::{run_manufactured, ManufacturedSolution, SolutionKind};
use polyvem::space::{local_dim, SpaceParams};
use polyvem::VemError;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PvStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad parameters, mesh or names.
    InvalidInput = 2,
    /// Assembly, solve or a residual check failed.
    Numerical = 3,
    /// An internal panic was caught.
    Internal = 4,
}

/// Opaque polygonal mesh.
pub struct PvMesh {
    mesh: Mesh,
}

/// Polynomial regularity and degree of the discrete space.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PvSpace {
    pub p1: u32,
    pub p2: u32,
    pub r: u32,
    /// Request the enhanced load even when the cell moments suffice. Spaces
    /// whose degree is too low for cell moments use it regardless.
    pub enhanced: bool,
}

/// Errors of one manufactured-solution run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PvReport {
    pub h: f64,
    pub n_dof: usize,
    pub energy_err: f64,
    pub h_p1_seminorm_err: f64,
    pub l2_err: f64,
    pub energy_norm: f64,
    pub relative_residual: f64,
    pub assemble_s: f64,
    pub solve_s: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PvStatus, message: impl Into<String>) -> PvStatus {
    set_error(message.into());
    status
}

fn from_vem(e: VemError) -> PvStatus {
    let status = if e.is_config() { PvStatus::InvalidInput } else { PvStatus::Numerical };
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into `PvStatus::Internal`.
fn guard(f: impl FnOnce() -> PvStatus) -> PvStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(PvStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, PvStatus> {
    if s.is_null() {
        return Err(fail(PvStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(PvStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

fn space_params(space: PvSpace) -> Result<SpaceParams, PvStatus> {
    SpaceParams::new(space.p1 as usize, space.p2 as usize, space.r as usize)
        .and_then(|p| if space.enhanced { p.with_enhanced(true) } else { Ok(p) })
        .map_err(from_vem)
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next `pv_*` call on the same thread.
#[no_mangle]
pub extern "C" fn pv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn pv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Generates a mesh of the unit square. `family` is one of `square`,
/// `perturbed` or `hex` (or the long names).
///
/// # Safety
/// `family` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pv_mesh_generate(family: *const c_char, level: u32, seed: u64, out: *mut *mut PvMesh) -> PvStatus {
    guard(|| {
        if out.is_null() {
            return fail(PvStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let name = match read_str(family, "family") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let family: MeshFamily = match name.parse() {
            Ok(f) => f,
            Err(e) => return from_vem(e),
        };
        match generate(family, level, seed) {
            Ok(mesh) => {
                *out = Box::into_raw(Box::new(PvMesh { mesh }));
                PvStatus::Ok
            }
            Err(e) => from_vem(e),
        }
    })
}

/// Builds a mesh from vertex coordinates `xy` (interleaved, length
/// `2 * n_vertices`) and counterclockwise cells in compressed form: the
/// vertices of cell `c` are `indices[offsets[c]..offsets[c + 1]]`.
///
/// # Safety
/// The arrays must have the stated lengths and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pv_mesh_from_arrays(
    xy: *const f64,
    n_vertices: usize,
    offsets: *const usize,
    indices: *const usize,
    n_cells: usize,
    out: *mut *mut PvMesh,
) -> PvStatus {
    guard(|| {
        if out.is_null() || xy.is_null() || offsets.is_null() || indices.is_null() {
            return fail(PvStatus::NullPointer, "null array or output pointer");
        }
        *out = ptr::null_mut();
        let coords = std::slice::from_raw_parts(xy, 2 * n_vertices);
        let offsets = std::slice::from_raw_parts(offsets, n_cells + 1);
        if offsets.windows(2).any(|w| w[1] < w[0]) {
            return fail(PvStatus::InvalidInput, "offsets must be nondecreasing");
        }
        let indices = std::slice::from_raw_parts(indices, offsets[n_cells]);
        let vertices = coords.chunks_exact(2).map(|p| [p[0], p[1]]).collect();
        let cells = offsets.windows(2).map(|w| indices[w[0]..w[1]].to_vec()).collect();
        match Mesh::new(vertices, cells) {
            Ok(mesh) => {
                *out = Box::into_raw(Box::new(PvMesh { mesh }));
                PvStatus::Ok
            }
            Err(e) => from_vem(e),
        }
    })
}

/// Releases a mesh. Null is ignored.
///
/// # Safety
/// `mesh` must come from a `pv_mesh_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pv_mesh_free(mesh: *mut PvMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Number of cells, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pv_mesh_num_cells(mesh: *const PvMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.num_cells())
}

/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pv_mesh_num_vertices(mesh: *const PvMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.num_vertices())
}

/// Local DOF count of a cell with `n_vertices` vertices.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pv_local_dim(space: PvSpace, n_vertices: usize, out: *mut usize) -> PvStatus {
    guard(|| {
        if out.is_null() {
            return fail(PvStatus::NullPointer, "out is null");
        }
        if n_vertices < 3 {
            return fail(PvStatus::InvalidInput, "a polygon needs at least 3 vertices");
        }
        match space_params(space) {
            Ok(p) => {
                *out = local_dim(&p, n_vertices);
                PvStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Solves the clamped problem with a manufactured solution (`sin`,
/// `bubble` or `poly-patch`) and reports the errors.
///
/// # Safety
/// `mesh` must be a live handle, `solution` a nul-terminated string and
/// `report` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pv_solve_manufactured(
    mesh: *const PvMesh,
    space: PvSpace,
    solution: *const c_char,
    report: *mut PvReport,
) -> PvStatus {
    guard(|| {
        let Some(mesh) = mesh.as_ref() else {
            return fail(PvStatus::NullPointer, "mesh is null");
        };
        if report.is_null() {
            return fail(PvStatus::NullPointer, "report is null");
        }
        let kind: SolutionKind = match read_str(solution, "solution").map(str::parse) {
            Ok(Ok(k)) => k,
            Ok(Err(e)) => return from_vem(e),
            Err(s) => return s,
        };
        let params = match space_params(space) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let u = ManufacturedSolution::new(kind, params.p1, params.r);
        match run_manufactured(&mesh.mesh, &params, &u) {
            Ok((r, _)) => {
                *report = PvReport {
                    h: r.h,
                    n_dof: r.n_dof,
                    energy_err: r.energy_err,
                    h_p1_seminorm_err: r.h_p1_seminorm_err,
                    l2_err: r.l2_err,
                    energy_norm: r.energy_norm,
                    relative_residual: r.relative_residual,
                    assemble_s: r.assemble_s,
                    solve_s: r.solve_s,
                };
                PvStatus::Ok
            }
            Err(e) => from_vem(e),
        }
    })
}
