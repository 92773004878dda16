//! C interface to `tfemdg`.
//!
//! Objects are opaque handles created by `tfemdg_*_new`/`generate`/`read`
//! style calls and released with the matching `*_free`. Every fallible call
//! returns a [`TfemdgStatus`]; on failure the message is available from
//! [`tfemdg_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tfemdg::analysis::{error_h1_broken, error_l2, manufactured};
use tfemdg::assembly::{assemble_stiffness, PenaltyConfig};
use tfemdg::dg_oracle::{assemble_dg_operator, DgPenalty, DgScheme, EdgeQuadrature};
use tfemdg::dgify::{circular_front_selector, dgify, DgifyOptions, DgifyResult, InterfaceSelector};
use tfemdg::mesh::{read_mesh, Mesh};
use tfemdg::pipeline::{solve_dgified, unit_mesh, PreconditionerKind};
use tfemdg::solve::SolveOptions;
use tfemdg::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfemdgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    MalformedMesh = 3,
    SolverFailure = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfemdgSelector {
    All = 0,
    None = 1,
    /// Interfaces whose centroid is inside the ball `center`, `radius`.
    Circle = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TfemdgDgifyOptions {
    pub selector: TfemdgSelector,
    /// Only the first `dim` entries are read.
    pub center: [f64; 3],
    pub radius: f64,
    pub boundary_layer: bool,
}

/// Conforming input mesh.
pub struct TfemdgMesh(Mesh);

/// Mesh with interface elements and its provenance.
pub struct TfemdgDgMesh(DgifyResult);

/// Nodal solution with its error norms.
pub struct TfemdgSolution {
    values: Vec<f64>,
    iterations: usize,
    residual: f64,
    err_l2: f64,
    err_h1: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TfemdgStatus {
    match e {
        Error::MalformedMesh(_) | Error::NonConforming { .. } | Error::Parse { .. } => TfemdgStatus::MalformedMesh,
        Error::NotSpd { .. } | Error::ZeroDiagonal(_) | Error::NotConverged(_) => TfemdgStatus::SolverFailure,
        Error::Io { .. } => TfemdgStatus::Io,
        _ => TfemdgStatus::InvalidArgument,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (TfemdgStatus, String)>) -> TfemdgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TfemdgStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TfemdgStatus::Panic
        }
    }
}

fn lib<T>(r: Result<T, Error>) -> Result<T, (TfemdgStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (TfemdgStatus, String) {
    (TfemdgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TfemdgStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (TfemdgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread; empty after success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn tfemdg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tfemdg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Structured unit-domain mesh: interval (dim 1), criss-cross square
/// (dim 2) or Kuhn-split cube (dim 3) with `n` cells per side.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_mesh_generate(dim: usize, n: usize, out: *mut *mut TfemdgMesh) -> TfemdgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mesh = lib(unit_mesh(dim, n))?;
        *out = Box::into_raw(Box::new(TfemdgMesh(mesh)));
        Ok(())
    })
}

/// Reads a mesh in the plain-text format written by the CLI.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_mesh_read(path: *const c_char, out: *mut *mut TfemdgMesh) -> TfemdgStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mesh = lib(read_mesh(path))?;
        *out = Box::into_raw(Box::new(TfemdgMesh(mesh)));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_mesh_free(mesh: *mut TfemdgMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be a live handle; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_mesh_counts(
    mesh: *const TfemdgMesh,
    vertices: *mut usize,
    elements: *mut usize,
) -> TfemdgStatus {
    guard(|| {
        let m = &mesh.as_ref().ok_or_else(|| null("mesh"))?.0;
        if !vertices.is_null() {
            *vertices = m.num_vertices();
        }
        if !elements.is_null() {
            *elements = m.num_elements();
        }
        Ok(())
    })
}

/// Inserts interface elements into `mesh`.
///
/// # Safety
/// `mesh` must be a live handle, `options` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_dgify(
    mesh: *const TfemdgMesh,
    options: *const TfemdgDgifyOptions,
    out: *mut *mut TfemdgDgMesh,
) -> TfemdgStatus {
    guard(|| {
        let m = &mesh.as_ref().ok_or_else(|| null("mesh"))?.0;
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let selector = match o.selector {
            TfemdgSelector::All => InterfaceSelector::All,
            TfemdgSelector::None => InterfaceSelector::None,
            TfemdgSelector::Circle => lib(circular_front_selector(&o.center[..m.dim()], o.radius))?,
        };
        let dg = lib(dgify(m, &DgifyOptions { selector, boundary_layer: o.boundary_layer }))?;
        *out = Box::into_raw(Box::new(TfemdgDgMesh(dg)));
        Ok(())
    })
}

/// # Safety
/// `dg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_dg_free(dg: *mut TfemdgDgMesh) {
    if !dg.is_null() {
        drop(Box::from_raw(dg));
    }
}

/// # Safety
/// `dg` must be a live handle; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_dg_counts(
    dg: *const TfemdgDgMesh,
    vertices: *mut usize,
    elements: *mut usize,
    interfaces: *mut usize,
) -> TfemdgStatus {
    guard(|| {
        let d = &dg.as_ref().ok_or_else(|| null("dg"))?.0;
        if !vertices.is_null() {
            *vertices = d.mesh.num_vertices();
        }
        if !elements.is_null() {
            *elements = d.mesh.num_elements();
        }
        if !interfaces.is_null() {
            *interfaces = d.interfaces.len();
        }
        Ok(())
    })
}

/// Solves the manufactured problem `case` with `j_min = h^exponent`, `h`
/// the grid spacing, to relative residual `tol`.
///
/// # Safety
/// `dg` must be a live handle, `case` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_solve(
    dg: *const TfemdgDgMesh,
    case_id: *const c_char,
    exponent: f64,
    tol: f64,
    out: *mut *mut TfemdgSolution,
) -> TfemdgStatus {
    guard(|| {
        let d = &dg.as_ref().ok_or_else(|| null("dg"))?.0;
        let case = str_arg(case_id, "case")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err((TfemdgStatus::InvalidArgument, format!("tol {tol} must lie in (0, 1)")));
        }
        let c = lib(manufactured(case))?;
        let penalty = lib(PenaltyConfig::from_exponent(d.mesh.grid_spacing(), exponent))?;
        let options = SolveOptions { tol, ..SolveOptions::default() };
        let (values, report) = lib(solve_dgified(d, &penalty, case, &options, PreconditionerKind::VertexGroups))?;
        let sol = TfemdgSolution {
            err_l2: error_l2(&d.mesh, &values, &|x| c.u(x)),
            err_h1: error_h1_broken(&d.mesh, &values, &|x| c.grad(x)),
            iterations: report.iterations,
            residual: report.relative_residual,
            values,
        };
        *out = Box::into_raw(Box::new(sol));
        Ok(())
    })
}

/// # Safety
/// `sol` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_solution_free(sol: *mut TfemdgSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Borrowed view of the nodal values, valid while `sol` lives.
///
/// # Safety
/// `sol` must be a live handle, `values` and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_solution_values(
    sol: *const TfemdgSolution,
    values: *mut *const f64,
    len: *mut usize,
) -> TfemdgStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("sol"))?;
        if values.is_null() || len.is_null() {
            return Err(null("output"));
        }
        *values = s.values.as_ptr();
        *len = s.values.len();
        Ok(())
    })
}

/// Error norms against the exact solution and solver statistics. Output
/// pointers may be null.
///
/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_solution_stats(
    sol: *const TfemdgSolution,
    err_l2: *mut f64,
    err_h1: *mut f64,
    iterations: *mut usize,
    residual: *mut f64,
) -> TfemdgStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("sol"))?;
        for (p, v) in [(err_l2, s.err_l2), (err_h1, s.err_h1), (residual, s.residual)] {
            if !p.is_null() {
                *p = v;
            }
        }
        if !iterations.is_null() {
            *iterations = s.iterations;
        }
        Ok(())
    })
}

/// Largest relative entrywise difference between the thresholded-FEM matrix
/// and the directly assembled vertex-quadrature DG matrix at `j_min`.
///
/// # Safety
/// `dg` must be a live handle and `diff` writable.
#[no_mangle]
pub unsafe extern "C" fn tfemdg_compare(dg: *const TfemdgDgMesh, j_min: f64, diff: *mut f64) -> TfemdgStatus {
    guard(|| {
        let d = &dg.as_ref().ok_or_else(|| null("dg"))?.0;
        if diff.is_null() {
            return Err(null("diff"));
        }
        let penalty = lib(PenaltyConfig::global(j_min))?;
        let fem = lib(assemble_stiffness(&d.mesh, &penalty.element_thresholds(d)))?;
        let scheme = DgScheme { quadrature: EdgeQuadrature::Vertex, penalty: DgPenalty::matching_threshold(d, &penalty) };
        let (oracle, _) = lib(assemble_dg_operator(d, &scheme, &|_| 0.0))?;
        *diff = fem.max_relative_difference(&oracle);
        Ok(())
    })
}
