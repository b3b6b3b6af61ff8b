//! C ABI over `adawass`.
//!
//! Trees and flows cross the boundary as opaque handles created from JSON
//! and released with their `_free` function. Every call returns an
//! [`AwStatus`]; on failure a description is available from
//! [`aw_last_error_message`] on the same thread. Strings handed out by the
//! library must be released with [`aw_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use adawass::curves::{FlowOptions, DEFAULT_MAX_LEAVES};
use adawass::{io, CommonSpaceFlow, Error, TreeProcess};

/// Result of every call. Numeric values match the exit codes of the `aw`
/// command-line tool where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    ShapeMismatch = 3,
    SizeLimit = 4,
    Numerical = 5,
    Panic = 6,
}

/// Opaque scenario tree.
pub struct AwTree(TreeProcess);

/// Opaque common-space flow.
pub struct AwFlow(CommonSpaceFlow);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let msg = CString::new(msg).unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> AwStatus {
    match e {
        Error::ShapeMismatch(_) => AwStatus::ShapeMismatch,
        Error::SizeLimit { .. } => AwStatus::SizeLimit,
        Error::Infeasible | Error::Unbounded => AwStatus::Numerical,
        _ => AwStatus::InvalidInput,
    }
}

struct Fail(AwStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_error(e.to_string());
        Fail(status_of(&e))
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AwStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AwStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(_) => {
            set_error("internal panic");
            AwStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    set_error(format!("{what} is null"));
    Fail(AwStatus::NullPointer)
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not UTF-8"));
        Fail(AwStatus::InvalidInput)
    })
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).map_err(|_| {
        set_error("output contained NUL");
        Fail(AwStatus::InvalidInput)
    })
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// owned by the library and valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn aw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn aw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a tree.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_tree_from_json(json: *const c_char, out: *mut *mut AwTree) -> AwStatus {
    guard(|| {
        let s = str_arg(json, "json")?;
        let t = io::tree_from_json(s)?;
        write_out(out, Box::into_raw(Box::new(AwTree(t))))
    })
}

/// # Safety
/// `tree` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn aw_tree_free(tree: *mut AwTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Serializes a tree; release the result with [`aw_string_free`].
///
/// # Safety
/// `tree` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_tree_to_json(tree: *const AwTree, out: *mut *mut c_char) -> AwStatus {
    guard(|| {
        let t = ref_arg(tree, "tree")?;
        write_out(out, c_string(io::tree_to_json(&t.0))?)
    })
}

/// Number of nodes including the root.
///
/// # Safety
/// `tree` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_tree_num_nodes(tree: *const AwTree, out: *mut usize) -> AwStatus {
    guard(|| write_out(out, ref_arg(tree, "tree")?.0.len()))
}

/// Adapted Wasserstein distance of order `p`.
///
/// # Safety
/// `x`, `y` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_distance(
    x: *const AwTree,
    y: *const AwTree,
    p: f64,
    out: *mut f64,
) -> AwStatus {
    guard(|| {
        let (x, y) = (ref_arg(x, "x")?, ref_arg(y, "y")?);
        let v = adawass::aw_value(&x.0, &y.0, p)?;
        write_out(out, v)
    })
}

/// Optimal bicausal plan as JSON; release with [`aw_string_free`].
///
/// # Safety
/// `x`, `y` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_plan_json(
    x: *const AwTree,
    y: *const AwTree,
    p: f64,
    out: *mut *mut c_char,
) -> AwStatus {
    guard(|| {
        let (x, y) = (ref_arg(x, "x")?, ref_arg(y, "y")?);
        let (_, plan) = adawass::aw_distance(&x.0, &y.0, p)?;
        write_out(out, c_string(io::plan_to_json(&plan))?)
    })
}

/// Whether `x` and `y` define the same process up to `tol`.
///
/// # Safety
/// `x`, `y` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_equivalent(
    x: *const AwTree,
    y: *const AwTree,
    tol: f64,
    out: *mut bool,
) -> AwStatus {
    guard(|| {
        let (x, y) = (ref_arg(x, "x")?, ref_arg(y, "y")?);
        write_out(out, adawass::equivalent(&x.0, &y.0, tol)?)
    })
}

/// Canonical representative as a new handle.
///
/// # Safety
/// `tree` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_canonicalize(
    tree: *const AwTree,
    tol: f64,
    out: *mut *mut AwTree,
) -> AwStatus {
    guard(|| {
        let t = ref_arg(tree, "tree")?;
        if !(tol >= 0.0) {
            return Err(Error::InvalidInput("tolerance must be nonnegative".into()).into());
        }
        let c = adawass::canonicalize(&t.0, tol);
        write_out(out, Box::into_raw(Box::new(AwTree(c))))
    })
}

/// Geodesic flow between `x` and `y` on the grid `grid[0..grid_len]`.
/// `max_leaves == 0` selects the default size guard.
///
/// # Safety
/// `x`, `y` must be live handles, `grid` must point to `grid_len` doubles,
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_geodesic(
    x: *const AwTree,
    y: *const AwTree,
    p: f64,
    grid: *const f64,
    grid_len: usize,
    max_leaves: usize,
    out: *mut *mut AwFlow,
) -> AwStatus {
    guard(|| {
        let (x, y) = (ref_arg(x, "x")?, ref_arg(y, "y")?);
        if grid.is_null() {
            return Err(null("grid"));
        }
        let grid = std::slice::from_raw_parts(grid, grid_len);
        let opts = FlowOptions {
            max_leaves: if max_leaves == 0 { DEFAULT_MAX_LEAVES } else { max_leaves },
            ..FlowOptions::default()
        };
        let flow = adawass::geodesic(&x.0, &y.0, p, grid, opts)?;
        write_out(out, Box::into_raw(Box::new(AwFlow(flow))))
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_flow_from_json(json: *const c_char, out: *mut *mut AwFlow) -> AwStatus {
    guard(|| {
        let f = io::flow_from_json(str_arg(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(AwFlow(f))))
    })
}

/// # Safety
/// `flow` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_flow_to_json(flow: *const AwFlow, out: *mut *mut c_char) -> AwStatus {
    guard(|| {
        let f = ref_arg(flow, "flow")?;
        write_out(out, c_string(io::flow_to_json(&f.0))?)
    })
}

/// Particle-level energy of a flow.
///
/// # Safety
/// `flow` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_flow_energy(flow: *const AwFlow, p: f64, out: *mut f64) -> AwStatus {
    guard(|| {
        let f = ref_arg(flow, "flow")?;
        write_out(out, adawass::flow_energy(&f.0, p)?)
    })
}

/// Number of grid points of a flow.
///
/// # Safety
/// `flow` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_flow_grid_len(flow: *const AwFlow, out: *mut usize) -> AwStatus {
    guard(|| write_out(out, ref_arg(flow, "flow")?.0.grid().len()))
}

/// The process of a flow at grid index `k` as a new tree handle.
///
/// # Safety
/// `flow` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aw_flow_process_at(
    flow: *const AwFlow,
    k: usize,
    out: *mut *mut AwTree,
) -> AwStatus {
    guard(|| {
        let f = ref_arg(flow, "flow")?;
        if k >= f.0.grid().len() {
            return Err(Error::InvalidInput(format!("grid index {k} out of range")).into());
        }
        write_out(out, Box::into_raw(Box::new(AwTree(f.0.process_at(k)))))
    })
}

/// # Safety
/// `flow` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn aw_flow_free(flow: *mut AwFlow) {
    if !flow.is_null() {
        drop(Box::from_raw(flow));
    }
}
