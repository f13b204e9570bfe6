//! C interface to the `minlp-conflict` solver.
//!
//! Instances and results are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call
//! returns a [`MinlpError`] code; the message of the last failure on the
//! calling thread is available from [`minlp_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use minlp_conflict::model::{load_instance, parse_instance, Instance};
use minlp_conflict::solver::{solve, ConflictMode, Settings, SolveResult, SolveStatus};

/// Return code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinlpError {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    LoadFailed = 3,
    InvalidArgument = 4,
    SolveFailed = 5,
    NoSolution = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinlpConflictMode {
    NoConflict = 0,
    ConfGraph = 1,
    DualRay = 2,
    DualRayLoc = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinlpSolveStatus {
    Optimal = 0,
    Infeasible = 1,
    Limit = 2,
}

/// Limits for [`minlp_solve`]; non-positive time and negative node limits mean none.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MinlpOptions {
    pub conflict: MinlpConflictMode,
    pub time_limit: f64,
    pub node_limit: i64,
}

/// Search statistics of a finished solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MinlpStats {
    pub nodes: u64,
    pub lp_iterations: u64,
    pub time_s: f64,
    pub confs_glb: u64,
    pub confs_loc: u64,
    pub proofs_rejected: u64,
    pub lift_root: u64,
    pub lift_half: u64,
    pub lift_partial: u64,
    pub lift_none: u64,
}

/// Opaque instance handle.
pub struct MinlpInstance(Instance);

/// Opaque result handle.
pub struct MinlpResult(SolveResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(code: MinlpError, message: impl Into<String>) -> MinlpError {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
    code
}

fn guarded(f: impl FnOnce() -> MinlpError) -> MinlpError {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| set_error(MinlpError::Panic, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, MinlpError> {
    if s.is_null() {
        return Err(set_error(MinlpError::NullPointer, "null string argument"));
    }
    // SAFETY: the caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| set_error(MinlpError::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    // SAFETY: checked non-null by the caller.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn minlp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn minlp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn minlp_instance_load(path: *const c_char, out: *mut *mut MinlpInstance) -> MinlpError {
    guarded(|| {
        if out.is_null() {
            return set_error(MinlpError::NullPointer, "null output pointer");
        }
        let path = match unsafe { read_str(path) } {
            Ok(p) => p,
            Err(e) => return e,
        };
        match load_instance(path) {
            Ok(inst) => {
                unsafe { store(out, MinlpInstance(inst)) };
                MinlpError::Ok
            }
            Err(e) => set_error(MinlpError::LoadFailed, e.to_string()),
        }
    })
}

/// Parses an instance from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn minlp_instance_parse(json: *const c_char, out: *mut *mut MinlpInstance) -> MinlpError {
    guarded(|| {
        if out.is_null() {
            return set_error(MinlpError::NullPointer, "null output pointer");
        }
        let text = match unsafe { read_str(json) } {
            Ok(t) => t,
            Err(e) => return e,
        };
        match parse_instance(text) {
            Ok(inst) => {
                unsafe { store(out, MinlpInstance(inst)) };
                MinlpError::Ok
            }
            Err(e) => set_error(MinlpError::LoadFailed, e.to_string()),
        }
    })
}

/// Releases an instance; null is ignored.
///
/// # Safety
/// `inst` must come from `minlp_instance_load`/`minlp_instance_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn minlp_instance_free(inst: *mut MinlpInstance) {
    if !inst.is_null() {
        // SAFETY: allocated by `store`.
        drop(unsafe { Box::from_raw(inst) });
    }
}

/// Number of variables (a nonlinear objective adds one); 0 for null.
///
/// # Safety
/// `inst` must be null or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn minlp_instance_num_vars(inst: *const MinlpInstance) -> usize {
    unsafe { inst.as_ref() }.map_or(0, |i| i.0.num_vars)
}

/// Default options: dual-ray analysis with local proofs, no limits.
#[no_mangle]
pub extern "C" fn minlp_options_default() -> MinlpOptions {
    MinlpOptions { conflict: MinlpConflictMode::DualRayLoc, time_limit: 0.0, node_limit: -1 }
}

/// Solves an instance.
///
/// # Safety
/// `inst` must be a live instance handle, `options` null or valid, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn minlp_solve(
    inst: *const MinlpInstance,
    options: *const MinlpOptions,
    out: *mut *mut MinlpResult,
) -> MinlpError {
    guarded(|| {
        let Some(inst) = (unsafe { inst.as_ref() }) else {
            return set_error(MinlpError::NullPointer, "null instance");
        };
        if out.is_null() {
            return set_error(MinlpError::NullPointer, "null output pointer");
        }
        let opts = unsafe { options.as_ref() }.copied().unwrap_or_else(|| minlp_options_default());
        if opts.time_limit.is_nan() {
            return set_error(MinlpError::InvalidArgument, "time limit is NaN");
        }
        let conflict = match opts.conflict {
            MinlpConflictMode::NoConflict => ConflictMode::NoConflict,
            MinlpConflictMode::ConfGraph => ConflictMode::ConfGraph,
            MinlpConflictMode::DualRay => ConflictMode::DualRay,
            MinlpConflictMode::DualRayLoc => ConflictMode::DualRayLoc,
        };
        let settings = Settings {
            time_limit: (opts.time_limit > 0.0).then_some(opts.time_limit),
            node_limit: u64::try_from(opts.node_limit).ok(),
            ..Settings::with_conflict(conflict)
        };
        match solve(&inst.0, &settings) {
            Ok(r) => {
                unsafe { store(out, MinlpResult(r)) };
                MinlpError::Ok
            }
            Err(e) => set_error(MinlpError::SolveFailed, e.to_string()),
        }
    })
}

/// Releases a result; null is ignored.
///
/// # Safety
/// `result` must come from `minlp_solve` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn minlp_result_free(result: *mut MinlpResult) {
    if !result.is_null() {
        // SAFETY: allocated by `store`.
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Final status of a solve.
///
/// # Safety
/// `result` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn minlp_result_status(result: *const MinlpResult, out: *mut MinlpSolveStatus) -> MinlpError {
    let (Some(r), false) = (unsafe { result.as_ref() }, out.is_null()) else {
        return set_error(MinlpError::NullPointer, "null argument");
    };
    let status = match r.0.status {
        SolveStatus::Optimal => MinlpSolveStatus::Optimal,
        SolveStatus::Infeasible => MinlpSolveStatus::Infeasible,
        SolveStatus::Limit => MinlpSolveStatus::Limit,
    };
    unsafe { *out = status };
    MinlpError::Ok
}

/// Objective value of the incumbent; `NoSolution` if there is none.
///
/// # Safety
/// `result` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn minlp_result_objective(result: *const MinlpResult, out: *mut f64) -> MinlpError {
    let (Some(r), false) = (unsafe { result.as_ref() }, out.is_null()) else {
        return set_error(MinlpError::NullPointer, "null argument");
    };
    match r.0.objective {
        Some(v) => {
            unsafe { *out = v };
            MinlpError::Ok
        }
        None => set_error(MinlpError::NoSolution, "no feasible solution"),
    }
}

/// Copies the incumbent into `buf`, which must hold `len >= num_vars` values.
///
/// # Safety
/// `result` must be a live result handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn minlp_result_solution(result: *const MinlpResult, buf: *mut f64, len: usize) -> MinlpError {
    let (Some(r), false) = (unsafe { result.as_ref() }, buf.is_null()) else {
        return set_error(MinlpError::NullPointer, "null argument");
    };
    let Some(x) = &r.0.incumbent else {
        return set_error(MinlpError::NoSolution, "no feasible solution");
    };
    if len < x.len() {
        return set_error(MinlpError::BufferTooSmall, format!("buffer holds {len} values, need {}", x.len()));
    }
    // SAFETY: `buf` has room for `len >= x.len()` values.
    unsafe { ptr::copy_nonoverlapping(x.as_ptr(), buf, x.len()) };
    MinlpError::Ok
}

/// Search and conflict statistics.
///
/// # Safety
/// `result` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn minlp_result_stats(result: *const MinlpResult, out: *mut MinlpStats) -> MinlpError {
    let (Some(r), false) = (unsafe { result.as_ref() }, out.is_null()) else {
        return set_error(MinlpError::NullPointer, "null argument");
    };
    let r = &r.0;
    let stats = MinlpStats {
        nodes: r.nodes,
        lp_iterations: r.lp_iterations,
        time_s: r.time_s,
        confs_glb: r.stats.confs_glb,
        confs_loc: r.stats.confs_loc,
        proofs_rejected: r.stats.proofs_rejected,
        lift_root: r.stats.lift.root,
        lift_half: r.stats.lift.half,
        lift_partial: r.stats.lift.partial,
        lift_none: r.stats.lift.none,
    };
    unsafe { *out = stats };
    MinlpError::Ok
}
