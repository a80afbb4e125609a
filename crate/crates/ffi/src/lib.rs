//! C ABI over the `inadmm` solvers.
//!
//! Every fallible function returns an [`InadmmStatus`]; on failure the
//! message is available from [`inadmm_last_error`] on the same thread.
//! Handles are created by `*_new`/`inadmm_solve` and released with the
//! matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use inadmm::admm::{solve, AdmmParams, Method, SolveReport, SolveStatus, ThetaSchedule};
use inadmm::harness::config::{default_params, ProblemKind};
use inadmm::problems::{example1, example2, example3, example4, Problem};
use inadmm::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InadmmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Numeric = 4,
    NotConverged = 5,
    Io = 6,
    Panic = 7,
}

/// Outer-loop method.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InadmmMethod {
    Inexact = 0,
    Exact = 1,
    ProjectedGradient = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InadmmThetaKind {
    Geometric = 0,
    Algebraic = 1,
    Fixed = 2,
}

/// Which control iterate to copy out of a report.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InadmmField {
    U = 0,
    Z = 1,
    Lambda = 2,
}

/// Solver parameters. `theta_param` is `q` (geometric), `alpha`
/// (algebraic) or the fixed tolerance; `theta0 <= 0` selects the default.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InadmmParams {
    pub beta0: f64,
    pub beta1: f64,
    pub eta_base: f64,
    /// An [`InadmmThetaKind`] value.
    pub theta_kind: u32,
    pub theta_param: f64,
    pub theta0: f64,
    pub tol: f64,
    pub max_outer: u32,
    pub exact_threshold: f64,
}

/// One outer iteration. `err_u` is NaN when no exact control is known.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InadmmRecord {
    pub k: u32,
    pub beta: f64,
    pub theta: f64,
    pub cg_iterations: u32,
    pub pr: f64,
    pub dr: f64,
    pub srd: f64,
    pub obj: f64,
    pub err_u: f64,
    pub wall_ms: f64,
}

/// Opaque discretized problem.
pub struct InadmmProblem {
    inner: Problem,
}

/// Opaque solver result.
pub struct InadmmReport {
    inner: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> InadmmStatus {
    match e {
        Error::Config(_) | Error::Parameter(_) => InadmmStatus::InvalidArgument,
        Error::Dimension(_) => InadmmStatus::Dimension,
        Error::Data(_) | Error::Numeric(_) | Error::NotPositiveDefinite { .. } => InadmmStatus::Numeric,
        Error::InnerNotConverged { .. } | Error::Diverged { .. } => InadmmStatus::NotConverged,
        Error::Io { .. } => InadmmStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (InadmmStatus, String)>) -> InadmmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => InadmmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            InadmmStatus::Panic
        }
    }
}

fn lift(e: Error) -> (InadmmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (InadmmStatus, String) {
    (InadmmStatus::NullPointer, format!("{what} is null"))
}

fn kind_of(example: u32) -> Result<ProblemKind, (InadmmStatus, String)> {
    match example {
        1 => Ok(ProblemKind::Example1),
        2 => Ok(ProblemKind::Example2),
        3 => Ok(ProblemKind::Example3),
        4 => Ok(ProblemKind::Example4),
        _ => Err((InadmmStatus::InvalidArgument, format!("example must be 1..4, got {example}"))),
    }
}

fn to_c_params(p: &AdmmParams) -> InadmmParams {
    let (theta_kind, theta_param) = match p.theta {
        ThetaSchedule::Geometric { q } => (InadmmThetaKind::Geometric as u32, q),
        ThetaSchedule::Algebraic { alpha } => (InadmmThetaKind::Algebraic as u32, alpha),
        ThetaSchedule::Fixed { value } => (InadmmThetaKind::Fixed as u32, value),
    };
    InadmmParams {
        beta0: p.beta0,
        beta1: p.beta1,
        eta_base: p.eta_base,
        theta_kind,
        theta_param,
        theta0: p.theta0.unwrap_or(0.0),
        tol: p.tol,
        max_outer: p.max_outer.min(u32::MAX as usize) as u32,
        exact_threshold: p.exact_threshold,
    }
}

fn from_c_params(p: &InadmmParams) -> Result<AdmmParams, (InadmmStatus, String)> {
    let theta = match p.theta_kind {
        0 => ThetaSchedule::Geometric { q: p.theta_param },
        1 => ThetaSchedule::Algebraic { alpha: p.theta_param },
        2 => ThetaSchedule::Fixed { value: p.theta_param },
        k => return Err((InadmmStatus::InvalidArgument, format!("unknown theta kind {k}"))),
    };
    Ok(AdmmParams {
        beta0: p.beta0,
        beta1: p.beta1,
        eta_base: p.eta_base,
        theta,
        theta0: (p.theta0 > 0.0).then_some(p.theta0),
        tol: p.tol,
        max_outer: p.max_outer as usize,
        exact_threshold: p.exact_threshold,
    })
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn inadmm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn inadmm_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Default parameters for shipped experiment `example` (1..4).
///
/// # Safety
/// `out` must be null or point to writable memory for one `InadmmParams`.
#[no_mangle]
pub unsafe extern "C" fn inadmm_params_default(example: u32, out: *mut InadmmParams) -> InadmmStatus {
    guard(|| {
        let kind = kind_of(example)?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = to_c_params(&default_params(kind));
        Ok(())
    })
}

/// Builds shipped experiment `example` (1..4) on an `m x m` mesh with `n_t`
/// time steps. `gamma_s` is used by examples 3 and 4 and must be 0 otherwise.
///
/// # Safety
/// `out` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn inadmm_problem_new(
    example: u32,
    gamma_s: f64,
    m: u32,
    n_t: u32,
    out: *mut *mut InadmmProblem,
) -> InadmmStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let spec = match kind_of(example)? {
            ProblemKind::Example1 | ProblemKind::Example2 if gamma_s != 0.0 => {
                return Err((
                    InadmmStatus::InvalidArgument,
                    format!("example {example} has no sparsity term; got gamma_s = {gamma_s}"),
                ))
            }
            ProblemKind::Example1 => example1(),
            ProblemKind::Example2 => example2(),
            ProblemKind::Example3 => example3(gamma_s).map_err(lift)?,
            _ => example4(gamma_s).map_err(lift)?,
        };
        let problem = spec.assemble(m as usize, n_t as usize).map_err(lift)?;
        *out = Box::into_raw(Box::new(InadmmProblem { inner: problem }));
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle from [`inadmm_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn inadmm_problem_free(problem: *mut InadmmProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Control nodes per time level (0 for a null handle).
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn inadmm_problem_control_nodes(problem: *const InadmmProblem) -> usize {
    unsafe { problem.as_ref() }.map_or(0, |p| p.inner.disc().n_control())
}

/// Number of time steps (0 for a null handle).
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn inadmm_problem_time_steps(problem: *const InadmmProblem) -> usize {
    unsafe { problem.as_ref() }.map_or(0, |p| p.inner.disc().n_t())
}

/// Runs `method` (an [`InadmmMethod`] value) on `problem`. On success `*out` owns a new report.
///
/// # Safety
/// `problem` must be a live handle, `params` must point to a valid
/// `InadmmParams`, `out` to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn inadmm_solve(
    problem: *const InadmmProblem,
    params: *const InadmmParams,
    method: u32,
    out: *mut *mut InadmmReport,
) -> InadmmStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let problem = unsafe { problem.as_ref() }.ok_or_else(|| null("problem"))?;
        let params = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        let method = match method {
            0 => Method::InAdmm,
            1 => Method::AdmmCg,
            2 => Method::Pgd,
            other => return Err((InadmmStatus::InvalidArgument, format!("unknown method {other}"))),
        };
        let report = solve(&problem.inner, &from_c_params(params)?, method).map_err(lift)?;
        *out = Box::into_raw(Box::new(InadmmReport { inner: report }));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from [`inadmm_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn inadmm_report_free(report: *mut InadmmReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Number of outer iterations (0 for a null handle).
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn inadmm_report_iterations(report: *const InadmmReport) -> usize {
    unsafe { report.as_ref() }.map_or(0, |r| r.inner.iterations())
}

/// 1 if the stopping test was met, 0 otherwise (including null).
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn inadmm_report_converged(report: *const InadmmReport) -> i32 {
    unsafe { report.as_ref() }.map_or(0, |r| i32::from(r.inner.status == SolveStatus::Converged))
}

/// Average CG steps per outer iteration.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn inadmm_report_cg_average(report: *const InadmmReport) -> f64 {
    unsafe { report.as_ref() }.map_or(f64::NAN, |r| r.inner.cg_ave())
}

/// Copies record `index` (0-based) into `out`.
///
/// # Safety
/// `report` must be a live handle and `out` writable for one record.
#[no_mangle]
pub unsafe extern "C" fn inadmm_report_record(
    report: *const InadmmReport,
    index: usize,
    out: *mut InadmmRecord,
) -> InadmmStatus {
    guard(|| {
        let report = unsafe { report.as_ref() }.ok_or_else(|| null("report"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let r = report.inner.records.get(index).ok_or_else(|| {
            (
                InadmmStatus::InvalidArgument,
                format!("record {index} out of range ({} records)", report.inner.records.len()),
            )
        })?;
        *out = InadmmRecord {
            k: r.k as u32,
            beta: r.beta,
            theta: r.theta,
            cg_iterations: r.cg_iterations as u32,
            pr: r.pr,
            dr: r.dr,
            srd: r.srd,
            obj: r.obj,
            err_u: r.err_u.unwrap_or(f64::NAN),
            wall_ms: r.wall_ms,
        };
        Ok(())
    })
}

/// Copies the final `field` (an [`InadmmField`] value) into `buf`, time level by time level
/// (levels `1..=n_t`, control nodes fastest). `len` must equal
/// `control_nodes * time_steps`.
///
/// # Safety
/// `report` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn inadmm_report_copy_field(
    report: *const InadmmReport,
    field: u32,
    buf: *mut f64,
    len: usize,
) -> InadmmStatus {
    guard(|| {
        let report = unsafe { report.as_ref() }.ok_or_else(|| null("report"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let triple = &report.inner.final_iterate;
        let src = match field {
            0 => &triple.u,
            1 => &triple.z,
            2 => &triple.lambda,
            other => return Err((InadmmStatus::InvalidArgument, format!("unknown field {other}"))),
        }
        .values();
        if src.len() != len {
            return Err((
                InadmmStatus::Dimension,
                format!("buffer holds {len} values, field has {}", src.len()),
            ));
        }
        unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, len) };
        Ok(())
    })
}
