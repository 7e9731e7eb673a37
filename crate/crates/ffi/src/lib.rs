//! C ABI for the avgcycles pipeline.
//!
//! Conventions:
//! - Every constructor returns an opaque handle through an out-pointer and an
//!   [`AvgStatus`] code; every handle has a matching `*_free` function. NULL
//!   is always safe to pass to a `*_free`.
//! - On any non-`Ok` status the thread-local message retrieved by
//!   [`avg_last_error_message`] describes the failure; the pointer stays
//!   valid until the next failing call on the same thread.
//! - Strings returned through out-pointers are NUL-terminated, UTF-8, and
//!   owned by the caller: release them with [`avg_string_free`].
//! - Panics never unwind across the boundary; they surface as
//!   [`AvgStatus::Panic`].

// Tolerance guards are written `!(x > 0.0)` so that NaN is rejected along
// with nonpositive values; `x <= 0.0` would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use avgcycles::averaging::{assemble_h, compute_table, AveragedPolynomial, CoefficientTable};
use avgcycles::blowup::{build_flow_factor_for_line, FlowFactor};
use avgcycles::error::Error;
use avgcycles::flowsim::{displacement, find_fixed_points, CycleReport, VerificationConfig};
use avgcycles::problem::{parse_problem, serialize_problem, Problem};
use avgcycles::roots::{isolate_positive_roots, RootReport};

/// Result codes for every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AvgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    CenterConditionViolated = 4,
    GNearZero = 5,
    QuadratureFailure = 6,
    DomainExceeded = 7,
    IndexOutOfRange = 8,
    ZeroPolynomial = 9,
    NonpositiveRadius = 10,
    RadiusCollapse = 11,
    StepFailure = 12,
    SymmetryViolation = 13,
    DegreeExceeded = 14,
    DuplicateTerm = 15,
    Panic = 16,
    InvalidArgument = 17,
}

fn status_of(err: &Error) -> AvgStatus {
    match err {
        Error::CenterConditionViolated { .. } => AvgStatus::CenterConditionViolated,
        Error::Parse(_) => AvgStatus::ParseError,
        Error::DegreeExceeded { .. } => AvgStatus::DegreeExceeded,
        Error::DuplicateTerm { .. } => AvgStatus::DuplicateTerm,
        Error::GNearZero { .. } => AvgStatus::GNearZero,
        Error::QuadratureFailure { .. } => AvgStatus::QuadratureFailure,
        Error::DomainExceeded { .. } => AvgStatus::DomainExceeded,
        Error::IndexOutOfRange { .. } => AvgStatus::IndexOutOfRange,
        Error::ZeroPolynomial => AvgStatus::ZeroPolynomial,
        Error::NonpositiveRadius { .. } => AvgStatus::NonpositiveRadius,
        Error::RadiusCollapse { .. } => AvgStatus::RadiusCollapse,
        Error::StepFailure { .. } => AvgStatus::StepFailure,
        Error::SymmetryViolation { .. } => AvgStatus::SymmetryViolation,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_last_error(msg: String) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(err: Error) -> AvgStatus {
    let status = status_of(&err);
    set_last_error(err.to_string());
    status
}

/// Human-readable message for the most recent failing call on this thread.
/// Valid until the next failing call on the same thread. Never NULL.
#[no_mangle]
pub extern "C" fn avg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Toolkit version as a static NUL-terminated string (do not free).
#[no_mangle]
pub extern "C" fn avg_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Runs `f` with panics converted to `AvgStatus::Panic`.
fn guarded(f: impl FnOnce() -> AvgStatus) -> AvgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "opaque panic payload".to_string());
            set_last_error(format!("internal panic: {msg}"));
            AvgStatus::Panic
        }
    }
}

macro_rules! nonnull {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_last_error(format!("null argument: {}", stringify!($ptr)));
                return AvgStatus::NullArgument;
            }
        }
    };
}

macro_rules! out_slot {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => {
                set_last_error(format!("null out-pointer: {}", stringify!($ptr)));
                return AvgStatus::NullArgument;
            }
        }
    };
}

fn box_out<T>(value: T, out: &mut *mut T) -> AvgStatus {
    *out = Box::into_raw(Box::new(value));
    AvgStatus::Ok
}

/// # Safety
/// `handle` must be NULL or a pointer previously returned by the matching
/// constructor and not yet freed.
unsafe fn free_handle<T>(handle: *mut T) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

// ---------------------------------------------------------------------------
// Opaque handle types (forward-declared in the generated header).

/// A validated problem: center parameters, switching line, branch polynomials.
pub struct AvgProblem(Problem);
/// The unperturbed flow factor r₀(θ; z)/z.
pub struct AvgFlowFactor(FlowFactor);
/// The table of averaged-function coefficients k_{i,j}.
pub struct AvgTable(CoefficientTable);
/// The averaged polynomial h(z).
pub struct AvgPolynomial(AveragedPolynomial);
/// Positive-zero isolation outcome.
pub struct AvgRootReport(RootReport);
/// Return-map verification outcome.
pub struct AvgCycleReport(CycleReport);

// ---------------------------------------------------------------------------
// Problem.

/// Parse and validate a JSON problem configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_problem_parse(
    json: *const c_char,
    out: *mut *mut AvgProblem,
) -> AvgStatus {
    guarded(|| {
        let out = out_slot!(out);
        if json.is_null() {
            set_last_error("null argument: json".into());
            return AvgStatus::NullArgument;
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(e) => {
                set_last_error(format!("configuration is not UTF-8: {e}"));
                return AvgStatus::InvalidUtf8;
            }
        };
        match parse_problem(text) {
            Ok(problem) => box_out(AvgProblem(problem), out),
            Err(e) => fail(e),
        }
    })
}

/// Serialize the problem back to canonical JSON (caller frees the string).
///
/// # Safety
/// `problem` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_problem_to_json(
    problem: *const AvgProblem,
    out: *mut *mut c_char,
) -> AvgStatus {
    guarded(|| {
        let problem = nonnull!(problem);
        let out = out_slot!(out);
        let json = serialize_problem(&problem.0);
        match CString::new(json) {
            Ok(s) => {
                *out = s.into_raw();
                AvgStatus::Ok
            }
            Err(_) => {
                set_last_error("serialized JSON contained NUL".into());
                AvgStatus::ParseError
            }
        }
    })
}

/// # Safety
/// See crate-level conventions; NULL is allowed.
#[no_mangle]
pub unsafe extern "C" fn avg_problem_free(problem: *mut AvgProblem) {
    unsafe { free_handle(problem) }
}

/// Release a string returned through an out-pointer.
///
/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn avg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

// ---------------------------------------------------------------------------
// Flow factor.

/// Build the unperturbed flow factor for the problem's switching line.
/// `tol` is the absolute quadrature tolerance (e.g. 1e-12).
///
/// # Safety
/// `problem` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_flow_factor_build(
    problem: *const AvgProblem,
    tol: f64,
    out: *mut *mut AvgFlowFactor,
) -> AvgStatus {
    guarded(|| {
        let problem = nonnull!(problem);
        let out = out_slot!(out);
        if !(tol > 0.0) {
            set_last_error(format!("tolerance must be positive, got {tol}"));
            return AvgStatus::InvalidArgument;
        }
        match build_flow_factor_for_line(problem.0.params, problem.0.line, tol) {
            Ok(ff) => box_out(AvgFlowFactor(ff), out),
            Err(e) => fail(e),
        }
    })
}

/// Evaluate the flow factor at an angle inside its domain.
///
/// # Safety
/// `ff` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_flow_factor_value(
    ff: *const AvgFlowFactor,
    theta: f64,
    out: *mut f64,
) -> AvgStatus {
    guarded(|| {
        let ff = nonnull!(ff);
        let out = out_slot!(out);
        match ff.0.value(theta) {
            Ok(v) => {
                *out = v;
                AvgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// See crate-level conventions; NULL is allowed.
#[no_mangle]
pub unsafe extern "C" fn avg_flow_factor_free(ff: *mut AvgFlowFactor) {
    unsafe { free_handle(ff) }
}

// ---------------------------------------------------------------------------
// Coefficient table and averaged polynomial.

/// Compute all averaged-function coefficients k_{i,j}.
/// `threads` = 0 selects single-threaded execution.
///
/// # Safety
/// `problem` and `ff` must be live handles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_table_compute(
    problem: *const AvgProblem,
    ff: *const AvgFlowFactor,
    tol: f64,
    fast_symmetry: bool,
    threads: usize,
    out: *mut *mut AvgTable,
) -> AvgStatus {
    guarded(|| {
        let problem = nonnull!(problem);
        let ff = nonnull!(ff);
        let out = out_slot!(out);
        if !(tol > 0.0) {
            set_last_error(format!("tolerance must be positive, got {tol}"));
            return AvgStatus::InvalidArgument;
        }
        match compute_table(&problem.0, &ff.0, tol, fast_symmetry, threads.max(1)) {
            Ok(table) => box_out(AvgTable(table), out),
            Err(e) => fail(e),
        }
    })
}

/// Fetch one table entry (value and quadrature error estimate).
///
/// # Safety
/// `table` must be a live handle; `value_out` and `err_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn avg_table_entry(
    table: *const AvgTable,
    i: u32,
    j: u32,
    value_out: *mut f64,
    err_out: *mut f64,
) -> AvgStatus {
    guarded(|| {
        let table = nonnull!(table);
        let value_out = out_slot!(value_out);
        let err_out = out_slot!(err_out);
        match table.0.entry(i, j) {
            Some(entry) => {
                *value_out = entry.value;
                *err_out = entry.err;
                AvgStatus::Ok
            }
            None => {
                set_last_error(format!("no table entry at ({i}, {j})"));
                AvgStatus::IndexOutOfRange
            }
        }
    })
}

/// # Safety
/// See crate-level conventions; NULL is allowed.
#[no_mangle]
pub unsafe extern "C" fn avg_table_free(table: *mut AvgTable) {
    unsafe { free_handle(table) }
}

/// Group the table into the averaged polynomial h(z) = Σ k_{i,j} z^{i+2j}.
///
/// # Safety
/// `table` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_assemble(
    table: *const AvgTable,
    out: *mut *mut AvgPolynomial,
) -> AvgStatus {
    guarded(|| {
        let table = nonnull!(table);
        let out = out_slot!(out);
        match assemble_h(&table.0) {
            Ok(h) => box_out(AvgPolynomial(h), out),
            Err(e) => fail(e),
        }
    })
}

/// Coefficient of zⁿ (0 when absent).
///
/// # Safety
/// `h` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_polynomial_coeff(
    h: *const AvgPolynomial,
    n: u32,
    out: *mut f64,
) -> AvgStatus {
    guarded(|| {
        let h = nonnull!(h);
        let out = out_slot!(out);
        *out = h.0.coeff(n);
        AvgStatus::Ok
    })
}

/// Evaluate h(z).
///
/// # Safety
/// `h` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_polynomial_eval(
    h: *const AvgPolynomial,
    z: f64,
    out: *mut f64,
) -> AvgStatus {
    guarded(|| {
        let h = nonnull!(h);
        let out = out_slot!(out);
        *out = h.0.eval(z);
        AvgStatus::Ok
    })
}

/// # Safety
/// See crate-level conventions; NULL is allowed.
#[no_mangle]
pub unsafe extern "C" fn avg_polynomial_free(h: *mut AvgPolynomial) {
    unsafe { free_handle(h) }
}

// ---------------------------------------------------------------------------
// Roots.

/// Isolate positive zeros of h. `z_max <= 0` selects the automatic bound.
///
/// # Safety
/// `h` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_roots_isolate(
    h: *const AvgPolynomial,
    tol: f64,
    z_max: f64,
    out: *mut *mut AvgRootReport,
) -> AvgStatus {
    guarded(|| {
        let h = nonnull!(h);
        let out = out_slot!(out);
        if !(tol > 0.0) {
            set_last_error(format!("tolerance must be positive, got {tol}"));
            return AvgStatus::InvalidArgument;
        }
        let z_max = (z_max > 0.0).then_some(z_max);
        match isolate_positive_roots(&h.0, tol, z_max) {
            Ok(report) => box_out(AvgRootReport(report), out),
            Err(e) => fail(e),
        }
    })
}

/// Number of isolated zeros.
///
/// # Safety
/// `report` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_root_report_len(
    report: *const AvgRootReport,
    out: *mut usize,
) -> AvgStatus {
    guarded(|| {
        let report = nonnull!(report);
        let out = out_slot!(out);
        *out = report.0.roots.len();
        AvgStatus::Ok
    })
}

/// Sign-variation bound on the number of positive zeros.
///
/// # Safety
/// `report` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_root_report_bound(
    report: *const AvgRootReport,
    out: *mut u32,
) -> AvgStatus {
    guarded(|| {
        let report = nonnull!(report);
        let out = out_slot!(out);
        *out = report.0.descartes_bound;
        AvgStatus::Ok
    })
}

/// Fetch zero #idx (ascending order): location, h′ there, simplicity flag.
///
/// # Safety
/// `report` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn avg_root_report_get(
    report: *const AvgRootReport,
    idx: usize,
    z_out: *mut f64,
    deriv_out: *mut f64,
    simple_out: *mut bool,
) -> AvgStatus {
    guarded(|| {
        let report = nonnull!(report);
        let z_out = out_slot!(z_out);
        let deriv_out = out_slot!(deriv_out);
        let simple_out = out_slot!(simple_out);
        match report.0.roots.get(idx) {
            Some(r) => {
                *z_out = r.z_star;
                *deriv_out = r.h_deriv;
                *simple_out = r.simple;
                AvgStatus::Ok
            }
            None => {
                set_last_error(format!(
                    "root index {idx} out of range ({} roots)",
                    report.0.roots.len()
                ));
                AvgStatus::IndexOutOfRange
            }
        }
    })
}

/// # Safety
/// See crate-level conventions; NULL is allowed.
#[no_mangle]
pub unsafe extern "C" fn avg_root_report_free(report: *mut AvgRootReport) {
    unsafe { free_handle(report) }
}

// ---------------------------------------------------------------------------
// Verification.

/// Return-map displacement r(α+2π; z, ε) − z.
///
/// # Safety
/// `problem` and `ff` must be live handles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_displacement(
    problem: *const AvgProblem,
    ff: *const AvgFlowFactor,
    z: f64,
    eps: f64,
    tol: f64,
    out: *mut f64,
) -> AvgStatus {
    guarded(|| {
        let problem = nonnull!(problem);
        let ff = nonnull!(ff);
        let out = out_slot!(out);
        match displacement(&problem.0, &ff.0, z, eps, tol) {
            Ok(v) => {
                *out = v;
                AvgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Locate return-map fixed points near each predicted zero over the ε ladder
/// `epsilons[0..n_eps]` (strictly decreasing). Zero/negative tolerances pick
/// the defaults (1e-11 integrator, 1e-10 fixed-point, window 50·ε).
///
/// # Safety
/// Handles must be live; `epsilons` must point to `n_eps` readable doubles;
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_verify(
    problem: *const AvgProblem,
    ff: *const AvgFlowFactor,
    predicted: *const AvgRootReport,
    epsilons: *const f64,
    n_eps: usize,
    integrator_tol: f64,
    fixpoint_tol: f64,
    capture_window: f64,
    out: *mut *mut AvgCycleReport,
) -> AvgStatus {
    guarded(|| {
        let problem = nonnull!(problem);
        let ff = nonnull!(ff);
        let predicted = nonnull!(predicted);
        let out = out_slot!(out);
        let defaults = VerificationConfig::default();
        let mut cfg = VerificationConfig {
            epsilons: defaults.epsilons.clone(),
            integrator_tol: if integrator_tol > 0.0 {
                integrator_tol
            } else {
                defaults.integrator_tol
            },
            fixpoint_tol: if fixpoint_tol > 0.0 {
                fixpoint_tol
            } else {
                defaults.fixpoint_tol
            },
            capture_window: if capture_window > 0.0 {
                capture_window
            } else {
                defaults.capture_window
            },
        };
        if n_eps > 0 {
            if epsilons.is_null() {
                set_last_error("null argument: epsilons".into());
                return AvgStatus::NullArgument;
            }
            cfg.epsilons = unsafe { std::slice::from_raw_parts(epsilons, n_eps) }.to_vec();
        }
        if let Err(e) = cfg.validate() {
            return fail(e);
        }
        let report = find_fixed_points(&problem.0, &ff.0, &predicted.0, &cfg);
        box_out(AvgCycleReport(report), out)
    })
}

/// Number of predicted zeros whose fixed point was verified at every ε.
///
/// # Safety
/// `report` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_cycle_report_count_verified(
    report: *const AvgCycleReport,
    out: *mut usize,
) -> AvgStatus {
    guarded(|| {
        let report = nonnull!(report);
        let out = out_slot!(out);
        *out = report.0.count_verified;
        AvgStatus::Ok
    })
}

/// Full verification report as JSON (caller frees the string).
///
/// # Safety
/// `report` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn avg_cycle_report_to_json(
    report: *const AvgCycleReport,
    out: *mut *mut c_char,
) -> AvgStatus {
    guarded(|| {
        let report = nonnull!(report);
        let out = out_slot!(out);
        let json = serde_json::to_string_pretty(&report.0)
            .expect("report serialization cannot fail");
        match CString::new(json) {
            Ok(s) => {
                *out = s.into_raw();
                AvgStatus::Ok
            }
            Err(_) => {
                set_last_error("serialized JSON contained NUL".into());
                AvgStatus::ParseError
            }
        }
    })
}

/// # Safety
/// See crate-level conventions; NULL is allowed.
#[no_mangle]
pub unsafe extern "C" fn avg_cycle_report_free(report: *mut AvgCycleReport) {
    unsafe { free_handle(report) }
}
