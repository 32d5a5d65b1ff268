//! C interface to the `forchheimer` crate.
//!
//! Every function returns an [`FmStatus`]; on failure the message is
//! available from [`fm_last_error_message`] on the same thread. Objects are
//! opaque handles released with their `_free` function. Strings returned to
//! the caller are released with [`fm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use forchheimer::mms::{convergence_study, ConvergenceReport, ManufacturedSolution, StudyConfig, TimeStepPolicy};
use forchheimer::{Error, ForchheimerLaw, LinearSolve};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// A parsed flow law.
pub struct FmLaw(ForchheimerLaw);

/// Result of a convergence study.
pub struct FmReport(ConvergenceReport);

/// Study settings. `dt > 0` selects a fixed step; otherwise the step is
/// `min(dt_cap, h^2)`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FmStudyConfig {
    pub t_final: f64,
    pub dt: f64,
    pub dt_cap: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Nonzero selects the monolithic block solve.
    pub monolithic: i32,
}

/// One report row. Rates are NaN on the first row.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FmReportRow {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub err_p: f64,
    pub rate_p: f64,
    pub err_s: f64,
    pub rate_s: f64,
    pub err_u: f64,
    pub rate_u: f64,
    pub picard_avg: f64,
    pub picard_max: usize,
    pub steps: usize,
    pub mass_balance: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> FmStatus {
    match err {
        Error::Io(_) => FmStatus::Io,
        Error::Domain(_) | Error::BoundaryFlux { .. } => FmStatus::Domain,
        e if e.is_numerical() => FmStatus::Numerical,
        _ => FmStatus::InvalidArgument,
    }
}

struct Failure(FmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FmStatus::Panic
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn law_ref<'a>(law: *const FmLaw) -> Result<&'a ForchheimerLaw, Failure> {
    law.as_ref().map(|l| &l.0).ok_or_else(|| null("law"))
}

unsafe fn report_ref<'a>(report: *const FmReport) -> Result<&'a ConvergenceReport, Failure> {
    report.as_ref().map(|r| &r.0).ok_or_else(|| null("report"))
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a law such as `"1:0,1:1"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_law_parse(spec: *const c_char, out: *mut *mut FmLaw) -> FmStatus {
    guard(|| {
        if spec.is_null() {
            return Err(null("spec"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|e| Failure(FmStatus::InvalidArgument, format!("spec is not UTF-8: {e}")))?;
        let law: ForchheimerLaw = text.parse()?;
        write_out(out, Box::into_raw(Box::new(FmLaw(law))))
    })
}

/// Builds `g(s) = sum coefficients[i] * s^exponents[i]`.
///
/// # Safety
/// Both arrays must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_law_new(
    coefficients: *const f64,
    exponents: *const f64,
    len: usize,
    out: *mut *mut FmLaw,
) -> FmStatus {
    guard(|| {
        if len > 0 && (coefficients.is_null() || exponents.is_null()) {
            return Err(null("coefficient array"));
        }
        let (c, e): (&[f64], &[f64]) = if len == 0 {
            (&[], &[])
        } else {
            (std::slice::from_raw_parts(coefficients, len), std::slice::from_raw_parts(exponents, len))
        };
        let law = ForchheimerLaw::new(c, e)?;
        write_out(out, Box::into_raw(Box::new(FmLaw(law))))
    })
}

/// # Safety
/// `law` must be null or a handle from `fm_law_parse`/`fm_law_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_law_free(law: *mut FmLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// # Safety
/// `law` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_law_g(law: *const FmLaw, s: f64, out: *mut f64) -> FmStatus {
    guard(|| write_out(out, law_ref(law)?.g(s)?))
}

/// Root of `s g(s) = xi`.
///
/// # Safety
/// `law` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_law_solve_s(law: *const FmLaw, xi: f64, out: *mut f64) -> FmStatus {
    guard(|| write_out(out, law_ref(law)?.solve_s(xi)?))
}

/// `K(xi)`.
///
/// # Safety
/// `law` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_law_conductivity(law: *const FmLaw, xi: f64, out: *mut f64) -> FmStatus {
    guard(|| write_out(out, law_ref(law)?.conductivity(xi)?))
}

/// `H(xi) = int_0^xi 2 t K(t) dt`.
///
/// # Safety
/// `law` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_law_energy_density(law: *const FmLaw, xi: f64, out: *mut f64) -> FmStatus {
    guard(|| write_out(out, law_ref(law)?.energy_density(xi)?))
}

/// Degeneracy exponents `a` and `beta = 2 - a`.
///
/// # Safety
/// `law` must be a live handle; `a` and `beta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_law_degeneracy(law: *const FmLaw, a: *mut f64, beta: *mut f64) -> FmStatus {
    guard(|| {
        let d = law_ref(law)?.degeneracy();
        if a.is_null() || beta.is_null() {
            return Err(null("output pointer"));
        }
        a.write(d.a);
        beta.write(d.beta);
        Ok(())
    })
}

/// Default study settings: `T = 1`, `dt = min(1e-2, h^2)`, tolerance `1e-6`, 50 iterations.
#[no_mangle]
pub extern "C" fn fm_study_config_default() -> FmStudyConfig {
    let d = StudyConfig::default();
    let cap = match d.dt {
        TimeStepPolicy::MeshSquared { cap } => cap,
        TimeStepPolicy::Fixed(_) => 1e-2,
    };
    FmStudyConfig {
        t_final: d.t_final,
        dt: 0.0,
        dt_cap: cap,
        picard_tol: d.picard_tol,
        picard_max: d.picard_max,
        monolithic: 0,
    }
}

/// Runs the manufactured-solution study on `n x n` meshes.
///
/// # Safety
/// `law` must be a live handle, `meshes` must hold `len` values, `config` may be
/// null for defaults, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_study_run(
    law: *const FmLaw,
    meshes: *const usize,
    len: usize,
    config: *const FmStudyConfig,
    out: *mut *mut FmReport,
) -> FmStatus {
    guard(|| {
        let law = law_ref(law)?;
        if meshes.is_null() {
            return Err(null("meshes"));
        }
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let meshes = std::slice::from_raw_parts(meshes, len);
        let c = config.as_ref().copied().unwrap_or_else(|| fm_study_config_default());
        let cfg = StudyConfig {
            t_final: c.t_final,
            dt: if c.dt > 0.0 {
                TimeStepPolicy::Fixed(c.dt)
            } else {
                TimeStepPolicy::MeshSquared { cap: c.dt_cap }
            },
            picard_tol: c.picard_tol,
            picard_max: c.picard_max,
            linear: if c.monolithic != 0 {
                LinearSolve::Monolithic
            } else {
                LinearSolve::Condensed
            },
            parallel: false,
        };
        let exact = ManufacturedSolution::new(law.clone());
        let report = convergence_study(&exact, meshes, &cfg)?;
        write_out(out, Box::into_raw(Box::new(FmReport(report))))
    })
}

/// # Safety
/// `report` must be null or a handle from `fm_study_run`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_report_free(report: *mut FmReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fm_report_num_rows(report: *const FmReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.rows.len())
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_report_row(report: *const FmReport, index: usize, out: *mut FmReportRow) -> FmStatus {
    guard(|| {
        let report = report_ref(report)?;
        let r = report.rows.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: report.rows.len(),
        })?;
        let rate = |v: Option<f64>| v.unwrap_or(f64::NAN);
        write_out(
            out,
            FmReportRow {
                n: r.n,
                h: r.h,
                dt: r.dt,
                err_p: r.errors.pressure,
                rate_p: rate(r.rate_p),
                err_s: r.errors.gradient,
                rate_s: rate(r.rate_s),
                err_u: r.errors.velocity,
                rate_u: rate(r.rate_u),
                picard_avg: r.picard_avg,
                picard_max: r.picard_max,
                steps: r.steps,
                mass_balance: r.mass_balance,
            },
        )
    })
}

unsafe fn export_string(text: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(text).map_err(|e| Failure(FmStatus::InvalidArgument, e.to_string()))?;
    write_out(out, c.into_raw())
}

/// CSV rendering; free with `fm_string_free`.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_report_to_csv(report: *const FmReport, out: *mut *mut c_char) -> FmStatus {
    guard(|| export_string(report_ref(report)?.to_csv(), out))
}

/// Markdown rendering; free with `fm_string_free`.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_report_to_markdown(report: *const FmReport, out: *mut *mut c_char) -> FmStatus {
    guard(|| export_string(report_ref(report)?.to_markdown(), out))
}
