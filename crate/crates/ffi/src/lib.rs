//! C ABI for the simulator so other languages can bind: closed-form
//! estimators as plain functions, experiments through an opaque run handle,
//! status reported via error codes with a thread-local message.
//!
//! Conventions:
//! - every fallible call returns [`MagnonsimStatus`]; on failure
//!   [`magnonsim_last_error`] holds a UTF-8 message until the next call on
//!   the same thread,
//! - strings passed in are NUL-terminated UTF-8,
//! - strings returned from a run handle stay valid until the handle is
//!   freed or executed again,
//! - handles come from `magnonsim_run_new` and must be released with
//!   `magnonsim_run_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::{c_char, c_double};

use magnonsim::config::{run_experiment, ExperimentKind};
use magnonsim::SimError;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MagnonsimStatus {
    Ok = 0,
    /// Null pointer, invalid UTF-8 or an out-of-domain argument.
    InvalidArgument = 1,
    /// Malformed or inconsistent configuration.
    ConfigError = 2,
    /// Numerical failure during execution.
    NumericalError = 3,
    /// A panic was caught at the boundary.
    InternalError = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &SimError) -> MagnonsimStatus {
    match err {
        SimError::Config(_) => MagnonsimStatus::ConfigError,
        SimError::Domain(_) | SimError::DimensionMismatch(_) => MagnonsimStatus::InvalidArgument,
        _ => MagnonsimStatus::NumericalError,
    }
}

/// Message of the most recent error on this thread. The pointer stays valid
/// until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn magnonsim_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn magnonsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn write_out(out: *mut c_double, value: f64) -> MagnonsimStatus {
    if out.is_null() {
        set_error("null output pointer");
        return MagnonsimStatus::InvalidArgument;
    }
    unsafe { *out = value };
    MagnonsimStatus::Ok
}

fn run_estimator(
    out: *mut c_double,
    f: impl FnOnce() -> magnonsim::Result<f64> + std::panic::UnwindSafe,
) -> MagnonsimStatus {
    match catch_unwind(f) {
        Ok(Ok(v)) => write_out(out, v),
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic in estimator");
            MagnonsimStatus::InternalError
        }
    }
}

/// Collective ladder amplitude `<j,m+1|I+|j,m>`.
#[no_mangle]
pub extern "C" fn magnonsim_ladder_element(
    j: c_double,
    m: c_double,
    out: *mut c_double,
) -> MagnonsimStatus {
    run_estimator(out, || magnonsim::hilbert::ladder_element(j, m))
}

/// Generalized Rabi frequency `sqrt(delta^2 + omega^2)` (MHz).
#[no_mangle]
pub extern "C" fn magnonsim_generalized_rabi(delta_mhz: c_double, rabi_mhz: c_double) -> c_double {
    magnonsim::hamiltonian::generalized_rabi(delta_mhz, rabi_mhz)
}

/// Magnon Rabi frequency of the `m -> m+1` transition (MHz).
#[no_mangle]
pub extern "C" fn magnonsim_magnon_rabi(
    a_perp_mhz: c_double,
    rabi_mhz: c_double,
    chi_mhz: c_double,
    j: c_double,
    m: c_double,
    out: *mut c_double,
) -> MagnonsimStatus {
    run_estimator(out, || magnonsim::hamiltonian::magnon_rabi(a_perp_mhz, rabi_mhz, chi_mhz, j, m))
}

/// Hartmann-Hahn resonance `w_n + a_par S0` (MHz).
#[no_mangle]
pub extern "C" fn magnonsim_hh_resonance(
    larmor_mhz: c_double,
    a_par_mhz: c_double,
    s0: c_double,
) -> c_double {
    magnonsim::hamiltonian::hh_resonance(larmor_mhz, a_par_mhz, s0)
}

/// Effective nucleus numbers from the differential Knight shift.
#[no_mangle]
pub extern "C" fn magnonsim_estimate_nuclei(
    delta_nu_mhz: c_double,
    hyperfine_total_mhz: c_double,
    abundance: c_double,
    out_species: *mut c_double,
    out_total: *mut c_double,
) -> MagnonsimStatus {
    match catch_unwind(|| {
        magnonsim::analysis::estimate_nuclei(delta_nu_mhz, hyperfine_total_mhz, abundance)
    }) {
        Ok(Ok((ns, nt))) => {
            let s = write_out(out_species, ns);
            if s != MagnonsimStatus::Ok {
                return s;
            }
            write_out(out_total, nt)
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic in estimator");
            MagnonsimStatus::InternalError
        }
    }
}

/// Geometric Knight-shift enhancement factor `8 / sqrt(27)`.
#[no_mangle]
pub extern "C" fn magnonsim_knight_factor() -> c_double {
    magnonsim::analysis::knight_factor()
}

/// Strain-induced non-collinear coupling in kHz.
#[no_mangle]
pub extern "C" fn magnonsim_strain_noncollinear(
    a_mhz: c_double,
    b_q_mhz: c_double,
    larmor_mhz: c_double,
    out: *mut c_double,
) -> MagnonsimStatus {
    run_estimator(out, || magnonsim::analysis::strain_noncollinear(a_mhz, b_q_mhz, larmor_mhz))
}

/// Quadrupolar-limited dephasing time in us.
#[no_mangle]
pub extern "C" fn magnonsim_quadrupolar_t2(
    fwhm_khz: c_double,
    moment_ratio: c_double,
    out: *mut c_double,
) -> MagnonsimStatus {
    run_estimator(out, || magnonsim::analysis::quadrupolar_t2(fwhm_khz, moment_ratio))
}

/// Spin initialization fidelity bound `1 - I_end / I0`.
#[no_mangle]
pub extern "C" fn magnonsim_init_fidelity(
    i0: c_double,
    i_end: c_double,
    out: *mut c_double,
) -> MagnonsimStatus {
    run_estimator(out, || magnonsim::analysis::estimate_init_fidelity(i0, i_end))
}

/// Quality factor from a fitted relaxation time.
#[no_mangle]
pub extern "C" fn magnonsim_estimate_q(
    t1_us: c_double,
    f_rabi_mhz: c_double,
    spin_locked: bool,
    out: *mut c_double,
) -> MagnonsimStatus {
    run_estimator(out, || magnonsim::analysis::estimate_q(t1_us, f_rabi_mhz, spin_locked))
}

/// Quantization-axis tilt from the in-plane g-factors (rad).
#[no_mangle]
pub extern "C" fn magnonsim_tilt_from_g(
    g_110: c_double,
    g_m110: c_double,
    out: *mut c_double,
) -> MagnonsimStatus {
    run_estimator(out, || magnonsim::analysis::tilt_from_g(g_110, g_m110))
}

/// An experiment run: configuration plus, after execution, the CSV table
/// and JSON summary.
pub struct MagnonsimRun {
    kind: ExperimentKind,
    config_json: Option<String>,
    overrides: Vec<String>,
    csv: Option<CString>,
    summary: Option<CString>,
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, MagnonsimStatus> {
    if ptr.is_null() {
        set_error(&format!("{name} is null"));
        return Err(MagnonsimStatus::InvalidArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{name} is not valid UTF-8"));
        MagnonsimStatus::InvalidArgument
    })
}

/// Create a run handle for `kind` in {"novel", "esr", "ramsey",
/// "tomography"}; `config_json` may be null for defaults. Returns null on
/// error (see [`magnonsim_last_error`]).
///
/// # Safety
/// `kind` and (when non-null) `config_json` must be NUL-terminated strings
/// valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn magnonsim_run_new(
    kind: *const c_char,
    config_json: *const c_char,
) -> *mut MagnonsimRun {
    let kind = match str_arg(kind, "kind") {
        Ok(s) => s,
        Err(_) => return std::ptr::null_mut(),
    };
    let kind = match kind {
        "novel" => ExperimentKind::Novel,
        "esr" => ExperimentKind::Esr,
        "ramsey" => ExperimentKind::Ramsey,
        "tomography" => ExperimentKind::Tomography,
        other => {
            set_error(&format!("unknown experiment kind '{other}'"));
            return std::ptr::null_mut();
        }
    };
    let config_json = if config_json.is_null() {
        None
    } else {
        match str_arg(config_json, "config_json") {
            Ok(s) => Some(s.to_string()),
            Err(_) => return std::ptr::null_mut(),
        }
    };
    Box::into_raw(Box::new(MagnonsimRun {
        kind,
        config_json,
        overrides: Vec::new(),
        csv: None,
        summary: None,
    }))
}

/// Add a dotted-path override, e.g. `"n_samples=10"`.
///
/// # Safety
/// `run` must be a live handle from [`magnonsim_run_new`]; `assignment` a
/// valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn magnonsim_run_set(
    run: *mut MagnonsimRun,
    assignment: *const c_char,
) -> MagnonsimStatus {
    if run.is_null() {
        set_error("run handle is null");
        return MagnonsimStatus::InvalidArgument;
    }
    let assignment = match str_arg(assignment, "assignment") {
        Ok(s) => s.to_string(),
        Err(status) => return status,
    };
    (*run).overrides.push(assignment);
    MagnonsimStatus::Ok
}

/// Execute the run; on success the CSV and summary become available.
///
/// # Safety
/// `run` must be a live handle from [`magnonsim_run_new`].
#[no_mangle]
pub unsafe extern "C" fn magnonsim_run_execute(run: *mut MagnonsimRun) -> MagnonsimStatus {
    if run.is_null() {
        set_error("run handle is null");
        return MagnonsimStatus::InvalidArgument;
    }
    let handle = &mut *run;
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        run_experiment(handle.kind, handle.config_json.as_deref(), &handle.overrides)
    }));
    match outcome {
        Ok(Ok((csv, summary))) => {
            handle.csv = CString::new(csv).ok();
            handle.summary = CString::new(summary.to_string()).ok();
            MagnonsimStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic during experiment execution");
            MagnonsimStatus::InternalError
        }
    }
}

/// CSV result table of an executed run; null if not executed. Valid until
/// the handle is freed or executed again.
///
/// # Safety
/// `run` must be a live handle from [`magnonsim_run_new`].
#[no_mangle]
pub unsafe extern "C" fn magnonsim_run_csv(run: *const MagnonsimRun) -> *const c_char {
    if run.is_null() {
        return std::ptr::null();
    }
    (*run).csv.as_ref().map_or(std::ptr::null(), |s| s.as_ptr())
}

/// JSON summary of an executed run; null if not executed.
///
/// # Safety
/// `run` must be a live handle from [`magnonsim_run_new`].
#[no_mangle]
pub unsafe extern "C" fn magnonsim_run_summary(run: *const MagnonsimRun) -> *const c_char {
    if run.is_null() {
        return std::ptr::null();
    }
    (*run).summary.as_ref().map_or(std::ptr::null(), |s| s.as_ptr())
}

/// Release a run handle. Null is a no-op.
///
/// # Safety
/// `run` must be null or a handle from [`magnonsim_run_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn magnonsim_run_free(run: *mut MagnonsimRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
