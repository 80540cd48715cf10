//! C interface to the `qcontact` library.
//!
//! Models and trajectories are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every function returns a
//! [`QcStatus`]; on failure the message is available from
//! [`qc_last_error_message`] on the same thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qcontact::config::ModelConfig;
use qcontact::dynamics::{integrate, IntegratorConfig, Sampling, Trajectory};
use qcontact::geometry::dissipation_residual;
use qcontact::models::{self, Model};
use qcontact::{Error, ExtendedPoint};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Unknown builtin, malformed JSON or an invalid model description.
    ConfigError = 3,
    /// The point is outside the model's domain, e.g. a singular Lagrangian.
    EvaluationError = 4,
    IntegrationError = 5,
    /// The output buffer is smaller than the data; nothing was written.
    BufferTooSmall = 6,
    Panic = 99,
}

/// A model loaded from the builtin registry or a JSON description.
pub struct QcModel {
    model: Model,
}

/// Samples of one integrated trajectory.
pub struct QcTrajectory {
    traj: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(err: &Error) -> QcStatus {
    match err {
        Error::Parse(_)
        | Error::UnknownModel(_)
        | Error::Config { .. }
        | Error::Model(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::InvalidDimensions { .. } => QcStatus::ConfigError,
        Error::DimensionMismatch { .. } | Error::InvalidConfig(_) => QcStatus::InvalidArgument,
        Error::StepSizeUnderflow { .. } | Error::StepLimit { .. } | Error::NonFiniteState { .. } => {
            QcStatus::IntegrationError
        }
        _ => QcStatus::EvaluationError,
    }
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (QcStatus, String)>) -> QcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QcStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QcStatus::Panic
        }
    }
}

fn lib(err: Error) -> (QcStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (QcStatus, String) {
    (QcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, (QcStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (QcStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn model_ref<'a>(m: *const QcModel) -> Result<&'a Model, (QcStatus, String)> {
    m.as_ref().map(|m| &m.model).ok_or_else(|| null("model"))
}

unsafe fn point<'a>(m: &Model, x: *const f64, len: usize) -> Result<&'a [f64], (QcStatus, String)> {
    if x.is_null() {
        return Err(null("point"));
    }
    let dim = m.dims().dim();
    if len != dim {
        return Err((
            QcStatus::InvalidArgument,
            format!("point has {len} coordinates, model needs {dim}"),
        ));
    }
    Ok(std::slice::from_raw_parts(x, len))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, capacity: usize) -> Result<(), (QcStatus, String)> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if capacity < src.len() {
        return Err((
            QcStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a builtin model such as `"e1"` or `"rocket(5000, 9.81)"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qc_model_from_builtin(spec: *const c_char, out: *mut *mut QcModel) -> QcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = models::builtin(text(spec, "spec")?).map_err(lib)?;
        store(out, QcModel { model });
        Ok(())
    })
}

/// Builds a model from a JSON configuration document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qc_model_from_json(json: *const c_char, out: *mut *mut QcModel) -> QcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = ModelConfig::from_json(text(json, "json")?, "<json>").map_err(lib)?;
        let model = config.build("<json>").map_err(lib)?;
        store(out, QcModel { model });
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from a `qc_model_from_*` call and not be used again.
#[no_mangle]
pub unsafe extern "C" fn qc_model_free(model: *mut QcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Writes `n` and `qcount`; the state dimension is `2n + qcount`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qc_model_dims(model: *const QcModel, n: *mut usize, qcount: *mut usize) -> QcStatus {
    guard(|| {
        let m = model_ref(model)?;
        if n.is_null() || qcount.is_null() {
            return Err(null("output"));
        }
        *n = m.dims().n;
        *qcount = m.dims().qcount;
        Ok(())
    })
}

/// Copies the model's default initial state into `out`.
///
/// # Safety
/// `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn qc_model_initial_state(model: *const QcModel, out: *mut f64, capacity: usize) -> QcStatus {
    guard(|| copy_out(&model_ref(model)?.initial, out, capacity))
}

/// Evaluates the model's vector field at `x` (length `len`).
///
/// # Safety
/// `x` must hold `len` doubles and `out` `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn qc_model_vector_field(
    model: *const QcModel,
    x: *const f64,
    len: usize,
    out: *mut f64,
    capacity: usize,
) -> QcStatus {
    guard(|| {
        let m = model_ref(model)?;
        let x = point(m, x, len)?;
        let v = m.vector_field().map_err(lib)?.eval(x).map_err(lib)?;
        copy_out(&v, out, capacity)
    })
}

/// Evaluates the Hamiltonian, or the energy of a Lagrangian model.
///
/// # Safety
/// `x` must hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_model_hamiltonian(
    model: *const QcModel,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> QcStatus {
    guard(|| {
        let m = model_ref(model)?;
        let x = point(m, x, len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.hamiltonian().map_err(lib)?.value(x).map_err(lib)?;
        Ok(())
    })
}

/// `X_H(H) + H sum_i R_i(H)` at `x`.
///
/// # Safety
/// `x` must hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_model_dissipation_residual(
    model: *const QcModel,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> QcStatus {
    guard(|| {
        let m = model_ref(model)?;
        let x = point(m, x, len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let h = m.hamiltonian().map_err(lib)?;
        *out = dissipation_residual(&m.structure(), h.as_ref(), x).map_err(lib)?;
        Ok(())
    })
}

/// Integrates the model's field with the adaptive Dormand-Prince method.
///
/// `initial` may be null to start from the model's default state.
/// A positive `sample_interval` samples on that grid; otherwise every
/// accepted step is kept.
///
/// # Safety
/// `initial` must be null or hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_simulate(
    model: *const QcModel,
    initial: *const f64,
    len: usize,
    t0: f64,
    t1: f64,
    abs_tol: f64,
    rel_tol: f64,
    sample_interval: f64,
    out: *mut *mut QcTrajectory,
) -> QcStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let x0 = if initial.is_null() {
            &m.initial[..]
        } else {
            point(m, initial, len)?
        };
        let mut config = IntegratorConfig::rk45(t0, t1, abs_tol, rel_tol);
        if sample_interval > 0.0 {
            config = config.with_sampling(Sampling::Interval(sample_interval));
        }
        let start = ExtendedPoint::new(m.dims(), x0.to_vec()).map_err(lib)?;
        let traj = integrate(m.vector_field().map_err(lib)?.as_ref(), &start, &config).map_err(lib)?;
        store(out, QcTrajectory { traj });
        Ok(())
    })
}

/// Number of samples, or zero for a null handle.
///
/// # Safety
/// `traj` must be null or a live trajectory.
#[no_mangle]
pub unsafe extern "C" fn qc_trajectory_len(traj: *const QcTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.len())
}

/// State dimension of each sample, or zero for a null handle.
///
/// # Safety
/// `traj` must be null or a live trajectory.
#[no_mangle]
pub unsafe extern "C" fn qc_trajectory_dim(traj: *const QcTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.dims.dim())
}

/// Copies the sample times.
///
/// # Safety
/// `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn qc_trajectory_times(traj: *const QcTrajectory, out: *mut f64, capacity: usize) -> QcStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        copy_out(&t.traj.times, out, capacity)
    })
}

/// Copies the states row by row, `len * dim` values.
///
/// # Safety
/// `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn qc_trajectory_states(traj: *const QcTrajectory, out: *mut f64, capacity: usize) -> QcStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        let flat: Vec<f64> = t.traj.states.concat();
        copy_out(&flat, out, capacity)
    })
}

/// Releases a trajectory. Null is ignored.
///
/// # Safety
/// `traj` must come from `qc_simulate` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn qc_trajectory_free(traj: *mut QcTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}
