//! C ABI over the `eit-bec` solvers.
//!
//! Every entry point returns an [`EitStatus`]. On failure the message is kept
//! per thread and can be read with [`eit_last_error_message`]. Handles are
//! opaque and owned by the caller until passed to the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use eit_bec::analytic::{global_phase, group_velocity};
use eit_bec::propagation::RunOutput;
use eit_bec::{Error, SimulationConfig};

/// Result codes shared by all entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Validation = 3,
    Stability = 4,
    NonFinite = 5,
    GridMismatch = 6,
    StoppedLight = 7,
    Unsupported = 8,
    Io = 9,
    Format = 10,
    OutOfRange = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Parsed simulation configuration.
pub struct EitConfig(SimulationConfig);

/// Completed run holding its envelope snapshots.
pub struct EitRun(RunOutput);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> EitStatus {
    match e {
        Error::InvalidArgument(_) => EitStatus::InvalidArgument,
        Error::Validation { .. } => EitStatus::Validation,
        Error::Stability { .. } => EitStatus::Stability,
        Error::NonFinite { .. } => EitStatus::NonFinite,
        Error::GridMismatch(_) => EitStatus::GridMismatch,
        Error::StoppedLight { .. } => EitStatus::StoppedLight,
        Error::Unsupported(_) => EitStatus::Unsupported,
        Error::Io(_) => EitStatus::Io,
        Error::Format(_) => EitStatus::Format,
    }
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), (EitStatus, String)>) -> EitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EitStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EitStatus::Panic
        }
    }
}

fn lift<T>(r: eit_bec::Result<T>) -> Result<T, (EitStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (EitStatus, String) {
    (EitStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (EitStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), (EitStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// Parses a configuration from NUL-terminated text in the `key = value`
/// format used by the CLI.
///
/// # Safety
/// `text` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eit_config_parse(text: *const c_char, out: *mut *mut EitConfig) -> EitStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let s = CStr::from_ptr(text).to_str().map_err(|e| (EitStatus::InvalidArgument, format!("text is not UTF-8: {e}")))?;
        let cfg = lift(SimulationConfig::from_text(s))?;
        write_out(out, Box::into_raw(Box::new(EitConfig(cfg))), "out")
    })
}

/// # Safety
/// `config` must come from [`eit_config_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn eit_config_free(config: *mut EitConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the configured solver tier to completion.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eit_run(config: *const EitConfig, out: *mut *mut EitRun) -> EitStatus {
    guard(|| {
        let cfg = deref(config, "config")?;
        let output = lift(eit_bec::run(&cfg.0))?;
        write_out(out, Box::into_raw(Box::new(EitRun(output))), "out")
    })
}

/// # Safety
/// `run` must come from [`eit_run`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn eit_run_free(run: *mut EitRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eit_run_snapshot_count(run: *const EitRun, out: *mut usize) -> EitStatus {
    guard(|| write_out(out, deref(run, "run")?.0.snapshots.len(), "out"))
}

/// Number of grid points per snapshot.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eit_run_grid_len(run: *const EitRun, out: *mut usize) -> EitStatus {
    guard(|| {
        let r = deref(run, "run")?;
        let n = r.0.snapshots.first().map_or(0, |s| s.envelope.len());
        write_out(out, n, "out")
    })
}

fn snapshot(run: &EitRun, index: usize) -> Result<&eit_bec::propagation::Snapshot, (EitStatus, String)> {
    run.0
        .snapshots
        .get(index)
        .ok_or_else(|| (EitStatus::OutOfRange, format!("snapshot {index} of {}", run.0.snapshots.len())))
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eit_run_snapshot_time(run: *const EitRun, index: usize, out: *mut f64) -> EitStatus {
    guard(|| write_out(out, snapshot(deref(run, "run")?, index)?.time, "out"))
}

/// Copies snapshot `index` as interleaved `(re, im)` doubles into `buf`,
/// which must hold `2 * grid_len` values.
///
/// # Safety
/// `buf` must be valid for `buf_len` writes of `double`.
#[no_mangle]
pub unsafe extern "C" fn eit_run_copy_envelope(run: *const EitRun, index: usize, buf: *mut f64, buf_len: usize) -> EitStatus {
    guard(|| {
        let values = snapshot(deref(run, "run")?, index)?.envelope.values();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if buf_len < 2 * values.len() {
            return Err((EitStatus::BufferTooSmall, format!("need {} doubles, got {buf_len}", 2 * values.len())));
        }
        let dst = std::slice::from_raw_parts_mut(buf, 2 * values.len());
        for (pair, z) in dst.chunks_exact_mut(2).zip(values) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// `c G^2 / (g^2|alpha|^2 + G^2)`.
#[no_mangle]
pub extern "C" fn eit_group_velocity(g_control: f64, g: f64, alpha_mag: f64, c: f64) -> f64 {
    group_velocity(g_control, g, alpha_mag, c)
}

/// `W(t)` for the config's control schedule.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eit_integral_weight(config: *const EitConfig, t: f64, out: *mut f64) -> EitStatus {
    guard(|| {
        let cfg = &deref(config, "config")?.0;
        let w = lift(cfg.control.integral_weight(t, cfg.params.g(), cfg.params.alpha_mag()))?;
        write_out(out, w, "out")
    })
}

/// `(mu + u12|alpha|^2)(W(t) - t)` for the config's parameters and schedule.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eit_global_phase(config: *const EitConfig, t: f64, out: *mut f64) -> EitStatus {
    guard(|| {
        let cfg = &deref(config, "config")?.0;
        let p = &cfg.params;
        let phi = lift(global_phase(&cfg.control, t, p.mu(), p.u12(), p.alpha_mag(), p.g()))?;
        write_out(out, phi, "out")
    })
}

/// Message for the last failing call on this thread; empty after success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn eit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn eit_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}
