//! C ABI for the adiabatic quantum-jump simulator.
//!
//! Configurations and ensembles are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`AqjStatus`]; on failure a message is available from
//! [`aqj_last_error_message`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adiabatic_qjump::ensemble::{run_ensemble, EnsembleOptions, EnsembleResult};
use adiabatic_qjump::renorm::frame_at;
use adiabatic_qjump::stats::FluctuationReport;
use adiabatic_qjump::{Error, Order, SystemConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AqjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnsupportedOrder = 3,
    UnknownKey = 4,
    ZeroProbability = 5,
    EmptyEnsemble = 6,
    TooFewSamples = 7,
    Io = 8,
    Serialization = 9,
    Panic = 10,
}

/// Simulation parameters; created with default parameters by [`aqj_config_new`].
pub struct AqjConfig {
    inner: SystemConfig,
}

/// Finished trajectory ensemble of one dynamics order.
pub struct AqjEnsemble {
    config: SystemConfig,
    result: EnsembleResult,
}

/// Dynamical frame of order n at time t. Kets are given in the diabatic
/// basis ordered (e, g).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AqjFrame {
    pub order: u32,
    pub t: f64,
    pub energy_g: f64,
    pub energy_e: f64,
    pub omega01: f64,
    pub ket_e_re: [f64; 2],
    pub ket_e_im: [f64; 2],
    pub ket_g_re: [f64; 2],
    pub ket_g_im: [f64; 2],
    pub w_ge_re: f64,
    pub w_ge_im: f64,
    pub m1: f64,
    pub m2_re: f64,
    pub m2_im: f64,
    pub alpha: f64,
}

/// Fluctuation-theorem statistics of an ensemble. `ift_mean` and `ift_sem`
/// are NaN when the work order differs from the dynamics order.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AqjReport {
    pub dynamics_order: u32,
    pub work_order: u32,
    pub n_traj: u64,
    pub beta: f64,
    pub delta_f: f64,
    pub jarzynski_mean: f64,
    pub jarzynski_mean_sem: f64,
    pub jarzynski_deviation: f64,
    pub jarzynski_deviation_sem: f64,
    pub ift_mean: f64,
    pub ift_sem: f64,
    pub mean_work: f64,
    pub mean_work_sem: f64,
    pub second_moment: f64,
    pub second_moment_sem: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(AqjStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnsupportedOrder(_) => AqjStatus::UnsupportedOrder,
            Error::InvalidField { .. } => AqjStatus::InvalidArgument,
            Error::UnknownKey(_) => AqjStatus::UnknownKey,
            Error::ZeroProbabilityCollapse { .. } => AqjStatus::ZeroProbability,
            Error::EmptyEnsemble => AqjStatus::EmptyEnsemble,
            Error::TooFewSamples { .. } => AqjStatus::TooFewSamples,
            Error::Io { .. } => AqjStatus::Io,
            Error::Json(_) => AqjStatus::Serialization,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AqjStatus::NullPointer, format!("`{what}` is null"))
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AqjStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AqjStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_owned());
            set_last_error(format!("internal panic: {message}"));
            AqjStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(AqjStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

fn order_arg(n: u32) -> Result<Order, Failure> {
    Ok(Order::try_from(n)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aqj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn aqj_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// New configuration with default parameters. Never returns NULL.
#[no_mangle]
pub extern "C" fn aqj_config_new() -> *mut AqjConfig {
    Box::into_raw(Box::new(AqjConfig {
        inner: SystemConfig::default(),
    }))
}

/// # Safety
/// `config` must be NULL or a handle from [`aqj_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aqj_config_free(config: *mut AqjConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Sets a parameter by key (`beta`, `n_steps`, `n_order`, ...) from text.
///
/// # Safety
/// `config` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn aqj_config_set(
    config: *mut AqjConfig,
    key: *const c_char,
    value: *const c_char,
) -> AqjStatus {
    guard(|| {
        let config = config.as_mut().ok_or_else(|| null("config"))?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        Ok(config.inner.set(key, value)?)
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn aqj_config_validate(config: *const AqjConfig) -> AqjStatus {
    guard(|| {
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        Ok(config.inner.validate()?)
    })
}

/// Fills `out` with the order-`n` frame at time `t`.
///
/// # Safety
/// `config` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aqj_frame_at(
    config: *const AqjConfig,
    t: f64,
    n: u32,
    out: *mut AqjFrame,
) -> AqjStatus {
    guard(|| {
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        config.inner.validate()?;
        let f = frame_at(&config.inner, t, n)?;
        let ket = |k: &adiabatic_qjump::mat2::Ket| ([k.0[0].re, k.0[1].re], [k.0[0].im, k.0[1].im]);
        let (ket_e_re, ket_e_im) = ket(&f.ket_e);
        let (ket_g_re, ket_g_im) = ket(&f.ket_g);
        *out = AqjFrame {
            order: n,
            t: f.t,
            energy_g: f.energy_g,
            energy_e: f.energy_e,
            omega01: f.omega01,
            ket_e_re,
            ket_e_im,
            ket_g_re,
            ket_g_im,
            w_ge_re: f.w_ge.re,
            w_ge_im: f.w_ge.im,
            m1: f.m1,
            m2_re: f.m2.re,
            m2_im: f.m2.im,
            alpha: f.alpha,
        };
        Ok(())
    })
}

/// Runs trajectories 0..n_traj with order-`order` dynamics on `workers`
/// threads (0 picks a default) and stores a new handle in `*out`.
///
/// # Safety
/// `config` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aqj_ensemble_run(
    config: *const AqjConfig,
    order: u32,
    n_traj: u64,
    workers: usize,
    out: *mut *mut AqjEnsemble,
) -> AqjStatus {
    guard(|| {
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let options = EnsembleOptions {
            workers,
            ..EnsembleOptions::default()
        };
        let result = run_ensemble(&config.inner, order_arg(order)?, n_traj, &options)?;
        *out = Box::into_raw(Box::new(AqjEnsemble {
            config: config.inner.clone(),
            result,
        }));
        Ok(())
    })
}

/// Number of trajectories in the ensemble, 0 for NULL.
///
/// # Safety
/// `ensemble` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aqj_ensemble_len(ensemble: *const AqjEnsemble) -> u64 {
    ensemble.as_ref().map_or(0, |e| e.result.len() as u64)
}

/// Copies the first `len` work samples, with heats assigned in frame
/// `n_prime`, into `out`.
///
/// # Safety
/// `ensemble` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn aqj_ensemble_work(
    ensemble: *const AqjEnsemble,
    n_prime: u32,
    out: *mut f64,
    len: usize,
) -> AqjStatus {
    guard(|| {
        let e = ensemble.as_ref().ok_or_else(|| null("ensemble"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len > e.result.len() {
            return Err(Failure(
                AqjStatus::InvalidArgument,
                format!("requested {len} samples from an ensemble of {}", e.result.len()),
            ));
        }
        let work = e.result.work(order_arg(n_prime)?, len)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&work.samples);
        Ok(())
    })
}

/// Jarzynski, IFT and moment statistics with work assigned in frame `n_prime`.
///
/// # Safety
/// `ensemble` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aqj_ensemble_report(
    ensemble: *const AqjEnsemble,
    n_prime: u32,
    out: *mut AqjReport,
) -> AqjStatus {
    guard(|| {
        let e = ensemble.as_ref().ok_or_else(|| null("ensemble"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let n_prime = order_arg(n_prime)?;
        let n = e.result.len();
        let work = e.result.work(n_prime, n)?;
        let entropy = (n_prime == e.result.order).then(|| e.result.entropy(n));
        let r = FluctuationReport::new(&work, entropy.as_deref(), &e.config, e.result.delta_f)?;
        let (ift_mean, ift_sem) = r.ift_mean.map_or((f64::NAN, f64::NAN), |i| (i.value, i.sem));
        *out = AqjReport {
            dynamics_order: r.dynamics_order.into(),
            work_order: r.work_order.into(),
            n_traj: r.n_traj,
            beta: r.beta,
            delta_f: r.delta_f,
            jarzynski_mean: r.jarzynski_mean.value,
            jarzynski_mean_sem: r.jarzynski_mean.sem,
            jarzynski_deviation: r.jarzynski_deviation.value,
            jarzynski_deviation_sem: r.jarzynski_deviation.sem,
            ift_mean,
            ift_sem,
            mean_work: r.first_moment.value,
            mean_work_sem: r.first_moment.sem,
            second_moment: r.second_moment.value,
            second_moment_sem: r.second_moment.sem,
        };
        Ok(())
    })
}

/// # Safety
/// `ensemble` must be NULL or a handle from [`aqj_ensemble_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aqj_ensemble_free(ensemble: *mut AqjEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}
