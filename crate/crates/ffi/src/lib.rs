//! C ABI over `onebit`.
//!
//! Objects cross the boundary as opaque pointers created by a `*_new`
//! function and released by the matching `*_free`. Every fallible call
//! returns an [`ObStatus`]; on failure, [`ob_last_error_message`] describes
//! the cause. Vectors are passed as pointer plus length, bits as `int8_t`
//! values of `+1` or `-1`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::{DMatrix, DVector};
use onebit::{Bit, Error, NoiseModel, PriorSpec, QuantizedFrame, RecoveryCache};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularCovariance = 3,
    LengthMismatch = 4,
    InvalidConfig = 5,
    Panic = 6,
}

/// Noise covariance with its Cholesky factor.
pub struct ObNoiseModel(NoiseModel);

/// Precomputed reduced-form quantities for one covariance.
pub struct ObRecoveryCache(RecoveryCache);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ObRecoveryInfo {
    pub theta_hat: f64,
    pub objective: f64,
    pub iterations: usize,
    pub fast_path: bool,
    pub consistent: bool,
    pub hit_iteration_cap: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ObSimSummary {
    pub nmse: f64,
    pub median_nmse: f64,
    pub trials: usize,
    pub capped_steps: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObPriorKind {
    /// Parameters are the lower and upper bounds.
    Uniform = 0,
    /// Parameters are the mean and standard deviation.
    Gaussian = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: ObStatus, msg: impl Into<String>) -> ObStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> ObStatus {
    let status = match e {
        Error::InvalidArgument { .. } => ObStatus::InvalidArgument,
        Error::SingularCovariance(_) => ObStatus::SingularCovariance,
        Error::LengthMismatch { .. } => ObStatus::LengthMismatch,
    };
    fail(status, e.to_string())
}

/// Runs `f`, mapping errors and panics to a status.
fn guard(f: impl FnOnce() -> Result<(), ObStatus>) -> ObStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ObStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(ObStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), ObStatus> {
    if p.is_null() {
        Err(fail(ObStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be valid for `n` reads unless `n` is 0.
unsafe fn slice<'a, T>(p: *const T, n: usize, name: &str) -> Result<&'a [T], ObStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, n))
}

/// # Safety
/// `p` must be valid for `n` writes unless `n` is 0.
unsafe fn slice_mut<'a, T>(p: *mut T, n: usize, name: &str) -> Result<&'a mut [T], ObStatus> {
    if n == 0 {
        return Ok(&mut []);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts_mut(p, n))
}

fn bits_from(raw: &[i8]) -> Result<Vec<Bit>, ObStatus> {
    raw.iter()
        .map(|b| Bit::try_from(*b).map_err(from_error))
        .collect()
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ob_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ob_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn store_noise(
    out: *mut *mut ObNoiseModel,
    model: Result<NoiseModel, Error>,
) -> Result<(), ObStatus> {
    let model = model.map_err(from_error)?;
    // SAFETY: the caller checked `out` for null.
    unsafe { *out = Box::into_raw(Box::new(ObNoiseModel(model))) };
    Ok(())
}

/// White noise `σ_v² I_n`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ob_noise_white(
    n: usize,
    sigma_v: f64,
    out: *mut *mut ObNoiseModel,
) -> ObStatus {
    guard(|| {
        non_null(out, "out")?;
        store_noise(out, NoiseModel::white(n, sigma_v))
    })
}

/// Toeplitz noise `(p_tot / n) ρ^|i−j|`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ob_noise_colored(
    n: usize,
    p_tot: f64,
    rho: f64,
    out: *mut *mut ObNoiseModel,
) -> ObStatus {
    guard(|| {
        non_null(out, "out")?;
        store_noise(out, NoiseModel::colored(n, p_tot, rho))
    })
}

/// Arbitrary SPD covariance given as `n × n` row-major values.
///
/// # Safety
/// `values` must hold `n * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ob_noise_from_covariance(
    n: usize,
    values: *const f64,
    out: *mut *mut ObNoiseModel,
) -> ObStatus {
    guard(|| {
        non_null(out, "out")?;
        let len = n
            .checked_mul(n)
            .ok_or_else(|| fail(ObStatus::InvalidArgument, "n is too large"))?;
        let v = slice(values, len, "values")?;
        store_noise(
            out,
            NoiseModel::from_covariance(DMatrix::from_row_slice(n, n, v)),
        )
    })
}

/// # Safety
/// `noise` must be null or a pointer from an `ob_noise_*` constructor that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ob_noise_free(noise: *mut ObNoiseModel) {
    if !noise.is_null() {
        drop(Box::from_raw(noise));
    }
}

/// Sensor count, or 0 for a null handle.
///
/// # Safety
/// `noise` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ob_noise_dim(noise: *const ObNoiseModel) -> usize {
    noise.as_ref().map_or(0, |m| m.0.dim())
}

/// Trace of the covariance, or NaN for a null handle.
///
/// # Safety
/// `noise` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ob_noise_total_power(noise: *const ObNoiseModel) -> f64 {
    noise.as_ref().map_or(f64::NAN, |m| m.0.total_power())
}

/// Builds the recovery cache; the noise handle may be freed afterwards.
///
/// # Safety
/// `noise` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_cache_new(
    noise: *const ObNoiseModel,
    out: *mut *mut ObRecoveryCache,
) -> ObStatus {
    guard(|| {
        non_null(noise, "noise")?;
        non_null(out, "out")?;
        let cache = RecoveryCache::new(&(*noise).0).map_err(from_error)?;
        *out = Box::into_raw(Box::new(ObRecoveryCache(cache)));
        Ok(())
    })
}

/// # Safety
/// `cache` must be null or a live handle from [`ob_cache_new`].
#[no_mangle]
pub unsafe extern "C" fn ob_cache_free(cache: *mut ObRecoveryCache) {
    if !cache.is_null() {
        drop(Box::from_raw(cache));
    }
}

/// Sensor count, or 0 for a null handle.
///
/// # Safety
/// `cache` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ob_cache_dim(cache: *const ObRecoveryCache) -> usize {
    cache.as_ref().map_or(0, |c| c.0.dim())
}

/// Writes the fusion weights `η` into `eta_out[0..n]`.
///
/// # Safety
/// `cache` must be live and `eta_out` valid for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn ob_cache_eta(
    cache: *const ObRecoveryCache,
    eta_out: *mut f64,
    n: usize,
) -> ObStatus {
    guard(|| {
        non_null(cache, "cache")?;
        let cache = &(*cache).0;
        if n != cache.dim() {
            return Err(fail(
                ObStatus::LengthMismatch,
                format!("n: expected {}, got {n}", cache.dim()),
            ));
        }
        slice_mut(eta_out, n, "eta_out")?.copy_from_slice(cache.eta().as_slice());
        Ok(())
    })
}

/// Weighted least-squares estimate `ηᵀz`.
///
/// # Safety
/// `cache` must be live, `z` valid for `n` reads and `theta_out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_estimate_theta(
    cache: *const ObRecoveryCache,
    z: *const f64,
    n: usize,
    theta_out: *mut f64,
) -> ObStatus {
    guard(|| {
        non_null(cache, "cache")?;
        non_null(theta_out, "theta_out")?;
        let z = DVector::from_column_slice(slice(z, n, "z")?);
        *theta_out = (*cache).0.estimate_theta(&z).map_err(from_error)?;
        Ok(())
    })
}

/// Sign quantizer `r_i = sgn(z_i − τ_i)` with `sgn(0) = +1`.
///
/// # Safety
/// `z` and `tau` must be valid for `n` reads and `bits_out` for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn ob_quantize(
    z: *const f64,
    tau: *const f64,
    n: usize,
    bits_out: *mut i8,
) -> ObStatus {
    guard(|| {
        let z = DVector::from_column_slice(slice(z, n, "z")?);
        let tau = DVector::from_column_slice(slice(tau, n, "tau")?);
        let out = slice_mut(bits_out, n, "bits_out")?;
        let frame = onebit::quantize(&z, &tau, 0).map_err(from_error)?;
        for (o, b) in out.iter_mut().zip(frame.bits()) {
            *o = i8::from(*b);
        }
        Ok(())
    })
}

/// Recovers the unquantized readings from one frame of bits and thresholds.
/// `z_out` receives the minimizer; `info_out` the estimate and diagnostics.
///
/// # Safety
/// `cache` must be live; `tau`, `bits` valid for `n` reads; `z_out` valid for
/// `n` writes or null; `info_out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_solve_cqp(
    cache: *const ObRecoveryCache,
    tau: *const f64,
    bits: *const i8,
    n: usize,
    z_out: *mut f64,
    info_out: *mut ObRecoveryInfo,
) -> ObStatus {
    guard(|| {
        non_null(cache, "cache")?;
        non_null(info_out, "info_out")?;
        let tau = DVector::from_column_slice(slice(tau, n, "tau")?);
        let bits = bits_from(slice(bits, n, "bits")?)?;
        let frame = QuantizedFrame::new(0, bits, tau).map_err(from_error)?;
        let r = onebit::solve_cqp(&(*cache).0, &frame).map_err(from_error)?;
        if !z_out.is_null() {
            slice_mut(z_out, n, "z_out")?.copy_from_slice(r.z_hat.as_slice());
        }
        *info_out = ObRecoveryInfo {
            theta_hat: r.theta_hat,
            objective: r.objective,
            iterations: r.iterations,
            fast_path: r.fast_path,
            consistent: r.consistent,
            hit_iteration_cap: r.hit_iteration_cap,
        };
        Ok(())
    })
}

/// Mutual information in bits between the parameter and one sign bit.
///
/// # Safety
/// `mi_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ob_mutual_information(
    prior: ObPriorKind,
    param_a: f64,
    param_b: f64,
    tau: f64,
    sigma_v: f64,
    mi_out: *mut f64,
) -> ObStatus {
    guard(|| {
        non_null(mi_out, "mi_out")?;
        let spec = match prior {
            ObPriorKind::Uniform => PriorSpec::uniform(param_a, param_b),
            ObPriorKind::Gaussian => PriorSpec::gaussian(param_a, param_b),
        }
        .map_err(from_error)?;
        *mi_out = onebit::mutual_information(&spec, tau, sigma_v).map_err(from_error)?;
        Ok(())
    })
}

/// Runs a Monte Carlo simulation from a JSON config, the same schema the
/// command-line tool reads.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_simulate_json(
    config_json: *const c_char,
    out: *mut ObSimSummary,
) -> ObStatus {
    guard(|| {
        non_null(config_json, "config_json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|_| fail(ObStatus::InvalidConfig, "config is not valid UTF-8"))?;
        let cfg = onebit::cli::parse_config_str(text)
            .map_err(|e| fail(ObStatus::InvalidConfig, e.message))?;
        let report = onebit::run_monte_carlo(&cfg).map_err(from_error)?;
        *out = ObSimSummary {
            nmse: report.nmse,
            median_nmse: report.median_nmse(),
            trials: report.trials(),
            capped_steps: report.capped_steps,
        };
        Ok(())
    })
}
