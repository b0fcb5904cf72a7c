//! C ABI for the periscope library.
//!
//! Every fallible function returns a [`PeriscopeStatus`]. On failure the
//! message is available from [`periscope_last_error_message`] on the same
//! thread. Objects are opaque handles released with the matching `*_free`
//! function; `*_free` accepts NULL. Output arrays are
//! caller-allocated; their required length is documented per function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use periscope::diagnostics;
use periscope::harmonic;
use periscope::persist;
use periscope::significance::Reduction;
use periscope::study::{self, ReductionMethod};
use periscope::wavelet::{self, WaveletFamily};
use periscope::{Error, Family, FitOptions, FitResult, InnovationLaw, InnovationSpec, ModelKind, ModelSpec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriscopeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Invariant = 3,
    Schema = 4,
    Io = 5,
    Json = 6,
    Diverged = 7,
    NonFiniteStart = 8,
    DegenerateData = 9,
    CovarianceUnavailable = 10,
    Positivity = 11,
    UnsupportedWavelet = 12,
    Csv = 13,
    Config = 14,
    BufferTooSmall = 15,
    Utf8 = 16,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriscopeKind {
    Pgarch = 0,
    Pacd = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriscopeFamily {
    Omega = 0,
    Alpha = 1,
    Beta = 2,
    Lambda = 3,
    Gamma = 4,
    Delta = 5,
    SigmaSq = 6,
}

/// A model specification.
pub struct PeriscopeModel(ModelSpec);

/// A fitted model with its asymptotic covariance.
pub struct PeriscopeFit(FitResult);

/// A Fourier or wavelet reduction of a fit.
pub struct PeriscopeReduction(Reduction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PeriscopeStatus {
    use PeriscopeStatus as S;
    match e {
        Error::InvalidArgument(_) => S::InvalidArgument,
        Error::Invariant { .. } => S::Invariant,
        Error::Schema(_) => S::Schema,
        Error::Io { .. } => S::Io,
        Error::Json(_) => S::Json,
        Error::Diverged { .. } => S::Diverged,
        Error::NonFiniteStart => S::NonFiniteStart,
        Error::DegenerateData(_) => S::DegenerateData,
        Error::CovarianceUnavailable(_) => S::CovarianceUnavailable,
        Error::Positivity { .. } => S::Positivity,
        Error::UnsupportedWavelet(_) => S::UnsupportedWavelet,
        Error::Csv { .. } | Error::MissingColumn { .. } => S::Csv,
        Error::Config(_) => S::Config,
        Error::Stage { source, .. } => status_of(source),
    }
}

enum Failure {
    Status(PeriscopeStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn fail(status: PeriscopeStatus, msg: impl Into<String>) -> Failure {
    Failure::Status(status, msg.into())
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> PeriscopeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PeriscopeStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Ok(Err(Failure::Status(s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {m}"));
            PeriscopeStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(PeriscopeStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(PeriscopeStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(PeriscopeStatus::NullPointer, format!("{what} is null")))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(PeriscopeStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(PeriscopeStatus::Utf8, format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(PeriscopeStatus::NullPointer, "output handle pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn copy_into(dst: &mut [f64], src: &[f64]) -> Result<(), Failure> {
    if dst.len() < src.len() {
        return Err(fail(
            PeriscopeStatus::BufferTooSmall,
            format!("output buffer holds {} values, {} needed", dst.len(), src.len()),
        ));
    }
    dst[..src.len()].copy_from_slice(src);
    Ok(())
}

fn family(f: PeriscopeFamily) -> Family {
    match f {
        PeriscopeFamily::Omega => Family::Omega,
        PeriscopeFamily::Alpha => Family::Alpha,
        PeriscopeFamily::Beta => Family::Beta,
        PeriscopeFamily::Lambda => Family::Lambda,
        PeriscopeFamily::Gamma => Family::Gamma,
        PeriscopeFamily::Delta => Family::Delta,
        PeriscopeFamily::SigmaSq => Family::SigmaSq,
    }
}

fn kind(k: PeriscopeKind) -> ModelKind {
    match k {
        PeriscopeKind::Pgarch => ModelKind::Pgarch,
        PeriscopeKind::Pacd => ModelKind::Pacd,
    }
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn periscope_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn periscope_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn periscope_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a PGARCH model from three arrays of length `nu`. `ged_shape > 0`
/// selects GED innovations with that shape; otherwise standard normal.
#[no_mangle]
pub unsafe extern "C" fn periscope_model_pgarch(
    nu: usize,
    omega: *const f64,
    alpha: *const f64,
    beta: *const f64,
    ged_shape: f64,
    seed: u64,
    out: *mut *mut PeriscopeModel,
) -> PeriscopeStatus {
    guard(|| {
        let innovation = if ged_shape > 0.0 {
            InnovationSpec::new(InnovationLaw::Ged { shape: ged_shape }, seed)?
        } else {
            InnovationSpec::std_normal(seed)
        };
        let spec = ModelSpec::pgarch(
            input(omega, nu, "omega")?.to_vec(),
            input(alpha, nu, "alpha")?.to_vec(),
            input(beta, nu, "beta")?.to_vec(),
            innovation,
        )?;
        put(out, PeriscopeModel(spec))
    })
}

/// Builds a PACD model with seasonal gamma innovations from four arrays of length `nu`.
#[no_mangle]
pub unsafe extern "C" fn periscope_model_pacd(
    nu: usize,
    lambda: *const f64,
    gamma: *const f64,
    delta: *const f64,
    sigma_sq: *const f64,
    seed: u64,
    out: *mut *mut PeriscopeModel,
) -> PeriscopeStatus {
    guard(|| {
        let spec = ModelSpec::pacd(
            input(lambda, nu, "lambda")?.to_vec(),
            input(gamma, nu, "gamma")?.to_vec(),
            input(delta, nu, "delta")?.to_vec(),
            input(sigma_sq, nu, "sigma_sq")?.to_vec(),
            InnovationSpec::gamma_unit_mean(seed),
        )?;
        put(out, PeriscopeModel(spec))
    })
}

/// Parses a model JSON document. `fit_out` may be NULL; otherwise it
/// receives the fit section, or NULL if the document has none.
#[no_mangle]
pub unsafe extern "C" fn periscope_model_from_json(
    json: *const c_char,
    out: *mut *mut PeriscopeModel,
    fit_out: *mut *mut PeriscopeFit,
) -> PeriscopeStatus {
    guard(|| {
        let (spec, fit) = persist::from_json_str(string(json, "json")?)?;
        put(out, PeriscopeModel(spec))?;
        if !fit_out.is_null() {
            *fit_out = fit.map_or(ptr::null_mut(), |f| Box::into_raw(Box::new(PeriscopeFit(f))));
        }
        Ok(())
    })
}

/// Serializes a model; release the string with [`periscope_string_free`].
#[no_mangle]
pub unsafe extern "C" fn periscope_model_to_json(model: *const PeriscopeModel, out: *mut *mut c_char) -> PeriscopeStatus {
    guard(|| {
        let m = handle(model, "model")?;
        if out.is_null() {
            return Err(fail(PeriscopeStatus::NullPointer, "output pointer is null"));
        }
        let text = persist::to_json_string(&m.0, None)?;
        *out = CString::new(text).expect("JSON has no NULs").into_raw();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn periscope_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn periscope_model_free(model: *mut PeriscopeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Period of the model, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn periscope_model_nu(model: *const PeriscopeModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.nu())
}

#[no_mangle]
pub unsafe extern "C" fn periscope_model_kind(model: *const PeriscopeModel, out: *mut PeriscopeKind) -> PeriscopeStatus {
    guard(|| {
        let m = handle(model, "model")?;
        if out.is_null() {
            return Err(fail(PeriscopeStatus::NullPointer, "output pointer is null"));
        }
        *out = match m.0.kind() {
            ModelKind::Pgarch => PeriscopeKind::Pgarch,
            ModelKind::Pacd => PeriscopeKind::Pacd,
        };
        Ok(())
    })
}

/// Copies the `nu` seasonal values of one family into `out`.
#[no_mangle]
pub unsafe extern "C" fn periscope_model_param(
    model: *const PeriscopeModel,
    fam: PeriscopeFamily,
    out: *mut f64,
    out_len: usize,
) -> PeriscopeStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let f = family(fam);
        if !m.0.kind().families().contains(&f) {
            return Err(fail(
                PeriscopeStatus::InvalidArgument,
                format!("{f} is not a {} family", m.0.kind()),
            ));
        }
        copy_into(output(out, out_len, "out")?, m.0.param(f).values())
    })
}

/// Simulates `n_total - burn_in` observations into `x_out` and the
/// conditional variance or duration into `scale_out` (may be NULL).
#[no_mangle]
pub unsafe extern "C" fn periscope_simulate(
    model: *const PeriscopeModel,
    n_total: usize,
    burn_in: usize,
    seed: u64,
    x_out: *mut f64,
    scale_out: *mut f64,
    out_len: usize,
) -> PeriscopeStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let spec = m.0.clone().with_innovation(InnovationSpec {
            seed,
            ..*m.0.innovation()
        })?;
        let (x, s) = match spec.kind() {
            ModelKind::Pgarch => {
                let p = periscope::pgarch::simulate(&spec, n_total, burn_in, (0.0, 1.0))?;
                (p.y, p.h)
            }
            ModelKind::Pacd => {
                let p = periscope::pacd::simulate(&spec, n_total, burn_in, (1.0, 1.0))?;
                (p.u, p.psi)
            }
        };
        copy_into(output(x_out, out_len, "x_out")?, &x)?;
        if !scale_out.is_null() {
            copy_into(output(scale_out, out_len, "scale_out")?, &s)?;
        }
        Ok(())
    })
}

/// Quasi-likelihood fit of a series whose length is a multiple of `nu`.
#[no_mangle]
pub unsafe extern "C" fn periscope_fit(
    k: PeriscopeKind,
    x: *const f64,
    len: usize,
    nu: usize,
    out: *mut *mut PeriscopeFit,
) -> PeriscopeStatus {
    guard(|| {
        let data = input(x, len, "x")?;
        let fit = match kind(k) {
            ModelKind::Pgarch => periscope::pgarch::fit(data, nu, &FitOptions::default())?,
            ModelKind::Pacd => periscope::pacd::fit(data, nu, &FitOptions::default())?,
        };
        put(out, PeriscopeFit(fit))
    })
}

#[no_mangle]
pub unsafe extern "C" fn periscope_fit_free(fit: *mut PeriscopeFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// A new model handle holding the fitted parameters.
#[no_mangle]
pub unsafe extern "C" fn periscope_fit_model(fit: *const PeriscopeFit, out: *mut *mut PeriscopeModel) -> PeriscopeStatus {
    guard(|| {
        let f = handle(fit, "fit")?;
        put(out, PeriscopeModel(f.0.spec.clone()))
    })
}

/// Minimized quasi-likelihood objective, NaN for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn periscope_fit_objective(fit: *const PeriscopeFit) -> f64 {
    fit.as_ref().map_or(f64::NAN, |f| f.0.objective)
}

/// Serializes the fitted model together with its covariance.
#[no_mangle]
pub unsafe extern "C" fn periscope_fit_to_json(fit: *const PeriscopeFit, out: *mut *mut c_char) -> PeriscopeStatus {
    guard(|| {
        let f = handle(fit, "fit")?;
        if out.is_null() {
            return Err(fail(PeriscopeStatus::NullPointer, "output pointer is null"));
        }
        let text = persist::to_json_string(&f.0.spec, Some(&f.0))?;
        *out = CString::new(text).expect("JSON has no NULs").into_raw();
        Ok(())
    })
}

/// Reduces a fit. `method` is `"fourier"` or `"wavelet:<family>"`, e.g. `"wavelet:LA(5)"`.
#[no_mangle]
pub unsafe extern "C" fn periscope_reduce(
    fit: *const PeriscopeFit,
    method: *const c_char,
    alpha: f64,
    out: *mut *mut PeriscopeReduction,
) -> PeriscopeStatus {
    guard(|| {
        let f = handle(fit, "fit")?;
        let m: ReductionMethod = string(method, "method")?.parse()?;
        put(out, PeriscopeReduction(m.reduce(&f.0, alpha)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn periscope_reduction_free(r: *mut PeriscopeReduction) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of retained coefficients, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn periscope_reduction_n_parameters(r: *const PeriscopeReduction) -> usize {
    r.as_ref().map_or(0, |r| r.0.n_parameters())
}

/// A new model handle holding the reduced parameters.
#[no_mangle]
pub unsafe extern "C" fn periscope_reduction_model(
    r: *const PeriscopeReduction,
    out: *mut *mut PeriscopeModel,
) -> PeriscopeStatus {
    guard(|| put(out, PeriscopeModel(handle(r, "reduction")?.0.spec.clone())))
}

/// Coefficients, Z-scores and retained flags (1/0) of one family. Each
/// buffer needs room for the transform length: `nu` for Fourier, the
/// extended power-of-two length for wavelets. Any output may be NULL.
#[no_mangle]
pub unsafe extern "C" fn periscope_reduction_coefficients(
    r: *const PeriscopeReduction,
    fam: PeriscopeFamily,
    coefs: *mut f64,
    z: *mut f64,
    retained: *mut u8,
    len: usize,
    n_written: *mut usize,
) -> PeriscopeStatus {
    guard(|| {
        let red = handle(r, "reduction")?;
        let f = family(fam);
        let tc = red
            .0
            .coefs
            .get(&f)
            .ok_or_else(|| fail(PeriscopeStatus::InvalidArgument, format!("reduction has no {f} family")))?;
        let n = tc.coefs.len();
        if len < n {
            return Err(fail(
                PeriscopeStatus::BufferTooSmall,
                format!("buffers hold {len} values, {n} needed"),
            ));
        }
        if !coefs.is_null() {
            copy_into(output(coefs, len, "coefs")?, &tc.coefs)?;
        }
        if !z.is_null() {
            copy_into(output(z, len, "z")?, &tc.z)?;
        }
        if !retained.is_null() {
            let dst = slice::from_raw_parts_mut(retained, len);
            for (d, &m) in dst.iter_mut().zip(&tc.mask) {
                *d = m as u8;
            }
        }
        if !n_written.is_null() {
            *n_written = n;
        }
        Ok(())
    })
}

/// Forecasts `horizon` steps of `y^2` (PGARCH) or `u` (PACD) after the end
/// of `x`, whose first element is season 0.
#[no_mangle]
pub unsafe extern "C" fn periscope_forecast(
    model: *const PeriscopeModel,
    x: *const f64,
    len: usize,
    horizon: usize,
    out: *mut f64,
) -> PeriscopeStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let data = input(x, len, "x")?;
        let start = study::default_start(m.0.kind(), data, m.0.nu())?;
        let f = study::holdout_forecast(&m.0, data, start, horizon)?;
        copy_into(output(out, horizon, "out")?, &f)
    })
}

/// Fourier coefficients of `x` (length `n`) into `out` (length `n`).
#[no_mangle]
pub unsafe extern "C" fn periscope_fourier_analyze(x: *const f64, n: usize, out: *mut f64) -> PeriscopeStatus {
    guard(|| copy_into(output(out, n, "out")?, &harmonic::analyze(input(x, n, "x")?)?))
}

#[no_mangle]
pub unsafe extern "C" fn periscope_fourier_synthesize(f: *const f64, n: usize, out: *mut f64) -> PeriscopeStatus {
    guard(|| copy_into(output(out, n, "out")?, &harmonic::synthesize(input(f, n, "f")?)?))
}

unsafe fn wavelet_family(name: *const c_char) -> Result<WaveletFamily, Failure> {
    Ok(string(name, "wavelet")?.parse()?)
}

/// Forward DWT of a power-of-two length signal with the named wavelet (e.g. `"D(5)"`).
#[no_mangle]
pub unsafe extern "C" fn periscope_dwt(x: *const f64, n: usize, wavelet: *const c_char, out: *mut f64) -> PeriscopeStatus {
    guard(|| {
        let w = wavelet_family(wavelet)?;
        copy_into(output(out, n, "out")?, &wavelet::dwt(input(x, n, "x")?, w)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn periscope_idwt(w: *const f64, n: usize, wavelet: *const c_char, out: *mut f64) -> PeriscopeStatus {
    guard(|| {
        let fam = wavelet_family(wavelet)?;
        copy_into(output(out, n, "out")?, &wavelet::idwt(input(w, n, "w")?, fam)?)
    })
}

/// Ljung-Box statistic and p-value at `lag`.
#[no_mangle]
pub unsafe extern "C" fn periscope_ljung_box(
    x: *const f64,
    n: usize,
    lag: usize,
    q: *mut f64,
    p_value: *mut f64,
) -> PeriscopeStatus {
    guard(|| {
        let t = diagnostics::ljung_box(input(x, n, "x")?, lag)?;
        if q.is_null() || p_value.is_null() {
            return Err(fail(PeriscopeStatus::NullPointer, "output pointer is null"));
        }
        *q = t.q;
        *p_value = t.p_value;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_handle_sets_message() {
        let mut k = PeriscopeKind::Pgarch;
        let s = unsafe { periscope_model_kind(ptr::null(), &mut k) };
        assert_eq!(s, PeriscopeStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(periscope_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("model"));
        periscope_clear_error();
        assert!(periscope_last_error_message().is_null());
    }

    #[test]
    fn stage_errors_map_to_inner_status() {
        let e = Error::DegenerateData("x".into()).in_stage("fit");
        assert_eq!(status_of(&e), PeriscopeStatus::DegenerateData);
    }
}
