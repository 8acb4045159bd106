//! C ABI over the sov-xxx core.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `*_free`. Every call returns a [`SovStatus`]; on failure the
//! message is kept per thread and read with [`sov_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sov_xxx::cli_harness::{run, RunConfig};
use sov_xxx::form_factors::{form_factor, SpinOp};
use sov_xxx::scalar_products::gaudin_norm;
use sov_xxx::sov_states::SovBasis;
use sov_xxx::spectrum_tq::full_spectrum;
use sov_xxx::{ChainParams, Error, Spectrum, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SovStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// sampling, pole collision, degenerate nodes, non-convergence
    Numerical = 3,
    OutOfRange = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SovOperator {
    SigmaMinus = 0,
    SigmaZ = 1,
    SigmaPlus = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SovFormat {
    Json = 0,
    Csv = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SovComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for SovComplex {
    fn from(z: C64) -> Self {
        SovComplex { re: z.re, im: z.im }
    }
}

/// Chain parameters: η, ξ_1..ξ_N and the genericity margin.
pub struct SovParams {
    inner: ChainParams,
}

/// Full spectrum of a chain together with its SoV basis.
pub struct SovSpectrum {
    spectrum: Spectrum,
    basis: SovBasis,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SovStatus {
    match e {
        Error::InvalidArgument(_) | Error::Shape(_) => SovStatus::InvalidArgument,
        _ => SovStatus::Numerical,
    }
}

/// Run `f`, mapping errors and panics to a status and the thread's message.
fn guard<F: FnOnce() -> Result<(), (SovStatus, String)>>(f: F) -> SovStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SovStatus::Ok,
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("panic inside sov-xxx".into());
            SovStatus::Panic
        }
    }
}

fn core<T>(r: sov_xxx::Result<T>) -> Result<T, (SovStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (SovStatus, String) {
    (SovStatus::NullPointer, "null pointer argument".into())
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, (SovStatus, String)> {
    p.as_ref().ok_or_else(null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, (SovStatus, String)> {
    p.as_mut().ok_or_else(null)
}

fn record(s: &SovSpectrum, index: usize) -> Result<&sov_xxx::EigenRecord, (SovStatus, String)> {
    s.spectrum
        .records
        .get(index)
        .ok_or_else(|| (SovStatus::OutOfRange, format!("record {index} out of range (len {})", s.spectrum.records.len())))
}

/// Copy the last error message of this thread into `buf` (NUL-terminated).
/// Returns the message length without the NUL; 0 when there is none.
///
/// # Safety
/// `buf` must point to `cap` writable bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn sov_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sov_status_str(status: SovStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        SovStatus::Ok => b"ok\0",
        SovStatus::NullPointer => b"null pointer\0",
        SovStatus::InvalidArgument => b"invalid argument\0",
        SovStatus::Numerical => b"numerical failure\0",
        SovStatus::OutOfRange => b"index out of range\0",
        SovStatus::BufferTooSmall => b"buffer too small\0",
        SovStatus::Panic => b"internal panic\0",
    };
    s.as_ptr() as *const c_char
}

/// Parameters from explicit η and ξ arrays of length `n`.
///
/// # Safety
/// `xi` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sov_params_new(eta: SovComplex, xi: *const SovComplex, n: usize, margin: f64, out_params: *mut *mut SovParams) -> SovStatus {
    guard(|| {
        let slot = out(out_params)?;
        *slot = ptr::null_mut();
        if xi.is_null() {
            return Err(null());
        }
        let xs: Vec<C64> = std::slice::from_raw_parts(xi, n).iter().map(|z| C64::new(z.re, z.im)).collect();
        let p = core(ChainParams::new(C64::new(eta.re, eta.im), xs, margin))?;
        *slot = Box::into_raw(Box::new(SovParams { inner: p }));
        Ok(())
    })
}

/// Seeded generic draw with η = 1.
///
/// # Safety
/// `out_params` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sov_params_sample(n_sites: usize, seed: u64, margin: f64, out_params: *mut *mut SovParams) -> SovStatus {
    guard(|| {
        let slot = out(out_params)?;
        *slot = ptr::null_mut();
        let p = core(sov_xxx::chain_model::sample_generic_params(n_sites, seed, margin))?;
        *slot = Box::into_raw(Box::new(SovParams { inner: p }));
        Ok(())
    })
}

/// # Safety
/// `params` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sov_params_free(params: *mut SovParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sov_params_n_sites(params: *const SovParams, out_n: *mut usize) -> SovStatus {
    guard(|| {
        *out(out_n)? = deref(params)?.inner.n_sites();
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle; `out_xi` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn sov_params_xi(params: *const SovParams, out_xi: *mut SovComplex, cap: usize) -> SovStatus {
    guard(|| {
        let p = &deref(params)?.inner;
        if out_xi.is_null() {
            return Err(null());
        }
        if cap < p.n_sites() {
            return Err((SovStatus::BufferTooSmall, format!("need {} slots", p.n_sites())));
        }
        for (k, z) in p.xi.iter().enumerate() {
            *out_xi.add(k) = (*z).into();
        }
        Ok(())
    })
}

/// All 2^N eigen-records of the antiperiodic transfer matrix.
///
/// # Safety
/// `params` must be a live handle; `out_spectrum` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sov_spectrum_new(params: *const SovParams, seed: u64, out_spectrum: *mut *mut SovSpectrum) -> SovStatus {
    guard(|| {
        let slot = out(out_spectrum)?;
        *slot = ptr::null_mut();
        let p = &deref(params)?.inner;
        let spectrum = core(full_spectrum(p, seed))?;
        let basis = SovBasis::new(p);
        *slot = Box::into_raw(Box::new(SovSpectrum { spectrum, basis }));
        Ok(())
    })
}

/// # Safety
/// `spectrum` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sov_spectrum_free(spectrum: *mut SovSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// # Safety
/// `spectrum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sov_spectrum_len(spectrum: *const SovSpectrum, out_len: *mut usize) -> SovStatus {
    guard(|| {
        *out(out_len)? = deref(spectrum)?.spectrum.records.len();
        Ok(())
    })
}

/// Number of Bethe roots R of record `index`.
///
/// # Safety
/// `spectrum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sov_spectrum_degree(spectrum: *const SovSpectrum, index: usize, out_degree: *mut usize) -> SovStatus {
    guard(|| {
        *out(out_degree)? = record(deref(spectrum)?, index)?.degree;
        Ok(())
    })
}

/// τ(λ) of record `index`.
///
/// # Safety
/// `spectrum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sov_spectrum_tau(spectrum: *const SovSpectrum, index: usize, lambda: SovComplex, out_tau: *mut SovComplex) -> SovStatus {
    guard(|| {
        let r = record(deref(spectrum)?, index)?;
        *out(out_tau)? = r.tau.eval(C64::new(lambda.re, lambda.im)).into();
        Ok(())
    })
}

/// Bethe roots of record `index`. `out_len` receives R even when the buffer
/// is too small.
///
/// # Safety
/// `spectrum` must be a live handle; `out_roots` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn sov_spectrum_roots(
    spectrum: *const SovSpectrum,
    index: usize,
    out_roots: *mut SovComplex,
    cap: usize,
    out_len: *mut usize,
) -> SovStatus {
    guard(|| {
        let r = record(deref(spectrum)?, index)?;
        *out(out_len)? = r.bethe_roots.len();
        if r.bethe_roots.len() > cap {
            return Err((SovStatus::BufferTooSmall, format!("need {} slots", r.bethe_roots.len())));
        }
        if r.bethe_roots.is_empty() {
            return Ok(());
        }
        if out_roots.is_null() {
            return Err(null());
        }
        for (k, z) in r.bethe_roots.iter().enumerate() {
            *out_roots.add(k) = (*z).into();
        }
        Ok(())
    })
}

/// ⟨Q_τ|Q_τ⟩ from the Gaudin determinant.
///
/// # Safety
/// `spectrum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sov_gaudin_norm(spectrum: *const SovSpectrum, index: usize, out_norm: *mut SovComplex) -> SovStatus {
    guard(|| {
        let s = deref(spectrum)?;
        let r = record(s, index)?;
        *out(out_norm)? = core(gaudin_norm(&s.spectrum.params, r))?.into();
        Ok(())
    })
}

/// ⟨Q_bra| op_site |Q_ket⟩ by the determinant formulas; `site` is 1-based.
///
/// # Safety
/// `spectrum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sov_form_factor(
    spectrum: *const SovSpectrum,
    bra: usize,
    ket: usize,
    site: usize,
    op: SovOperator,
    out_value: *mut SovComplex,
) -> SovStatus {
    guard(|| {
        let s = deref(spectrum)?;
        let (b, k) = (record(s, bra)?, record(s, ket)?);
        let op = match op {
            SovOperator::SigmaMinus => SpinOp::SigmaMinus,
            SovOperator::SigmaZ => SpinOp::SigmaZ,
            SovOperator::SigmaPlus => SpinOp::SigmaPlus,
        };
        *out(out_value)? = core(form_factor(&s.spectrum.params, b, k, site, op))?.into();
        Ok(())
    })
}

/// Same value from dense eigenvectors, for cross-checking.
///
/// # Safety
/// `spectrum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sov_form_factor_dense(
    spectrum: *const SovSpectrum,
    bra: usize,
    ket: usize,
    site: usize,
    op: SovOperator,
    out_value: *mut SovComplex,
) -> SovStatus {
    guard(|| {
        let s = deref(spectrum)?;
        let p = &s.spectrum.params;
        core(p.check_site(site))?;
        let (b, k) = (record(s, bra)?, record(s, ket)?);
        let (bl, _) = core(sov_xxx::form_factors::eigen_states(p, &s.basis, b))?;
        let (_, kr) = core(sov_xxx::form_factors::eigen_states(p, &s.basis, k))?;
        let op = match op {
            SovOperator::SigmaMinus => SpinOp::SigmaMinus,
            SovOperator::SigmaZ => SpinOp::SigmaZ,
            SovOperator::SigmaPlus => SpinOp::SigmaPlus,
        };
        *out(out_value)? = sov_xxx::form_factors::dense_matrix_element(&bl, &kr, op, site, p.n_sites()).into();
        Ok(())
    })
}

/// Run every suite and return the report text. Free it with
/// [`sov_string_free`]. `out_pass` receives whether every check passed.
///
/// # Safety
/// `out_report` and `out_pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sov_run_all(
    n_sites: usize,
    seed: u64,
    margin: f64,
    format: SovFormat,
    out_report: *mut *mut c_char,
    out_pass: *mut bool,
) -> SovStatus {
    guard(|| {
        let slot = out(out_report)?;
        *slot = ptr::null_mut();
        let pass = out(out_pass)?;
        let mut cfg = RunConfig::new(n_sites, seed);
        cfg.margin = margin;
        let report = core(run(&cfg))?;
        let text = match format {
            SovFormat::Json => report.to_json(),
            SovFormat::Csv => report.to_csv(),
        };
        *pass = report.pass;
        *slot = CString::new(text).map_err(|e| (SovStatus::Numerical, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sov_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
