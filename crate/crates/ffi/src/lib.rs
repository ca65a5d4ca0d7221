//! C ABI over `anderson-band`.
//!
//! Results live behind opaque handles that the caller releases with the
//! matching `*_free` function. Every entry point returns an [`AbStatus`];
//! on failure a message for the calling thread is available from
//! [`ab_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anderson_band::bandmodel::{self, ModelParams, SpectrumResult};
use anderson_band::certify::{self, CertReport, Verdict};
use anderson_band::oracle::{self, EigenList};
use anderson_band::Error;

/// Outcome of an API call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbStatus {
    Ok = 0,
    InvalidArgument = 1,
    NotHyperbolic = 2,
    Degenerate = 3,
    ConeConstruction = 4,
    Budget = 5,
    NullPointer = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbVerdict {
    CertifiedUh = 0,
    CertifiedNotUh = 1,
    Undetermined = 2,
}

/// Two-site Bernoulli model: site `j` carries `c_j` or `c_j + lambda_j`,
/// the latter with probability `p_j`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct AbParams {
    pub lambda0: f64,
    pub lambda1: f64,
    pub c0: f64,
    pub c1: f64,
    pub p0: f64,
    pub p1: f64,
}

/// Opaque spectrum handle.
pub struct AbSpectrum(SpectrumResult);

/// Opaque certification report handle.
pub struct AbCertReport(CertReport);

/// Opaque eigenvalue list handle.
pub struct AbEigenList(EigenList);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: AbStatus, msg: impl Into<String>) -> AbStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> AbStatus {
    match e {
        Error::InvalidArgument(_) => AbStatus::InvalidArgument,
        Error::NotHyperbolic { .. } => AbStatus::NotHyperbolic,
        Error::DegenerateRow | Error::SingularPoint(_) => AbStatus::Degenerate,
        Error::ConeConstruction(_) => AbStatus::ConeConstruction,
        Error::Budget(_) => AbStatus::Budget,
    }
}

/// Run `f`, converting library errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), AbStatus>) -> AbStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AbStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(AbStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lib<T>(r: anderson_band::Result<T>) -> Result<T, AbStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn model(p: &AbParams) -> Result<ModelParams, AbStatus> {
    lib(ModelParams::new(p.lambda0, p.lambda1, p.c0, p.c1)
        .and_then(|m| m.with_probabilities(p.p0, p.p1)))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, AbStatus> {
    p.as_ref()
        .ok_or_else(|| fail(AbStatus::NullPointer, format!("{what} is null")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), AbStatus> {
    if out.is_null() {
        return Err(fail(AbStatus::NullPointer, "output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or null after a
/// successful one. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Almost-sure spectrum of the model. Release with [`ab_spectrum_free`].
///
/// # Safety
/// `params` must be null or point to an `AbParams`; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ab_spectrum(
    params: *const AbParams,
    out: *mut *mut AbSpectrum,
) -> AbStatus {
    guard(|| {
        let p = model(deref(params, "params")?)?;
        let s = lib(bandmodel::spectrum(&p))?;
        store(out, AbSpectrum(s))
    })
}

/// # Safety
/// `s` must be null or a live handle from [`ab_spectrum`].
#[no_mangle]
pub unsafe extern "C" fn ab_spectrum_band_count(s: *const AbSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.0.bands.len())
}

/// # Safety
/// `s` must be null or a live handle from [`ab_spectrum`].
#[no_mangle]
pub unsafe extern "C" fn ab_spectrum_gap_count(s: *const AbSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.0.gaps.len())
}

unsafe fn interval_at(
    list: &[bandmodel::Interval],
    index: usize,
    lo: *mut f64,
    hi: *mut f64,
) -> Result<(), AbStatus> {
    if lo.is_null() || hi.is_null() {
        return Err(fail(AbStatus::NullPointer, "output pointer is null"));
    }
    let iv = list.get(index).ok_or_else(|| {
        fail(
            AbStatus::OutOfRange,
            format!("index {index} out of range ({} entries)", list.len()),
        )
    })?;
    *lo = iv.lo;
    *hi = iv.hi;
    Ok(())
}

/// Endpoints of band `index`, in increasing order.
///
/// # Safety
/// `s` must be null or a live handle; `lo` and `hi` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ab_spectrum_band(
    s: *const AbSpectrum,
    index: usize,
    lo: *mut f64,
    hi: *mut f64,
) -> AbStatus {
    guard(|| interval_at(&deref(s, "spectrum")?.0.bands, index, lo, hi))
}

/// Endpoints of gap `index`; the outer gaps have infinite ends.
///
/// # Safety
/// `s` must be null or a live handle; `lo` and `hi` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ab_spectrum_gap(
    s: *const AbSpectrum,
    index: usize,
    lo: *mut f64,
    hi: *mut f64,
) -> AbStatus {
    guard(|| interval_at(&deref(s, "spectrum")?.0.gaps, index, lo, hi))
}

/// # Safety
/// `s` must be null or a handle from [`ab_spectrum`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ab_spectrum_free(s: *mut AbSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Certify uniform hyperbolicity at `energy` for the period-`m` family
/// whose site `j` takes `offsets[j]` or `offsets[j] + lambdas[j]`.
/// Words up to `budget` letters are searched for witnesses.
///
/// # Safety
/// `lambdas` and `offsets` must point to `m` readable doubles; `out` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn ab_certify(
    lambdas: *const f64,
    offsets: *const f64,
    m: usize,
    energy: f64,
    budget: usize,
    out: *mut *mut AbCertReport,
) -> AbStatus {
    guard(|| {
        if m == 0 {
            return Err(fail(AbStatus::InvalidArgument, "period must be at least 1"));
        }
        if lambdas.is_null() || offsets.is_null() {
            return Err(fail(AbStatus::NullPointer, "distribution arrays are null"));
        }
        let l = std::slice::from_raw_parts(lambdas, m);
        let c = std::slice::from_raw_parts(offsets, m);
        let dists: Vec<(f64, f64)> = l.iter().copied().zip(c.iter().copied()).collect();
        let family = lib(certify::product_family(&dists, energy))?;
        let report = lib(certify::certify_family(&family, None, budget))?;
        store(out, AbCertReport(report))
    })
}

/// Verdict of the report; a null handle reads as undetermined.
///
/// # Safety
/// `r` must be null or a live handle from [`ab_certify`].
#[no_mangle]
pub unsafe extern "C" fn ab_cert_report_verdict(r: *const AbCertReport) -> AbVerdict {
    match r.as_ref().map(|r| r.0.verdict) {
        Some(Verdict::CertifiedUH) => AbVerdict::CertifiedUh,
        Some(Verdict::CertifiedNotUH) => AbVerdict::CertifiedNotUh,
        _ => AbVerdict::Undetermined,
    }
}

/// Cone margin of a positive certificate, NaN otherwise.
///
/// # Safety
/// `r` must be null or a live handle from [`ab_certify`].
#[no_mangle]
pub unsafe extern "C" fn ab_cert_report_margin(r: *const AbCertReport) -> f64 {
    r.as_ref().and_then(|r| r.0.margin).unwrap_or(f64::NAN)
}

/// Number of letters in the witness word, 0 when there is none.
///
/// # Safety
/// `r` must be null or a live handle from [`ab_certify`].
#[no_mangle]
pub unsafe extern "C" fn ab_cert_report_witness_len(r: *const AbCertReport) -> usize {
    r.as_ref()
        .and_then(|r| r.0.witness_word.as_ref())
        .map_or(0, Vec::len)
}

/// Copy the witness word (member indices) into `buf`, which must hold at
/// least [`ab_cert_report_witness_len`] entries.
///
/// # Safety
/// `r` must be null or a live handle; `buf` must be null or hold `cap`
/// writable entries.
#[no_mangle]
pub unsafe extern "C" fn ab_cert_report_witness(
    r: *const AbCertReport,
    buf: *mut usize,
    cap: usize,
) -> AbStatus {
    guard(|| {
        let word = deref(r, "report")?.0.witness_word.as_deref().unwrap_or(&[]);
        if word.len() > cap {
            return Err(fail(
                AbStatus::OutOfRange,
                format!("buffer holds {cap}, witness has {}", word.len()),
            ));
        }
        if !word.is_empty() {
            if buf.is_null() {
                return Err(fail(AbStatus::NullPointer, "buffer is null"));
            }
            ptr::copy_nonoverlapping(word.as_ptr(), buf, word.len());
        }
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle from [`ab_certify`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ab_cert_report_free(r: *mut AbCertReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Eigenvalues of the Dirichlet box Hamiltonian on `n_sites` sites for the
/// potential drawn from `seed`. Release with [`ab_eigen_list_free`].
///
/// # Safety
/// `params` must be null or point to an `AbParams`; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ab_finite_volume_eigenvalues(
    params: *const AbParams,
    n_sites: usize,
    seed: u64,
    out: *mut *mut AbEigenList,
) -> AbStatus {
    guard(|| {
        let p = model(deref(params, "params")?)?;
        let sample = lib(oracle::sample_potential(&p, n_sites, seed))?;
        store(out, AbEigenList(oracle::finite_volume_eigenvalues(&sample)))
    })
}

/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ab_eigen_list_len(e: *const AbEigenList) -> usize {
    e.as_ref().map_or(0, |e| e.0.values.len())
}

/// Sorted eigenvalues, owned by the handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ab_eigen_list_values(e: *const AbEigenList) -> *const f64 {
    e.as_ref().map_or(ptr::null(), |e| e.0.values.as_ptr())
}

/// # Safety
/// `e` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ab_eigen_list_free(e: *mut AbEigenList) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}
