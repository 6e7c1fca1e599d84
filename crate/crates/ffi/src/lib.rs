//! C ABI over `stieltjes-core`.
//!
//! Objects cross the boundary as opaque heap handles created by a
//! `*_from_*` function and released with the matching `*_free`. Every
//! fallible call returns a [`StjStatus`]; on failure the message is
//! available from [`stj_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stieltjes_core::curves::{bs_put, call_curve, implied_vol, put_curve};
use stieltjes_core::reconstruct::cdf_from_puts;
use stieltjes_core::replication::{price_dc, price_piecewise_dc};
use stieltjes_core::{Error, Measure, PiecewiseDcPayoff, PriceCurve, Role};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    Validation = 5,
    Numerical = 6,
    OutOfSpan = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StjRole {
    Put = 0,
    Call = 1,
}

impl From<StjRole> for Role {
    fn from(r: StjRole) -> Self {
        match r {
            StjRole::Put => Role::Put,
            StjRole::Call => Role::Call,
        }
    }
}

/// Pricing measure handle.
pub struct StjMeasure {
    inner: Measure,
}

/// Put or call curve handle.
pub struct StjCurve {
    inner: PriceCurve,
}

/// Piecewise difference-of-convex payoff handle.
pub struct StjPayoff {
    inner: PiecewiseDcPayoff,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Status(StjStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn status_of(e: &Error) -> StjStatus {
    match e {
        Error::Parse(_) | Error::Io(_) => StjStatus::Parse,
        Error::InvalidMeasure(_)
        | Error::InvalidCurve(_)
        | Error::InvalidPayoff(_)
        | Error::InvalidArgument(_)
        | Error::GridMismatch
        | Error::MissingMetadata(_)
        | Error::NoFiniteMean => StjStatus::InvalidInput,
        Error::Validation(_) | Error::ArbitrageBand { .. } | Error::TailBudget { .. } => StjStatus::Validation,
        Error::Quadrature { .. } | Error::Derivative(_) => StjStatus::Numerical,
        Error::OutOfSpan { .. } => StjStatus::OutOfSpan,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> StjStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StjStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(msg);
            s
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            StjStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(StjStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure::Status(StjStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller passes a live handle or null.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller guarantees `len` readable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: non-null and writable per the caller's contract.
    unsafe { out.write(v) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn stj_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a measure from its JSON spec.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn stj_measure_from_json(json: *const c_char, out: *mut *mut StjMeasure) -> StjStatus {
    guard(|| {
        let s = unsafe { str_arg(json, "json") }?;
        let m = Measure::from_json(s)?;
        unsafe { write_out(out, Box::into_raw(Box::new(StjMeasure { inner: m }))) }
    })
}

/// # Safety
/// `m` must be null or a handle from [`stj_measure_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stj_measure_free(m: *mut StjMeasure) {
    if !m.is_null() {
        // SAFETY: allocated by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(m) });
    }
}

/// F(x), right-continuous.
///
/// # Safety
/// `m` must be a live measure handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stj_measure_cdf(m: *const StjMeasure, x: f64, out: *mut f64) -> StjStatus {
    guard(|| {
        let m = unsafe { ref_arg(m, "measure") }?;
        unsafe { write_out(out, m.inner.cdf(x)) }
    })
}

/// F(x−), left limit.
///
/// # Safety
/// `m` must be a live measure handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stj_measure_cdf_left(m: *const StjMeasure, x: f64, out: *mut f64) -> StjStatus {
    guard(|| {
        let m = unsafe { ref_arg(m, "measure") }?;
        unsafe { write_out(out, m.inner.cdf_left(x)) }
    })
}

/// F(∞)
///
/// # Safety
/// `m` must be a live measure handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stj_measure_total_mass(m: *const StjMeasure, out: *mut f64) -> StjStatus {
    guard(|| {
        let m = unsafe { ref_arg(m, "measure") }?;
        unsafe { write_out(out, m.inner.total_mass()) }
    })
}

/// ∫ x dF
///
/// # Safety
/// `m` must be a live measure handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stj_measure_mean(m: *const StjMeasure, out: *mut f64) -> StjStatus {
    guard(|| {
        let m = unsafe { ref_arg(m, "measure") }?;
        let v = m.inner.mean()?;
        unsafe { write_out(out, v) }
    })
}

/// Put or call curve of a measure on `n` strikes.
///
/// # Safety
/// `m` must be a live measure handle, `strikes` must point to `n` doubles
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stj_curve_from_measure(
    m: *const StjMeasure,
    role: StjRole,
    strikes: *const f64,
    n: usize,
    out: *mut *mut StjCurve,
) -> StjStatus {
    guard(|| {
        let m = unsafe { ref_arg(m, "measure") }?;
        let k = unsafe { slice_arg(strikes, n, "strikes") }?;
        let c = match Role::from(role) {
            Role::Put => put_curve(&m.inner, k)?,
            Role::Call => call_curve(&m.inner, k)?,
        };
        unsafe { write_out(out, Box::into_raw(Box::new(StjCurve { inner: c }))) }
    })
}

/// Curve from quoted prices. Pass NaN for unknown `f_infinity` or `mean`.
///
/// # Safety
/// `strikes` and `values` must point to `n` doubles each and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn stj_curve_from_grid(
    role: StjRole,
    strikes: *const f64,
    values: *const f64,
    n: usize,
    f_infinity: f64,
    mean: f64,
    out: *mut *mut StjCurve,
) -> StjStatus {
    guard(|| {
        let k = unsafe { slice_arg(strikes, n, "strikes") }?;
        let v = unsafe { slice_arg(values, n, "values") }?;
        let known = |x: f64| (!x.is_nan()).then_some(x);
        let c = PriceCurve::from_grid(role.into(), k.to_vec(), v.to_vec())?
            .with_metadata(known(f_infinity), known(mean));
        unsafe { write_out(out, Box::into_raw(Box::new(StjCurve { inner: c }))) }
    })
}

/// # Safety
/// `c` must be null or a curve handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stj_curve_free(c: *mut StjCurve) {
    if !c.is_null() {
        // SAFETY: allocated by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(c) });
    }
}

/// Price at strike `k`.
///
/// # Safety
/// `c` must be a live curve handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stj_curve_eval(c: *const StjCurve, k: f64, out: *mut f64) -> StjStatus {
    guard(|| {
        let c = unsafe { ref_arg(c, "curve") }?;
        let v = c.inner.eval(k)?;
        unsafe { write_out(out, v) }
    })
}

/// Right-difference CDF estimate from a put curve. Writes up to `cap`
/// entries into each of `strikes`, `f_hat` and `bound` and the required
/// length into `len`; returns `BUFFER_TOO_SMALL` when `cap < *len`.
///
/// # Safety
/// `c` must be a live curve handle, the three buffers must hold `cap`
/// doubles each (or be null when `cap` is 0) and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stj_cdf_from_puts(
    c: *const StjCurve,
    strikes: *mut f64,
    f_hat: *mut f64,
    bound: *mut f64,
    cap: usize,
    len: *mut usize,
) -> StjStatus {
    guard(|| {
        let c = unsafe { ref_arg(c, "curve") }?;
        let est = cdf_from_puts(&c.inner)?;
        unsafe { write_out(len, est.len()) }?;
        if cap < est.len() {
            return Err(Failure::Status(
                StjStatus::BufferTooSmall,
                format!("need {} entries, buffers hold {cap}", est.len()),
            ));
        }
        for (buf, src, what) in [(strikes, &est.strikes, "strikes"), (f_hat, &est.f_hat, "f_hat"), (bound, &est.bound, "bound")] {
            if buf.is_null() {
                return Err(null(what));
            }
            // SAFETY: buf holds at least cap >= src.len() doubles.
            unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
        }
        Ok(())
    })
}

/// Parses a piecewise difference-of-convex payoff from its JSON spec.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stj_payoff_from_json(json: *const c_char, out: *mut *mut StjPayoff) -> StjStatus {
    guard(|| {
        let s = unsafe { str_arg(json, "json") }?;
        let p = PiecewiseDcPayoff::from_json(s)?;
        unsafe { write_out(out, Box::into_raw(Box::new(StjPayoff { inner: p }))) }
    })
}

/// # Safety
/// `p` must be null or a payoff handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stj_payoff_free(p: *mut StjPayoff) {
    if !p.is_null() {
        // SAFETY: allocated by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// g(x)
///
/// # Safety
/// `p` must be a live payoff handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stj_payoff_eval(p: *const StjPayoff, x: f64, out: *mut f64) -> StjStatus {
    guard(|| {
        let p = unsafe { ref_arg(p, "payoff") }?;
        unsafe { write_out(out, p.inner.evaluate(x)) }
    })
}

/// Price of a payoff from a call curve carrying F(∞) and mean metadata.
///
/// # Safety
/// `call` and `payoff` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stj_price_payoff(
    call: *const StjCurve,
    payoff: *const StjPayoff,
    out: *mut f64,
) -> StjStatus {
    guard(|| {
        let c = unsafe { ref_arg(call, "call curve") }?;
        let p = unsafe { ref_arg(payoff, "payoff") }?;
        let b = match p.inner.as_global() {
            Some(dc) => price_dc(&c.inner, dc)?,
            None => price_piecewise_dc(&c.inner, &p.inner)?,
        };
        unsafe { write_out(out, b.price) }
    })
}

/// Zero-rate Black–Scholes put.
#[no_mangle]
pub extern "C" fn stj_bs_put(s0: f64, k: f64, t: f64, sigma: f64) -> f64 {
    bs_put(s0, k, t, sigma)
}

/// Implied volatility of a zero-rate put price.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stj_implied_vol(price: f64, s0: f64, k: f64, t: f64, out: *mut f64) -> StjStatus {
    guard(|| {
        let v = implied_vol(price, s0, k, t)?;
        unsafe { write_out(out, v) }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Parse("x".into())), StjStatus::Parse);
        assert_eq!(status_of(&Error::Derivative(1.0)), StjStatus::Numerical);
        assert_eq!(
            status_of(&Error::OutOfSpan { strike: 9.0, lo: 0.0, hi: 1.0 }),
            StjStatus::OutOfSpan
        );
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, StjStatus::Panic);
        assert!(!stj_last_error_message().is_null());
    }
}
