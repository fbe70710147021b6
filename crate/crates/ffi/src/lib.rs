//! C ABI over the `bichroma` library.
//!
//! Every fallible call returns a [`BichromaStatus`] and writes results through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`bichroma_last_error`]. Handles are opaque and must be released with
//! the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bichroma::chrw::solve_xi;
use bichroma::resonance::{find_resonances_with, ResonanceOptions, ResonancePoint, ScanTemplate};
use bichroma::solvers::{
    chrw_transient, gft_averaged_with, gft_converged, rk_transient, rwa_transient, FloquetOptions, FrameSolution,
    GftOptions,
};
use bichroma::{DriveParams, Error, Method};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BichromaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NoConvergence = 3,
    DimensionOverflow = 4,
    IndexOutOfRange = 6,
    Panic = 7,
}

/// Backend selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BichromaMethod {
    Chrw = 0,
    Rwa = 1,
    Gft = 2,
    Rk = 3,
}

impl From<BichromaMethod> for Method {
    fn from(m: BichromaMethod) -> Method {
        match m {
            BichromaMethod::Chrw => Method::Chrw,
            BichromaMethod::Rwa => Method::Rwa,
            BichromaMethod::Gft => Method::Gft,
            BichromaMethod::Rk => Method::Rk,
        }
    }
}

/// Opaque drive parameter set.
pub struct BichromaParams {
    inner: DriveParams,
}

/// Opaque list of located resonances.
pub struct BichromaResonances {
    points: Vec<ResonancePoint>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BichromaStatus {
    match e.exit_code() {
        2 => BichromaStatus::InvalidInput,
        4 => BichromaStatus::DimensionOverflow,
        _ => BichromaStatus::NoConvergence,
    }
}

/// Run `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (BichromaStatus, String)>) -> BichromaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BichromaStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            BichromaStatus::Panic
        }
    }
}

fn lib(e: Error) -> (BichromaStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (BichromaStatus, String) {
    (BichromaStatus::NullPointer, format!("{name} is null"))
}

unsafe fn params_ref<'a>(p: *const BichromaParams) -> Result<&'a DriveParams, (BichromaStatus, String)> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("params"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bichroma_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bichroma_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Create a parameter set. Frequencies are in any common unit.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn bichroma_params_new(
    omega0: f64,
    a1: f64,
    a2: f64,
    omega1: f64,
    omega2: f64,
    phi1: f64,
    phi2: f64,
    out: *mut *mut BichromaParams,
) -> BichromaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = DriveParams { omega0, a1, a2, omega1, omega2, phi1, phi2 };
        inner.validate().map_err(lib)?;
        *out = Box::into_raw(Box::new(BichromaParams { inner }));
        Ok(())
    })
}

/// Release a parameter set; null is ignored.
///
/// # Safety
/// `p` must come from [`bichroma_params_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bichroma_params_free(p: *mut BichromaParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Solve the CHRW parameters ξ₁, ξ₂.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bichroma_solve_xi(p: *const BichromaParams, xi1: *mut f64, xi2: *mut f64) -> BichromaStatus {
    guard(|| {
        let p = params_ref(p)?.validate().map_err(lib)?;
        if xi1.is_null() || xi2.is_null() {
            return Err(null("xi"));
        }
        let c = solve_xi(&p).map_err(lib)?;
        *xi1 = c.xi1;
        *xi2 = c.xi2;
        Ok(())
    })
}

/// Long-time average `P̄` for the chosen backend (not RK).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bichroma_averaged(
    p: *const BichromaParams,
    method: BichromaMethod,
    p_bar: *mut f64,
) -> BichromaStatus {
    guard(|| {
        let p = *params_ref(p)?;
        if p_bar.is_null() {
            return Err(null("p_bar"));
        }
        let v = match Method::from(method) {
            m @ (Method::Chrw | Method::Rwa) => {
                FrameSolution::new(m, &p, &FloquetOptions::default()).map_err(lib)?.averaged().p_bar
            }
            Method::Gft => gft_averaged_with(&p, &GftOptions::default()).map_err(lib)?.p_bar,
            Method::Rk => return Err((BichromaStatus::InvalidInput, "rk has no time-averaged form".into())),
        };
        *p_bar = v;
        Ok(())
    })
}

/// Resonance indicator `d` (real part) for CHRW or RWA.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bichroma_indicator(
    p: *const BichromaParams,
    method: BichromaMethod,
    d: *mut f64,
) -> BichromaStatus {
    guard(|| {
        let p = *params_ref(p)?;
        if d.is_null() {
            return Err(null("d"));
        }
        let m = Method::from(method);
        if !matches!(m, Method::Chrw | Method::Rwa) {
            return Err((BichromaStatus::InvalidInput, "the indicator needs chrw or rwa".into()));
        }
        *d = FrameSolution::new(m, &p, &FloquetOptions::default()).map_err(lib)?.indicator().re;
        Ok(())
    })
}

/// Transition probability `P(t, t₀)` on `n` ascending times, written to `out`.
///
/// # Safety
/// `times` and `out` must each point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn bichroma_transient(
    p: *const BichromaParams,
    method: BichromaMethod,
    t0: f64,
    times: *const f64,
    n: usize,
    out: *mut f64,
) -> BichromaStatus {
    guard(|| {
        let p = *params_ref(p)?;
        if n == 0 {
            return Ok(());
        }
        if times.is_null() || out.is_null() {
            return Err(null("times/out"));
        }
        let grid = std::slice::from_raw_parts(times, n);
        let series = match Method::from(method) {
            Method::Chrw => chrw_transient(&p, t0, grid).map_err(lib)?,
            Method::Rwa => rwa_transient(&p, t0, grid).map_err(lib)?,
            Method::Gft => {
                let opts = GftOptions { cross_check: false, ..GftOptions::default() };
                gft_converged(&p, &opts).map_err(lib)?.transient_checked(t0, grid).map_err(lib)?
            }
            Method::Rk => rk_transient(&p, t0, grid).map_err(lib)?,
        };
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&series.values);
        Ok(())
    })
}

/// Locate resonances in `[lo, hi]` by scanning `scan_points` values of ω₀.
/// Pass `r` as NaN to keep `A₂` fixed, otherwise `A₂ = r·A₁`.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bichroma_find_resonances(
    p: *const BichromaParams,
    r: f64,
    lo: f64,
    hi: f64,
    scan_points: usize,
    method: BichromaMethod,
    out: *mut *mut BichromaResonances,
) -> BichromaStatus {
    guard(|| {
        let p = *params_ref(p)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let t = ScanTemplate { params: p, r: (!r.is_nan()).then_some(r) };
        let opts = ResonanceOptions::method(method.into());
        let points = find_resonances_with(&t, (lo, hi), scan_points, &opts).map_err(lib)?;
        *out = Box::into_raw(Box::new(BichromaResonances { points }));
        Ok(())
    })
}

/// Number of resonances in a list; 0 for null.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bichroma_resonances_len(h: *const BichromaResonances) -> usize {
    h.as_ref().map_or(0, |h| h.points.len())
}

/// Read entry `i`. `photon_order` is set to 0 when it is unknown.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bichroma_resonances_get(
    h: *const BichromaResonances,
    i: usize,
    omega0_star: *mut f64,
    photon_order: *mut u32,
    resolved: *mut bool,
) -> BichromaStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("resonances"))?;
        if omega0_star.is_null() || photon_order.is_null() || resolved.is_null() {
            return Err(null("out"));
        }
        let pt = h
            .points
            .get(i)
            .ok_or_else(|| (BichromaStatus::IndexOutOfRange, format!("index {i} out of range")))?;
        *omega0_star = pt.omega0_star;
        *photon_order = pt.photon_order.unwrap_or(0);
        *resolved = pt.resolved;
        Ok(())
    })
}

/// Release a resonance list; null is ignored.
///
/// # Safety
/// `h` must come from [`bichroma_find_resonances`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bichroma_resonances_free(h: *mut BichromaResonances) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
