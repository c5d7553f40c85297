//! C ABI for `perispec`.
//!
//! Operators live behind opaque handles created by `*_new`/`*_from_json` and
//! released by the matching `*_free`. Every fallible call returns a
//! [`PerispecStatus`]; on failure the message is kept per thread and can be
//! copied out with [`perispec_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use perispec::block_jacobi::BlockJacobi;
use perispec::periodic_jacobi::{bands, discriminant_oprl, periodic_m, PeriodicJacobi};
use perispec::sumrules::{c0_terms, p2_sides};
use perispec::{Error, C64};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerispecStatus {
    Ok = 0,
    InputError = 1,
    DomainError = 2,
    NumericError = 3,
    StructuralError = 4,
    NullPointer = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque periodic Jacobi matrix.
pub struct PerispecPeriodicJacobi(PeriodicJacobi);

/// Opaque block Jacobi matrix.
pub struct PerispecBlockJacobi(BlockJacobi);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> PerispecStatus {
    match e {
        Error::Input(_) => PerispecStatus::InputError,
        Error::Domain(_) => PerispecStatus::DomainError,
        Error::Numeric(_) => PerispecStatus::NumericError,
        Error::Structural(_) => PerispecStatus::StructuralError,
    }
}

/// Runs `f`, translating library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PerispecStatus>) -> PerispecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PerispecStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            PerispecStatus::Panic
        }
    }
}

fn lib<T>(r: perispec::Result<T>) -> Result<T, PerispecStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), PerispecStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(PerispecStatus::NullPointer);
    }
    Ok(())
}

/// Copies `src` into `out[..cap]`, always writing the needed length to `len`.
///
/// # Safety
/// `out` must be valid for `cap` writes and `len` for one write.
unsafe fn copy_out(src: &[f64], out: *mut f64, cap: usize, len: *mut usize) -> Result<(), PerispecStatus> {
    non_null(len, "len")?;
    *len = src.len();
    if cap < src.len() {
        set_error(format!("buffer holds {cap} values, {} needed", src.len()));
        return Err(PerispecStatus::BufferTooSmall);
    }
    non_null(out, "out")?;
    std::ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Copies the last error message of this thread as a NUL-terminated string,
/// truncating to `cap` bytes. Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be valid for `cap` writes, or null with `cap == 0`.
#[no_mangle]
pub unsafe extern "C" fn perispec_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn perispec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a period-`p` Jacobi matrix from `a[0..p]` (positive) and `b[0..p]`.
///
/// # Safety
/// `a` and `b` must point to `p` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn perispec_periodic_jacobi_new(
    a: *const f64,
    b: *const f64,
    p: usize,
    out: *mut *mut PerispecPeriodicJacobi,
) -> PerispecStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(b, "b")?;
        non_null(out, "out")?;
        let (a, b) = (std::slice::from_raw_parts(a, p).to_vec(), std::slice::from_raw_parts(b, p).to_vec());
        let j = lib(PeriodicJacobi::new(a, b))?;
        *out = Box::into_raw(Box::new(PerispecPeriodicJacobi(j)));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`perispec_periodic_jacobi_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn perispec_periodic_jacobi_free(h: *mut PerispecPeriodicJacobi) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Discriminant coefficients, constant term first (`p + 1` values).
///
/// # Safety
/// `h` must be a live handle; `out` valid for `cap` writes; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn perispec_discriminant(
    h: *const PerispecPeriodicJacobi,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PerispecStatus {
    guard(|| {
        non_null(h, "handle")?;
        let d = discriminant_oprl(&(*h).0);
        copy_out(d.coeffs(), out, cap, len)
    })
}

/// Band edges as `lo₀, hi₀, lo₁, hi₁, …` (`2p` values).
///
/// # Safety
/// As for [`perispec_discriminant`].
#[no_mangle]
pub unsafe extern "C" fn perispec_bands(
    h: *const PerispecPeriodicJacobi,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PerispecStatus {
    guard(|| {
        non_null(h, "handle")?;
        let bs = lib(bands(&discriminant_oprl(&(*h).0), 1e-12))?;
        let flat: Vec<f64> = bs.bands.iter().flat_map(|&(lo, hi)| [lo, hi]).collect();
        copy_out(&flat, out, cap, len)
    })
}

/// Half-line m-function at `E = re + i·im`.
///
/// # Safety
/// `h` must be a live handle; `m_re` and `m_im` writable.
#[no_mangle]
pub unsafe extern "C" fn perispec_periodic_m(
    h: *const PerispecPeriodicJacobi,
    re: f64,
    im: f64,
    m_re: *mut f64,
    m_im: *mut f64,
) -> PerispecStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(m_re, "m_re")?;
        non_null(m_im, "m_im")?;
        let m = lib(periodic_m(&(*h).0, C64::new(re, im)))?;
        *m_re = m.re;
        *m_im = m.im;
        Ok(())
    })
}

/// Parses `{"l":…,"blocks":[{"A":…,"B":…}],"tail":"free"|"none"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn perispec_block_jacobi_from_json(
    json: *const c_char,
    out: *mut *mut PerispecBlockJacobi,
) -> PerispecStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json).to_str().map_err(|_| {
            set_error("json is not UTF-8");
            PerispecStatus::InputError
        })?;
        let j: BlockJacobi = serde_json::from_str(text).map_err(|e| {
            set_error(format!("not a valid block Jacobi matrix: {e}"));
            PerispecStatus::InputError
        })?;
        *out = Box::into_raw(Box::new(PerispecBlockJacobi(j)));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`perispec_block_jacobi_from_json`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn perispec_block_jacobi_free(h: *mut PerispecBlockJacobi) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Both sides of the P₂ sum rule and `|lhs − rhs|`.
///
/// # Safety
/// `h` must be a live handle; the three outputs writable.
#[no_mangle]
pub unsafe extern "C" fn perispec_sumrule_p2(
    h: *const PerispecBlockJacobi,
    lhs: *mut f64,
    rhs: *mut f64,
    residual: *mut f64,
) -> PerispecStatus {
    guard(|| {
        non_null(h, "handle")?;
        for (p, n) in [(lhs, "lhs"), (rhs, "rhs"), (residual, "residual")] {
            non_null(p, n)?;
        }
        let r = lib(p2_sides(&(*h).0))?;
        (*lhs, *rhs, *residual) = (r.lhs, r.rhs, r.residual);
        Ok(())
    })
}

/// The C₀ quantities `Z`, `E₀`, `A₀` and `Z − A₀ − E₀`.
///
/// # Safety
/// `h` must be a live handle; the four outputs writable.
#[no_mangle]
pub unsafe extern "C" fn perispec_sumrule_c0(
    h: *const PerispecBlockJacobi,
    z: *mut f64,
    e0: *mut f64,
    a0: *mut f64,
    residual: *mut f64,
) -> PerispecStatus {
    guard(|| {
        non_null(h, "handle")?;
        for (p, n) in [(z, "z"), (e0, "e0"), (a0, "a0"), (residual, "residual")] {
            non_null(p, n)?;
        }
        let t = lib(c0_terms(&(*h).0))?;
        (*z, *e0, *a0, *residual) = (t.z, t.e0, t.a0, t.residual);
        Ok(())
    })
}
