//! C interface to `qpcocycle`.
//!
//! Objects are opaque heap handles created by `*_new`/`*_from_json` style
//! constructors and released by the matching `*_free`. Every fallible call
//! returns a [`QpStatus`]; on failure a message is kept per thread and can be
//! read with [`qp_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qpcocycle::cocycle::{degree, CocycleDoc};
use qpcocycle::continued_fractions::{expand_partial, CfExpansion};
use qpcocycle::invariants::{fibered_rotation_number, lyapunov_exponent};
use qpcocycle::Error;

/// Result codes. `QP_STATUS_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigInvalid = 3,
    /// A numerical routine refused its input or failed; see the message.
    ComputationFailed = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Cocycle over a circle rotation.
pub struct QpCocycle {
    inner: qpcocycle::cocycle::QpCocycle,
}

/// Continued-fraction expansion.
pub struct QpCf {
    inner: CfExpansion,
}

/// One row of a continued-fraction table.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpCfRow {
    pub k: usize,
    pub a: i64,
    pub p: i64,
    pub q: i64,
    pub beta: f64,
    pub alpha_k: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: QpStatus, msg: impl Into<String>) -> QpStatus {
    set_error(msg.into());
    status
}

fn from_lib(e: Error) -> QpStatus {
    let status = match e {
        Error::ConfigInvalid(_) => QpStatus::ConfigInvalid,
        _ => QpStatus::ComputationFailed,
    };
    fail(status, format!("{}: {e}", e.code()))
}

fn guard(f: impl FnOnce() -> QpStatus) -> QpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(QpStatus::Panic, "internal panic"),
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn qp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a cocycle from its JSON document. On success `*out` owns a handle to
/// be released with [`qp_cocycle_free`].
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_cocycle_from_json(json: *const c_char, out: *mut *mut QpCocycle) -> QpStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(QpStatus::NullPointer, "null argument");
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => return fail(QpStatus::InvalidUtf8, "document is not UTF-8"),
        };
        match CocycleDoc::from_json(text).and_then(|d| d.build()) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(QpCocycle { inner: c }));
                QpStatus::Ok
            }
            Err(e) => from_lib(e),
        }
    })
}

/// # Safety
/// `c` must come from [`qp_cocycle_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qp_cocycle_free(c: *mut QpCocycle) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

unsafe fn with_cocycle<T>(c: *const QpCocycle, out: *mut T, f: impl FnOnce(&QpCocycle) -> Result<T, Error>) -> QpStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return fail(QpStatus::NullPointer, "null argument");
        }
        match f(&*c) {
            Ok(v) => {
                *out = v;
                QpStatus::Ok
            }
            Err(e) => from_lib(e),
        }
    })
}

/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_cocycle_alpha(c: *const QpCocycle, out: *mut f64) -> QpStatus {
    with_cocycle(c, out, |c| Ok(c.inner.alpha))
}

/// Winding number of the map.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_degree(c: *const QpCocycle, out: *mut i64) -> QpStatus {
    with_cocycle(c, out, |c| degree(&c.inner.map))
}

/// Fibered rotation number (mod 1) from `iterations` steps of the orbit of
/// `(0, 0)`. Fails for maps of nonzero degree.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_rotation_number(c: *const QpCocycle, iterations: usize, out: *mut f64) -> QpStatus {
    if iterations == 0 {
        return fail(QpStatus::OutOfRange, "iterations must be positive");
    }
    with_cocycle(c, out, |c| fibered_rotation_number(&c.inner, iterations, 0.0, 0.0).map(|r| r.value))
}

/// Lyapunov exponent averaged over `samples` equidistributed base points.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_lyapunov(c: *const QpCocycle, iterations: usize, samples: usize, out: *mut f64) -> QpStatus {
    if iterations == 0 || samples == 0 {
        return fail(QpStatus::OutOfRange, "iterations and samples must be positive");
    }
    with_cocycle(c, out, |c| Ok(lyapunov_exponent(&c.inner, iterations, samples).value))
}

/// Expand `alpha` to at most `depth` partial quotients; stops early on a
/// rational remainder.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_cf_expand(alpha: f64, depth: usize, out: *mut *mut QpCf) -> QpStatus {
    guard(|| {
        if out.is_null() {
            return fail(QpStatus::NullPointer, "null argument");
        }
        match expand_partial(alpha, depth) {
            Ok(cf) => {
                *out = Box::into_raw(Box::new(QpCf { inner: cf }));
                QpStatus::Ok
            }
            Err(e) => from_lib(e),
        }
    })
}

/// # Safety
/// `cf` must come from [`qp_cf_expand`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qp_cf_free(cf: *mut QpCf) {
    if !cf.is_null() {
        drop(Box::from_raw(cf));
    }
}

/// Largest valid row index.
///
/// # Safety
/// `cf` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_cf_depth(cf: *const QpCf, out: *mut usize) -> QpStatus {
    guard(|| {
        if cf.is_null() || out.is_null() {
            return fail(QpStatus::NullPointer, "null argument");
        }
        *out = (*cf).inner.depth();
        QpStatus::Ok
    })
}

/// Row `k` of the table. Convergents that do not fit 64 bits give
/// `QP_STATUS_OUT_OF_RANGE`.
///
/// # Safety
/// `cf` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_cf_row(cf: *const QpCf, k: usize, out: *mut QpCfRow) -> QpStatus {
    guard(|| {
        if cf.is_null() || out.is_null() {
            return fail(QpStatus::NullPointer, "null argument");
        }
        let cf = &(*cf).inner;
        if k > cf.depth() {
            return fail(QpStatus::OutOfRange, format!("row {k} beyond depth {}", cf.depth()));
        }
        let ki = k as i64;
        let (p, q) = match (i64::try_from(cf.p(ki)), i64::try_from(cf.q(ki))) {
            (Ok(p), Ok(q)) => (p, q),
            _ => return fail(QpStatus::OutOfRange, format!("convergent {k} exceeds 64 bits")),
        };
        *out = QpCfRow { k, a: cf.a(k), p, q, beta: cf.beta(ki), alpha_k: cf.alpha_k(k) };
        QpStatus::Ok
    })
}
