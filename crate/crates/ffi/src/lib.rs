//! C ABI over the `fivevertex` library.
//!
//! Every fallible call returns an `FvStatus`; results go through out-pointers. Objects are opaque
//! handles created by `fv_*_new` and released by the matching `fv_*_free`. The message of the most
//! recent failure on the calling thread is available from `fv_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fivevertex::bethe::{self, ModelParams};
use fivevertex::complexfn;
use fivevertex::limitshape::BppBoundary;
use fivevertex::mcmc::{init_bpp, Chain};
use fivevertex::thermo::{self, SlopePoint};
use fivevertex::{ComplexValue, Error};

/// Status codes. Library errors keep the numeric codes used by the command-line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FvStatus {
    Ok = 0,
    Domain = 2,
    Singular = 3,
    NonConvergence = 4,
    Range = 5,
    Degenerate = 6,
    Size = 7,
    Infeasible = 8,
    Unsupported = 9,
    InvalidParameter = 10,
    Conditioning = 11,
    Io = 12,
    NullPointer = 13,
    Panic = 14,
}

impl From<&Error> for FvStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => FvStatus::Domain,
            Error::Singular(_) => FvStatus::Singular,
            Error::NonConvergence(_) => FvStatus::NonConvergence,
            Error::Range(_) => FvStatus::Range,
            Error::Degenerate(_) => FvStatus::Degenerate,
            Error::Size(_) => FvStatus::Size,
            Error::Infeasible(_) => FvStatus::Infeasible,
            Error::Unsupported(_) => FvStatus::Unsupported,
            Error::InvalidParameter(_) => FvStatus::InvalidParameter,
            Error::Conditioning(_) => FvStatus::Conditioning,
            Error::Io(_) => FvStatus::Io,
        }
    }
}

/// Weight and fields of the model.
pub struct FvParams(ModelParams);

/// Arctic boundary of the boxed plane partition shape, as a closed polygon.
pub struct FvBoundary(Vec<(f64, f64)>);

/// Heat-bath sampler on a hexagon.
pub struct FvChain(Chain);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), FvStatus>) -> FvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FvStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            FvStatus::Panic
        }
    }
}

fn lift<T>(r: fivevertex::Result<T>) -> Result<T, FvStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        FvStatus::from(&e)
    })
}

fn null(what: &str) -> FvStatus {
    set_error(format!("null pointer: {what}"));
    FvStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, FvStatus> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), FvStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { p.write(v) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf`, truncated and NUL-terminated.
/// Returns the full message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fv_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn fv_params_new(r: f64, x: f64, y: f64, out: *mut *mut FvParams) -> FvStatus {
    guard(|| {
        let p = lift(ModelParams::new(r, x, y))?;
        unsafe { write(out, Box::into_raw(Box::new(FvParams(p))), "out") }
    })
}

/// # Safety
/// `p` must be null or a handle from `fv_params_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fv_params_free(p: *mut FvParams) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Largest Y accepted by the Bethe and free-energy routines (infinite when r > 1).
///
/// # Safety
/// `p` must be a live params handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_params_y_ceiling(p: *const FvParams, out: *mut f64) -> FvStatus {
    guard(|| {
        let p = unsafe { deref(p, "params") }?;
        unsafe { write(out, p.0.y_ceiling(), "out") }
    })
}

/// Log of the largest eigenvalue of the transfer matrix with `n` paths on a ring of `big_n` sites.
///
/// # Safety
/// `p` must be a live params handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_leading_log_eigenvalue(
    p: *const FvParams,
    big_n: usize,
    n: usize,
    out: *mut f64,
) -> FvStatus {
    guard(|| {
        let p = unsafe { deref(p, "params") }?;
        let v = lift(bethe::leading_log_eigenvalue(big_n, n, p.0))?;
        unsafe { write(out, v, "out") }
    })
}

/// Same quantity from the dense transfer matrix; limited to small rings.
///
/// # Safety
/// `p` must be a live params handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_oracle_leading_eigenvalue(
    p: *const FvParams,
    big_n: usize,
    n: usize,
    out: *mut f64,
) -> FvStatus {
    guard(|| {
        let p = unsafe { deref(p, "params") }?;
        let v = lift(lift(bethe::transfer_matrix_oracle(big_n, n, p.0))?.leading_eigenvalue())?;
        unsafe { write(out, v, "out") }
    })
}

/// Free energy per site and the maximizing vertical density.
///
/// # Safety
/// `p` must be a live params handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn fv_free_energy(p: *const FvParams, value: *mut f64, s_star: *mut f64) -> FvStatus {
    guard(|| {
        let p = unsafe { deref(p, "params") }?;
        let f = lift(thermo::free_energy(p.0))?;
        unsafe {
            write(value, f.value, "value")?;
            write(s_star, f.s_star, "s_star")
        }
    })
}

/// Surface tension at slope (s, t); only the weight of `p` is used.
///
/// # Safety
/// `p` must be a live params handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_surface_tension(p: *const FvParams, s: f64, t: f64, out: *mut f64) -> FvStatus {
    guard(|| {
        let p = unsafe { deref(p, "params") }?;
        let v = lift(SlopePoint::new(s, t).and_then(|st| thermo::surface_tension(st, p.0)))?;
        unsafe { write(out, v, "out") }
    })
}

/// Gradient of the surface tension at slope (s, t).
///
/// # Safety
/// `p` must be a live params handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn fv_tension_gradient(
    p: *const FvParams,
    s: f64,
    t: f64,
    dx: *mut f64,
    dy: *mut f64,
) -> FvStatus {
    guard(|| {
        let p = unsafe { deref(p, "params") }?;
        let (gx, gy) = lift(SlopePoint::new(s, t).and_then(|st| thermo::tension_gradient(st, p.0)))?;
        unsafe {
            write(dx, gx, "dx")?;
            write(dy, gy, "dy")
        }
    })
}

/// Bloch-Wigner dilogarithm at re + i im.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_bloch_wigner(re: f64, im: f64, out: *mut f64) -> FvStatus {
    guard(|| {
        if !(re.is_finite() && im.is_finite()) {
            set_error(format!("non-finite argument ({re}, {im})"));
            return Err(FvStatus::Domain);
        }
        unsafe { write(out, complexfn::bloch_wigner(ComplexValue::new(re, im)), "out") }
    })
}

/// Traces the arctic boundary with `per_piece` samples on each boundary piece.
///
/// # Safety
/// `p` must be a live params handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn fv_boundary_new(p: *const FvParams, per_piece: usize, out: *mut *mut FvBoundary) -> FvStatus {
    guard(|| {
        let p = unsafe { deref(p, "params") }?;
        let b = lift(BppBoundary::new(p.0, per_piece))?;
        unsafe { write(out, Box::into_raw(Box::new(FvBoundary(b.polygon()))), "out") }
    })
}

/// # Safety
/// `b` must be null or a handle from `fv_boundary_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fv_boundary_free(b: *mut FvBoundary) {
    if !b.is_null() {
        drop(unsafe { Box::from_raw(b) });
    }
}

/// Number of polygon vertices.
///
/// # Safety
/// `b` must be a live boundary handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_boundary_len(b: *const FvBoundary, out: *mut usize) -> FvStatus {
    guard(|| {
        let b = unsafe { deref(b, "boundary") }?;
        unsafe { write(out, b.0.len(), "out") }
    })
}

/// Copies up to `cap` vertices as interleaved x, y pairs into `xy` (length 2 * cap).
/// `written` receives the number of vertices copied.
///
/// # Safety
/// `b` must be a live boundary handle, `xy` must hold `2 * cap` doubles, `written` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_boundary_points(
    b: *const FvBoundary,
    xy: *mut f64,
    cap: usize,
    written: *mut usize,
) -> FvStatus {
    guard(|| {
        let b = unsafe { deref(b, "boundary") }?;
        if xy.is_null() && cap > 0 {
            return Err(null("xy"));
        }
        let n = b.0.len().min(cap);
        for (k, &(x, y)) in b.0[..n].iter().enumerate() {
            unsafe {
                *xy.add(2 * k) = x;
                *xy.add(2 * k + 1) = y;
            }
        }
        unsafe { write(written, n, "written") }
    })
}

/// Sampler on the hexagon of side `n`, started from the empty partition.
///
/// # Safety
/// `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn fv_chain_new(n: usize, r: f64, seed: u64, out: *mut *mut FvChain) -> FvStatus {
    guard(|| {
        if !(r.is_finite() && r > 0.0) {
            set_error(format!("weight must be positive and finite, got {r}"));
            return Err(FvStatus::InvalidParameter);
        }
        let field = lift(init_bpp(n))?;
        unsafe { write(out, Box::into_raw(Box::new(FvChain(Chain::new(field, r, seed)))), "out") }
    })
}

/// # Safety
/// `c` must be null or a handle from `fv_chain_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fv_chain_free(c: *mut FvChain) {
    if !c.is_null() {
        drop(unsafe { Box::from_raw(c) });
    }
}

/// Runs `sweeps` heat-bath sweeps.
///
/// # Safety
/// `c` must be a live chain handle.
#[no_mangle]
pub unsafe extern "C" fn fv_chain_sweep(c: *mut FvChain, sweeps: u64) -> FvStatus {
    guard(|| {
        let c = unsafe { c.as_mut() }.ok_or_else(|| null("chain"))?;
        for _ in 0..sweeps {
            c.0.sweep();
        }
        Ok(())
    })
}

/// Height at face (i, j), with 0 <= i, j <= 2n and |i - j| <= n.
///
/// # Safety
/// `c` must be a live chain handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_chain_height(c: *const FvChain, i: usize, j: usize, out: *mut i32) -> FvStatus {
    guard(|| {
        let c = unsafe { deref(c, "chain") }?;
        let dom = &c.0.field.domain;
        if !(i < dom.side() && j < dom.side() && dom.contains(i as isize, j as isize)) {
            set_error(format!("face ({i}, {j}) outside the hexagon"));
            return Err(FvStatus::Range);
        }
        unsafe { write(out, c.0.field.get(i, j), "out") }
    })
}
