//! C ABI over `hurwitz-rh`: opaque surface handles, integer status codes and
//! caller-owned output buffers. Complex outputs are split into `re`/`im` arrays,
//! matrices are row-major.

use hurwitz_rh::contours::ZLift;
use hurwitz_rh::kernels::{rotation_data, spectrum, KernelEvaluator, Surface};
use hurwitz_rh::monodromy::{connection_matrix, stokes_matrix, QMat};
use hurwitz_rh::rh_solver::{psi_matrix, verify_stokes_numeric, FrameKind, SolverOptions};
use hurwitz_rh::{Covering, Error, C64};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrhStatus {
    Ok = 0,
    NullPointer = 1,
    BufferTooSmall = 2,
    InvalidInput = 3,
    Unsupported = 4,
    OnDivisor = 5,
    NumericalFailure = 6,
    ConsistencyFailure = 7,
    Panic = 8,
}

/// Which sectorial solution to evaluate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrhSide {
    Right = 0,
    Left = 1,
}

/// Opaque handle: a covering with its kernel data.
pub struct HrhSurface {
    surface: Surface,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HrhStatus {
    match e {
        Error::Validation(_) | Error::DegenerateCovering(_) | Error::NotAdmissible(_) | Error::ContourCollision(_) => {
            HrhStatus::InvalidInput
        }
        Error::Unsupported(_) | Error::AssumptionViolated(_) | Error::BasisDecompositionUnavailable(_) => {
            HrhStatus::Unsupported
        }
        Error::OnDeformationDivisor { .. } => HrhStatus::OnDivisor,
        Error::ConsistencyFailure(_) | Error::SpectrumMismatch(_) => HrhStatus::ConsistencyFailure,
        _ => HrhStatus::NumericalFailure,
    }
}

fn guard<F: FnOnce() -> Result<(), HrhStatus>>(f: F) -> HrhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HrhStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            HrhStatus::Panic
        }
    }
}

fn lift<T>(r: hurwitz_rh::Result<T>) -> Result<T, HrhStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize) -> Result<&'a mut [T], HrhStatus> {
    if p.is_null() {
        set_error("null output buffer".into());
        return Err(HrhStatus::NullPointer);
    }
    if len < need {
        set_error(format!("output buffer holds {len} entries, {need} needed"));
        return Err(HrhStatus::BufferTooSmall);
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn handle<'a>(s: *const HrhSurface) -> Result<&'a HrhSurface, HrhStatus> {
    if s.is_null() {
        set_error("null surface handle".into());
        return Err(HrhStatus::NullPointer);
    }
    Ok(&*s)
}

/// Builds the two-sheeted covering branched at `re[k] + i·im[k]`, `k < n`, with
/// admissible line angle `phi`. On success `*out` owns a handle to be released
/// with [`hrh_surface_free`].
///
/// # Safety
/// `re` and `im` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hrh_surface_hyperelliptic(
    re: *const f64,
    im: *const f64,
    n: usize,
    phi: f64,
    out: *mut *mut HrhSurface,
) -> HrhStatus {
    guard(|| {
        if re.is_null() || im.is_null() || out.is_null() {
            set_error("null argument".into());
            return Err(HrhStatus::NullPointer);
        }
        let (re, im) = (std::slice::from_raw_parts(re, n), std::slice::from_raw_parts(im, n));
        let pts: Vec<C64> = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        let cov = lift(Covering::hyperelliptic(&pts, phi))?;
        let surface = lift(Surface::new(&cov))?;
        *out = Box::into_raw(Box::new(HrhSurface { surface }));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`hrh_surface_hyperelliptic`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hrh_surface_free(s: *mut HrhSurface) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of branch points (0 for a null handle).
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hrh_surface_size(s: *const HrhSurface) -> usize {
    s.as_ref().map_or(0, |h| h.surface.cov.n())
}

/// Genus of the surface (0 for a null handle).
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hrh_surface_genus(s: *const HrhSurface) -> usize {
    s.as_ref().map_or(0, |h| h.surface.genus())
}

/// Branch points in the internal (ordered) indexing.
///
/// # Safety
/// `re`/`im` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hrh_branch_points(s: *const HrhSurface, re: *mut f64, im: *mut f64, len: usize) -> HrhStatus {
    guard(|| {
        let h = handle(s)?;
        let pts = &h.surface.cov.branch_points;
        let (r, i) = (out_slice(re, len, pts.len())?, out_slice(im, len, pts.len())?);
        for (k, p) in pts.iter().enumerate() {
            r[k] = p.re;
            i[k] = p.im;
        }
        Ok(())
    })
}

fn write_integers(m: &QMat, out: &mut [i64]) -> Result<(), HrhStatus> {
    let rows = m.to_i64().ok_or_else(|| {
        set_error("matrix is not integral".into());
        HrhStatus::ConsistencyFailure
    })?;
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[i * m.cols + j] = v;
        }
    }
    Ok(())
}

/// Exact Stokes matrix, row-major `n×n` integers.
///
/// # Safety
/// `out` must hold `len` writable `int64_t`.
#[no_mangle]
pub unsafe extern "C" fn hrh_stokes_matrix(s: *const HrhSurface, out: *mut i64, len: usize) -> HrhStatus {
    guard(|| {
        let h = handle(s)?;
        let n = h.surface.cov.n();
        let buf = out_slice(out, len, n * n)?;
        write_integers(&lift(stokes_matrix(&h.surface.cov))?, buf)
    })
}

/// Exact connection matrix, row-major `n×n` integers.
///
/// # Safety
/// `out` must hold `len` writable `int64_t`.
#[no_mangle]
pub unsafe extern "C" fn hrh_connection_matrix(s: *const HrhSurface, out: *mut i64, len: usize) -> HrhStatus {
    guard(|| {
        let h = handle(s)?;
        let n = h.surface.cov.n();
        let buf = out_slice(out, len, n * n)?;
        write_integers(&lift(connection_matrix(&h.surface.cov))?, buf)
    })
}

/// Eigenvalues of `V`, sorted, checked against the predicted spectrum to `tol`.
///
/// # Safety
/// `re`/`im` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hrh_spectrum(s: *const HrhSurface, tol: f64, re: *mut f64, im: *mut f64, len: usize) -> HrhStatus {
    guard(|| {
        let h = handle(s)?;
        let n = h.surface.cov.n();
        let (r, i) = (out_slice(re, len, n)?, out_slice(im, len, n)?);
        let rot = lift(rotation_data(&KernelEvaluator::w(h.surface.clone())))?;
        let eig = lift(spectrum(&rot, &h.surface.cov, false, tol))?;
        for (k, e) in eig.iter().enumerate() {
            r[k] = e.re;
            i[k] = e.im;
        }
        Ok(())
    })
}

/// `Ψ^{r/l}(z)`, row-major `n×n`, with `arg z` taken in `(φ − π, φ + π]`.
///
/// # Safety
/// `re`/`im` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hrh_psi(
    s: *const HrhSurface,
    z_re: f64,
    z_im: f64,
    side: HrhSide,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> HrhStatus {
    guard(|| {
        let h = handle(s)?;
        let n = h.surface.cov.n();
        let (r, i) = (out_slice(re, len, n * n)?, out_slice(im, len, n * n)?);
        let k = KernelEvaluator::w(h.surface.clone());
        let z = ZLift::new(C64::new(z_re, z_im), h.surface.cov.line.phi);
        let kind = if side == HrhSide::Right { FrameKind::R } else { FrameKind::L };
        let f = lift(psi_matrix(&k, z, kind, &SolverOptions::default()))?;
        for a in 0..n {
            for b in 0..n {
                r[a * n + b] = f.matrix[(a, b)].re;
                i[a * n + b] = f.matrix[(a, b)].im;
            }
        }
        Ok(())
    })
}

/// Relative residuals of `Ψ^l = Ψ^r S` on `l_+` and `Ψ^l = Ψ^r Sᵀ` on `l_−` at `|z| = modulus`.
///
/// # Safety
/// `plus` and `minus` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hrh_verify_stokes(s: *const HrhSurface, modulus: f64, plus: *mut f64, minus: *mut f64) -> HrhStatus {
    guard(|| {
        let h = handle(s)?;
        if plus.is_null() || minus.is_null() {
            set_error("null output".into());
            return Err(HrhStatus::NullPointer);
        }
        let st = lift(stokes_matrix(&h.surface.cov))?.to_complex();
        let k = KernelEvaluator::w(h.surface.clone());
        let chk = lift(verify_stokes_numeric(&k, modulus, &st, None, &SolverOptions::default()))?;
        *plus = chk.plus;
        *minus = chk.minus;
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Valid until the next call
/// into the library from the same thread.
#[no_mangle]
pub extern "C" fn hrh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn hrh_status_str(status: HrhStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        HrhStatus::Ok => b"ok\0",
        HrhStatus::NullPointer => b"null pointer\0",
        HrhStatus::BufferTooSmall => b"buffer too small\0",
        HrhStatus::InvalidInput => b"invalid input\0",
        HrhStatus::Unsupported => b"unsupported\0",
        HrhStatus::OnDivisor => b"on deformation divisor\0",
        HrhStatus::NumericalFailure => b"numerical failure\0",
        HrhStatus::ConsistencyFailure => b"consistency failure\0",
        HrhStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}
