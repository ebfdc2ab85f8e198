//! C ABI over `frame_recon`.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `*_free`. Every fallible call returns an [`FrStatus`] and, on
//! failure, stores a message retrievable with [`fr_last_error`] on the same
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use frame_recon::error::FrameError;
use frame_recon::eval::{plan_for, reconstruct, ConstantsMode, EvalGrid, Method, ReconstructionResult};
use frame_recon::kernels::{frame_coefficients, TestFunction};
use frame_recon::numerics::DEFAULT_REL_TOL;
use frame_recon::operators::{MRule, TruncationPlan};
use frame_recon::patterns::{
    generate_integer_grid, generate_jittered, generate_polar, generate_rosette, generate_spiral, preset,
    JitterParams, Node2, PatternKind, SamplingPattern,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SingularGram = 4,
    SingularOperator = 5,
    NumericalFailure = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrPatternKind {
    Jittered = 0,
    Rosette = 1,
    Spiral = 2,
    Polar = 3,
    IntegerGrid = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrFunction {
    F1 = 0,
    F2 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrMethod {
    Af = 0,
    Cc = 1,
}

/// Opaque sampling pattern.
pub struct FrPattern {
    inner: SamplingPattern,
}

/// Opaque reconstruction result.
pub struct FrReconstruction {
    inner: ReconstructionResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &FrameError) -> FrStatus {
    match err {
        FrameError::DimensionMismatch { .. } => FrStatus::DimensionMismatch,
        FrameError::SingularGram { .. } => FrStatus::SingularGram,
        FrameError::SingularOperator { .. } => FrStatus::SingularOperator,
        FrameError::NumericalFailure { .. } => FrStatus::NumericalFailure,
        _ => FrStatus::InvalidArgument,
    }
}

fn guard(body: impl FnOnce() -> Result<(), (FrStatus, String)>) -> FrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FrStatus::Panic
        }
    }
}

fn lib(err: FrameError) -> (FrStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (FrStatus, String) {
    (FrStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `out` must be valid for a pointer write.
unsafe fn emit_pattern(out: *mut *mut FrPattern, built: Result<SamplingPattern, FrameError>) -> Result<(), (FrStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let p = built.map_err(lib)?;
    *out = Box::into_raw(Box::new(FrPattern { inner: p }));
    Ok(())
}

/// # Safety
/// `ptr` must be null or point to `len` readable values.
unsafe fn input<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], (FrStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fr_pattern_jittered(m1: usize, m2: usize, bound: f64, seed: u64, out: *mut *mut FrPattern) -> FrStatus {
    guard(|| emit_pattern(out, generate_jittered(JitterParams { m1, m2, bound }, seed)))
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fr_pattern_integer_grid(m1: usize, m2: usize, out: *mut *mut FrPattern) -> FrStatus {
    guard(|| emit_pattern(out, generate_integer_grid(m1, m2)))
}

/// # Safety
/// `t` must point to `len` doubles; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fr_pattern_rosette(
    k_max: f64,
    w1: f64,
    w2: f64,
    t: *const f64,
    len: usize,
    out: *mut *mut FrPattern,
) -> FrStatus {
    guard(|| {
        let t = input(t, len, "t")?;
        emit_pattern(out, generate_rosette(k_max, w1, w2, t))
    })
}

/// # Safety
/// `theta` must point to `len` doubles; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fr_pattern_spiral(c: f64, theta: *const f64, len: usize, out: *mut *mut FrPattern) -> FrStatus {
    guard(|| {
        let theta = input(theta, len, "theta")?;
        emit_pattern(out, generate_spiral(c, theta))
    })
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fr_pattern_polar(c: f64, r: usize, t: usize, out: *mut *mut FrPattern) -> FrStatus {
    guard(|| emit_pattern(out, generate_polar(c, r, t)))
}

/// Desk-scale preset with `side * side` nodes.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fr_pattern_preset(kind: FrPatternKind, side: usize, seed: u64, out: *mut *mut FrPattern) -> FrStatus {
    let kind = match kind {
        FrPatternKind::Jittered => PatternKind::Jittered,
        FrPatternKind::Rosette => PatternKind::Rosette,
        FrPatternKind::Spiral => PatternKind::Spiral,
        FrPatternKind::Polar => PatternKind::Polar,
        FrPatternKind::IntegerGrid => PatternKind::IntegerGrid,
    };
    guard(|| emit_pattern(out, preset(kind, side, seed)))
}

/// # Safety
/// `lambda1` and `lambda2` must each point to `len` doubles; `out` must be
/// valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fr_pattern_custom(
    lambda1: *const f64,
    lambda2: *const f64,
    len: usize,
    out: *mut *mut FrPattern,
) -> FrStatus {
    guard(|| {
        let a = input(lambda1, len, "lambda1")?;
        let b = input(lambda2, len, "lambda2")?;
        let nodes = a.iter().zip(b).map(|(&x, &y)| Node2::new(x, y)).collect();
        emit_pattern(out, SamplingPattern::custom(nodes))
    })
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `pattern` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_pattern_len(pattern: *const FrPattern) -> usize {
    pattern.as_ref().map_or(0, |p| p.inner.len())
}

/// # Safety
/// `pattern` must be a live handle; `lambda1`, `lambda2` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fr_pattern_node(
    pattern: *const FrPattern,
    index: usize,
    lambda1: *mut f64,
    lambda2: *mut f64,
) -> FrStatus {
    guard(|| {
        let p = pattern.as_ref().ok_or_else(|| null("pattern"))?;
        if lambda1.is_null() || lambda2.is_null() {
            return Err(null("output"));
        }
        let n = p.inner.nodes().get(index).ok_or_else(|| {
            (FrStatus::InvalidArgument, format!("node index {index} out of range for {} nodes", p.inner.len()))
        })?;
        *lambda1 = n.lambda1;
        *lambda2 = n.lambda2;
        Ok(())
    })
}

/// # Safety
/// `pattern` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fr_pattern_free(pattern: *mut FrPattern) {
    if !pattern.is_null() {
        drop(Box::from_raw(pattern));
    }
}

fn function(f: FrFunction) -> TestFunction {
    match f {
        FrFunction::F1 => TestFunction::F1,
        FrFunction::F2 => TestFunction::F2,
    }
}

/// Closed-form `⟨f, ψ_j⟩` for every node; `len` must equal the node count.
///
/// # Safety
/// `pattern` must be a live handle; `re` and `im` must each be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fr_frame_coefficients(
    pattern: *const FrPattern,
    f: FrFunction,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> FrStatus {
    guard(|| {
        let p = pattern.as_ref().ok_or_else(|| null("pattern"))?;
        if len != p.inner.len() {
            return Err(lib(FrameError::DimensionMismatch { expected: p.inner.len(), actual: len }));
        }
        if re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        let data = frame_coefficients(function(f), &p.inner);
        let (re, im) = (slice::from_raw_parts_mut(re, len), slice::from_raw_parts_mut(im, len));
        for (i, c) in data.iter().enumerate() {
            re[i] = c.re;
            im[i] = c.im;
        }
        Ok(())
    })
}

/// Reconstructs `f` from its frame data on `pattern`.
///
/// `n = 0` chooses the reconstruction side from the node count, which must
/// then be a perfect square. `rel_tol <= 0` selects the default cutoff and
/// `grid` is the evaluation resolution per axis. A singular C-C operator is
/// not an error: the result reports it and its MSE is NaN.
///
/// # Safety
/// `pattern` must be a live handle; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fr_reconstruct(
    pattern: *const FrPattern,
    f: FrFunction,
    method: FrMethod,
    n: usize,
    rel_tol: f64,
    grid: usize,
    out: *mut *mut FrReconstruction,
) -> FrStatus {
    guard(|| {
        let p = pattern.as_ref().ok_or_else(|| null("pattern"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let len = p.inner.len();
        let side = (len as f64).sqrt().round() as usize;
        let square = side * side == len;
        let plan = match (n, square) {
            (0, false) => {
                return Err((FrStatus::InvalidArgument, format!("{len} nodes is not a square; pass n explicitly")));
            }
            (0, true) => plan_for(&p.inner, side, ConstantsMode::Preset, MRule::Consistent).map_err(lib)?,
            (n, _) => {
                let data = if square { (side, side) } else { (len, 1) };
                TruncationPlan {
                    n: (n, n),
                    m: data,
                    data,
                    b_mn: f64::NAN,
                    a_mn: None,
                    lambda_min_used: 1.0,
                    constants: frame_recon::operators::TruncationConstants::table_preset(),
                    bounds_used: None,
                }
            }
        };
        let method = match method {
            FrMethod::Af => Method::Af,
            FrMethod::Cc => Method::Cc,
        };
        let tol = if rel_tol > 0.0 { rel_tol } else { DEFAULT_REL_TOL };
        let grid = EvalGrid::new(grid, grid).map_err(lib)?;
        let r = reconstruct(function(f), method, &p.inner, &plan, tol, grid).map_err(lib)?;
        *out = Box::into_raw(Box::new(FrReconstruction { inner: r }));
        Ok(())
    })
}

/// Mean-square error on the evaluation grid; NaN when singular or null.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_reconstruction_mse(r: *const FrReconstruction) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.inner.mse)
}

/// 1 if the C-C operator was singular, 0 otherwise (or for null).
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_reconstruction_is_singular(r: *const FrReconstruction) -> i32 {
    r.as_ref().map_or(0, |r| i32::from(r.inner.diagnostics.singular))
}

/// Reconstruction side `n` actually used.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_reconstruction_n(r: *const FrReconstruction) -> usize {
    r.as_ref().map_or(0, |r| r.inner.diagnostics.n.0)
}

/// Number of coefficients (0 when singular).
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_reconstruction_coefficient_count(r: *const FrReconstruction) -> usize {
    r.as_ref().map_or(0, |r| r.inner.coefficients.len())
}

/// Copies the coefficients; `len` must equal the coefficient count.
///
/// # Safety
/// `r` must be a live handle; `re` and `im` must each be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fr_reconstruction_coefficients(
    r: *const FrReconstruction,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> FrStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("reconstruction"))?;
        let c = &r.inner.coefficients;
        if len != c.len() {
            return Err(lib(FrameError::DimensionMismatch { expected: c.len(), actual: len }));
        }
        if len == 0 {
            return Ok(());
        }
        if re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        let (re, im) = (slice::from_raw_parts_mut(re, len), slice::from_raw_parts_mut(im, len));
        for (i, z) in c.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fr_reconstruction_free(r: *mut FrReconstruction) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
