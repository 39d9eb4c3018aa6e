//! C ABI over `spectra`.
//!
//! Families and branches are opaque heap handles released with their
//! `_free` function. Every fallible call returns a [`SpectraStatus`]; on
//! failure the message is available from [`spectra_last_error`] on the same
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use spectra::family::spec::FamilySpec;
use spectra::hermitian::try_eig_ordered;
use spectra::regularity::{holder_constant, PairPolicy};
use spectra::tracking::{continuous_selection, sample_grid, spectral_scale, Strategy, DEFAULT_REL_TOL};
use spectra::{Branch, HermitianMatrix, ParamFamily, SpectraError};

pub const SPECTRA_STRATEGY_ORDERED: u32 = 0;
pub const SPECTRA_STRATEGY_SECANT: u32 = 1;
pub const SPECTRA_STRATEGY_STRICT: u32 = 2;

pub const SPECTRA_PAIRS_ALL: u32 = 0;
pub const SPECTRA_PAIRS_DYADIC: u32 = 1;
pub const SPECTRA_PAIRS_AUTO: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectraStatus {
    Ok = 0,
    /// Malformed spec, matrix, grid or argument.
    BadInput = 1,
    /// A numerical check failed: no convergence, ambiguous crossing, ...
    Numerical = 2,
    NullPointer = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Opaque family handle.
pub struct SpectraFamily {
    inner: ParamFamily,
}

/// Opaque branch handle.
pub struct SpectraBranch {
    inner: Branch,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(SpectraStatus, String);

impl From<SpectraError> for Fail {
    fn from(e: SpectraError) -> Self {
        let status = if e.is_bad_input() { SpectraStatus::BadInput } else { SpectraStatus::Numerical };
        Fail(status, e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(SpectraStatus::NullPointer, format!("`{name}` is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpectraStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SpectraStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            SpectraStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn input<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, needed: usize, name: &str) -> Result<&'a mut [f64], Fail> {
    if len < needed {
        return Err(Fail(SpectraStatus::BufferTooSmall, format!("`{name}` holds {len}, need {needed}")));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts_mut(p, needed))
}

/// Message of the last failed call on this thread, or "" after a success.
/// Valid until the next `spectra_*` call on this thread.
#[no_mangle]
pub extern "C" fn spectra_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a family from a NUL-terminated JSON spec. `seed` fills in a
/// missing random seed.
///
/// # Safety
/// `json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn spectra_family_from_json(json: *const c_char, seed: u64, out: *mut *mut SpectraFamily) -> SpectraStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| Fail(SpectraStatus::BadInput, format!("spec is not UTF-8: {e}")))?;
        let family = FamilySpec::from_json(text)?.build(seed)?;
        *out = Box::into_raw(Box::new(SpectraFamily { inner: family }));
        Ok(())
    })
}

/// # Safety
/// `family` must come from `spectra_family_from_json` and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn spectra_family_free(family: *mut SpectraFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// # Safety
/// Pointers must be valid; either output may be NULL.
#[no_mangle]
pub unsafe extern "C" fn spectra_family_dims(family: *const SpectraFamily, matrix_dim: *mut usize, param_dim: *mut usize) -> SpectraStatus {
    guard(|| {
        let f = &as_ref(family, "family")?.inner;
        if !matrix_dim.is_null() {
            *matrix_dim = f.matrix_dim();
        }
        if !param_dim.is_null() {
            *param_dim = f.param_dim();
        }
        Ok(())
    })
}

/// Ascending eigenvalues of `A(t)` for a one-parameter family into
/// `out[0..N]`.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spectra_family_eigenvalues(family: *const SpectraFamily, t: f64, out: *mut f64, len: usize) -> SpectraStatus {
    guard(|| {
        let f = &as_ref(family, "family")?.inner;
        let values = try_eig_ordered(&f.eval_at(t)?)?.values;
        output(out, len, values.len(), "out")?.copy_from_slice(&values);
        Ok(())
    })
}

unsafe fn matrix_from_parts(re: *const f64, im: *const f64, n: usize, name: &str) -> Result<HermitianMatrix, Fail> {
    let re = input(re, n * n, name)?;
    let im = if im.is_null() { None } else { Some(input(im, n * n, name)?) };
    Ok(match im {
        Some(im) => HermitianMatrix::from_complex_rows(n, re, im)?,
        None => HermitianMatrix::from_real_rows(n, re)?,
    })
}

/// Weyl check for two `n×n` Hermitian matrices given row-major as real and
/// imaginary parts (`*_im` may be NULL for real input).
///
/// # Safety
/// Non-NULL arrays must hold `n*n` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_weyl_check(
    a_re: *const f64,
    a_im: *const f64,
    b_re: *const f64,
    b_im: *const f64,
    n: usize,
    gap: *mut f64,
    bound: *mut f64,
    holds: *mut bool,
) -> SpectraStatus {
    guard(|| {
        if gap.is_null() || bound.is_null() || holds.is_null() {
            return Err(null("gap, bound or holds"));
        }
        let a = matrix_from_parts(a_re, a_im, n, "a")?;
        let b = matrix_from_parts(b_re, b_im, n, "b")?;
        let r = spectra::weyl_check(&a, &b)?;
        *gap = r.gap;
        *bound = r.bound;
        *holds = r.holds;
        Ok(())
    })
}

/// Samples the family on `grid` and follows a continuous selection from
/// 0-based ordered index `start_index`. `switch_tol <= 0` picks the default.
///
/// # Safety
/// `grid` must hold `nodes` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn spectra_track(
    family: *const SpectraFamily,
    grid: *const f64,
    nodes: usize,
    start_index: usize,
    strategy: u32,
    switch_tol: f64,
    out: *mut *mut SpectraBranch,
) -> SpectraStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let f = &as_ref(family, "family")?.inner;
        let grid = input(grid, nodes, "grid")?;
        let strategy = match strategy {
            SPECTRA_STRATEGY_ORDERED => Strategy::Ordered,
            SPECTRA_STRATEGY_SECANT => Strategy::Secant,
            SPECTRA_STRATEGY_STRICT => Strategy::Strict,
            other => return Err(Fail(SpectraStatus::BadInput, format!("unknown strategy {other}"))),
        };
        let samples = sample_grid(f, grid)?;
        let tol = if switch_tol > 0.0 { switch_tol } else { DEFAULT_REL_TOL * (1.0 + spectral_scale(&samples)) };
        let branch = continuous_selection(&samples, start_index, strategy, tol)?;
        *out = Box::into_raw(Box::new(SpectraBranch { inner: branch }));
        Ok(())
    })
}

/// # Safety
/// `branch` must come from `spectra_track` and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn spectra_branch_free(branch: *mut SpectraBranch) {
    if !branch.is_null() {
        drop(Box::from_raw(branch));
    }
}

/// Number of nodes, or 0 for NULL.
///
/// # Safety
/// `branch` must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn spectra_branch_len(branch: *const SpectraBranch) -> usize {
    branch.as_ref().map_or(0, |b| b.inner.len())
}

/// Copies nodes and values; either output may be NULL.
///
/// # Safety
/// Non-NULL outputs must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spectra_branch_data(branch: *const SpectraBranch, grid: *mut f64, values: *mut f64, len: usize) -> SpectraStatus {
    guard(|| {
        let b = &as_ref(branch, "branch")?.inner;
        if !grid.is_null() {
            output(grid, len, b.len(), "grid")?.copy_from_slice(&b.grid);
        }
        if !values.is_null() {
            output(values, len, b.len(), "values")?.copy_from_slice(&b.values);
        }
        Ok(())
    })
}

/// Number of switches between ordered indices along the branch.
///
/// # Safety
/// `branch` must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn spectra_branch_switches(branch: *const SpectraBranch) -> usize {
    branch.as_ref().map_or(0, |b| b.inner.switch_points.len())
}

/// Grid Hölder constant of a branch at exponent `alpha`; the witness pair
/// goes to `witness[0..2]` when non-NULL.
///
/// # Safety
/// `constant` must be writable; `witness`, if non-NULL, must hold 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn spectra_holder_constant(
    branch: *const SpectraBranch,
    alpha: f64,
    pair_policy: u32,
    constant: *mut f64,
    witness: *mut f64,
) -> SpectraStatus {
    guard(|| {
        let b = &as_ref(branch, "branch")?.inner;
        if constant.is_null() {
            return Err(null("constant"));
        }
        let policy = match pair_policy {
            SPECTRA_PAIRS_ALL => PairPolicy::All,
            SPECTRA_PAIRS_DYADIC => PairPolicy::Dyadic,
            SPECTRA_PAIRS_AUTO => PairPolicy::Auto,
            other => return Err(Fail(SpectraStatus::BadInput, format!("unknown pair policy {other}"))),
        };
        let cert = holder_constant(b, alpha, policy)?;
        *constant = cert.constant;
        if !witness.is_null() {
            slice::from_raw_parts_mut(witness, 2).copy_from_slice(&cert.witness);
        }
        Ok(())
    })
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn spectra_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
