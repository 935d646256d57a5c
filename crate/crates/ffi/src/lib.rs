//! C ABI for foldspec.
//!
//! Objects cross the boundary as opaque handles created by `fs_*_new` style
//! constructors and released with the matching `fs_*_free`. Every fallible
//! function returns an [`FsStatus`]; on failure a message is kept per thread
//! and can be copied out with [`fs_last_error_message`].

use foldspec::bounds::{planar_bound_certificate_with, Branch, CertificateOptions};
use foldspec::fem::{build_mesh, neumann_eigs, DomainSpec};
use foldspec::measures::{pullback_measure, ConformalDomain, DiscreteMeasure};
use foldspec::moebius::renormalize;
use foldspec::specfun::{bound_constants, find_zeta, mu1_disk, planar_bound};
use foldspec::Error;
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NonConvergence = 3,
    NotUnivalent = 4,
    EvenDimension = 5,
    NotMultiple = 6,
    Mesh = 7,
    BufferTooSmall = 8,
    Io = 9,
    Numeric = 10,
    Panic = 99,
}

/// Measure on the disk or a sphere.
pub struct FsMeasure(DiscreteMeasure);

/// Simply connected domain given by a univalent polynomial map of the disk.
pub struct FsDomain(ConformalDomain);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsConstants {
    pub zeta: f64,
    pub mu1_disk: f64,
    /// `2μ₁(𝔻)π`
    pub planar_bound: f64,
    /// Sphere constant `(n+1)(2K_n)^{2/n}` for the requested `n`.
    pub theorem_constant: f64,
    pub conjecture_constant: f64,
    pub ratio: f64,
    pub even_dimension: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsBoundReport {
    pub area: f64,
    pub quotient_sup: f64,
    pub bound: f64,
    pub margin: f64,
    /// 0 for the simple (folded) branch, 1 for the multiple (direct) branch.
    pub branch: u32,
    pub holds: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> FsStatus {
    match err {
        Error::NonConvergence { .. } | Error::NoConvergence(_) => FsStatus::NonConvergence,
        Error::NotUnivalent(_) => FsStatus::NotUnivalent,
        Error::EvenDimension(_) => FsStatus::EvenDimension,
        Error::NotMultiple { .. } | Error::NotFound { .. } => FsStatus::NotMultiple,
        Error::NeckTooNarrow { .. } | Error::DegenerateTriangle { .. } | Error::InvalidMesh(_) => FsStatus::Mesh,
        Error::Io(_) => FsStatus::Io,
        Error::NotPositiveDefinite(_) | Error::DegenerateField { .. } => FsStatus::Numeric,
        _ => FsStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), FsStatus>) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside foldspec".into());
            FsStatus::Panic
        }
    }
}

fn fail(err: Error) -> FsStatus {
    let s = status_of(&err);
    set_error(err.to_string());
    s
}

fn null(what: &str) -> FsStatus {
    set_error(format!("{what} is null"));
    FsStatus::NullPointer
}

fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, FsStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        set_error(format!("{what} is not UTF-8"));
        FsStatus::InvalidInput
    })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn fs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Planar constants and the sphere constants for dimension `n`.
///
/// # Safety
/// `out` must point to writable memory for one `FsConstants`.
#[no_mangle]
pub unsafe extern "C" fn fs_constants(n: u32, out: *mut FsConstants) -> FsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = bound_constants(n);
        *out = FsConstants {
            zeta: find_zeta(),
            mu1_disk: mu1_disk(),
            planar_bound: planar_bound(),
            theorem_constant: c.theorem_constant,
            conjecture_constant: c.conjecture_constant,
            ratio: c.ratio,
            even_dimension: c.even_dimension_warning,
        };
        Ok(())
    })
}

/// Builds a domain from `count` complex Taylor coefficients `c₁, c₂, …`
/// stored as interleaved `(re, im)` pairs.
///
/// # Safety
/// `coeffs` must hold `2 * count` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_domain_new(coeffs: *const f64, count: usize, out: *mut *mut FsDomain) -> FsStatus {
    guard(|| {
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let raw = std::slice::from_raw_parts(coeffs, 2 * count);
        let c = raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let d = ConformalDomain::new(c).map_err(fail)?;
        *out = Box::into_raw(Box::new(FsDomain(d)));
        Ok(())
    })
}

/// # Safety
/// `domain` must be null or a handle from [`fs_domain_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_domain_free(domain: *mut FsDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Area of the domain, or NaN for a null handle.
///
/// # Safety
/// `domain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_domain_area(domain: *const FsDomain) -> f64 {
    domain.as_ref().map_or(f64::NAN, |d| d.0.area)
}

/// Pulls the area measure of `domain` back to the disk on an
/// `n_r × n_theta` polar grid.
///
/// # Safety
/// `domain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_measure_pullback(
    domain: *const FsDomain,
    n_r: usize,
    n_theta: usize,
    out: *mut *mut FsMeasure,
) -> FsStatus {
    guard(|| {
        let d = domain.as_ref().ok_or_else(|| null("domain"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = pullback_measure(&d.0, n_r, n_theta).map_err(fail)?;
        *out = Box::into_raw(Box::new(FsMeasure(m)));
        Ok(())
    })
}

/// Parses a measure from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_measure_from_json(json: *const c_char, out: *mut *mut FsMeasure) -> FsStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| fail(e.into()))?;
        let m = DiscreteMeasure::from_json(&v).map_err(fail)?;
        *out = Box::into_raw(Box::new(FsMeasure(m)));
        Ok(())
    })
}

/// # Safety
/// `measure` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_measure_free(measure: *mut FsMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Number of atoms, or 0 for a null handle.
///
/// # Safety
/// `measure` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_measure_len(measure: *const FsMeasure) -> usize {
    measure.as_ref().map_or(0, |m| m.0.len())
}

/// Ambient dimension of the atoms (2 on the disk, `n + 1` on `𝕊ⁿ`).
///
/// # Safety
/// `measure` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_measure_dim(measure: *const FsMeasure) -> usize {
    measure.as_ref().map_or(0, |m| m.0.dim())
}

/// # Safety
/// `measure` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_measure_mass(measure: *const FsMeasure) -> f64 {
    measure.as_ref().map_or(f64::NAN, |m| m.0.total_mass())
}

/// Renormalizing Möbius point `ξ` of the measure, written to `xi` (which
/// must hold [`fs_measure_dim`] doubles). `residual` may be null.
///
/// # Safety
/// Pointers must be valid as described.
#[no_mangle]
pub unsafe extern "C" fn fs_renormalize(
    measure: *const FsMeasure,
    tol: f64,
    seed: u64,
    xi: *mut f64,
    xi_len: usize,
    residual: *mut f64,
) -> FsStatus {
    guard(|| {
        let m = measure.as_ref().ok_or_else(|| null("measure"))?;
        if xi.is_null() {
            return Err(null("xi"));
        }
        let r = renormalize(&m.0, tol, seed).map_err(fail)?;
        if xi_len < r.xi.xi.len() {
            set_error(format!("xi needs {} entries", r.xi.xi.len()));
            return Err(FsStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(r.xi.xi.as_ptr(), xi, r.xi.xi.len());
        if !residual.is_null() {
            *residual = r.residual;
        }
        Ok(())
    })
}

/// Rayleigh-quotient certificate of the planar bound for `domain`, with the
/// measure sampled on an `n_r × n_theta` grid.
///
/// # Safety
/// `domain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_certify(
    domain: *const FsDomain,
    n_r: usize,
    n_theta: usize,
    out: *mut FsBoundReport,
) -> FsStatus {
    guard(|| {
        let d = domain.as_ref().ok_or_else(|| null("domain"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = CertificateOptions {
            n_r,
            n_theta,
            ..CertificateOptions::default()
        };
        let r = planar_bound_certificate_with(&d.0, "ffi", &opts).map_err(fail)?;
        *out = FsBoundReport {
            area: r.area,
            quotient_sup: r.quotient_sup,
            bound: r.bound,
            margin: r.margin,
            branch: match r.branch {
                Branch::SimpleFolded => 0,
                Branch::MultipleDirect => 1,
            },
            holds: r.holds(),
        };
        Ok(())
    })
}

/// Smallest `count` Neumann eigenvalues `μ₀ ≤ μ₁ ≤ …` of the domain
/// described by `spec` (the CLI spec syntax, e.g. `disk`, `rectangle:2,1`,
/// `neck:0.2,0.2` or JSON), meshed at size `h`. `count` must be at least 3.
///
/// # Safety
/// `spec` must be NUL-terminated and `values` hold `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_fem_eigenvalues(
    spec: *const c_char,
    h: f64,
    values: *mut f64,
    count: usize,
) -> FsStatus {
    guard(|| {
        let text = c_str(spec, "spec")?;
        if values.is_null() {
            return Err(null("values"));
        }
        if count < 3 {
            set_error(format!("need at least 3 eigenvalues, got {count}"));
            return Err(FsStatus::InvalidInput);
        }
        let spec = DomainSpec::parse(text).map_err(fail)?;
        let mesh = build_mesh(&spec, h).map_err(fail)?;
        let res = neumann_eigs(&mesh, count - 1).map_err(fail)?;
        ptr::copy_nonoverlapping(res.eigenvalues.as_ptr(), values, count);
        Ok(())
    })
}
