//! C ABI for `pointderiv`.
//!
//! Domains and functions are opaque handles owned by the caller and released
//! with the matching `*_free`. Every fallible call returns a [`PdStatus`]; on
//! failure the message is available from [`pd_last_error_message`] on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use pointderiv::contour::quotient_via_cauchy;
use pointderiv::content::ContentMode;
use pointderiv::criterion::{lord_ofarrell_series, RoadrunnerFamily, Verdict};
use pointderiv::experiments::{nontangential_limit, LimitVerdict};
use pointderiv::{ConeSpec, Disk, Error, GalleryFunction, Ray, SwissCheeseDomain};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDomain = 3,
    OutsideDomain = 4,
    Singular = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdComplex {
    pub re: f64,
    pub im: f64,
}

impl From<PdComplex> for Complex64 {
    fn from(z: PdComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for PdComplex {
    fn from(z: Complex64) -> Self {
        PdComplex { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdVerdict {
    BpdSufficient = 0,
    DivergentUpperBound = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdLimitVerdict {
    Converged = 0,
    NotConverged = 1,
    Inconclusive = 2,
}

/// Summary of the content series. `total_upper` is NaN when no tail bound exists.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdCriterionSummary {
    pub verdict: PdVerdict,
    pub terms: u32,
    pub partial_sum: f64,
    pub total_upper: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdLimitSummary {
    pub verdict: PdLimitVerdict,
    pub derivative: PdComplex,
    pub estimated_limit: PdComplex,
    pub final_deviation: f64,
    pub convergence_order: f64,
}

/// Opaque Swiss-cheese domain.
pub struct PdDomain(SwissCheeseDomain);

/// Opaque Lipschitz test function.
pub struct PdFunction(GalleryFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PdStatus {
    match err {
        e if e.is_numerical() => PdStatus::Numerical,
        Error::InvalidDomain(_) => PdStatus::InvalidDomain,
        Error::OutsideDomain(_) | Error::RayNotInterior(_) | Error::ConeNotInterior(_) => PdStatus::OutsideDomain,
        Error::Singular(_) | Error::NotAnalytic(_) | Error::PoleTooClose { .. } => PdStatus::Singular,
        _ => PdStatus::InvalidArgument,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> PdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PdStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            PdStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            PdStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn store<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or 0
/// when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

unsafe fn emit_domain(d: SwissCheeseDomain, out: *mut *mut PdDomain) -> Result<(), Fail> {
    store(out, Box::into_raw(Box::new(PdDomain(d))), "out")
}

unsafe fn emit_function(f: GalleryFunction, out: *mut *mut PdFunction) -> Result<(), Fail> {
    store(out, Box::into_raw(Box::new(PdFunction(f))), "out")
}

/// The unit disk punctured at the origin.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pd_domain_punctured_disk(out: *mut *mut PdDomain) -> PdStatus {
    guard(|| emit_domain(SwissCheeseDomain::punctured_disk(), out))
}

/// Unit disk minus the holes `c_n = center_scale·center_ratio^n` at angle
/// `angle`, radius `radius_scale·radius_ratio^n`, up to `truncation`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pd_domain_roadrunner(
    center_scale: f64,
    center_ratio: f64,
    radius_scale: f64,
    radius_ratio: f64,
    angle: f64,
    truncation: u32,
    out: *mut *mut PdDomain,
) -> PdStatus {
    guard(|| {
        let fam = RoadrunnerFamily::new(center_scale, center_ratio, radius_scale, radius_ratio, angle, truncation)?;
        emit_domain(fam.domain()?, out)
    })
}

/// Outer disk minus `hole_count` closed holes with base point `base`.
///
/// # Safety
/// `hole_centers` and `hole_radii` must be valid for `hole_count` reads and
/// `out` for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pd_domain_new(
    outer_center: PdComplex,
    outer_radius: f64,
    hole_centers: *const PdComplex,
    hole_radii: *const f64,
    hole_count: usize,
    base: PdComplex,
    puncture: bool,
    out: *mut *mut PdDomain,
) -> PdStatus {
    guard(|| {
        let centers = slice(hole_centers, hole_count, "hole_centers")?;
        let radii = slice(hole_radii, hole_count, "hole_radii")?;
        let holes = centers
            .iter()
            .zip(radii)
            .map(|(&c, &r)| Disk::new(c.into(), r))
            .collect::<Result<Vec<_>, _>>()?;
        let outer = Disk::new(outer_center.into(), outer_radius)?;
        emit_domain(SwissCheeseDomain::new(outer, holes, base.into(), puncture)?, out)
    })
}

/// # Safety
/// `domain` must be a live handle or null; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pd_domain_contains(domain: *const PdDomain, z: PdComplex, out: *mut bool) -> PdStatus {
    guard(|| {
        let d = deref(domain, "domain")?;
        store(out, d.0.contains(z.into()), "out")
    })
}

/// Number of holes, or 0 for a null handle.
///
/// # Safety
/// `domain` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pd_domain_hole_count(domain: *const PdDomain) -> usize {
    domain.as_ref().map_or(0, |d| d.0.holes().len())
}

/// # Safety
/// `domain` must come from a `pd_domain_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pd_domain_free(domain: *mut PdDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// `Σ coeffs[k] z^k`.
///
/// # Safety
/// `coeffs` must be valid for `len` reads and `out` for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pd_function_polynomial(
    coeffs: *const PdComplex,
    len: usize,
    out: *mut *mut PdFunction,
) -> PdStatus {
    guard(|| {
        let c: Vec<Complex64> = slice(coeffs, len, "coeffs")?.iter().map(|&z| z.into()).collect();
        emit_function(GalleryFunction::new(c, vec![], vec![], Complex64::new(0.0, 0.0))?, out)
    })
}

/// `weight / (z - pole)`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pd_function_pole(pole: PdComplex, weight: PdComplex, out: *mut *mut PdFunction) -> PdStatus {
    guard(|| emit_function(GalleryFunction::rational(pole.into(), weight.into())?, out))
}

/// `weight` times the Cauchy transform of the area measure on a closed disk.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pd_function_cauchy_transform(
    center: PdComplex,
    radius: f64,
    weight: PdComplex,
    out: *mut *mut PdFunction,
) -> PdStatus {
    guard(|| {
        let disk = Disk::new(center.into(), radius)?;
        emit_function(GalleryFunction::cauchy_transform(disk, weight.into()), out)
    })
}

/// `a·f + b·g`.
///
/// # Safety
/// `f` and `g` must be live handles and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pd_function_combine(
    a: PdComplex,
    f: *const PdFunction,
    b: PdComplex,
    g: *const PdFunction,
    out: *mut *mut PdFunction,
) -> PdStatus {
    guard(|| {
        let (f, g) = (deref(f, "f")?, deref(g, "g")?);
        emit_function(GalleryFunction::combine(a.into(), &f.0, b.into(), &g.0)?, out)
    })
}

/// The same function shifted so that it vanishes at `base`.
///
/// # Safety
/// `f` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn pd_function_with_base_point(
    f: *const PdFunction,
    base: PdComplex,
    out: *mut *mut PdFunction,
) -> PdStatus {
    guard(|| emit_function(deref(f, "f")?.0.with_base_point(base.into())?, out))
}

/// # Safety
/// `f` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pd_function_eval(f: *const PdFunction, z: PdComplex, out: *mut PdComplex) -> PdStatus {
    guard(|| store(out, deref(f, "f")?.0.eval(z.into())?.into(), "out"))
}

/// # Safety
/// `f` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pd_function_derivative(f: *const PdFunction, z: PdComplex, out: *mut PdComplex) -> PdStatus {
    guard(|| store(out, deref(f, "f")?.0.derivative(z.into())?.into(), "out"))
}

/// # Safety
/// `f` must come from a `pd_function_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pd_function_free(f: *mut PdFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Weighted content series `Σ 4^n M_{1+α}(A_n \ U)` for `n ≤ n_max`.
///
/// # Safety
/// `domain` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pd_criterion(
    domain: *const PdDomain,
    alpha: f64,
    n_max: u32,
    out: *mut PdCriterionSummary,
) -> PdStatus {
    guard(|| {
        let d = deref(domain, "domain")?;
        let r = lord_ofarrell_series(&d.0, alpha, n_max, ContentMode::Auto)?;
        let verdict = match r.verdict {
            Verdict::BpdSufficient => PdVerdict::BpdSufficient,
            Verdict::DivergentUpperBound => PdVerdict::DivergentUpperBound,
            Verdict::Inconclusive => PdVerdict::Inconclusive,
        };
        let summary = PdCriterionSummary {
            verdict,
            terms: r.terms.len() as u32,
            partial_sum: r.partial_sums.last().copied().unwrap_or(0.0),
            total_upper: r.total_upper().unwrap_or(f64::NAN),
        };
        store(out, summary, "out")
    })
}

/// Difference quotient at `x` computed from the Cauchy integral over the
/// keyhole between `|z - x0| = 2^{-n_inner}` and `2^{-m_outer}` inside the cone.
///
/// # Safety
/// Handles must be live; `out` and `error_estimate` valid for writes
/// (`error_estimate` may be null).
#[no_mangle]
pub unsafe extern "C" fn pd_quotient_via_cauchy(
    f: *const PdFunction,
    domain: *const PdDomain,
    x: PdComplex,
    cone_direction: f64,
    cone_half_angle: f64,
    cone_length: f64,
    n_inner: u32,
    m_outer: u32,
    tol: f64,
    out: *mut PdComplex,
    error_estimate: *mut f64,
) -> PdStatus {
    guard(|| {
        let (f, d) = (deref(f, "f")?, deref(domain, "domain")?);
        let ray = Ray::new(d.0.base_point(), cone_direction, cone_length)?;
        let cone = ConeSpec::around_ray(&ray, cone_half_angle, cone_length)?;
        let q = quotient_via_cauchy(&f.0, x.into(), &d.0, &cone, n_inner, m_outer, tol)?;
        if let Some(e) = error_estimate.as_mut() {
            *e = q.error_estimate;
        }
        store(out, q.value.into(), "out")
    })
}

/// Difference quotients along the dyadic samples of a ray from the base point.
///
/// # Safety
/// Handles must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pd_nontangential_limit(
    f: *const PdFunction,
    domain: *const PdDomain,
    direction: f64,
    length: f64,
    scales: u32,
    limit_tol: f64,
    out: *mut PdLimitSummary,
) -> PdStatus {
    guard(|| {
        let (f, d) = (deref(f, "f")?, deref(domain, "domain")?);
        let ray = Ray::new(d.0.base_point(), direction, length)?;
        let r = nontangential_limit(&f.0, &d.0, &ray, scales, limit_tol)?;
        let verdict = match r.verdict {
            LimitVerdict::Converged => PdLimitVerdict::Converged,
            LimitVerdict::NotConverged => PdLimitVerdict::NotConverged,
            LimitVerdict::Inconclusive => PdLimitVerdict::Inconclusive,
        };
        let summary = PdLimitSummary {
            verdict,
            derivative: r.derivative_value.into(),
            estimated_limit: r.estimated_limit.into(),
            final_deviation: r.final_deviation(),
            convergence_order: r.convergence_order,
        };
        store(out, summary, "out")
    })
}
