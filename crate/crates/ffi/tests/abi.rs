use std::f64::consts::PI;
use std::ptr;

use pointderiv_ffi::*;

fn c(re: f64, im: f64) -> PdComplex {
    PdComplex { re, im }
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    let n = unsafe { pd_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
    assert_eq!(n, s.len());
    s
}

fn roadrunner() -> *mut PdDomain {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { pd_domain_roadrunner(0.75, 0.5, 1.0, 0.25, 0.0, 8, &mut d) }, PdStatus::Ok);
    d
}

fn poly(coeffs: &[PdComplex]) -> *mut PdFunction {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { pd_function_polynomial(coeffs.as_ptr(), coeffs.len(), &mut f) }, PdStatus::Ok);
    f
}

#[test]
fn criterion_matches_closed_form() {
    let d = roadrunner();
    let mut s = PdCriterionSummary { verdict: PdVerdict::Inconclusive, terms: 0, partial_sum: 0.0, total_upper: 0.0 };
    assert_eq!(unsafe { pd_criterion(d, 0.5, 20, &mut s) }, PdStatus::Ok);
    assert_eq!(s.verdict, PdVerdict::BpdSufficient);
    assert_eq!(s.terms, 20);
    assert!((s.total_upper - 2f64.powf(1.5) / 4.0).abs() < 1e-9);
    unsafe { pd_domain_free(d) };

    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pd_domain_punctured_disk(&mut p) }, PdStatus::Ok);
    assert_eq!(unsafe { pd_criterion(p, 0.5, 5, &mut s) }, PdStatus::Ok);
    assert_eq!(s.partial_sum, 0.0);
    unsafe { pd_domain_free(p) };
}

#[test]
fn eval_combine_and_rebase() {
    let z2 = poly(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let mut pole = ptr::null_mut();
    assert_eq!(unsafe { pd_function_pole(c(2.0, 0.0), c(1.0, 0.0), &mut pole) }, PdStatus::Ok);
    let mut sum = ptr::null_mut();
    assert_eq!(unsafe { pd_function_combine(c(2.0, 0.0), z2, c(0.0, 1.0), pole, &mut sum) }, PdStatus::Ok);

    let z = c(0.3, -0.2);
    let mut v = c(0.0, 0.0);
    assert_eq!(unsafe { pd_function_eval(sum, z, &mut v) }, PdStatus::Ok);
    let zc = num_complex::Complex64::new(z.re, z.im);
    let i = num_complex::Complex64::i();
    let want = 2.0 * zc * zc + i * (1.0 / (zc - 2.0) - 1.0 / (-2.0));
    assert!((v.re - want.re).abs() < 1e-14 && (v.im - want.im).abs() < 1e-14);

    let mut dv = c(0.0, 0.0);
    assert_eq!(unsafe { pd_function_derivative(sum, z, &mut dv) }, PdStatus::Ok);
    let dwant = 4.0 * zc - i / ((zc - 2.0) * (zc - 2.0));
    assert!((dv.re - dwant.re).abs() < 1e-13 && (dv.im - dwant.im).abs() < 1e-13);

    let mut shifted = ptr::null_mut();
    assert_eq!(unsafe { pd_function_with_base_point(z2, z, &mut shifted) }, PdStatus::Ok);
    assert_eq!(unsafe { pd_function_eval(shifted, z, &mut v) }, PdStatus::Ok);
    assert!(v.re.abs() < 1e-15 && v.im.abs() < 1e-15);

    assert_eq!(unsafe { pd_function_eval(pole, c(2.0, 0.0), &mut v) }, PdStatus::Singular);
    assert!(!last_error().is_empty());

    unsafe {
        pd_function_free(shifted);
        pd_function_free(sum);
        pd_function_free(pole);
        pd_function_free(z2);
    }
}

#[test]
fn quotient_and_limit() {
    let d = roadrunner();
    let z2 = poly(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let (mut q, mut err) = (c(0.0, 0.0), -1.0);
    let st = unsafe { pd_quotient_via_cauchy(z2, d, c(-0.3, 0.0), PI, 0.5, 0.5, 10, 1, 1e-10, &mut q, &mut err) };
    assert_eq!(st, PdStatus::Ok, "{}", last_error());
    assert!((q.re + 0.3).abs() < 1e-9 && q.im.abs() < 1e-9);
    assert!(err >= 0.0);

    let mut ct = ptr::null_mut();
    assert_eq!(unsafe { pd_function_cauchy_transform(c(0.09375, 0.0), 1.0 / 64.0, c(1.0, 0.0), &mut ct) }, PdStatus::Ok);
    let mut l = PdLimitSummary {
        verdict: PdLimitVerdict::Inconclusive,
        derivative: c(0.0, 0.0),
        estimated_limit: c(0.0, 0.0),
        final_deviation: 0.0,
        convergence_order: 0.0,
    };
    assert_eq!(unsafe { pd_nontangential_limit(ct, d, PI, 0.5, 16, 1e-3, &mut l) }, PdStatus::Ok);
    assert_eq!(l.verdict, PdLimitVerdict::Converged);
    assert!(l.final_deviation < 1e-3 * (l.derivative.re.hypot(l.derivative.im)));

    assert_eq!(unsafe { pd_nontangential_limit(ct, d, 0.0, 0.5, 16, 1e-3, &mut l) }, PdStatus::OutsideDomain);
    unsafe {
        pd_function_free(ct);
        pd_function_free(z2);
        pd_domain_free(d);
    }
}

#[test]
fn errors_and_null_handles() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { pd_domain_roadrunner(0.75, 0.5, 1.0, 1.5, 0.0, 8, &mut d) }, PdStatus::InvalidArgument);
    assert!(d.is_null());
    assert!(last_error().contains("radius ratio"));

    let centers = [c(0.5, 0.0), c(0.55, 0.0)];
    let radii = [0.1, 0.1];
    let st = unsafe { pd_domain_new(c(0.0, 0.0), 1.0, centers.as_ptr(), radii.as_ptr(), 2, c(0.0, 0.0), true, &mut d) };
    assert_eq!(st, PdStatus::InvalidDomain);

    let mut inside = false;
    assert_eq!(unsafe { pd_domain_contains(ptr::null(), c(0.0, 0.0), &mut inside) }, PdStatus::NullPointer);
    assert!(last_error().contains("domain"));
    assert_eq!(unsafe { pd_domain_hole_count(ptr::null()) }, 0);
    assert_eq!(unsafe { pd_function_polynomial(ptr::null(), 3, &mut ptr::null_mut()) }, PdStatus::NullPointer);

    let ok = unsafe { pd_domain_new(c(0.0, 0.0), 1.0, centers.as_ptr(), radii.as_ptr(), 1, c(0.0, 0.0), true, &mut d) };
    assert_eq!(ok, PdStatus::Ok);
    assert_eq!(last_error(), "");
    assert_eq!(unsafe { pd_domain_contains(d, c(0.5, 0.0), &mut inside) }, PdStatus::Ok);
    assert!(!inside);
    assert_eq!(unsafe { pd_domain_contains(d, c(-0.5, 0.0), &mut inside) }, PdStatus::Ok);
    assert!(inside);
    unsafe {
        pd_domain_free(d);
        pd_domain_free(ptr::null_mut());
        pd_function_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates() {
    let mut d = ptr::null_mut();
    unsafe { pd_domain_roadrunner(-1.0, 0.5, 1.0, 0.25, 0.0, 8, &mut d) };
    let mut buf = [0 as std::ffi::c_char; 8];
    let n = unsafe { pd_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 7);
    assert_eq!(buf[7], 0);
    assert_eq!(unsafe { pd_last_error_message(ptr::null_mut(), 0) }, n);
}

#[test]
fn header_matches_and_c_program_runs() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(root.join("include/pointderiv.h")).unwrap();
    for sym in ["pd_domain_roadrunner", "pd_function_free", "pd_nontangential_limit", "typedef struct PdDomain PdDomain"] {
        assert!(header.contains(sym), "{sym}");
    }

    let target = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).parent().unwrap();
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let lib = target.join(profile).join("libpointderiv_ffi.a");
    assert!(lib.is_file(), "{}", lib.display());
    let exe = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("c_smoke");
    let status = std::process::Command::new("cc")
        .arg(root.join("tests/c_smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
