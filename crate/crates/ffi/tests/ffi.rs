use std::ffi::{c_char, CStr, CString};
use std::ptr;

use ifl_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { ifl_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ifl_last_error()) }.to_str().unwrap().to_string()
}

fn ring(spec: &str) -> *mut IflRing {
    let spec = CString::new(spec).unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { ifl_ring_parse(spec.as_ptr(), &mut r) }, IflStatus::Ok);
    r
}

fn group(r: *const IflRing, text: &str, cap: u64) -> (IflStatus, *mut IflGroup) {
    let text = CString::new(text).unwrap();
    let mut g = ptr::null_mut();
    let s = unsafe { ifl_group_generate(r, text.as_ptr(), cap, &mut g) };
    (s, g)
}

#[test]
fn ring_round_trip() {
    let r = ring("kind=trunc_iwasawa\np=3\na=1\nb=3\n");
    let mut n = 0u64;
    assert_eq!(unsafe { ifl_ring_size(r, &mut n) }, IflStatus::Ok);
    assert_eq!(n, 27);
    let mut label = ptr::null_mut();
    assert_eq!(unsafe { ifl_ring_label(r, &mut label) }, IflStatus::Ok);
    assert_eq!(take(label), "(Z/3)[T]/(T^3)");
    unsafe { ifl_ring_free(r) };

    let mut r2 = ptr::null_mut();
    assert_eq!(unsafe { ifl_ring_trunc_iwasawa(5, 2, 1, &mut r2) }, IflStatus::Ok);
    assert_eq!(unsafe { ifl_ring_size(r2, &mut n) }, IflStatus::Ok);
    assert_eq!(n, 25);
    unsafe { ifl_ring_free(r2) };
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("kind=nope\np=3").unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { ifl_ring_parse(bad.as_ptr(), &mut r) }, IflStatus::Parse);
    assert!(r.is_null());
    assert!(last_error().contains("nope"));

    assert_eq!(unsafe { ifl_ring_parse(ptr::null(), &mut r) }, IflStatus::NullPointer);
    assert_eq!(unsafe { ifl_ring_trunc_iwasawa(3, 1, 2, ptr::null_mut()) }, IflStatus::NullPointer);
    assert_eq!(unsafe { ifl_ring_trunc_iwasawa(4, 1, 2, &mut r) }, IflStatus::BadInput);

    let invalid = [0xffu8, 0];
    assert_eq!(unsafe { ifl_ring_parse(invalid.as_ptr() as *const c_char, &mut r) }, IflStatus::InvalidUtf8);

    let mut n = 0u64;
    assert_eq!(unsafe { ifl_ring_size(ptr::null(), &mut n) }, IflStatus::NullPointer);
    assert_eq!(unsafe { ifl_group_order(ptr::null(), &mut n) }, IflStatus::NullPointer);
    unsafe {
        ifl_ring_free(ptr::null_mut());
        ifl_group_free(ptr::null_mut());
        ifl_qexp_free(ptr::null_mut());
        ifl_string_free(ptr::null_mut());
    }
}

#[test]
fn group_pink_and_fullness() {
    let r = ring("p=3\na=2\nb=2\n");
    let (s, g) = group(r, "1,3;0,1\n1,0;3,1\n1,T;0,1\n1,0;T,1\n4,0;0,7\n1+T,0;0,1+8*T\n", 1_000_000);
    assert_eq!(s, IflStatus::Ok);
    let mut n = 0u64;
    assert_eq!(unsafe { ifl_group_order(g, &mut n) }, IflStatus::Ok);
    assert_eq!(n, 19683);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ifl_pink_report(g, 3, 1_000_000, &mut out) }, IflStatus::Ok);
    assert!(take(out).contains("\"group_order\": 19683"));

    let j = CString::new("1,0;0,8").unwrap();
    assert_eq!(unsafe { ifl_fullness_report(g, j.as_ptr(), 1_000_000, &mut out) }, IflStatus::Ok);
    assert!(take(out).contains("\"verified\": true"));

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ifl_fullness_report(g, ptr::null(), 1_000_000, &mut out) }, IflStatus::Unverified);
    assert!(take(out).contains("teichmuller_matrix_limit"));
    assert!(last_error().contains("teichmuller_matrix_limit"));

    let (s, g2) = group(r, "1,3;0,1\n1,0;3,1\n1,T;0,1\n1,0;T,1\n", 50);
    assert_eq!(s, IflStatus::CapExceeded);
    assert!(g2.is_null());
    unsafe {
        ifl_group_free(g);
        ifl_ring_free(r);
    }
}

#[test]
fn qexp_handles() {
    let spec = CString::new("1:24").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { ifl_qexp_eta(spec.as_ptr(), 60, &mut f) }, IflStatus::Ok);
    let mut prec = 0usize;
    assert_eq!(unsafe { ifl_qexp_precision(f, &mut prec) }, IflStatus::Ok);
    assert_eq!(prec, 60);

    let coeff = |f: *const IflQExpansion, n: usize| {
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { ifl_qexp_coefficient(f, n, &mut s) }, IflStatus::Ok);
        take(s)
    };
    assert_eq!(coeff(f, 2), "-24");
    assert_eq!(coeff(f, 11), "534612");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ifl_qexp_coefficient(f, 61, &mut s) }, IflStatus::BadInput);

    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ifl_qexp_hecke(f, 2, &mut t) }, IflStatus::Ok);
    assert_eq!(coeff(t, 1), "-24");
    assert_eq!(coeff(t, 3), "-6048");

    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { ifl_qexp_to_csv(f, &mut csv) }, IflStatus::Ok);
    let csv = CString::new(take(csv)).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ifl_qexp_parse_csv(csv.as_ptr(), &mut g) }, IflStatus::Ok);
    assert_eq!(coeff(g, 13), "-577738");

    let bad = CString::new("1:5").unwrap();
    let mut h = ptr::null_mut();
    assert_ne!(unsafe { ifl_qexp_eta(bad.as_ptr(), 30, &mut h) }, IflStatus::Ok);
    assert!(h.is_null());
    unsafe {
        ifl_qexp_free(f);
        ifl_qexp_free(t);
        ifl_qexp_free(g);
    }
}

#[test]
fn twist_detection_report() {
    let spec = CString::new("4:2,8:2").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { ifl_qexp_eta(spec.as_ptr(), 400, &mut f) }, IflStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ifl_twist_detect(f, 8, 25, 1_000_000, &mut out) }, IflStatus::Ok);
    let json = take(out);
    assert!(json.contains("\"cm_flag\": true"));
    assert!(json.contains("chi_-4"));
    unsafe { ifl_qexp_free(f) };
}

#[test]
fn selftest_entry_point() {
    let mut line = ptr::null_mut();
    assert_eq!(unsafe { ifl_selftest_criterion(10, 2_000_000, &mut line) }, IflStatus::Ok);
    assert!(take(line).starts_with("PASS criterion 10"));
    assert_eq!(unsafe { ifl_selftest_criterion(7, 10, ptr::null_mut()) }, IflStatus::Unverified);
    assert!(last_error().starts_with("SKIP"));
    assert_eq!(unsafe { ifl_selftest_criterion(12, 2_000_000, ptr::null_mut()) }, IflStatus::BadInput);
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ifl.h")).unwrap();
    for f in [
        "ifl_last_error",
        "ifl_string_free",
        "ifl_ring_parse",
        "ifl_ring_trunc_iwasawa",
        "ifl_ring_size",
        "ifl_ring_label",
        "ifl_ring_free",
        "ifl_group_generate",
        "ifl_group_order",
        "ifl_group_free",
        "ifl_pink_report",
        "ifl_fullness_report",
        "ifl_qexp_eta",
        "ifl_qexp_parse_csv",
        "ifl_qexp_precision",
        "ifl_qexp_coefficient",
        "ifl_qexp_hecke",
        "ifl_qexp_to_csv",
        "ifl_twist_detect",
        "ifl_qexp_free",
        "ifl_selftest_criterion",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(h.contains("IFL_STATUS_CAP_EXCEEDED = 5"));
}
