use std::ffi::{c_char, CStr, CString};
use std::ptr;

use regioncalc_ffi::*;

fn parse(src: &str) -> (RcStatus, *mut RcUnit) {
    let c = CString::new(src).unwrap();
    let mut h = ptr::null_mut();
    let s = unsafe { rc_unit_parse(c.as_ptr(), &mut h) };
    (s, h)
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { rc_string_free(s) };
    out
}

fn last_error() -> Option<String> {
    let p = rc_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

const SET_GET: &str = "region r volatile family AF : 1;\nmain nu x@r:1. (set(x, *) | get(x))";
const LOOP: &str = "region r persistent family WR : !(1 -{r}> 1);
main nu x@r:!(1 -{r}> 1).
  ((fun z:1. let !f = get(x) in f *) * | pset(x, !fun y:1. let !f = get(x) in f y))";

#[test]
fn parse_check_eval() {
    let (s, h) = parse(SET_GET);
    assert_eq!(s, RcStatus::Ok);
    assert!(last_error().is_none());

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { rc_check_json(h, RcMode::StratifiedConfluent, &mut json) }, RcStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(v["accepted"], true);
    assert_eq!(v["type"], "B");

    let mut steps = 0u64;
    let mut fin = ptr::null_mut();
    assert_eq!(unsafe { rc_eval(h, 100, &mut steps, &mut fin) }, RcStatus::Ok);
    assert_eq!(steps, 2);
    assert!(take(fin).contains('*'));

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { rc_explore_json(h, 100, 1000, &mut json) }, RcStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert!(v.is_object());
    unsafe { rc_unit_free(h) };
}

#[test]
fn parse_errors_are_reported() {
    let (s, h) = parse("main (fun x:1. x");
    assert_eq!(s, RcStatus::ParseError);
    assert!(h.is_null());
    assert!(last_error().is_some());
}

#[test]
fn rejection_still_yields_a_report() {
    let (s, h) = parse("region r volatile family UU : 1;\nmain nu x@r:1. (set(x, *) | set(x, *))");
    assert_eq!(s, RcStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { rc_check_json(h, RcMode::Confluent, &mut json) }, RcStatus::Rejected);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(v["accepted"], false);
    assert!(last_error().unwrap().contains("FamilyViolation"));
    unsafe { rc_unit_free(h) };
}

#[test]
fn budget_exhaustion_is_a_violation() {
    let (s, h) = parse(LOOP);
    assert_eq!(s, RcStatus::Ok, "{:?}", last_error());
    let mut steps = 0u64;
    let mut fin = ptr::null_mut();
    assert_eq!(unsafe { rc_eval(h, 50, &mut steps, &mut fin) }, RcStatus::Violation);
    assert_eq!(steps, 50);
    take(fin);
    assert!(last_error().unwrap().contains("budget"));
    unsafe { rc_unit_free(h) };
}

#[test]
fn null_arguments() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { rc_unit_parse(ptr::null(), &mut h) }, RcStatus::InvalidArgument);
    let src = CString::new(SET_GET).unwrap();
    assert_eq!(unsafe { rc_unit_parse(src.as_ptr(), ptr::null_mut()) }, RcStatus::InvalidArgument);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { rc_check_json(ptr::null(), RcMode::Plain, &mut json) }, RcStatus::InvalidArgument);
    assert!(json.is_null());
    let mut steps = 0;
    assert_eq!(unsafe { rc_eval(ptr::null(), 10, &mut steps, &mut json) }, RcStatus::InvalidArgument);
    assert_eq!(unsafe { rc_explore_json(ptr::null(), 1, 1, &mut json) }, RcStatus::InvalidArgument);

    let (_, h) = parse(SET_GET);
    assert_eq!(unsafe { rc_check_json(h, RcMode::Plain, ptr::null_mut()) }, RcStatus::InvalidArgument);
    assert_eq!(unsafe { rc_eval(h, 10, ptr::null_mut(), &mut json) }, RcStatus::InvalidArgument);
    unsafe { rc_unit_free(h) };

    unsafe { rc_unit_free(ptr::null_mut()) };
    unsafe { rc_string_free(ptr::null_mut()) };
}

#[test]
fn invalid_utf8_is_rejected() {
    let bytes = [0xffu8, 0xfe, 0];
    let mut h = ptr::null_mut();
    let s = unsafe { rc_unit_parse(bytes.as_ptr().cast(), &mut h) };
    assert_eq!(s, RcStatus::InvalidArgument);
    assert!(h.is_null());
}

#[test]
fn errors_are_per_thread_and_cleared() {
    let (s, _) = parse("main (");
    assert_eq!(s, RcStatus::ParseError);
    std::thread::spawn(|| assert!(last_error().is_none())).join().unwrap();
    let (s, h) = parse(SET_GET);
    assert_eq!(s, RcStatus::Ok);
    assert!(last_error().is_none());
    unsafe { rc_unit_free(h) };
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(rc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/regioncalc.h")).unwrap();
    for f in [
        "rc_unit_parse",
        "rc_unit_free",
        "rc_check_json",
        "rc_eval",
        "rc_explore_json",
        "rc_string_free",
        "rc_last_error_message",
        "rc_version",
        "RC_STATUS_PARSE_ERROR",
        "RC_MODE_STRATIFIED_CONFLUENT",
    ] {
        assert!(h.contains(f), "header lacks {f}");
    }
}
