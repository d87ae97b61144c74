//! C interface to the regioncalc checker and evaluator.
//!
//! Units are opaque handles created by `rc_unit_parse` and released with
//! `rc_unit_free`. Every call returns an `RcStatus`; on anything but
//! `RC_STATUS_OK` a message is available from `rc_last_error_message` on the
//! same thread. Strings handed out by the library must be released with
//! `rc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use regioncalc::analysis::{explore, Bounds};
use regioncalc::semantics::{canonicalize, run_det, RunStatus};
use regioncalc::syntax::{parse_unit, SourceUnit};
use regioncalc::typecheck::{check_unit, CheckMode};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    /// The type checker rejected the unit.
    Rejected = 1,
    /// A run exceeded its budget or hit a runtime error.
    Violation = 2,
    InvalidArgument = 3,
    ParseError = 4,
    /// A bug in the library; the message says where.
    Internal = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcMode {
    Plain = 0,
    Confluent = 1,
    Effects = 2,
    Stratified = 3,
    StratifiedConfluent = 4,
}

impl From<RcMode> for CheckMode {
    fn from(m: RcMode) -> Self {
        match m {
            RcMode::Plain => CheckMode::Plain,
            RcMode::Confluent => CheckMode::Confluent,
            RcMode::Effects => CheckMode::Effects,
            RcMode::Stratified => CheckMode::StratifiedEffects,
            RcMode::StratifiedConfluent => CheckMode::StratifiedConfluent,
        }
    }
}

/// A parsed source unit.
pub struct RcUnit {
    unit: SourceUnit,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guarded(f: impl FnOnce() -> RcStatus) -> RcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            RcStatus::Internal
        }
    }
}

fn hand_out(s: String, out: *mut *mut c_char) {
    let c = CString::new(s.replace('\0', " ")).unwrap_or_default();
    // SAFETY: callers check `out` for null before getting here
    unsafe { *out = c.into_raw() };
}

/// # Safety
/// `handle` must be null or come from `rc_unit_parse` and not be freed.
unsafe fn unit_ref<'a>(handle: *const RcUnit) -> Option<&'a RcUnit> {
    handle.as_ref()
}

/// Parses a unit from NUL-terminated UTF-8 source.
///
/// # Safety
/// `src` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_unit_parse(src: *const c_char, out: *mut *mut RcUnit) -> RcStatus {
    guarded(|| {
        if src.is_null() || out.is_null() {
            set_error("null argument");
            return RcStatus::InvalidArgument;
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(src).to_str() else {
            set_error("source is not UTF-8");
            return RcStatus::InvalidArgument;
        };
        match parse_unit(text) {
            Ok(unit) => {
                *out = Box::into_raw(Box::new(RcUnit { unit }));
                RcStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                RcStatus::ParseError
            }
        }
    })
}

/// Releases a unit. Null is ignored.
///
/// # Safety
/// `handle` must be null or come from `rc_unit_parse`, and is invalid after.
#[no_mangle]
pub unsafe extern "C" fn rc_unit_free(handle: *mut RcUnit) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Type-checks `handle` in `mode` and writes a JSON report to `out_json`.
/// The report is written for rejections too.
///
/// # Safety
/// `handle` must be a live unit and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_check_json(handle: *const RcUnit, mode: RcMode, out_json: *mut *mut c_char) -> RcStatus {
    guarded(|| {
        let (Some(u), false) = (unit_ref(handle), out_json.is_null()) else {
            set_error("null argument");
            return RcStatus::InvalidArgument;
        };
        let mode = CheckMode::from(mode);
        match check_unit(&u.unit, mode) {
            Ok(j) => {
                let v = serde_json::json!({
                    "accepted": true,
                    "mode": mode.name(),
                    "type": j.ty.to_string(),
                    "effect": j.effect.to_string(),
                });
                hand_out(v.to_string(), out_json);
                RcStatus::Ok
            }
            Err(e) => {
                let v = serde_json::json!({"accepted": false, "mode": mode.name(), "error": e.to_json()});
                hand_out(v.to_string(), out_json);
                set_error(e.to_string());
                RcStatus::Rejected
            }
        }
    })
}

/// Runs the unit's program with the leftmost scheduler for at most `budget`
/// steps. Writes the number of steps and the final program.
///
/// # Safety
/// `handle` must be a live unit; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rc_eval(
    handle: *const RcUnit,
    budget: u64,
    out_steps: *mut u64,
    out_final: *mut *mut c_char,
) -> RcStatus {
    guarded(|| {
        let (Some(u), false, false) = (unit_ref(handle), out_steps.is_null(), out_final.is_null()) else {
            set_error("null argument");
            return RcStatus::InvalidArgument;
        };
        match run_det(&canonicalize(&u.unit.main), budget as usize) {
            Ok(r) => {
                *out_steps = r.steps as u64;
                hand_out(r.last.print(), out_final);
                match r.status {
                    RunStatus::Terminated => RcStatus::Ok,
                    RunStatus::BudgetExceeded => {
                        set_error(format!("budget of {budget} steps exceeded"));
                        RcStatus::Violation
                    }
                }
            }
            Err(e) => {
                set_error(e.to_string());
                RcStatus::Violation
            }
        }
    })
}

/// Explores every interleaving and writes a JSON summary.
///
/// # Safety
/// `handle` must be a live unit and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_explore_json(
    handle: *const RcUnit,
    depth: u64,
    width: u64,
    out_json: *mut *mut c_char,
) -> RcStatus {
    guarded(|| {
        let (Some(u), false) = (unit_ref(handle), out_json.is_null()) else {
            set_error("null argument");
            return RcStatus::InvalidArgument;
        };
        let bounds = Bounds { depth: depth as usize, width: width as usize };
        let r = explore(&canonicalize(&u.unit.main), bounds, false);
        hand_out(r.to_json().to_string(), out_json);
        RcStatus::Ok
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string handed out by this library.
#[no_mangle]
pub unsafe extern "C" fn rc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The message of the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn rc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
