//! C ABI over `unisel`.
//!
//! Inputs and reports cross the boundary as UTF-8 JSON. Every fallible call
//! returns a [`UniselStatus`]; on failure the message is available from
//! [`unisel_last_error`] on the same thread until the next call.
//!
//! Handles returned through out-pointers are owned by the caller and must be
//! released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use clap::Parser;
use unisel::cli::{dispatch, error_json, Cli};
use unisel::json::BundleDoc;
use unisel::report::{Status, VerificationReport};
use unisel::Error;

/// Result codes. A report with failing checks is still `Ok`; inspect it with
/// [`unisel_report_passed`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UniselStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InputError = 4,
    UnknownCommand = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UniselMode {
    Exact = 0,
    Float = 1,
}

/// A parsed instance bundle.
pub struct UniselBundle {
    bytes: Vec<u8>,
}

/// A finished verification report.
pub struct UniselReport {
    json: CString,
    passed: bool,
    exit_code: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: UniselStatus, msg: impl Into<String>) -> UniselStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> UniselStatus {
    match e {
        Error::Json(_) | Error::Schema(_) | Error::Scalar(_) => UniselStatus::ParseError,
        _ => UniselStatus::InputError,
    }
}

fn guard(f: impl FnOnce() -> UniselStatus) -> UniselStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(UniselStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, UniselStatus> {
    if p.is_null() {
        return Err(fail(UniselStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(UniselStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn into_report(r: VerificationReport) -> Box<UniselReport> {
    let text = r.to_json_string();
    Box::new(UniselReport {
        json: CString::new(text).expect("JSON output has no NUL bytes"),
        passed: r.status != Status::Fail,
        exit_code: r.exit_code(),
    })
}

fn run_command(
    command: &str,
    input: &[u8],
    mode: UniselMode,
    seed: u64,
    out: *mut *mut UniselReport,
) -> UniselStatus {
    if out.is_null() {
        return fail(UniselStatus::NullPointer, "null output pointer");
    }
    let mode = match mode {
        UniselMode::Exact => "exact",
        UniselMode::Float => "float",
    };
    let seed = seed.to_string();
    let args = ["unisel", "--mode", mode, "--seed", &seed, command, "<ffi>"];
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(_) => return fail(UniselStatus::UnknownCommand, format!("unknown command {command:?}")),
    };
    match dispatch(&cli, "<ffi>", input) {
        Ok(r) => {
            unsafe { *out = Box::into_raw(into_report(r)) };
            UniselStatus::Ok
        }
        Err(e) => fail(status_of(&e), error_json(&e).to_string()),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn unisel_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Borrowed: valid
/// until the next call on this thread.
#[no_mangle]
pub extern "C" fn unisel_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a bundle document.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn unisel_bundle_parse(
    json: *const c_char,
    out: *mut *mut UniselBundle,
) -> UniselStatus {
    guard(|| {
        if out.is_null() {
            return fail(UniselStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        if let Err(e) = serde_json::from_str::<BundleDoc>(text) {
            return fail(UniselStatus::ParseError, e.to_string());
        }
        *out = Box::into_raw(Box::new(UniselBundle {
            bytes: text.as_bytes().to_vec(),
        }));
        UniselStatus::Ok
    })
}

/// # Safety
/// `bundle` must be null or a handle from [`unisel_bundle_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn unisel_bundle_free(bundle: *mut UniselBundle) {
    if !bundle.is_null() {
        drop(Box::from_raw(bundle));
    }
}

/// Runs the full invariant suite on a bundle.
///
/// # Safety
/// `bundle` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn unisel_verify_all(
    bundle: *const UniselBundle,
    mode: UniselMode,
    seed: u64,
    out: *mut *mut UniselReport,
) -> UniselStatus {
    guard(|| {
        if bundle.is_null() {
            return fail(UniselStatus::NullPointer, "null bundle");
        }
        run_command("verify-all", &(*bundle).bytes, mode, seed, out)
    })
}

/// Runs one command (`"mather"`, `"map-classify"`, `"select-eps"`, ...) on a
/// JSON document, with the same semantics as the command line tool.
///
/// # Safety
/// `command` and `input` must be valid NUL-terminated strings and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn unisel_run(
    command: *const c_char,
    input: *const c_char,
    mode: UniselMode,
    seed: u64,
    out: *mut *mut UniselReport,
) -> UniselStatus {
    guard(|| {
        let (command, input) = match (read_str(command), read_str(input)) {
            (Ok(c), Ok(i)) => (c, i),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        run_command(command, input.as_bytes(), mode, seed, out)
    })
}

/// Report JSON. Borrowed: valid until the report is freed.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unisel_report_json(report: *const UniselReport) -> *const c_char {
    if report.is_null() {
        return ptr::null();
    }
    (*report).json.as_ptr()
}

/// True iff no check failed.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unisel_report_passed(report: *const UniselReport) -> bool {
    !report.is_null() && (*report).passed
}

/// Exit code the command line tool would return: 0 or 1.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unisel_report_exit_code(report: *const UniselReport) -> i32 {
    if report.is_null() {
        return 2;
    }
    (*report).exit_code
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn unisel_report_free(report: *mut UniselReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
