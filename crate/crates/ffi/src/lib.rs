//! C ABI over the reward, metric and parsing entry points.
//!
//! Conventions:
//!
//! - Every fallible function returns an [`RtStatus`]; `RT_OK` is zero.
//! - On failure, [`rt_last_error`] returns a message for the calling thread.
//!   The pointer stays valid until the next call into this library on that
//!   thread.
//! - Strings passed in are NUL-terminated UTF-8. Strings handed out are
//!   owned by the caller and must be released with [`rt_string_free`].
//! - Structured results (reports, scores) are JSON documents.
//! - Panics never cross the boundary; they surface as `RT_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use reasontrans::corpus::TestSuite;
use reasontrans::metrics::{codebleu, CodeBleuWeights};
use reasontrans::prompt_kit::parse_completion;
use reasontrans::reward::length_reward_value;
use reasontrans::sandbox::{ExecLimits, Executor, Toolchains};
use reasontrans::{Error, LanguageId};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtStatus {
    RtOk = 0,
    /// A required pointer was NULL.
    RtNullPointer = 1,
    /// A string argument was not valid UTF-8.
    RtInvalidUtf8 = 2,
    /// A JSON argument did not parse or did not match the expected shape.
    RtInvalidJson = 3,
    /// An argument was out of range or otherwise rejected.
    RtInvalidArgument = 4,
    RtUnsupportedLanguage = 5,
    /// The compiler or interpreter for the language is missing.
    RtToolchainUnavailable = 6,
    RtPanic = 7,
}

/// Opaque sandbox executor. Safe to share across threads.
pub struct RtExecutor {
    inner: Executor,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnsupportedLanguage(_) => RtStatus::RtUnsupportedLanguage,
            Error::Toolchain { .. } => RtStatus::RtToolchainUnavailable,
            Error::Json(_) | Error::Schema { .. } => RtStatus::RtInvalidJson,
            _ => RtStatus::RtInvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn json_failure(e: serde_json::Error) -> Failure {
    Failure(RtStatus::RtInvalidJson, e.to_string())
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RtStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RtStatus::RtOk,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {message}"));
            RtStatus::RtPanic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(RtStatus::RtNullPointer, format!("`{name}` is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(RtStatus::RtInvalidUtf8, format!("`{name}`: {e}")))
}

unsafe fn language_arg(p: *const c_char) -> Result<LanguageId, Failure> {
    Ok(str_arg(p, "language")?.parse::<LanguageId>()?)
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(RtStatus::RtNullPointer, format!("`{name}` is NULL")))
    } else {
        Ok(())
    }
}

fn into_c(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(RtStatus::RtInvalidArgument, format!("output contains NUL: {e}")))
}

/// Message for the last failed call on this thread, or NULL.
#[no_mangle]
pub extern "C" fn rt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length reward for a completion of `completion_len` units against a
/// reference of `reference_len` units.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn rt_length_reward(
    completion_len: u64,
    reference_len: u64,
    tolerance: f64,
    max_length: u64,
    out: *mut f64,
) -> RtStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = length_reward_value(completion_len, reference_len, tolerance, max_length)?;
        Ok(())
    })
}

/// Creates an executor. `limits_json` may be NULL for default limits, or an
/// object with any of `wall_timeout_s`, `per_case_timeout_s`,
/// `compile_timeout_s` and `max_output_bytes`.
///
/// # Safety
/// `limits_json` must be NULL or a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rt_executor_new(limits_json: *const c_char, out: *mut *mut RtExecutor) -> RtStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ptr::null_mut();
        let limits = if limits_json.is_null() {
            ExecLimits::default()
        } else {
            serde_json::from_str(str_arg(limits_json, "limits_json")?).map_err(json_failure)?
        };
        limits.validate()?;
        *out = Box::into_raw(Box::new(RtExecutor { inner: Executor::new(Toolchains::default(), limits) }));
        Ok(())
    })
}

/// Destroys an executor. NULL is ignored.
///
/// # Safety
/// `executor` must come from [`rt_executor_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rt_executor_free(executor: *mut RtExecutor) {
    if !executor.is_null() {
        drop(Box::from_raw(executor));
    }
}

/// Runs `code` against the suite and writes `passed / total` to
/// `out_reward`. A missing toolchain is an error; code that fails to
/// compile or raises scores 0. When `out_report_json` is not NULL it
/// receives the full test report as JSON.
///
/// # Safety
/// `executor` must be live; string arguments NUL-terminated; `out_reward`
/// valid.
#[no_mangle]
pub unsafe extern "C" fn rt_execution_reward(
    executor: *const RtExecutor,
    code: *const c_char,
    language: *const c_char,
    suite_json: *const c_char,
    out_reward: *mut f64,
    out_report_json: *mut *mut c_char,
) -> RtStatus {
    guard(|| {
        out_arg(out_reward, "out_reward")?;
        if !out_report_json.is_null() {
            *out_report_json = ptr::null_mut();
        }
        let executor = executor
            .as_ref()
            .ok_or_else(|| Failure(RtStatus::RtNullPointer, "`executor` is NULL".into()))?;
        let code = str_arg(code, "code")?;
        let language = language_arg(language)?;
        let suite: TestSuite = serde_json::from_str(str_arg(suite_json, "suite_json")?).map_err(json_failure)?;
        executor.inner.toolchains().require(language)?;
        let report = executor.inner.evaluate(code, &suite, language);
        *out_reward = if report.total == 0 { 0.0 } else { report.passed as f64 / report.total as f64 };
        if !out_report_json.is_null() {
            *out_report_json = into_c(serde_json::to_string(&report).map_err(json_failure)?)?;
        }
        Ok(())
    })
}

/// CodeBLEU of `hypothesis` against `reference`. `weights_json` may be NULL
/// for equal weights. Writes the total to `out_total` when not NULL and the
/// component breakdown as JSON to `out_json` when not NULL.
///
/// # Safety
/// String arguments must be NUL-terminated; output pointers NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn rt_codebleu(
    hypothesis: *const c_char,
    reference: *const c_char,
    language: *const c_char,
    weights_json: *const c_char,
    out_total: *mut f64,
    out_json: *mut *mut c_char,
) -> RtStatus {
    guard(|| {
        if !out_json.is_null() {
            *out_json = ptr::null_mut();
        }
        let hypothesis = str_arg(hypothesis, "hypothesis")?;
        let reference = str_arg(reference, "reference")?;
        let language = language_arg(language)?;
        let weights: CodeBleuWeights = if weights_json.is_null() {
            CodeBleuWeights::default()
        } else {
            serde_json::from_str(str_arg(weights_json, "weights_json")?).map_err(json_failure)?
        };
        let score = codebleu(hypothesis, reference, language, weights)?;
        if !out_total.is_null() {
            *out_total = score.total;
        }
        if !out_json.is_null() {
            *out_json = into_c(serde_json::to_string(&score).map_err(json_failure)?)?;
        }
        Ok(())
    })
}

/// Splits a raw completion into reasoning and code for `language`. The
/// result is a JSON object with `reasoning`, `code`, `raw` and
/// `extraction_method`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn rt_parse_completion(
    raw: *const c_char,
    language: *const c_char,
    out_json: *mut *mut c_char,
) -> RtStatus {
    guard(|| {
        out_arg(out_json, "out_json")?;
        *out_json = ptr::null_mut();
        let raw = str_arg(raw, "raw")?;
        let language = language_arg(language)?;
        let parsed = parse_completion(raw, language);
        *out_json = into_c(serde_json::to_string(&parsed).map_err(json_failure)?)?;
        Ok(())
    })
}
