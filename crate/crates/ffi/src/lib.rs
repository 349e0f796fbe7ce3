//! C interface to `umlval`.
//!
//! Objects cross the boundary as opaque handles. Every function returns a
//! [`UmlvalStatus`]; on failure the message is available from
//! [`umlval_last_error`] on the same thread. Strings handed out by the
//! library are owned by the caller and must be released with
//! [`umlval_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use umlval::analyzer::analyze;
use umlval::config::{default_config, ConfigFile, Configuration};
use umlval::finder::{find, FinderProblem, Strategy, Verdict};
use umlval::model::Model;
use umlval::parse::{parse_config_file, parse_model};
use umlval::state::{export_dot, export_json, SystemState};
use umlval::tasks::{check_consistency, check_independence, TaskOptions};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UmlvalStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ConfigError = 4,
    UnknownConfig = 5,
    FinderError = 6,
    UnknownInvariant = 7,
    IndexOutOfRange = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UmlvalVerdict {
    Sat = 0,
    Unsat = 1,
    Timeout = 2,
}

/// A parsed model.
pub struct UmlvalModel(Model);

/// A set of named configurations.
pub struct UmlvalConfigFile(ConfigFile);

/// The outcome of one finder run.
pub struct UmlvalResult {
    verdict: Verdict,
    log: Vec<String>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(UmlvalStatus, String);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting failures and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UmlvalStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UmlvalStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            UmlvalStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(UmlvalStatus::NullArgument, format!("`{what}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(UmlvalStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn opt_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        read_str(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(UmlvalStatus::NullArgument, format!("`{what}` is null")))
}

fn out_ptr<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(UmlvalStatus::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn give_string(s: String, out: *mut *mut c_char) {
    let c = CString::new(s.replace('\0', " ")).unwrap_or_default();
    unsafe { *out = c.into_raw() };
}

fn pick(file: &ConfigFile, name: Option<&str>) -> Result<Configuration, Failure> {
    match name {
        Some(n) => file
            .get(n)
            .cloned()
            .ok_or_else(|| Failure(UmlvalStatus::UnknownConfig, format!("no configuration named `{n}`"))),
        None if file.configs.len() == 1 => Ok(file.configs[0].clone()),
        None => Err(Failure(
            UmlvalStatus::UnknownConfig,
            format!("choose one of: {}", file.names().join(", ")),
        )),
    }
}

fn options(timeout_ms: u64) -> TaskOptions {
    TaskOptions {
        deadline: (timeout_ms > 0).then(|| Duration::from_millis(timeout_ms)),
        ..TaskOptions::default()
    }
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn umlval_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn umlval_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn umlval_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses model text. `file` names the source in diagnostics and may be null.
///
/// # Safety
/// Pointers must be valid NUL-terminated strings or null where allowed.
#[no_mangle]
pub unsafe extern "C" fn umlval_model_parse(
    text: *const c_char,
    file: *const c_char,
    out: *mut *mut UmlvalModel,
) -> UmlvalStatus {
    guard(|| {
        out_ptr(out)?;
        let t = read_str(text, "text")?;
        let f = opt_text(file, "file")?.unwrap_or("<input>");
        let m = parse_model(t, f).map_err(|ds| {
            let msg = ds.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n");
            Failure(UmlvalStatus::ParseError, msg)
        })?;
        *out = Box::into_raw(Box::new(UmlvalModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`umlval_model_parse`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn umlval_model_free(model: *mut UmlvalModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Static warnings for the model, one per paragraph. With a configuration
/// the bitwidth check is included.
///
/// # Safety
/// Handles must be live; `configs` and `name` may be null.
#[no_mangle]
pub unsafe extern "C" fn umlval_model_warnings(
    model: *const UmlvalModel,
    configs: *const UmlvalConfigFile,
    name: *const c_char,
    out: *mut *mut c_char,
) -> UmlvalStatus {
    guard(|| {
        out_ptr(out)?;
        let m = &handle(model, "model")?.0;
        let config = match configs.as_ref() {
            Some(c) => Some(pick(&c.0, opt_text(name, "name")?)?),
            None => None,
        };
        let lines: Vec<String> = analyze(m, config.as_ref()).iter().map(ToString::to_string).collect();
        give_string(lines.join("\n"), out);
        Ok(())
    })
}

/// Parses a configuration file against `model`.
///
/// # Safety
/// Pointers must be valid; `file` may be null.
#[no_mangle]
pub unsafe extern "C" fn umlval_config_parse(
    model: *const UmlvalModel,
    text: *const c_char,
    file: *const c_char,
    out: *mut *mut UmlvalConfigFile,
) -> UmlvalStatus {
    guard(|| {
        out_ptr(out)?;
        let m = &handle(model, "model")?.0;
        let t = read_str(text, "text")?;
        let f = opt_text(file, "file")?.unwrap_or("<input>");
        let c = parse_config_file(t, f, m).map_err(|es| {
            let msg = es.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n");
            Failure(UmlvalStatus::ConfigError, msg)
        })?;
        *out = Box::into_raw(Box::new(UmlvalConfigFile(c)));
        Ok(())
    })
}

/// A file holding only the model's default configuration, named `default`.
///
/// # Safety
/// `model` must be live.
#[no_mangle]
pub unsafe extern "C" fn umlval_config_default(
    model: *const UmlvalModel,
    out: *mut *mut UmlvalConfigFile,
) -> UmlvalStatus {
    guard(|| {
        out_ptr(out)?;
        let m = &handle(model, "model")?.0;
        let mut file = ConfigFile::default();
        file.configs.insert("default".into(), default_config(m));
        *out = Box::into_raw(Box::new(UmlvalConfigFile(file)));
        Ok(())
    })
}

/// # Safety
/// `configs` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn umlval_config_free(configs: *mut UmlvalConfigFile) {
    if !configs.is_null() {
        drop(Box::from_raw(configs));
    }
}

/// Number of configurations in the file, 0 for null.
///
/// # Safety
/// `configs` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn umlval_config_count(configs: *const UmlvalConfigFile) -> usize {
    configs.as_ref().map_or(0, |c| c.0.configs.len())
}

/// Name of the configuration at `index`.
///
/// # Safety
/// `configs` must be live.
#[no_mangle]
pub unsafe extern "C" fn umlval_config_name(
    configs: *const UmlvalConfigFile,
    index: usize,
    out: *mut *mut c_char,
) -> UmlvalStatus {
    guard(|| {
        out_ptr(out)?;
        let c = &handle(configs, "configs")?.0;
        let (name, _) = c.configs.get_index(index).ok_or_else(|| {
            Failure(UmlvalStatus::IndexOutOfRange, format!("no configuration at index {index}"))
        })?;
        give_string(name.clone(), out);
        Ok(())
    })
}

/// Searches for a valid system state. `name` selects the configuration and
/// may be null when the file holds exactly one. A `timeout_ms` of 0 means no
/// deadline.
///
/// # Safety
/// Handles must be live.
#[no_mangle]
pub unsafe extern "C" fn umlval_find(
    model: *const UmlvalModel,
    configs: *const UmlvalConfigFile,
    name: *const c_char,
    timeout_ms: u64,
    seed: u64,
    randomize: bool,
    out: *mut *mut UmlvalResult,
) -> UmlvalStatus {
    guard(|| {
        out_ptr(out)?;
        let m = &handle(model, "model")?.0;
        let config = pick(&handle(configs, "configs")?.0, opt_text(name, "name")?)?;
        let mut problem = FinderProblem::new(m, &config);
        if timeout_ms > 0 {
            problem = problem.with_deadline(Duration::from_millis(timeout_ms));
        }
        if randomize {
            problem = problem.with_strategy(Strategy::Random { seed });
        }
        let r = find(&problem).map_err(|e| Failure(UmlvalStatus::FinderError, e.to_string()))?;
        *out = Box::into_raw(Box::new(UmlvalResult {
            verdict: r.verdict,
            log: r.log,
        }));
        Ok(())
    })
}

/// # Safety
/// `result` must be live.
#[no_mangle]
pub unsafe extern "C" fn umlval_result_verdict(result: *const UmlvalResult) -> UmlvalVerdict {
    match result.as_ref().map(|r| &r.verdict) {
        Some(Verdict::Sat(_)) => UmlvalVerdict::Sat,
        Some(Verdict::Unsat) => UmlvalVerdict::Unsat,
        _ => UmlvalVerdict::Timeout,
    }
}

unsafe fn witness<'a>(result: *const UmlvalResult) -> Result<&'a SystemState, Failure> {
    handle(result, "result")?
        .verdict
        .state()
        .ok_or_else(|| Failure(UmlvalStatus::FinderError, "the result has no state".into()))
}

/// The found state as JSON. Fails unless the verdict is SAT.
///
/// # Safety
/// `result` must be live.
#[no_mangle]
pub unsafe extern "C" fn umlval_result_state_json(
    result: *const UmlvalResult,
    out: *mut *mut c_char,
) -> UmlvalStatus {
    guard(|| {
        out_ptr(out)?;
        give_string(export_json(witness(result)?), out);
        Ok(())
    })
}

/// The found state as a Graphviz digraph. Fails unless the verdict is SAT.
///
/// # Safety
/// `result` must be live.
#[no_mangle]
pub unsafe extern "C" fn umlval_result_state_dot(
    result: *const UmlvalResult,
    out: *mut *mut c_char,
) -> UmlvalStatus {
    guard(|| {
        out_ptr(out)?;
        give_string(export_dot(witness(result)?), out);
        Ok(())
    })
}

/// Notes the finder logged, one per line.
///
/// # Safety
/// `result` must be live.
#[no_mangle]
pub unsafe extern "C" fn umlval_result_log(result: *const UmlvalResult, out: *mut *mut c_char) -> UmlvalStatus {
    guard(|| {
        out_ptr(out)?;
        give_string(handle(result, "result")?.log.join("\n"), out);
        Ok(())
    })
}

/// # Safety
/// `result` must come from [`umlval_find`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn umlval_result_free(result: *mut UmlvalResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Runs the consistency check (`invariant` null) or the independence check
/// of one qualified invariant, and returns the report as JSON.
///
/// # Safety
/// Handles must be live; `name` and `invariant` may be null.
#[no_mangle]
pub unsafe extern "C" fn umlval_check(
    model: *const UmlvalModel,
    configs: *const UmlvalConfigFile,
    name: *const c_char,
    invariant: *const c_char,
    timeout_ms: u64,
    out: *mut *mut c_char,
) -> UmlvalStatus {
    guard(|| {
        out_ptr(out)?;
        let m = &handle(model, "model")?.0;
        let config = pick(&handle(configs, "configs")?.0, opt_text(name, "name")?)?;
        let opts = options(timeout_ms);
        let report = match opt_text(invariant, "invariant")? {
            None => check_consistency(m, &config, &opts),
            Some(inv) => check_independence(m, &config, inv, &opts),
        }
        .map_err(|e| match e {
            umlval::tasks::TaskError::UnknownInvariant(_) => Failure(UmlvalStatus::UnknownInvariant, e.to_string()),
            _ => Failure(UmlvalStatus::FinderError, e.to_string()),
        })?;
        give_string(report.to_json().to_string(), out);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn last_error() -> String {
        let p = umlval_last_error();
        assert!(!p.is_null());
        unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
    }

    #[test]
    fn parse_error_sets_message() {
        let mut m = ptr::null_mut();
        let st = unsafe { umlval_model_parse(c("model M class A attributes x Integer end").as_ptr(), ptr::null(), &mut m) };
        assert_eq!(st, UmlvalStatus::ParseError);
        assert!(m.is_null());
        assert!(last_error().contains("<input>:1:"));
    }

    #[test]
    fn null_arguments() {
        let mut m = ptr::null_mut();
        assert_eq!(unsafe { umlval_model_parse(ptr::null(), ptr::null(), &mut m) }, UmlvalStatus::NullArgument);
        assert_eq!(
            unsafe { umlval_model_parse(c("model M").as_ptr(), ptr::null(), ptr::null_mut()) },
            UmlvalStatus::NullArgument
        );
        assert_eq!(unsafe { umlval_config_count(ptr::null()) }, 0);
        unsafe {
            umlval_string_free(ptr::null_mut());
            umlval_model_free(ptr::null_mut());
        }
    }

    #[test]
    fn success_clears_last_error() {
        let mut m = ptr::null_mut();
        unsafe { umlval_model_parse(ptr::null(), ptr::null(), &mut m) };
        assert!(!umlval_last_error().is_null());
        let st = unsafe { umlval_model_parse(c("model M class A end").as_ptr(), ptr::null(), &mut m) };
        assert_eq!(st, UmlvalStatus::Ok);
        assert!(umlval_last_error().is_null());
        unsafe { umlval_model_free(m) };
    }

    #[test]
    fn version_is_set() {
        let v = unsafe { CStr::from_ptr(umlval_version()) }.to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
