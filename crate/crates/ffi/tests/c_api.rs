use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use umlval_ffi::*;

const MODEL: &str = include_str!("../../core/corpus/carrental.use");
const PROPS: &str = include_str!("../../core/corpus/carrental.properties");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    umlval_string_free(s);
    out
}

unsafe fn load() -> (*mut UmlvalModel, *mut UmlvalConfigFile) {
    let mut m = ptr::null_mut();
    assert_eq!(umlval_model_parse(c(MODEL).as_ptr(), c("carrental.use").as_ptr(), &mut m), UmlvalStatus::Ok);
    let mut cf = ptr::null_mut();
    assert_eq!(umlval_config_parse(m, c(PROPS).as_ptr(), ptr::null(), &mut cf), UmlvalStatus::Ok);
    (m, cf)
}

#[test]
fn parts_scenario_through_handles() {
    unsafe {
        let (m, cf) = load();
        assert_eq!(umlval_config_count(cf), 4);
        let mut name = ptr::null_mut();
        assert_eq!(umlval_config_name(cf, 1, &mut name), UmlvalStatus::Ok);
        assert_eq!(take(name), "parts");
        assert_eq!(umlval_config_name(cf, 9, &mut name), UmlvalStatus::IndexOutOfRange);

        let mut r = ptr::null_mut();
        assert_eq!(umlval_find(m, cf, c("parts").as_ptr(), 0, 0, false, &mut r), UmlvalStatus::Ok);
        assert_eq!(umlval_result_verdict(r), UmlvalVerdict::Sat);
        let mut s = ptr::null_mut();
        assert_eq!(umlval_result_state_json(r, &mut s), UmlvalStatus::Ok);
        let state = umlval::state::import_json(&take(s)).unwrap();
        assert_eq!(state.objects.len(), 3);
        assert_eq!(state.links.len(), 2);
        assert_eq!(umlval_result_state_dot(r, &mut s), UmlvalStatus::Ok);
        assert!(take(s).starts_with("digraph"));
        umlval_result_free(r);
        umlval_config_free(cf);
        umlval_model_free(m);
    }
}

#[test]
fn ambiguous_and_unknown_configs() {
    unsafe {
        let (m, cf) = load();
        let mut r = ptr::null_mut();
        assert_eq!(umlval_find(m, cf, ptr::null(), 0, 0, false, &mut r), UmlvalStatus::UnknownConfig);
        let msg = CStr::from_ptr(umlval_last_error()).to_str().unwrap();
        assert!(msg.contains("datatypes"), "{msg}");
        assert_eq!(umlval_find(m, cf, c("nope").as_ptr(), 0, 0, false, &mut r), UmlvalStatus::UnknownConfig);
        assert!(r.is_null());
        umlval_config_free(cf);
        umlval_model_free(m);
    }
}

#[test]
fn warnings_and_config_errors() {
    unsafe {
        let (m, cf) = load();
        let mut s = ptr::null_mut();
        assert_eq!(umlval_model_warnings(m, ptr::null(), ptr::null(), &mut s), UmlvalStatus::Ok);
        let w = take(s);
        assert!(w.contains("results in unsupported type `Bag'"), "{w}");

        let mut bad = ptr::null_mut();
        let st = umlval_config_parse(m, c("[x]\nCustomer_min = abc\n").as_ptr(), c("x.properties").as_ptr(), &mut bad);
        assert_eq!(st, UmlvalStatus::ConfigError);
        let msg = CStr::from_ptr(umlval_last_error()).to_str().unwrap();
        assert!(msg.starts_with("x.properties:2:"), "{msg}");
        umlval_config_free(cf);
        umlval_model_free(m);
    }
}

#[test]
fn tasks_return_json_reports() {
    let model = include_str!("../../core/corpus/fixtures/duplicate.use");
    let props = include_str!("../../core/corpus/fixtures/duplicate.properties");
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(umlval_model_parse(c(model).as_ptr(), ptr::null(), &mut m), UmlvalStatus::Ok);
        let mut cf = ptr::null_mut();
        assert_eq!(umlval_config_parse(m, c(props).as_ptr(), ptr::null(), &mut cf), UmlvalStatus::Ok);
        let mut s = ptr::null_mut();
        let inv = c("Person::nonNegativeAgeCopy");
        assert_eq!(umlval_check(m, cf, ptr::null(), inv.as_ptr(), 0, &mut s), UmlvalStatus::Ok);
        let j: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(j["details"], "not independent within bounds");
        assert_eq!(umlval_check(m, cf, ptr::null(), ptr::null(), 0, &mut s), UmlvalStatus::Ok);
        let j: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(j["outcome"], "holds");
        let st = umlval_check(m, cf, ptr::null(), c("Person::nope").as_ptr(), 0, &mut s);
        assert_eq!(st, UmlvalStatus::UnknownInvariant);
        umlval_config_free(cf);
        umlval_model_free(m);
    }
}

#[test]
fn default_config_and_result_without_state() {
    let model = include_str!("../../core/corpus/fixtures/contradictory.use");
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(umlval_model_parse(c(model).as_ptr(), ptr::null(), &mut m), UmlvalStatus::Ok);
        let mut cf = ptr::null_mut();
        assert_eq!(umlval_config_default(m, &mut cf), UmlvalStatus::Ok);
        let mut name = ptr::null_mut();
        assert_eq!(umlval_config_name(cf, 0, &mut name), UmlvalStatus::Ok);
        assert_eq!(take(name), "default");
        let mut r = ptr::null_mut();
        assert_eq!(umlval_find(m, cf, ptr::null(), 0, 0, false, &mut r), UmlvalStatus::Ok);
        if umlval_result_verdict(r) != UmlvalVerdict::Sat {
            let mut s = ptr::null_mut();
            assert_eq!(umlval_result_state_json(r, &mut s), UmlvalStatus::FinderError);
        }
        umlval_result_free(r);
        umlval_config_free(cf);
        umlval_model_free(m);
    }
}

/// Every exported function appears in the generated header.
#[test]
fn header_declares_exports() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/umlval.h")).unwrap();
    let src = include_str!("../src/lib.rs");
    let mut n = 0;
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            n += 1;
        }
    }
    assert!(n >= 15);
}

/// A C program built against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let target = dir.join("../../target/debug");
    let lib = target.join("libumlval_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "umlval.h"
int main(void) {
    UmlvalModel *m = NULL;
    if (umlval_model_parse("model M class A attributes x : Integer end", NULL, &m) != UMLVAL_STATUS_OK) return 2;
    UmlvalConfigFile *c = NULL;
    if (umlval_config_parse(m, "[one]\nA_min = 1\nA_max = 1\nInteger_min = 4\nInteger_max = 4\n", NULL, &c)) return 3;
    UmlvalResult *r = NULL;
    if (umlval_find(m, c, NULL, 0, 0, false, &r)) return 4;
    char *json = NULL;
    if (umlval_result_verdict(r) != UMLVAL_VERDICT_SAT || umlval_result_state_json(r, &json)) return 5;
    puts(json);
    umlval_string_free(json);
    if (umlval_model_parse(NULL, NULL, &m) != UMLVAL_STATUS_NULL_ARGUMENT) return 6;
    puts(umlval_last_error());
    umlval_result_free(r);
    umlval_config_free(c);
    umlval_model_free(m);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"x\": 4"), "{text}");
    assert!(text.contains("`text` is null"), "{text}");
}
