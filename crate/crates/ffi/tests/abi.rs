use apfsim_ffi::*;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    unsafe { CStr::from_ptr(apf_last_error()) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { apf_string_free(p) };
    s
}

fn scenario(json: &str) -> *mut ApfScenario {
    let json = CString::new(json).unwrap();
    let mut sc = ptr::null_mut();
    assert_eq!(unsafe { apf_scenario_from_json(json.as_ptr(), &mut sc) }, ApfStatus::Ok, "{}", last_error());
    sc
}

#[test]
fn invalid_config_reports_field() {
    let json = CString::new(r#"{"converter": {"vdc": 10.0}}"#).unwrap();
    let mut sc = ptr::null_mut();
    let st = unsafe { apf_scenario_from_json(json.as_ptr(), &mut sc) };
    assert_eq!(st, ApfStatus::InvalidConfig);
    assert!(sc.is_null());
    assert!(last_error().contains("converter.vdc"));

    let json = CString::new("{not json").unwrap();
    assert_eq!(unsafe { apf_scenario_from_json(json.as_ptr(), &mut sc) }, ApfStatus::InvalidConfig);
}

#[test]
fn null_arguments_are_rejected() {
    let mut sc = ptr::null_mut();
    assert_eq!(unsafe { apf_scenario_from_json(ptr::null(), &mut sc) }, ApfStatus::NullPointer);
    assert_eq!(unsafe { apf_scenario_default(ptr::null_mut()) }, ApfStatus::NullPointer);
    let mut tr = ptr::null_mut();
    assert_eq!(unsafe { apf_simulate(ptr::null(), ApfStrategy::EmdHybrid, &mut tr) }, ApfStatus::NullPointer);
    assert_eq!(unsafe { apf_trace_len(ptr::null()) }, 0);
    unsafe {
        apf_trace_free(ptr::null_mut());
        apf_scenario_free(ptr::null_mut());
        apf_imf_set_free(ptr::null_mut());
        apf_string_free(ptr::null_mut());
    }
}

#[test]
fn scenario_json_round_trip() {
    let mut sc = ptr::null_mut();
    assert_eq!(unsafe { apf_scenario_default(&mut sc) }, ApfStatus::Ok);
    assert_eq!(unsafe { apf_scenario_set_seed(sc, 99) }, ApfStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { apf_scenario_to_json(sc, &mut s) }, ApfStatus::Ok);
    let json = take_string(s);
    let cfg = apfsim::config::ScenarioConfig::from_json(&json).unwrap();
    assert_eq!(cfg.seed, 99);
    unsafe { apf_scenario_free(sc) };
}

#[test]
fn simulate_and_read_columns() {
    let sc = scenario(r#"{"duration": 0.1}"#);
    let mut tr = ptr::null_mut();
    assert_eq!(unsafe { apf_simulate(sc, ApfStrategy::PlainModifiedPq, &mut tr) }, ApfStatus::Ok);
    let n = unsafe { apf_trace_len(tr) };
    assert_eq!(n, 5000);

    let mut time = vec![0.0; n];
    let name = CString::new("time").unwrap();
    assert_eq!(unsafe { apf_trace_column(tr, name.as_ptr(), time.as_mut_ptr(), n) }, ApfStatus::Ok);
    assert!((time[1] - 20e-6).abs() < 1e-15);

    let mut small = vec![0.0; 10];
    assert_eq!(
        unsafe { apf_trace_column(tr, name.as_ptr(), small.as_mut_ptr(), small.len()) },
        ApfStatus::BufferTooSmall
    );
    let bogus = CString::new("nope").unwrap();
    assert_eq!(unsafe { apf_trace_column(tr, bogus.as_ptr(), time.as_mut_ptr(), n) }, ApfStatus::OutOfRange);

    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { apf_trace_to_csv(tr, &mut csv) }, ApfStatus::Ok);
    let csv = take_string(csv);
    assert_eq!(csv.lines().count(), n + 1);
    assert_eq!(apf_trace_column_count(), csv.lines().next().unwrap().split(',').count());
    unsafe {
        apf_trace_free(tr);
        apf_scenario_free(sc);
    }
}

#[test]
fn compare_returns_both_rows() {
    let sc = scenario(r#"{"duration": 0.12}"#);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { apf_compare_json(sc, &mut s) }, ApfStatus::Ok, "{}", last_error());
    let json = take_string(s);
    assert!(json.contains("emd_hybrid") && json.contains("plain_modified_pq"));
    unsafe { apf_scenario_free(sc) };
}

#[test]
fn emd_round_trip() {
    let fs = 10_000.0;
    let x: Vec<f64> = (0..1000)
        .map(|k| {
            let t = k as f64 / fs;
            (2.0 * std::f64::consts::PI * 250.0 * t).sin() + 3.0 * (2.0 * std::f64::consts::PI * 50.0 * t).sin()
        })
        .collect();
    let mut set = ptr::null_mut();
    assert_eq!(unsafe { apf_emd_decompose(x.as_ptr(), x.len(), fs, &mut set) }, ApfStatus::Ok);
    let count = unsafe { apf_imf_count(set) };
    let len = unsafe { apf_imf_len(set) };
    assert!(count >= 2);
    assert_eq!(len, x.len());
    let mut sum = vec![0.0; len];
    let mut buf = vec![0.0; len];
    for k in 0..count {
        assert_eq!(unsafe { apf_imf_get(set, k, buf.as_mut_ptr(), len) }, ApfStatus::Ok);
        sum.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
    }
    assert_eq!(unsafe { apf_imf_get(set, count, buf.as_mut_ptr(), len) }, ApfStatus::OutOfRange);
    assert_eq!(unsafe { apf_imf_residue(set, buf.as_mut_ptr(), len) }, ApfStatus::Ok);
    for k in 0..len {
        assert!((sum[k] + buf[k] - x[k]).abs() < 1e-9);
    }
    unsafe { apf_imf_set_free(set) };

    let mut set = ptr::null_mut();
    assert_eq!(unsafe { apf_emd_decompose(x.as_ptr(), 0, fs, &mut set) }, ApfStatus::InvalidInput);
    assert_eq!(unsafe { apf_emd_decompose(x.as_ptr(), x.len(), -1.0, &mut set) }, ApfStatus::InvalidInput);
}

#[test]
fn header_is_current_and_usable_from_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/apfsim.h")).unwrap();
    for f in ["apf_simulate", "apf_emd_decompose", "apf_last_error", "APF_STATUS_BUFFER_TOO_SMALL"] {
        assert!(header.contains(f), "{f} missing from header");
    }

    let lib_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = lib_dir.join("libapfsim_ffi.a");
    let cc = Command::new("cc").arg("--version").output();
    if !lib.exists() || cc.is_err() {
        eprintln!("skipping C smoke test: no static library or C compiler");
        return;
    }
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("apfsim_smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{:?} {}", out.status, String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("samples 5000"));
}
