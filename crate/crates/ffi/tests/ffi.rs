use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use sdc_ffi::*;

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    sdc_string_free(p);
    s
}

fn last_error() -> String {
    unsafe { take_string(sdc_last_error_message()) }
}

#[test]
fn forecast_matches_core() {
    let mut fom = SdcFiguresOfMerit {
        available_compute_tflops: 0.0,
        raw_compute_tflops: 0.0,
        satellite_mass_kg: 0.0,
        compute_efficiency_w_per_tflops: 0.0,
        cost_of_power_eur_per_w: 0.0,
        cost_of_compute_eur_per_tflops: 0.0,
        total_cost_eur: 0.0,
    };
    let status = unsafe { sdc_forecast(2032, 500.0, SDC_DESTINATION_LEO, 1.0, &mut fom) };
    assert_eq!(status, SdcStatus::Ok);
    let design = sdc_core::forecast::SdcDesign {
        year: 2032,
        total_power_w: 500.0,
        compute_type: sdc_core::forecast::ComputeType::GpuEquivalent,
        destination: sdc_core::forecast::Destination::Leo,
        compute_power_fraction: 1.0,
    };
    let core = sdc_core::forecast::forecast(&design, None, &Default::default()).unwrap();
    assert_eq!(fom.available_compute_tflops, core.available_compute_tflops);
    assert_eq!(fom.satellite_mass_kg, core.satellite_mass_kg);
    assert_eq!(fom.cost_of_compute_eur_per_tflops, core.cost_of_compute_eur_per_tflops.unwrap());
}

#[test]
fn error_codes_and_messages() {
    let mut fom = unsafe { std::mem::zeroed::<SdcFiguresOfMerit>() };
    assert_eq!(unsafe { sdc_forecast(2100, 500.0, SDC_DESTINATION_LEO, 1.0, &mut fom) }, SdcStatus::OutOfRange);
    assert!(last_error().contains("2100"));
    assert_eq!(unsafe { sdc_forecast(2032, 0.0, SDC_DESTINATION_LEO, 1.0, &mut fom) }, SdcStatus::InvalidInput);
    assert_eq!(unsafe { sdc_forecast(2032, 500.0, 9, 1.0, &mut fom) }, SdcStatus::InvalidInput);
    assert_eq!(unsafe { sdc_forecast(2032, 500.0, SDC_DESTINATION_LEO, 1.0, ptr::null_mut()) }, SdcStatus::NullPointer);

    let mut handle = ptr::null_mut();
    let bad = CString::new("{\"nope\": 1}").unwrap();
    assert_eq!(unsafe { sdc_scenario_from_json(bad.as_ptr(), &mut handle) }, SdcStatus::ParseError);
    assert!(handle.is_null());
    let invalid = CString::new("{\"time\": {\"step_s\": -1.0}}").unwrap();
    assert_eq!(unsafe { sdc_scenario_from_json(invalid.as_ptr(), &mut handle) }, SdcStatus::InvalidInput);
    assert!(last_error().contains("time"));
    let unknown = CString::new("uc9").unwrap();
    assert_eq!(unsafe { sdc_scenario_from_preset(unknown.as_ptr(), &mut handle) }, SdcStatus::InvalidInput);
    assert_eq!(unsafe { sdc_scenario_from_json(ptr::null(), &mut handle) }, SdcStatus::NullPointer);

    // success clears the previous message
    let mut tflops = 0.0;
    let uc2 = CString::new("uc2").unwrap();
    assert_eq!(unsafe { sdc_workload_required_compute(uc2.as_ptr(), &mut tflops) }, SdcStatus::Ok);
    assert!((tflops - 3.62).abs() < 1e-9);
    assert!(sdc_last_error_message().is_null());
}

#[test]
fn report_through_handles_equals_cli_json() {
    let name = CString::new("uc3").unwrap();
    let mut scenario = ptr::null_mut();
    assert_eq!(unsafe { sdc_scenario_from_preset(name.as_ptr(), &mut scenario) }, SdcStatus::Ok);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { sdc_scenario_run(scenario, &mut report) }, SdcStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { sdc_report_to_json(report, &mut json) }, SdcStatus::Ok);
    let json = unsafe { take_string(json) };
    let mut hash = ptr::null_mut();
    assert_eq!(unsafe { sdc_report_content_hash(report, &mut hash) }, SdcStatus::Ok);
    let hash = unsafe { take_string(hash) };
    let mut echoed = ptr::null_mut();
    assert_eq!(unsafe { sdc_scenario_to_json(scenario, &mut echoed) }, SdcStatus::Ok);
    let echoed = unsafe { take_string(echoed) };
    unsafe {
        sdc_report_free(report);
        sdc_scenario_free(scenario);
        sdc_scenario_free(ptr::null_mut());
    }

    let core = sdc_core::scenario::run(&sdc_core::scenario::preset_scenario("uc3").unwrap()).unwrap();
    assert_eq!(json, sdc_core::scenario::report_json(&core));
    assert_eq!(hash, core.content_hash);
    assert_eq!(sdc_core::scenario::parse_scenario(&echoed).unwrap(), core.scenario);
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(sdc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/sdc.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "sdc_version",
        "sdc_last_error_message",
        "sdc_string_free",
        "sdc_scenario_from_json",
        "sdc_scenario_from_preset",
        "sdc_scenario_to_json",
        "sdc_scenario_run",
        "sdc_scenario_free",
        "sdc_report_to_json",
        "sdc_report_content_hash",
        "sdc_report_free",
        "sdc_forecast",
        "sdc_workload_required_compute",
        "typedef struct SdcScenario SdcScenario;",
        "typedef struct SdcReport SdcReport;",
        "SDC_STATUS_OK = 0",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

fn cc() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

/// Compile and run a C program against the header and the shared library.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = cc() else {
        eprintln!("skipping: no C compiler");
        return;
    };
    // target/<profile>/deps/<test binary>
    let lib_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib_name = if cfg!(target_os = "macos") { "libsdc_ffi.dylib" } else { "libsdc_ffi.so" };
    if !lib_dir.join(lib_name).exists() {
        eprintln!("skipping: {} not built", lib_dir.join(lib_name).display());
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let src = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg("-L")
        .arg(&lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .args(["-lsdc_ffi", "-lm"])
        .output()
        .unwrap();
    assert!(out.status.success(), "compile failed:\n{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}{}", String::from_utf8_lossy(&run.stdout), String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "OK");
}
