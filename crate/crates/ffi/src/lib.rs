//! C ABI over `sdc-core`.
//!
//! Conventions:
//! - every fallible call returns an [`SdcStatus`]; `SDC_STATUS_OK` is 0;
//! - results come back through out-pointers, written only on success;
//! - handles (`SdcScenario`, `SdcReport`) are opaque and released with
//!   their `_free` function; strings returned by the library are released
//!   with [`sdc_string_free`];
//! - after a failure, [`sdc_last_error_message`] describes it (per thread).
//!
//! No call panics across the boundary; panics map to `SDC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sdc_core::forecast::{forecast, ComputeType, Destination, ForecastError, ForecastParams, SdcDesign};
use sdc_core::scenario::{parse_scenario, preset_scenario, report_json, run, scenario_json, Report, Scenario, ScenarioError};
use sdc_core::workload;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInput = 4,
    OutOfRange = 5,
    RuntimeError = 6,
    Panic = 7,
}

/// A resolved scenario.
pub struct SdcScenario {
    inner: Scenario,
}

/// Results of one scenario run.
pub struct SdcReport {
    inner: Report,
}

/// Figures of merit of one design. Undefined ratios are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdcFiguresOfMerit {
    pub available_compute_tflops: f64,
    pub raw_compute_tflops: f64,
    pub satellite_mass_kg: f64,
    pub compute_efficiency_w_per_tflops: f64,
    pub cost_of_power_eur_per_w: f64,
    pub cost_of_compute_eur_per_tflops: f64,
    pub total_cost_eur: f64,
}

/// `destination` codes for [`sdc_forecast`].
pub const SDC_DESTINATION_LEO: i32 = 0;
pub const SDC_DESTINATION_GEO: i32 = 1;
pub const SDC_DESTINATION_LUNAR_SURFACE: i32 = 2;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: SdcStatus, msg: impl Into<String>) -> SdcStatus {
    set_error(msg);
    status
}

fn scenario_status(e: &ScenarioError) -> SdcStatus {
    match e {
        ScenarioError::Parse { .. } => SdcStatus::ParseError,
        ScenarioError::Invalid(_) | ScenarioError::UnknownPreset(_) => SdcStatus::InvalidInput,
        ScenarioError::Io { .. } | ScenarioError::Analysis { .. } => SdcStatus::RuntimeError,
    }
}

fn guard(f: impl FnOnce() -> SdcStatus) -> SdcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(SdcStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SdcStatus> {
    if s.is_null() {
        return Err(fail(SdcStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(SdcStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NULs removed").into_raw()
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn sdc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Free with
/// [`sdc_string_free`].
#[no_mangle]
pub extern "C" fn sdc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sdc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse and resolve a scenario from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sdc_scenario_from_json(json: *const c_char, out: *mut *mut SdcScenario) -> SdcStatus {
    guard(|| {
        if out.is_null() {
            return fail(SdcStatus::NullPointer, "null out pointer");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_scenario(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SdcScenario { inner }));
                SdcStatus::Ok
            }
            Err(e) => fail(scenario_status(&e), e.to_string()),
        }
    })
}

/// Load a named preset (`uc1`, `uc2`, `uc3`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sdc_scenario_from_preset(name: *const c_char, out: *mut *mut SdcScenario) -> SdcStatus {
    guard(|| {
        if out.is_null() {
            return fail(SdcStatus::NullPointer, "null out pointer");
        }
        let name = match read_str(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match preset_scenario(name) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SdcScenario { inner }));
                SdcStatus::Ok
            }
            Err(e) => fail(scenario_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `scenario` must be NULL or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn sdc_scenario_free(scenario: *mut SdcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Resolved scenario as JSON.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sdc_scenario_to_json(scenario: *const SdcScenario, out: *mut *mut c_char) -> SdcStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            return fail(SdcStatus::NullPointer, "null argument");
        }
        *out = to_c_string(scenario_json(&(*scenario).inner));
        SdcStatus::Ok
    })
}

/// Run every analysis the scenario requests.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sdc_scenario_run(scenario: *const SdcScenario, out: *mut *mut SdcReport) -> SdcStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            return fail(SdcStatus::NullPointer, "null argument");
        }
        match run(&(*scenario).inner) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SdcReport { inner }));
                SdcStatus::Ok
            }
            Err(e) => fail(scenario_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `report` must be NULL or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn sdc_report_free(report: *mut SdcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Full report as pretty JSON, identical to the CLI output.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sdc_report_to_json(report: *const SdcReport, out: *mut *mut c_char) -> SdcStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return fail(SdcStatus::NullPointer, "null argument");
        }
        *out = to_c_string(report_json(&(*report).inner));
        SdcStatus::Ok
    })
}

/// Hex SHA-256 content hash of the report.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sdc_report_content_hash(report: *const SdcReport, out: *mut *mut c_char) -> SdcStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return fail(SdcStatus::NullPointer, "null argument");
        }
        *out = to_c_string((*report).inner.content_hash.clone());
        SdcStatus::Ok
    })
}

/// Size a GPU-equivalent design with the shipped parameters.
/// `destination` is one of the `SDC_DESTINATION_*` codes.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sdc_forecast(
    year: i32,
    total_power_w: f64,
    destination: i32,
    compute_power_fraction: f64,
    out: *mut SdcFiguresOfMerit,
) -> SdcStatus {
    guard(|| {
        if out.is_null() {
            return fail(SdcStatus::NullPointer, "null out pointer");
        }
        let destination = match destination {
            SDC_DESTINATION_LEO => Destination::Leo,
            SDC_DESTINATION_GEO => Destination::Geo,
            SDC_DESTINATION_LUNAR_SURFACE => Destination::LunarSurface,
            other => return fail(SdcStatus::InvalidInput, format!("unknown destination code {other}")),
        };
        let design = SdcDesign { year, total_power_w, compute_type: ComputeType::GpuEquivalent, destination, compute_power_fraction };
        match forecast(&design, None, &ForecastParams::shipped()) {
            Ok(f) => {
                *out = SdcFiguresOfMerit {
                    available_compute_tflops: f.available_compute_tflops,
                    raw_compute_tflops: f.raw_compute_tflops,
                    satellite_mass_kg: f.satellite_mass_kg,
                    compute_efficiency_w_per_tflops: f.compute_efficiency_w_per_tflops,
                    cost_of_power_eur_per_w: f.cost_of_power_eur_per_w.unwrap_or(f64::NAN),
                    cost_of_compute_eur_per_tflops: f.cost_of_compute_eur_per_tflops.unwrap_or(f64::NAN),
                    total_cost_eur: f.total_cost_eur,
                };
                SdcStatus::Ok
            }
            Err(e @ ForecastError::YearOutOfRange(_)) => fail(SdcStatus::OutOfRange, e.to_string()),
            Err(e) => fail(SdcStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Minimum SDC compute (TFLOPS) of a workload preset.
///
/// # Safety
/// `preset` must be a NUL-terminated string; `out_tflops` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sdc_workload_required_compute(preset: *const c_char, out_tflops: *mut f64) -> SdcStatus {
    guard(|| {
        if out_tflops.is_null() {
            return fail(SdcStatus::NullPointer, "null out pointer");
        }
        let name = match read_str(preset) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match workload::preset(name).and_then(|w| workload::assess(&w)) {
            Ok(a) => {
                *out_tflops = a.required_compute_tflops;
                SdcStatus::Ok
            }
            Err(e) => fail(SdcStatus::InvalidInput, e.to_string()),
        }
    })
}
