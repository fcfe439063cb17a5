//! C ABI over `apfsim`.
//!
//! Every fallible function returns an [`ApfStatus`]; on failure the message is
//! available from [`apf_last_error`] on the same thread. Handles are opaque and
//! must be released with their `_free` function. Strings returned through
//! `char **` are owned by the caller and released with [`apf_string_free`].

use apfsim::config::ScenarioConfig;
use apfsim::control::StrategyKind;
use apfsim::emd::{decompose, EmdConfig, ImfSet, Signal};
use apfsim::metrics::compare_report;
use apfsim::plant::{simulate_strategy, SimulationError, SimulationTrace, TRACE_COLUMNS};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    InvalidInput = 4,
    OutOfRange = 5,
    BufferTooSmall = 6,
    Runtime = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApfStrategy {
    EmdHybrid = 0,
    PlainModifiedPq = 1,
}

impl From<ApfStrategy> for StrategyKind {
    fn from(s: ApfStrategy) -> Self {
        match s {
            ApfStrategy::EmdHybrid => StrategyKind::EmdHybrid,
            ApfStrategy::PlainModifiedPq => StrategyKind::PlainModifiedPq,
        }
    }
}

/// Scenario configuration.
pub struct ApfScenario {
    cfg: ScenarioConfig,
}

/// Result of one simulation run.
pub struct ApfTrace {
    trace: SimulationTrace,
}

/// IMFs and residue of one decomposition.
pub struct ApfImfSet {
    set: ImfSet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

type Res<T> = Result<T, (ApfStatus, String)>;

fn guard(f: impl FnOnce() -> Res<()>) -> ApfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ApfStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ApfStatus::Panic
        }
    }
}

fn null(what: &str) -> (ApfStatus, String) {
    (ApfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (ApfStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Res<()> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Res<()> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|e| (ApfStatus::Runtime, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize) -> Res<()> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < values.len() {
        return Err((
            ApfStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

fn sim_error(e: SimulationError) -> (ApfStatus, String) {
    match e {
        SimulationError::Config(c) => (ApfStatus::InvalidConfig, c.to_string()),
        SimulationError::Control(c) => (ApfStatus::Runtime, c.to_string()),
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn apf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn apf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default scenario.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_scenario_default(out: *mut *mut ApfScenario) -> ApfStatus {
    guard(|| {
        put(
            out,
            ApfScenario {
                cfg: ScenarioConfig::default(),
            },
        )
    })
}

/// Parse and validate a scenario from JSON; omitted fields take defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_scenario_from_json(json: *const c_char, out: *mut *mut ApfScenario) -> ApfStatus {
    guard(|| {
        let cfg = ScenarioConfig::from_json(text(json, "json")?).map_err(|e| (ApfStatus::InvalidConfig, e.to_string()))?;
        cfg.validate().map_err(|e| (ApfStatus::InvalidConfig, e.to_string()))?;
        put(out, ApfScenario { cfg })
    })
}

/// Full scenario as JSON.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_scenario_to_json(scenario: *const ApfScenario, out: *mut *mut c_char) -> ApfStatus {
    guard(|| put_string(out, borrow(scenario, "scenario")?.cfg.to_json()))
}

/// Override the disturbance seed.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn apf_scenario_set_seed(scenario: *mut ApfScenario, seed: u64) -> ApfStatus {
    guard(|| {
        scenario.as_mut().ok_or_else(|| null("scenario"))?.cfg.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn apf_scenario_free(scenario: *mut ApfScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Run one strategy.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_simulate(
    scenario: *const ApfScenario,
    strategy: ApfStrategy,
    out: *mut *mut ApfTrace,
) -> ApfStatus {
    guard(|| {
        let cfg = &borrow(scenario, "scenario")?.cfg;
        let trace = simulate_strategy(cfg, strategy.into()).map_err(sim_error)?;
        put(out, ApfTrace { trace })
    })
}

/// Run both strategies and return the comparison table as JSON.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_compare_json(scenario: *const ApfScenario, out: *mut *mut c_char) -> ApfStatus {
    guard(|| {
        let cfg = &borrow(scenario, "scenario")?.cfg;
        let a = simulate_strategy(cfg, StrategyKind::EmdHybrid).map_err(sim_error)?;
        let b = simulate_strategy(cfg, StrategyKind::PlainModifiedPq).map_err(sim_error)?;
        let table = compare_report(&a, &b, &cfg.evaluation).map_err(|e| (ApfStatus::Runtime, e.to_string()))?;
        let json = serde_json::to_string_pretty(&table).map_err(|e| (ApfStatus::Runtime, e.to_string()))?;
        put_string(out, json)
    })
}

/// Number of samples in the trace; 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn apf_trace_len(trace: *const ApfTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.trace.len())
}

/// Number of trace columns.
#[no_mangle]
pub extern "C" fn apf_trace_column_count() -> usize {
    TRACE_COLUMNS.len()
}

/// Name of column `index` as a static NUL-terminated string, or null when out
/// of range.
#[no_mangle]
pub extern "C" fn apf_trace_column_name(index: usize) -> *const c_char {
    const NAMES: [&CStr; TRACE_COLUMNS.len()] = [
        c"time", c"v_r", c"v_s", c"v_t", c"il_r", c"il_s", c"il_t", c"il_n", c"disturbance", c"iapf_r", c"iapf_s",
        c"iapf_t", c"iapf_n", c"is_r", c"is_s", c"is_t", c"is_n", c"ref_r", c"ref_s", c"ref_t", c"ref_n", c"res_r",
        c"res_s", c"res_t", c"p", c"p_bar", c"p_tilde", c"q_alpha", c"q_beta", c"q_zero", c"line_loss", c"switches",
        c"voltage_collapse", c"apf_on",
    ];
    NAMES.get(index).map_or(ptr::null(), |n| n.as_ptr())
}

/// Copy the named column into `buf`, which must hold `apf_trace_len` values.
///
/// # Safety
/// `trace` must be a live handle, `name` a NUL-terminated string and `buf`
/// valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn apf_trace_column(
    trace: *const ApfTrace,
    name: *const c_char,
    buf: *mut f64,
    len: usize,
) -> ApfStatus {
    guard(|| {
        let trace = &borrow(trace, "trace")?.trace;
        let name = text(name, "name")?;
        let column = trace
            .named_column(name)
            .ok_or_else(|| (ApfStatus::OutOfRange, format!("no trace column named {name:?}")))?;
        copy_out(&column, buf, len)
    })
}

/// Whole trace as CSV text.
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_trace_to_csv(trace: *const ApfTrace, out: *mut *mut c_char) -> ApfStatus {
    guard(|| {
        let trace = &borrow(trace, "trace")?.trace;
        let mut bytes = Vec::new();
        trace.write_csv(&mut bytes).map_err(|e| (ApfStatus::Runtime, e.to_string()))?;
        put_string(out, String::from_utf8(bytes).map_err(|e| (ApfStatus::Runtime, e.to_string()))?)
    })
}

/// # Safety
/// `trace` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn apf_trace_free(trace: *mut ApfTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Decompose `len` samples taken at `sample_rate` with default EMD settings.
///
/// # Safety
/// `samples` must be valid for `len` reads and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_emd_decompose(
    samples: *const f64,
    len: usize,
    sample_rate: f64,
    out: *mut *mut ApfImfSet,
) -> ApfStatus {
    guard(|| {
        if samples.is_null() {
            return Err(null("samples"));
        }
        if len == 0 {
            return Err((ApfStatus::InvalidInput, "no samples".into()));
        }
        let data = std::slice::from_raw_parts(samples, len).to_vec();
        let signal = Signal::new(data, sample_rate).map_err(|e| (ApfStatus::InvalidInput, e.to_string()))?;
        put(
            out,
            ApfImfSet {
                set: decompose(&signal, &EmdConfig::default()),
            },
        )
    })
}

/// Number of IMFs, excluding the residue; 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn apf_imf_count(set: *const ApfImfSet) -> usize {
    set.as_ref().map_or(0, |s| s.set.imfs.len())
}

/// Samples per IMF; 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn apf_imf_len(set: *const ApfImfSet) -> usize {
    set.as_ref().map_or(0, |s| s.set.residue.len())
}

/// Copy IMF `index` (0-based, fastest first) into `buf`.
///
/// # Safety
/// `set` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn apf_imf_get(set: *const ApfImfSet, index: usize, buf: *mut f64, len: usize) -> ApfStatus {
    guard(|| {
        let set = &borrow(set, "set")?.set;
        let imf = set.imfs.get(index).ok_or_else(|| {
            (
                ApfStatus::OutOfRange,
                format!("IMF index {index} out of range ({} IMFs)", set.imfs.len()),
            )
        })?;
        copy_out(imf.samples(), buf, len)
    })
}

/// Copy the residue into `buf`.
///
/// # Safety
/// `set` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn apf_imf_residue(set: *const ApfImfSet, buf: *mut f64, len: usize) -> ApfStatus {
    guard(|| copy_out(borrow(set, "set")?.set.residue.samples(), buf, len))
}

/// # Safety
/// `set` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn apf_imf_set_free(set: *mut ApfImfSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
