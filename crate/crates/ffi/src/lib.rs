//! C ABI over disturbsim.
//!
//! Every fallible call returns a [`DsStatus`]; on failure the message is
//! available from [`ds_last_error`] on the same thread. Handles are opaque
//! and owned by the caller, who releases them with the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use disturbsim::blockhammer::{derive_config, AttackModel};
use disturbsim::dram::TimingParams;
use disturbsim::para::{k_factor, p_rh, solve_pth, ParaSolverInput};
use disturbsim::sim::{SimConfig, Simulation, StatsReport};
use disturbsim::verify::{feasibility_check, Feasibility};
use disturbsim::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Parse = 4,
    Io = 5,
    Domain = 6,
    Solver = 7,
    Protocol = 8,
    Invariant = 9,
    Panic = 10,
}

impl From<&Error> for DsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) | Error::Address(_) | Error::Pairing(_) | Error::Profile(_) => DsStatus::Config,
            Error::Parse { .. } | Error::Json { .. } => DsStatus::Parse,
            Error::Io { .. } => DsStatus::Io,
            Error::Domain(_) => DsStatus::Domain,
            Error::Solver(_) => DsStatus::Solver,
            Error::Protocol(_) => DsStatus::Protocol,
            Error::Invariant(_) => DsStatus::Invariant,
        }
    }
}

/// A loaded simulation config. Runs do not consume it.
pub struct DsSimulation {
    cfg: SimConfig,
}

/// Statistics of one finished run.
pub struct DsReport {
    report: StatsReport,
    json: CString,
}

/// BlockHammer epoch-feasibility verdict. When `feasible` is false,
/// `activations` is the best count any epoch mix reaches and `witness` is
/// zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DsFeasibility {
    pub feasible: bool,
    pub activations: u64,
    pub target: u64,
    /// Epochs of each type T0..T4 in the witness mix.
    pub witness: [u64; 5],
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Fail(DsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail((&e).into(), e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            DsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(DsStatus::NullArgument, format!("{what} is null"))
}

/// # Safety
/// `p` is null or a valid nul-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(DsStatus::InvalidUtf8, format!("{what}: {e}")))
}

/// # Safety
/// `p` is null or valid for writes for the duration of the call.
unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn ds_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON config. Relative paths inside it resolve against the
/// current directory.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ds_simulation_from_json(json: *const c_char, out: *mut *mut DsSimulation) -> DsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(json, "json")?;
        let cfg = SimConfig::from_json(text, Path::new("."))?;
        *out = Box::into_raw(Box::new(DsSimulation { cfg }));
        Ok(())
    })
}

/// Loads a JSON config file.
///
/// # Safety
/// `path` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ds_simulation_from_file(path: *const c_char, out: *mut *mut DsSimulation) -> DsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let cfg = SimConfig::load(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(DsSimulation { cfg }));
        Ok(())
    })
}

/// # Safety
/// `sim` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_simulation_set_seed(sim: *mut DsSimulation, seed: u64) -> DsStatus {
    guard(|| {
        out_ptr(sim, "sim")?.cfg.sim.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `sim` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_simulation_set_duration(sim: *mut DsSimulation, duration_ps: u64) -> DsStatus {
    guard(|| {
        out_ptr(sim, "sim")?.cfg.sim.duration_ps = duration_ps;
        Ok(())
    })
}

/// Runs the simulation to completion. The handle stays usable.
///
/// # Safety
/// `sim` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ds_simulation_run(sim: *const DsSimulation, out: *mut *mut DsReport) -> DsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let report = Simulation::new(sim.cfg.clone())?.run()?.report;
        let json = CString::new(report.to_json()).expect("JSON has no nul bytes");
        *out = Box::into_raw(Box::new(DsReport { report, json }));
        Ok(())
    })
}

/// # Safety
/// `sim` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_simulation_free(sim: *mut DsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Stats as pretty JSON, owned by the report. Null if `report` is null.
///
/// # Safety
/// `report` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_report_json(report: *const DsReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// Number of invariant violations the run found.
///
/// # Safety
/// `report` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ds_report_violations(report: *const DsReport, out: *mut u64) -> DsStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        *out_ptr(out, "out")? = r.report.invariant_violations().len() as u64;
        Ok(())
    })
}

/// Writes stats.json and the CSV tables into `dir`.
///
/// # Safety
/// `report` is a live handle; `dir` is a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ds_report_write(report: *const DsReport, dir: *const c_char) -> DsStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        r.report.write(Path::new(str_arg(dir, "dir")?))?;
        Ok(())
    })
}

/// # Safety
/// `report` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_report_free(report: *mut DsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

fn para_input(n_rh: u64, t_refw_ps: u64, t_rc_ps: u64, hc_deadline: u64) -> ParaSolverInput {
    ParaSolverInput::new(n_rh, t_refw_ps, t_rc_ps, hc_deadline)
}

/// Solves PARA's p_th for a target p_rh.
///
/// # Safety
/// `p_th` is writable.
#[no_mangle]
pub unsafe extern "C" fn ds_para_solve(
    n_rh: u64,
    t_refw_ps: u64,
    t_rc_ps: u64,
    hc_deadline: u64,
    target_prh: f64,
    p_th: *mut f64,
) -> DsStatus {
    guard(|| {
        let out = out_ptr(p_th, "p_th")?;
        let input = ParaSolverInput { target_prh, ..para_input(n_rh, t_refw_ps, t_rc_ps, hc_deadline) };
        *out = solve_pth(&input)?;
        Ok(())
    })
}

/// Worst-case success probability at `p_th`.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ds_para_p_rh(
    p_th: f64,
    n_rh: u64,
    t_refw_ps: u64,
    t_rc_ps: u64,
    hc_deadline: u64,
    out: *mut f64,
) -> DsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = p_rh(p_th, &para_input(n_rh, t_refw_ps, t_rc_ps, hc_deadline))?;
        Ok(())
    })
}

/// Ratio of p_rh to the estimate that ignores failed attempts and slack.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ds_para_k_factor(
    p_th: f64,
    n_rh: u64,
    t_refw_ps: u64,
    t_rc_ps: u64,
    hc_deadline: u64,
    out: *mut f64,
) -> DsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = k_factor(p_th, &para_input(n_rh, t_refw_ps, t_rc_ps, hc_deadline))?;
        Ok(())
    })
}

/// Derives the double-sided BlockHammer config for `n_rh` (default timing,
/// with t_refw replaced when non-zero) and checks epoch feasibility.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ds_blockhammer_feasibility(n_rh: u64, t_refw_ps: u64, out: *mut DsFeasibility) -> DsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let mut t = TimingParams::default();
        if t_refw_ps != 0 {
            t.t_refw = t_refw_ps;
        }
        let cfg = derive_config(n_rh, AttackModel::DoubleSided, &t)?;
        *out = match feasibility_check(&cfg) {
            Feasibility::Feasible { witness, activations, target } => {
                DsFeasibility { feasible: true, activations, target, witness }
            }
            Feasibility::Infeasible { best, target } => {
                DsFeasibility { feasible: false, activations: best, target, witness: [0; 5] }
            }
        };
        Ok(())
    })
}
