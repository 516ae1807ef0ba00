//! C ABI over the `spreadhydro` experiment runner and PDE solvers.
//!
//! Objects are opaque handles created by `sh_*_parse`/`sh_*_solve`/`sh_run`
//! and released with the matching `sh_*_free`. Every fallible call returns
//! an [`ShStatus`]; on failure the message is kept per thread and can be
//! copied out with [`sh_last_error_message`]. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use spreadhydro::cli::{execute, parse_config, Criterion, ExperimentConfig, Overrides};
use spreadhydro::pde::GridFunction;
use spreadhydro::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The configuration did not parse or validate.
    Config = 3,
    /// Parameters rejected by a solver or simulator.
    InvalidArgument = 4,
    Io = 5,
    /// A simulation or solver failed while running.
    Runtime = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// A parsed and validated experiment configuration.
pub struct ShConfig {
    cfg: ExperimentConfig,
    raw: Vec<u8>,
}

/// Criteria produced by one command.
pub struct ShRun {
    criteria: Vec<Criterion>,
}

/// PDE solution values on the node grid at the stored times.
pub struct ShSolution {
    sol: GridFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> ShStatus {
    match err {
        Error::Config { .. } | Error::Parse(_) | Error::Json(_) => ShStatus::Config,
        Error::InvalidKernel(_)
        | Error::InvalidRateField(_)
        | Error::InvalidParams(_)
        | Error::OutOfWindow(_)
        | Error::InvalidMove(_) => ShStatus::InvalidArgument,
        Error::Io(_) => ShStatus::Io,
        _ => ShStatus::Runtime,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (ShStatus, String)>) -> ShStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ShStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ShStatus::Panic
        }
    }
}

fn lift(err: Error) -> (ShStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (ShStatus, String) {
    (ShStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (ShStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (ShStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (ShStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Copies `s` with a trailing NUL into `buf` (truncating to `len`) and
/// returns the size needed for the whole string including the NUL.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize) -> usize {
    let bytes = s.as_bytes();
    if !buf.is_null() && len > 0 {
        let n = bytes.len().min(len - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
        *buf.add(n) = 0;
    }
    bytes.len() + 1
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf` and returns
/// the buffer size it needs. An empty message means the last call succeeded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sh_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| copy_out(&e.borrow(), buf, len))
}

/// Parses and validates a JSON configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_config_parse(json: *const c_char, out: *mut *mut ShConfig) -> ShStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = str_arg(json, "json")?;
        let cfg = parse_config(text).map_err(lift)?;
        cfg.validate().map_err(lift)?;
        let raw = text.as_bytes().to_vec();
        *out = Box::into_raw(Box::new(ShConfig { cfg, raw }));
        Ok(())
    })
}

/// Overrides the seed and, when `replicas` is nonzero, the replica count.
///
/// # Safety
/// `config` must come from [`sh_config_parse`].
#[no_mangle]
pub unsafe extern "C" fn sh_config_override(config: *mut ShConfig, seed: u64, replicas: u64) -> ShStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        let mut next = c.cfg.clone();
        next.apply(&Overrides {
            seed: Some(seed),
            replicas: (replicas > 0).then_some(replicas),
            output_dir: None,
            emit_event_log: false,
        })
        .map_err(lift)?;
        c.cfg = next;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or come from [`sh_config_parse`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sh_config_free(config: *mut ShConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a command (`"verify-hydro"`, `"solve-pde"`, `"run"`, ...) writing
/// artifacts under `out_dir`. `threads == 0` uses every core. Criterion
/// failures are not errors: inspect the returned run.
///
/// # Safety
/// Strings must be NUL-terminated, `config` valid and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_run(
    config: *const ShConfig,
    command: *const c_char,
    out_dir: *const c_char,
    threads: usize,
    out: *mut *mut ShRun,
) -> ShStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let c = handle(config, "config")?;
        let command = str_arg(command, "command")?;
        let dir = str_arg(out_dir, "out_dir")?;
        let threads = (threads > 0).then_some(threads);
        let outcome = execute(command, &c.cfg, Some(&c.raw), Path::new(dir), threads).map_err(lift)?;
        *out = Box::into_raw(Box::new(ShRun {
            criteria: outcome.criteria,
        }));
        Ok(())
    })
}

/// Number of criteria evaluated; 0 for a null handle.
///
/// # Safety
/// `run` must be null or come from [`sh_run`].
#[no_mangle]
pub unsafe extern "C" fn sh_run_criteria_count(run: *const ShRun) -> usize {
    run.as_ref().map_or(0, |r| r.criteria.len())
}

/// 1 when every criterion passed, 0 otherwise (including a null handle).
///
/// # Safety
/// `run` must be null or come from [`sh_run`].
#[no_mangle]
pub unsafe extern "C" fn sh_run_passed(run: *const ShRun) -> i32 {
    run.as_ref().map_or(0, |r| r.criteria.iter().all(|c| c.passed) as i32)
}

/// Verdict of criterion `index` in `passed` and its `PASS/FAIL name: detail`
/// line copied into `buf`; `needed` receives the buffer size the line needs.
///
/// # Safety
/// `run` must come from [`sh_run`], `passed` and `needed` must be valid or
/// null, and `buf` null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sh_run_criterion(
    run: *const ShRun,
    index: usize,
    passed: *mut i32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> ShStatus {
    guard(|| {
        let r = handle(run, "run")?;
        let c = r.criteria.get(index).ok_or_else(|| {
            (
                ShStatus::OutOfRange,
                format!("criterion {index} of {}", r.criteria.len()),
            )
        })?;
        if !passed.is_null() {
            *passed = c.passed as i32;
        }
        let size = copy_out(&c.line(), buf, len);
        if !needed.is_null() {
            *needed = size;
        }
        Ok(())
    })
}

/// # Safety
/// `run` must be null or come from [`sh_run`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sh_run_free(run: *mut ShRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Solves the configuration's PDE (heat, right-sided or centered, by
/// process) on its grid refined `level` times.
///
/// # Safety
/// `config` must come from [`sh_config_parse`] and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_pde_solve(config: *const ShConfig, level: usize, out: *mut *mut ShSolution) -> ShStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let c = handle(config, "config")?;
        let sol = c.cfg.solve_pde(level).map_err(lift)?;
        *out = Box::into_raw(Box::new(ShSolution { sol }));
        Ok(())
    })
}

/// Grid shape: node count, first node, spacing and number of stored times.
///
/// # Safety
/// `solution` must come from [`sh_pde_solve`]; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn sh_solution_shape(
    solution: *const ShSolution,
    nodes: *mut usize,
    u_min: *mut f64,
    du: *mut f64,
    times: *mut usize,
) -> ShStatus {
    guard(|| {
        let s = &handle(solution, "solution")?.sol;
        if !nodes.is_null() {
            *nodes = s.nodes();
        }
        if !u_min.is_null() {
            *u_min = s.u_min;
        }
        if !du.is_null() {
            *du = s.du;
        }
        if !times.is_null() {
            *times = s.times.len();
        }
        Ok(())
    })
}

/// Time of stored profile `k` in `time`, and its values copied into
/// `values`, which must hold `len >= nodes` doubles.
///
/// # Safety
/// `solution` must come from [`sh_pde_solve`], `time` be valid or null and
/// `values` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sh_solution_profile(
    solution: *const ShSolution,
    k: usize,
    time: *mut f64,
    values: *mut f64,
    len: usize,
) -> ShStatus {
    guard(|| {
        let s = &handle(solution, "solution")?.sol;
        let row = s.values.get(k).ok_or_else(|| {
            (ShStatus::OutOfRange, format!("profile {k} of {}", s.values.len()))
        })?;
        if values.is_null() {
            return Err(null("values"));
        }
        if len < row.len() {
            return Err((
                ShStatus::OutOfRange,
                format!("buffer holds {len} values, profile has {}", row.len()),
            ));
        }
        ptr::copy_nonoverlapping(row.as_ptr(), values, row.len());
        if !time.is_null() {
            *time = s.times[k];
        }
        Ok(())
    })
}

/// # Safety
/// `solution` must be null or come from [`sh_pde_solve`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sh_solution_free(solution: *mut ShSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}
