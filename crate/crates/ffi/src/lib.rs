//! C ABI for duality-lab.
//!
//! Every fallible function returns a [`DlStatus`]; on failure the message is
//! available from [`dl_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their matching `*_free` function.
//! Panics never cross the boundary; they are reported as `DL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use duality_lab::dualities::{evaluate, DualityFamily, EvalPoint};
use duality_lab::exact::{check_moran_kingman, check_sip_self_duality, exact_expectation, limiting_oracle, MoranTimeScale};
use duality_lab::montecarlo::{estimate_duality_side, EstimatorConfig};
use duality_lab::processes::{generator_matrix, GeneratorMatrix, ProcessSpec, State};
use duality_lab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    Numerical = 4,
    Config = 5,
    BufferTooSmall = 6,
    Panic = 7,
    Other = 8,
}

/// Time scale of the two-type Moran chain against Kingman's coalescent.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlMoranScale {
    /// Jump rate `k(N-k)`, dual to Kingman at rate `n(n-1)`.
    Ladder = 0,
    /// Jump rate `(N²/2)(k/N)(1-k/N)`, dual to Kingman at half speed.
    Printed = 1,
}

/// A generator matrix over an enumerated state space.
pub struct DlGenerator {
    inner: GeneratorMatrix,
}

/// Mean and standard error of a Monte Carlo estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DlEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> DlStatus {
    match e {
        Error::InvalidParameter(_) | Error::DimensionMismatch { .. } | Error::StateSpaceTooLarge(..) => {
            DlStatus::InvalidParameter
        }
        Error::Domain(_) => DlStatus::Domain,
        Error::Numerical(_) => DlStatus::Numerical,
        Error::Config(_) => DlStatus::Config,
        _ => DlStatus::Other,
    }
}

/// Runs `f`, records any error or panic and converts it to a status.
fn guard(f: impl FnOnce() -> Result<(), (DlStatus, String)>) -> DlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DlStatus::Ok
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
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            DlStatus::Panic
        }
    }
}

fn lib(e: Error) -> (DlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (DlStatus, String) {
    (DlStatus::NullPointer, format!("{name} is null"))
}

/// Writes `value` through `out`, failing on a null pointer.
///
/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn write<T>(out: *mut T, name: &str, value: T) -> Result<(), (DlStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// # Safety
/// `p` must be null or point to `len` readable values.
unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], (DlStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or null if it succeeded.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn dl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn new_generator(spec: ProcessSpec, out: *mut *mut DlGenerator) -> DlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = generator_matrix(&spec).map_err(lib)?;
        // SAFETY: checked non-null above; the caller provides a writable slot.
        unsafe { out.write(Box::into_raw(Box::new(DlGenerator { inner }))) };
        Ok(())
    })
}

/// Generator of the inclusion process SIP(m) with `n` particles on `d` sites.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_generator_new_sip(d: usize, m: f64, n: u64, out: *mut *mut DlGenerator) -> DlStatus {
    new_generator(ProcessSpec::Sip { d, m, n }, out)
}

/// Generator of the `d`-type Moran model with `n` individuals and mutation rate `theta`.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_generator_new_moran(n: u64, d: usize, theta: f64, out: *mut *mut DlGenerator) -> DlStatus {
    new_generator(ProcessSpec::MoranMultitype { n, d, theta }, out)
}

/// Generator of Kingman's block-counting chain with mutation `theta` and
/// selection `sigma`, truncated at `n_max`.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_generator_new_kingman(
    theta: f64,
    sigma: f64,
    n_max: u64,
    out: *mut *mut DlGenerator,
) -> DlStatus {
    new_generator(ProcessSpec::KingmanBlock { theta, sigma, n_max }, out)
}

/// Releases a generator. Null is ignored.
///
/// # Safety
/// `g` must be null or a handle from a `dl_generator_new_*` function not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dl_generator_free(g: *mut DlGenerator) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of states, and the length of each state vector.
///
/// # Safety
/// `g` must be a live handle; `states` and `dim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_generator_shape(g: *const DlGenerator, states: *mut usize, dim: *mut usize) -> DlStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("g"))?;
        write(states, "states", g.inner.len())?;
        write(dim, "dim", g.inner.index.states().first().map_or(0, Vec::len))
    })
}

/// Copies the rate matrix, row-major, into `buf` of `len` doubles
/// (`len` must be at least `states²`).
///
/// # Safety
/// `g` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn dl_generator_rates(g: *const DlGenerator, buf: *mut f64, len: usize) -> DlStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("g"))?;
        let n = g.inner.len();
        if len < n * n {
            return Err((DlStatus::BufferTooSmall, format!("need {} doubles, got {len}", n * n)));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        for i in 0..n {
            for j in 0..n {
                buf.add(i * n + j).write(g.inner.q[(i, j)]);
            }
        }
        Ok(())
    })
}

/// Copies state `i` into `buf` of `len` entries (at least the state dimension).
///
/// # Safety
/// `g` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn dl_generator_state(g: *const DlGenerator, i: usize, buf: *mut u64, len: usize) -> DlStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("g"))?;
        if i >= g.inner.len() {
            return Err((DlStatus::InvalidParameter, format!("state {i} out of range 0..{}", g.inner.len())));
        }
        let s = g.inner.index.state(i);
        if len < s.len() {
            return Err((DlStatus::BufferTooSmall, format!("need {} entries, got {len}", s.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        for (k, &v) in s.iter().enumerate() {
            buf.add(k).write(v);
        }
        Ok(())
    })
}

/// `E_{k0}[f(X_t)]` where `f` is given by its values on the states, in index order.
///
/// # Safety
/// `g` must be a live handle, `f` hold `f_len` doubles, `k0` hold `k0_len`
/// entries, and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_generator_expectation(
    g: *const DlGenerator,
    f: *const f64,
    f_len: usize,
    k0: *const u64,
    k0_len: usize,
    t: f64,
    out: *mut f64,
) -> DlStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("g"))?;
        let f = slice(f, f_len, "f")?;
        let k0 = slice(k0, k0_len, "k0")?;
        let v = exact_expectation(&g.inner, f, k0, t).map_err(lib)?.value;
        write(out, "out", v)
    })
}

/// Largest entry of `K·D_N - D_N·K̂ᵀ` for the two-type Moran chain with `n`
/// individuals against Kingman's coalescent.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_check_moran_kingman(n: u64, scale: DlMoranScale, out: *mut f64) -> DlStatus {
    guard(|| {
        let scale = match scale {
            DlMoranScale::Ladder => MoranTimeScale::Ladder,
            DlMoranScale::Printed => MoranTimeScale::Printed,
        };
        let r = check_moran_kingman(n, scale).map_err(lib)?;
        write(out, "out", r.max_abs_residual)
    })
}

/// Largest entry of the SIP(m) self-duality residual on `d` sites with `n` particles.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_check_sip_self_duality(d: usize, m: f64, n: u64, out: *mut f64) -> DlStatus {
    guard(|| {
        let r = check_sip_self_duality(d, m, n).map_err(lib)?;
        write(out, "out", r.max_abs_residual)
    })
}

/// Neutral Wright-Fisher moment through SIP(0): `E_ξ[D(ξ_t, x) 1{all sites occupied}]`
/// for a start `xi` occupying every one of the `d` sites.
///
/// # Safety
/// `x` and `xi` must hold `d` entries each and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_limiting_moment(x: *const f64, xi: *const u64, d: usize, t: f64, out: *mut f64) -> DlStatus {
    guard(|| {
        let x = slice(x, d, "x")?;
        let xi = slice(xi, d, "xi")?;
        let v = limiting_oracle(x, xi, t).map_err(lib)?;
        write(out, "out", v)
    })
}

/// Product-gamma duality function `D(x, k)` for `d` types with mutation rate `theta`.
///
/// # Safety
/// `x` and `k` must hold `d` entries each and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_product_gamma(
    theta: f64,
    d: usize,
    x: *const f64,
    k: *const u64,
    out: *mut f64,
) -> DlStatus {
    guard(|| {
        let x = slice(x, d, "x")?;
        let k = slice(k, d, "k")?;
        let v = evaluate(&DualityFamily::ProductGamma { theta, d }, &EvalPoint::mixed(x.to_vec(), k.to_vec()))
            .map_err(lib)?;
        write(out, "out", v)
    })
}

/// Monte Carlo estimate of `E_x[D(X_t, k)]` for the `d`-type Wright-Fisher
/// diffusion with mutation `theta` and the product-gamma duality function.
///
/// # Safety
/// `x` and `k` must hold `d` entries each and `out` be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dl_estimate_wright_fisher(
    theta: f64,
    d: usize,
    x: *const f64,
    k: *const u64,
    t: f64,
    dt: f64,
    n_paths: u64,
    seed: u64,
    out: *mut DlEstimate,
) -> DlStatus {
    guard(|| {
        let x = slice(x, d, "x")?;
        let k = slice(k, d, "k")?;
        let cfg = EstimatorConfig { n_paths, seed, dt, t, antithetic: false };
        let e = estimate_duality_side(
            &ProcessSpec::WfMultitype { d, theta },
            &DualityFamily::ProductGamma { theta, d },
            &State::Continuous(x.to_vec()),
            &State::Discrete(k.to_vec()),
            &cfg,
        )
        .map_err(lib)?;
        write(out, "out", DlEstimate { mean: e.mean, se: e.se, n: e.n })
    })
}

/// Runs a `duality-lab` command with an optional JSON config file (null for
/// defaults) and output directory (null for the config's `out`). Writes the
/// command's exit status (0 pass, 1 failed check, 2 rejected config) to
/// `exit_status`; the return value reports only failures of the call itself.
///
/// # Safety
/// `command` must be a NUL-terminated string; `config_path` and `out_dir` null
/// or NUL-terminated; `exit_status` writable.
#[no_mangle]
pub unsafe extern "C" fn dl_run_command(
    command: *const c_char,
    config_path: *const c_char,
    out_dir: *const c_char,
    exit_status: *mut i32,
) -> DlStatus {
    guard(|| {
        let text = |p: *const c_char, name: &str| -> Result<Option<String>, (DlStatus, String)> {
            if p.is_null() {
                return Ok(None);
            }
            CStr::from_ptr(p)
                .to_str()
                .map(|s| Some(s.to_string()))
                .map_err(|_| (DlStatus::InvalidParameter, format!("{name} is not UTF-8")))
        };
        let command = text(command, "command")?.ok_or_else(|| null("command"))?;
        let mut argv = vec!["duality-lab".to_string(), command];
        if let Some(c) = text(config_path, "config_path")? {
            argv.extend(["--config".into(), c]);
        }
        if let Some(o) = text(out_dir, "out_dir")? {
            argv.extend(["--out".into(), o]);
        }
        write(exit_status, "exit_status", duality_lab::cli::main_with(argv))
    })
}
