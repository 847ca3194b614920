//! C ABI over `binimpute`.
//!
//! Every fallible entry point returns a [`BmStatus`]; on failure the message
//! is available from [`bm_last_error_message`] on the same thread. Results
//! are written through caller-owned out-pointers. Configuration lives in an
//! opaque [`BmConfig`] handle created by [`bm_config_new`] and released by
//! [`bm_config_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use binimpute::methods::MethodOptions;
use binimpute::simulation::{run_scenario, MissingMechanism, Scenario};
use binimpute::{Error, Estimator, MethodId, PriorSpec, RunConfig, TrialData};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NoObservedData = 4,
    Undefined = 5,
    Internal = 6,
}

/// Interval estimate for one method on one dataset.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BmInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub length: f64,
    /// Nonzero when the method fell back to the trivial interval [0, 1].
    pub fallback: i32,
}

/// Monte Carlo summary of one method in one scenario.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BmScenarioResult {
    /// Mean interval length over replicates where the method was defined.
    pub avg_length: f64,
    /// Fraction of defined replicates whose interval contains the true rate.
    pub coverage: f64,
    pub replicates: u64,
    pub undefined_count: u64,
}

/// Opaque configuration handle.
pub struct BmConfig {
    cfg: RunConfig,
    prior: PriorSpec,
    mechanism: MissingMechanism,
    estimator: Option<Estimator>,
}

impl BmConfig {
    fn estimator(&mut self) -> Result<&Estimator, Error> {
        if self.estimator.is_none() {
            self.estimator = Some(Estimator::new(self.cfg, self.prior)?);
        }
        Ok(self.estimator.as_ref().expect("just built"))
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let parse_err = |e: &dyn std::fmt::Display| Error::Parse(format!("{key}={value:?}: {e}"));
        let mut cfg = self.cfg;
        let mut prior = self.prior;
        let mut mechanism = self.mechanism;
        match key {
            "D" => cfg.d = value.parse().map_err(|e| parse_err(&e))?,
            "DD" => cfg.dd = value.parse().map_err(|e| parse_err(&e))?,
            "M" => cfg.m = value.parse().map_err(|e| parse_err(&e))?,
            "boot" => cfg.boot = value.parse().map_err(|e| parse_err(&e))?,
            "grid_step" => cfg.grid_step = value.parse().map_err(|e| parse_err(&e))?,
            "alpha" => cfg.alpha = value.parse().map_err(|e| parse_err(&e))?,
            "seed" => cfg.seed = value.parse().map_err(|e| parse_err(&e))?,
            "inflate_between" => cfg.inflate_between = value.parse().map_err(|e| parse_err(&e))?,
            "prior" => prior = value.parse()?,
            "missing_mode" => mechanism = value.parse()?,
            _ => cfg.options = set_option(cfg.options, key, value)?,
        }
        cfg.validate()?;
        prior.validate()?;
        self.cfg = cfg;
        self.prior = prior;
        self.mechanism = mechanism;
        self.estimator = None;
        Ok(())
    }
}

fn set_option(options: MethodOptions, key: &str, value: &str) -> Result<MethodOptions, Error> {
    let mut v = serde_json::to_value(options).expect("options serialize");
    match v.get_mut(key) {
        Some(slot) => *slot = serde_json::Value::String(value.to_owned()),
        None => return Err(Error::Parse(format!("unknown configuration key {key:?}"))),
    }
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("{key}={value:?}: {e}")))
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BmStatus {
    match e {
        Error::Parse(_) | Error::Config(_) | Error::LengthMismatch(..) => BmStatus::InvalidArgument,
        Error::Domain(_) => BmStatus::Domain,
        Error::NoObservedData => BmStatus::NoObservedData,
        Error::Undefined(_) => BmStatus::Undefined,
        Error::Io(_) | Error::Csv(_) => BmStatus::Internal,
    }
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (BmStatus, String)>) -> BmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            BmStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            BmStatus::Internal
        }
    }
}

fn lift(e: Error) -> (BmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BmStatus, String) {
    (BmStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `s` must be null or point to a nul-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (BmStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(s) }.to_str().map_err(|_| (BmStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Create a configuration with default settings. Release with [`bm_config_free`].
#[no_mangle]
pub extern "C" fn bm_config_new() -> *mut BmConfig {
    Box::into_raw(Box::new(BmConfig {
        cfg: RunConfig::default(),
        prior: PriorSpec::default(),
        mechanism: MissingMechanism::default(),
        estimator: None,
    }))
}

/// Release a handle from [`bm_config_new`]. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bm_config_free(cfg: *mut BmConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Set one configuration value from its text form.
///
/// Keys: `D`, `DD`, `M`, `boot`, `grid_step`, `alpha`, `seed`,
/// `inflate_between` (`true`/`false`), `prior` (`a,b,a',b'`), `missing_mode`,
/// and the method options `cpmi_form`, `cpmi_df`, `wilson_quantile`,
/// `logit_boundary`, `logit_df`, `jackknife_imputation`,
/// `jackknife_denominator`, `beta_mi_center`, `bayes_summary`. Invalid values
/// leave the handle unchanged.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn bm_config_set(cfg: *mut BmConfig, key: *const c_char, value: *const c_char) -> BmStatus {
    guard(|| {
        let cfg = unsafe { cfg.as_mut() }.ok_or_else(|| null("config"))?;
        let key = unsafe { read_str(key, "key") }?;
        let value = unsafe { read_str(value, "value") }?;
        cfg.set(key, value).map_err(lift)
    })
}

/// Write the resolved configuration as JSON into `buf` (nul-terminated,
/// truncated to `len` bytes). Returns the full length excluding the nul, or
/// -1 if `cfg` is null.
///
/// # Safety
/// `cfg` must be a live handle; `buf` null or writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bm_config_to_json(cfg: *const BmConfig, buf: *mut c_char, len: usize) -> i64 {
    let Some(cfg) = (unsafe { cfg.as_ref() }) else {
        return -1;
    };
    let json = serde_json::json!({
        "config": cfg.cfg,
        "prior": cfg.prior,
        "missing_mode": cfg.mechanism,
    })
    .to_string();
    if !buf.is_null() && len > 0 {
        let n = json.len().min(len - 1);
        unsafe {
            ptr::copy_nonoverlapping(json.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
    }
    json.len() as i64
}

/// Estimate the success rate with one method. `method` is a method id such
/// as `"full-bayes"`; see [`bm_method_name`].
///
/// # Safety
/// `cfg` must be a live handle, `method` a nul-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bm_analyze(
    cfg: *mut BmConfig,
    method: *const c_char,
    successes: u32,
    failures: u32,
    missing: u32,
    out: *mut BmInterval,
) -> BmStatus {
    guard(|| {
        let cfg = unsafe { cfg.as_mut() }.ok_or_else(|| null("config"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let method: MethodId = unsafe { read_str(method, "method") }?.parse().map_err(lift)?;
        let data = TrialData::new(successes, failures, missing).map_err(lift)?;
        let ci = cfg.estimator().map_err(lift)?.estimate_seeded(method, &data).map_err(lift)?;
        *out = BmInterval {
            estimate: ci.estimate(),
            lower: ci.lower(),
            upper: ci.upper(),
            length: ci.length(),
            fallback: i32::from(ci.is_fallback()),
        };
        Ok(())
    })
}

/// Monte Carlo coverage and average length of one method in one scenario.
///
/// # Safety
/// `cfg` must be a live handle, `method` a nul-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bm_run_scenario(
    cfg: *mut BmConfig,
    method: *const c_char,
    true_rate: f64,
    n: u32,
    missing_rate: f64,
    replicates: u64,
    out: *mut BmScenarioResult,
) -> BmStatus {
    guard(|| {
        let cfg = unsafe { cfg.as_mut() }.ok_or_else(|| null("config"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let method: MethodId = unsafe { read_str(method, "method") }?.parse().map_err(lift)?;
        let replicates = usize::try_from(replicates).map_err(|e| (BmStatus::InvalidArgument, e.to_string()))?;
        let scenario = Scenario::new(true_rate, n, missing_rate, replicates).map_err(lift)?;
        let mechanism = cfg.mechanism;
        let r = run_scenario(&scenario, &[method], cfg.estimator().map_err(lift)?, mechanism).map_err(lift)?;
        let r = &r[0];
        *out = BmScenarioResult {
            avg_length: r.avg_length,
            coverage: r.coverage,
            replicates: r.replicates as u64,
            undefined_count: r.undefined_count as u64,
        };
        Ok(())
    })
}

fn method_names() -> &'static [CString] {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    NAMES.get_or_init(|| MethodId::ALL.iter().map(|m| CString::new(m.name()).expect("ascii name")).collect())
}

/// Number of available methods.
#[no_mangle]
pub extern "C" fn bm_method_count() -> usize {
    MethodId::ALL.len()
}

/// Id of method `index`, or null when out of range. The string is static.
#[no_mangle]
pub extern "C" fn bm_method_name(index: usize) -> *const c_char {
    method_names().get(index).map_or(ptr::null(), |s| s.as_ptr())
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn bm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version string. The string is static.
#[no_mangle]
pub extern "C" fn bm_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION.get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).expect("no nul")).as_ptr()
}
