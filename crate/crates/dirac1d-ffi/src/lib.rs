//! C ABI for the dirac1d laboratory.
//!
//! Configurations are opaque handles created from TOML text or a file and
//! released with `dirac1d_config_free`.  `dirac1d_dispatch` runs the
//! experiment the configuration describes and writes the same artifacts
//! as the CLI; its status mirrors the CLI exit codes (0 pass, 2 verdict
//! failure, 3 configuration error, 4 numerical abort).  Error details for
//! the most recent failing call on the current thread are available via
//! `dirac1d_last_error`.
//!
//! The C header is generated into `include/dirac1d.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use dirac1d::config::RunConfig;
use dirac1d::model::{ModelParams, Preset};
use dirac1d::report::dispatch;

/// Status codes shared by every entry point.  `OK` and the error classes
/// up to `NUMERICAL_ABORT` mirror the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dirac1dStatus {
    Ok = 0,
    VerdictFailure = 2,
    ConfigError = 3,
    NumericalAbort = 4,
    NullArgument = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

/// Derived model constants in the order (c, delta, c_star, k).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Dirac1dConstants {
    pub c: f64,
    pub delta: f64,
    pub c_star: f64,
    pub k: f64,
}

/// Opaque run configuration handle.
pub struct Dirac1dConfig {
    inner: RunConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_last_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &dirac1d::Error) -> Dirac1dStatus {
    match err.exit_code() {
        3 => Dirac1dStatus::ConfigError,
        _ => Dirac1dStatus::NumericalAbort,
    }
}

fn guard<F: FnOnce() -> Dirac1dStatus>(f: F) -> Dirac1dStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("panic across the FFI boundary");
            Dirac1dStatus::Panic
        }
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, Dirac1dStatus> {
    if ptr.is_null() {
        set_last_error("null pointer argument");
        return Err(Dirac1dStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("argument is not valid UTF-8");
        Dirac1dStatus::InvalidUtf8
    })
}

/// Message describing the most recent error on this thread.  The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dirac1d_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dirac1d_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parse a TOML configuration from text into a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer; the
/// returned handle must be released with `dirac1d_config_free`.
#[no_mangle]
pub unsafe extern "C" fn dirac1d_config_parse(
    text: *const c_char,
    out: *mut *mut Dirac1dConfig,
) -> Dirac1dStatus {
    guard(|| {
        if out.is_null() {
            set_last_error("null output pointer");
            return Dirac1dStatus::NullArgument;
        }
        let text = match cstr_arg(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunConfig::parse(text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(Dirac1dConfig { inner: cfg }));
                Dirac1dStatus::Ok
            }
            Err(e) => {
                set_last_error(&e.to_string());
                Dirac1dStatus::ConfigError
            }
        }
    })
}

/// Parse a TOML configuration from a file path.
///
/// # Safety
/// Same contract as `dirac1d_config_parse`.
#[no_mangle]
pub unsafe extern "C" fn dirac1d_config_parse_file(
    path: *const c_char,
    out: *mut *mut Dirac1dConfig,
) -> Dirac1dStatus {
    guard(|| {
        if out.is_null() {
            set_last_error("null output pointer");
            return Dirac1dStatus::NullArgument;
        }
        let path = match cstr_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                set_last_error(&format!("cannot read {path}: {e}"));
                return Dirac1dStatus::ConfigError;
            }
        };
        match RunConfig::parse(&text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(Dirac1dConfig { inner: cfg }));
                Dirac1dStatus::Ok
            }
            Err(e) => {
                set_last_error(&e.to_string());
                Dirac1dStatus::ConfigError
            }
        }
    })
}

/// Release a configuration handle.  Null is accepted and ignored.
///
/// # Safety
/// `cfg` must be a handle from one of the parse functions, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dirac1d_config_free(cfg: *mut Dirac1dConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Run the experiment the configuration describes, writing artifacts
/// (summary.json and the diagnostic CSVs) into `out_dir`.  When
/// `has_seed` is true, `seed` overrides the configuration's seed.
///
/// # Safety
/// `cfg` must be a live handle and `out_dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn dirac1d_dispatch(
    cfg: *const Dirac1dConfig,
    out_dir: *const c_char,
    seed: u64,
    has_seed: bool,
) -> Dirac1dStatus {
    dirac1d_dispatch_json(cfg, out_dir, seed, has_seed, std::ptr::null_mut())
}

/// Like `dirac1d_dispatch`, additionally returning the JSON summary as a
/// newly allocated string in `json_out` (free with `dirac1d_string_free`;
/// pass null to skip).
///
/// # Safety
/// Same contract as `dirac1d_dispatch`; `json_out`, when non-null, must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dirac1d_dispatch_json(
    cfg: *const Dirac1dConfig,
    out_dir: *const c_char,
    seed: u64,
    has_seed: bool,
    json_out: *mut *mut c_char,
) -> Dirac1dStatus {
    guard(|| {
        if cfg.is_null() {
            set_last_error("null configuration handle");
            return Dirac1dStatus::NullArgument;
        }
        let out_dir = match cstr_arg(out_dir) {
            Ok(d) => d,
            Err(s) => return s,
        };
        let config = &(*cfg).inner;
        let seed_override = if has_seed { Some(seed) } else { None };
        match dispatch(config, Path::new(out_dir), seed_override, None) {
            Ok(outcome) => {
                if !json_out.is_null() {
                    let json = serde_json_string(&outcome.summary);
                    *json_out = CString::new(json)
                        .unwrap_or_else(|_| CString::new("{}").unwrap())
                        .into_raw();
                }
                if outcome.exit_code == 0 {
                    Dirac1dStatus::Ok
                } else {
                    set_last_error("one or more verdicts failed; see summary.json");
                    Dirac1dStatus::VerdictFailure
                }
            }
            Err(e) => {
                set_last_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

fn serde_json_string(summary: &dirac1d::Summary) -> String {
    serde_json::to_string_pretty(summary).unwrap_or_else(|_| "{}".into())
}

/// Free a string returned by `dirac1d_dispatch_json`.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn dirac1d_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Derive the model constants (c, delta, c_star, K) for a preset.
/// `preset` is "thirring" or "gross_neveu"; `samples` is the sampling
/// budget (1e6 matches the CLI).
///
/// # Safety
/// `preset` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dirac1d_model_constants(
    preset: *const c_char,
    alpha: f64,
    mass: f64,
    samples: usize,
    seed: u64,
    out: *mut Dirac1dConstants,
) -> Dirac1dStatus {
    guard(|| {
        if out.is_null() {
            set_last_error("null output pointer");
            return Dirac1dStatus::NullArgument;
        }
        let name = match cstr_arg(preset) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let tag = match name {
            "thirring" => Preset::Thirring,
            "gross_neveu" => Preset::GrossNeveu,
            _ => {
                set_last_error(&format!("unknown preset `{name}`"));
                return Dirac1dStatus::ConfigError;
            }
        };
        let params = match ModelParams::preset(tag, alpha, mass) {
            Ok(p) => p,
            Err(e) => {
                set_last_error(&e.to_string());
                return Dirac1dStatus::ConfigError;
            }
        };
        match params.derive_constants(samples, seed) {
            Ok(k) => {
                *out = Dirac1dConstants { c: k.c, delta: k.delta, c_star: k.c_star, k: k.k };
                Dirac1dStatus::Ok
            }
            Err(e) => {
                set_last_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}
