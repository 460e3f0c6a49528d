//! C ABI over `bec-teleport`.
//!
//! Every fallible call returns a [`BtStatus`]; on failure the message is kept
//! per thread and can be fetched with [`bt_last_error_message`]. Handles are
//! opaque and must be released with their `_free` function. Strings returned
//! by the library are released with [`bt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bec_teleport::channel::{channel_entanglement, generate_channel};
use bec_teleport::corrections::{p_even_analytic, total_efficiency, AuxiliaryKind, AuxiliaryPrep};
use bec_teleport::dynamics::KerrParams;
use bec_teleport::fock::{fidelity, CoherentSpec, FockCutoff, StateVector};
use bec_teleport::lattice::{bands, potential_at_phase, LatticeParams};
use bec_teleport::protocol::{run_protocol, ProtocolConfig};
use bec_teleport::{Error, ErrorKind};
use num_complex::Complex64;

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Precondition = 4,
    Numeric = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque pure state in a truncated Fock basis.
pub struct BtState {
    inner: StateVector,
}

/// Opaque protocol configuration.
pub struct BtProtocol {
    config: ProtocolConfig,
}

/// Aggregate results of a protocol run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BtSummary {
    pub trials: u64,
    pub success_rate: f64,
    pub success_stderr: f64,
    /// NaN when no trial was corrected.
    pub mean_fidelity: f64,
    pub mean_fidelity_all: f64,
    pub expected_success_rate: f64,
    pub branch_histogram: [u64; 4],
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BtStatus {
    match e.kind() {
        ErrorKind::Config => BtStatus::Config,
        ErrorKind::Precondition => BtStatus::Precondition,
        ErrorKind::Numeric => BtStatus::Numeric,
        ErrorKind::Io => BtStatus::Io,
    }
}

struct Fail(BtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(BtStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any failure and converts panics to [`BtStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BtStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside bec-teleport".into());
            BtStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn state_ref<'a>(s: *const BtState) -> Result<&'a StateVector, Fail> {
    s.as_ref().map(|s| &s.inner).ok_or_else(|| null("state"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. Free with [`bt_string_free`].
#[no_mangle]
pub extern "C" fn bt_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Collides `|alpha>|beta>` for `t = pi/(2 kappa)` with per-mode cutoff `n_max`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bt_channel_generate(
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    e0_over_hbar: f64,
    kappa: f64,
    n_max: usize,
    out: *mut *mut BtState,
) -> BtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let state = generate_channel(
            CoherentSpec::new(Complex64::new(alpha_re, alpha_im)),
            CoherentSpec::new(Complex64::new(beta_re, beta_im)),
            KerrParams::new(e0_over_hbar, kappa)?,
            FockCutoff::new(n_max)?,
        )?;
        write(out, Box::into_raw(Box::new(BtState { inner: state })), "out")
    })
}

/// # Safety
/// `state` must come from this library and not have been freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn bt_state_free(state: *mut BtState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bt_state_shape(state: *const BtState, modes: *mut usize, n_max: *mut usize, dim: *mut usize) -> BtStatus {
    guard(|| {
        let s = state_ref(state)?;
        write(modes, s.modes(), "modes")?;
        write(n_max, s.cutoff().n_max(), "n_max")?;
        write(dim, s.dim(), "dim")
    })
}

/// Copies amplitudes as interleaved `(re, im)` pairs; `len` counts doubles
/// and must be at least `2 * dim`.
///
/// # Safety
/// `state` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bt_state_amplitudes(state: *const BtState, buf: *mut f64, len: usize) -> BtStatus {
    guard(|| {
        let s = state_ref(state)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let need = 2 * s.dim();
        if len < need {
            return Err(Fail(BtStatus::BufferTooSmall, format!("need {need} doubles, got {len}")));
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (k, a) in s.amplitudes().iter().enumerate() {
            out[2 * k] = a.re;
            out[2 * k + 1] = a.im;
        }
        Ok(())
    })
}

/// # Safety
/// Both handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bt_state_fidelity(a: *const BtState, b: *const BtState, out: *mut f64) -> BtStatus {
    guard(|| write(out, fidelity(state_ref(a)?, state_ref(b)?)?, "out"))
}

/// Entropy in bits of the first mode of a two-mode state.
///
/// # Safety
/// `state` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bt_state_entanglement(state: *const BtState, out: *mut f64) -> BtStatus {
    guard(|| write(out, channel_entanglement(state_ref(state)?)?, "out"))
}

/// JSON form `{"modes", "n_max", "amplitudes"}`. Free with [`bt_string_free`].
///
/// # Safety
/// `state` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bt_state_to_json(state: *const BtState, out: *mut *mut c_char) -> BtStatus {
    guard(|| {
        let json = state_ref(state)?.to_json()?;
        write(out, into_c_string(json), "out")
    })
}

/// Protocol configuration from JSON; missing keys take their defaults.
///
/// # Safety
/// `json` must be NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bt_protocol_from_json(json: *const c_char, out: *mut *mut BtProtocol) -> BtStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| Fail(BtStatus::InvalidUtf8, e.to_string()))?;
        let config: ProtocolConfig = serde_json::from_str(text).map_err(|e| Fail(BtStatus::Config, e.to_string()))?;
        config.validate()?;
        write(out, Box::into_raw(Box::new(BtProtocol { config })), "out")
    })
}

/// # Safety
/// `protocol` must come from this library and not have been freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn bt_protocol_free(protocol: *mut BtProtocol) {
    if !protocol.is_null() {
        drop(Box::from_raw(protocol));
    }
}

/// Runs all configured trials.
///
/// # Safety
/// `protocol` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bt_protocol_run(protocol: *const BtProtocol, out: *mut BtSummary) -> BtStatus {
    guard(|| {
        let p = protocol.as_ref().ok_or_else(|| null("protocol"))?;
        let (_, s) = run_protocol(&p.config)?;
        let summary = BtSummary {
            trials: s.trials as u64,
            success_rate: s.success_rate,
            success_stderr: s.success_stderr,
            mean_fidelity: s.mean_fidelity.unwrap_or(f64::NAN),
            mean_fidelity_all: s.mean_fidelity_all,
            expected_success_rate: s.expected_success_rate,
            branch_histogram: s.branch_histogram.map(|n| n as u64),
        };
        write(out, summary, "out")
    })
}

/// Even-count probability; `kind` is `"number"`, `"coherent"` or `"squeezed_vacuum"`.
///
/// # Safety
/// `kind` must be NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bt_p_even(kind: *const c_char, parameter: f64, out: *mut f64) -> BtStatus {
    guard(|| {
        if kind.is_null() {
            return Err(null("kind"));
        }
        let kind = CStr::from_ptr(kind).to_str().map_err(|e| Fail(BtStatus::InvalidUtf8, e.to_string()))?;
        let kind: AuxiliaryKind = kind.parse()?;
        write(out, p_even_analytic(AuxiliaryPrep::new(kind, parameter)?), "out")
    })
}

/// `(1 + p_even + p_d + p_even p_d) / 4`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bt_total_efficiency(p_even: f64, p_d: f64, out: *mut f64) -> BtStatus {
    guard(|| write(out, total_efficiency(p_even, p_d)?.p_total, "out"))
}

/// Lower and upper adiabatic potentials at `z' = 2 k_L z`.
///
/// # Safety
/// `lower` and `upper` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bt_lattice_bands(
    u1: f64,
    theta: f64,
    k_l: f64,
    b_parallel: f64,
    b_perp: f64,
    gyro: f64,
    z_prime: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> BtStatus {
    guard(|| {
        let p = LatticeParams::new(u1, theta, k_l, b_parallel, b_perp, gyro)?;
        let (lo, hi) = bands(&potential_at_phase(z_prime, &p));
        write(lower, lo, "lower")?;
        write(upper, hi, "upper")
    })
}
