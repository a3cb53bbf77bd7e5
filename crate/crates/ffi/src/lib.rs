//! C ABI for the interferometer simulation library: opaque circuit handles,
//! status codes, and flat buffers. The generated header lives in
//! `include/mzisim.h`.
//!
//! Conventions:
//! * every function that can fail returns [`MzisimStatus`]; outputs are
//!   written through pointers only on `MZISIM_STATUS_OK`;
//! * circuit handles come from the `mzisim_circuit_*` constructors and must
//!   be released with [`mzisim_circuit_free`];
//! * strings returned by the library must be released with
//!   [`mzisim_string_free`];
//! * outcome index `i` of a circuit with `n` paths means path `i % n`,
//!   input polarization for `i < n`, orthogonal polarization otherwise.

use mzisim::builders::{ChainedNmziSpec, CmziSpec, Coefficients, NmziPosition};
use mzisim::circuit::{Circuit, PolarizedState};
use mzisim::info::{OutcomeSet, PriorSpec};
use std::ffi::{c_char, CStr, CString};

/// Status codes returned by fallible entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MzisimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DomainError = 3,
    UnsupportedConfiguration = 4,
    ComputeError = 5,
}

/// Opaque circuit handle.
pub struct MzisimCircuit {
    circuit: Circuit,
}

fn handle(circuit: Circuit) -> *mut MzisimCircuit {
    Box::into_raw(Box::new(MzisimCircuit { circuit }))
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn mzisim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Free-space polarization rotator (1 path).
#[no_mangle]
pub extern "C" fn mzisim_circuit_free_rotator() -> *mut MzisimCircuit {
    handle(mzisim::free_rotator())
}

/// Nested MZI with first-splitter reflection `r1`, last-splitter reflection
/// `r4`, and the tagging rotator at `position` 0..=5 (0 = none).
/// Returns null on invalid arguments.
#[no_mangle]
pub extern "C" fn mzisim_circuit_nmzi(r1: f64, r4: f64, position: u32) -> *mut MzisimCircuit {
    if !(0.0..=1.0).contains(&r1) || !(0.0..=1.0).contains(&r4) {
        return std::ptr::null_mut();
    }
    match NmziPosition::from_index(position as usize) {
        Some(pos) => handle(mzisim::nmzi(Coefficients::from_r(r1), Coefficients::from_r(r4), pos)),
        None => std::ptr::null_mut(),
    }
}

/// Post-selected communication device (`r4 = t1`, `t4 = r1`), optionally
/// with the receiver's absorbing object inserted.
#[no_mangle]
pub extern "C" fn mzisim_circuit_nmzi_comm(r1: f64, blocked: bool) -> *mut MzisimCircuit {
    if !(0.0..=1.0).contains(&r1) {
        return std::ptr::null_mut();
    }
    handle(mzisim::nmzi_comm(Coefficients::from_r(r1), blocked))
}

/// Chained nested MZI with `n` outer and `m` inner splitters.
#[no_mangle]
pub extern "C" fn mzisim_circuit_chained_nmzi(
    n: u32,
    m: u32,
    blocked: bool,
    tagged: bool,
) -> *mut MzisimCircuit {
    if n == 0 || m == 0 {
        return std::ptr::null_mut();
    }
    let mut spec = ChainedNmziSpec::open(n as usize, m as usize);
    spec.bob_blocked = blocked;
    spec.tag_inner = tagged && !blocked;
    handle(mzisim::chained_nmzi(spec))
}

/// Chained MZI with `n` splitters.
#[no_mangle]
pub extern "C" fn mzisim_circuit_cmzi(n: u32, blocked: bool, tagged: bool) -> *mut MzisimCircuit {
    if n == 0 {
        return std::ptr::null_mut();
    }
    let mut spec = CmziSpec::open(n as usize);
    spec.bob_blocked = blocked;
    spec.tag_bob = tagged && !blocked;
    handle(mzisim::cmzi(spec))
}

/// Rebuild a circuit from its JSON document.
///
/// # Safety
/// `json` must be a valid NUL-terminated C string.
#[no_mangle]
pub unsafe extern "C" fn mzisim_circuit_from_json(json: *const c_char) -> *mut MzisimCircuit {
    if json.is_null() {
        return std::ptr::null_mut();
    }
    let Ok(text) = CStr::from_ptr(json).to_str() else {
        return std::ptr::null_mut();
    };
    match Circuit::from_json(text) {
        Ok(c) => handle(c),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Serialize a circuit to JSON; free the result with `mzisim_string_free`.
///
/// # Safety
/// `circuit` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mzisim_circuit_to_json(circuit: *const MzisimCircuit) -> *mut c_char {
    if circuit.is_null() {
        return std::ptr::null_mut();
    }
    let json = (*circuit).circuit.to_json();
    CString::new(json).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Number of spatial paths (outcome buffers have twice this length).
///
/// # Safety
/// `circuit` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mzisim_circuit_n_paths(circuit: *const MzisimCircuit) -> usize {
    if circuit.is_null() {
        return 0;
    }
    (*circuit).circuit.n_paths()
}

/// Release a circuit handle (null is a no-op).
///
/// # Safety
/// `circuit` must be a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn mzisim_circuit_free(circuit: *mut MzisimCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Release a string returned by this library (null is a no-op).
///
/// # Safety
/// `s` must originate from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mzisim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn input_for(circuit: &Circuit, input_path: usize) -> Result<PolarizedState, MzisimStatus> {
    PolarizedState::input_h(circuit.n_paths(), input_path).map_err(|_| MzisimStatus::InvalidArgument)
}

/// Detection probabilities of a single photon injected in `input_path` with
/// the input polarization. `probs` must hold `2 * n_paths` doubles; the
/// absorbed probability is written to `absorbed`.
///
/// # Safety
/// `circuit` must be a live handle; `probs` must point to writable memory of
/// length `2 * mzisim_circuit_n_paths(circuit)`; `absorbed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mzisim_evolve_probabilities(
    circuit: *const MzisimCircuit,
    input_path: usize,
    theta: f64,
    probs: *mut f64,
    absorbed: *mut f64,
) -> MzisimStatus {
    if circuit.is_null() || probs.is_null() || absorbed.is_null() {
        return MzisimStatus::NullPointer;
    }
    let c = &(*circuit).circuit;
    let input = match input_for(c, input_path) {
        Ok(v) => v,
        Err(s) => return s,
    };
    match c.evolve(&input, theta) {
        Ok(out) => {
            for (i, a) in out.amplitudes().iter().enumerate() {
                *probs.add(i) = a.norm_sqr();
            }
            *absorbed = out.absorbed();
            MzisimStatus::Ok
        }
        Err(_) => MzisimStatus::DomainError,
    }
}

/// Classical Fisher information over all outcomes.
///
/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mzisim_fisher(
    circuit: *const MzisimCircuit,
    input_path: usize,
    theta: f64,
    out: *mut f64,
) -> MzisimStatus {
    mzisim_fisher_restricted(circuit, input_path, theta, std::ptr::null(), 0, out)
}

/// Fisher information restricted to `outcome_count` outcome indices (with
/// the negative-measurement term); a null/empty set means all outcomes.
///
/// # Safety
/// `circuit` must be a live handle; `outcomes` must point to
/// `outcome_count` readable indices when non-null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mzisim_fisher_restricted(
    circuit: *const MzisimCircuit,
    input_path: usize,
    theta: f64,
    outcomes: *const usize,
    outcome_count: usize,
    out: *mut f64,
) -> MzisimStatus {
    if circuit.is_null() || out.is_null() || (outcomes.is_null() && outcome_count > 0) {
        return MzisimStatus::NullPointer;
    }
    let c = &(*circuit).circuit;
    let input = match input_for(c, input_path) {
        Ok(v) => v,
        Err(s) => return s,
    };
    let set = if outcome_count == 0 {
        OutcomeSet::All
    } else {
        OutcomeSet::Restricted(std::slice::from_raw_parts(outcomes, outcome_count).to_vec())
    };
    match mzisim::fisher(c, &input, theta, &set) {
        Ok(r) => {
            *out = r.value;
            MzisimStatus::Ok
        }
        Err(mzisim::InfoError::ThetaAtBoundary(_)) => MzisimStatus::DomainError,
        Err(mzisim::InfoError::OutcomeOutOfRange { .. }) => MzisimStatus::InvalidArgument,
        Err(_) => MzisimStatus::ComputeError,
    }
}

/// Shannon mutual information under a uniform prior; `diagonal_prior`
/// selects the signed-diagonal integration variable instead of theta.
///
/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mzisim_shannon_mi(
    circuit: *const MzisimCircuit,
    input_path: usize,
    nodes: usize,
    diagonal_prior: bool,
    out: *mut f64,
) -> MzisimStatus {
    if circuit.is_null() || out.is_null() {
        return MzisimStatus::NullPointer;
    }
    let c = &(*circuit).circuit;
    let input = match input_for(c, input_path) {
        Ok(v) => v,
        Err(s) => return s,
    };
    let prior = if diagonal_prior {
        PriorSpec::uniform_diagonal()
    } else {
        PriorSpec::uniform_theta()
    };
    match mzisim::shannon_mi(c, &input, &prior, nodes) {
        Ok(r) => {
            *out = r.value;
            MzisimStatus::Ok
        }
        Err(_) => MzisimStatus::ComputeError,
    }
}

/// Free-space Fisher benchmark `4 / (1 - theta^2)`.
#[no_mangle]
pub extern "C" fn mzisim_fisher_free(theta: f64) -> f64 {
    mzisim::fisher_free(theta)
}

/// Closed-form inner-arm mutual information as a function of `t1`.
#[no_mangle]
pub extern "C" fn mzisim_shannon_closed_inner(t1: f64) -> f64 {
    mzisim::shannon_closed_inner(t1)
}

/// Second-order model of the inner-arm mutual information.
#[no_mangle]
pub extern "C" fn mzisim_shannon_taylor(t1: f64) -> f64 {
    mzisim::shannon_taylor(t1)
}

/// [6/4] Pade model of the inner-arm mutual information.
#[no_mangle]
pub extern "C" fn mzisim_shannon_pade(t1: f64) -> f64 {
    mzisim::shannon_pade(t1)
}

/// Inverse standard normal CDF.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mzisim_inverse_normal_cdf(p: f64, out: *mut f64) -> MzisimStatus {
    if out.is_null() {
        return MzisimStatus::NullPointer;
    }
    match mzisim::inverse_normal_cdf(p) {
        Ok(v) => {
            *out = v;
            MzisimStatus::Ok
        }
        Err(_) => MzisimStatus::InvalidArgument,
    }
}

/// Detection probabilities of the chained nested MZI at theta = 0.
///
/// # Safety
/// `p_d1`, `p_d2` and `absorbed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mzisim_chained_detection_probs(
    n: u32,
    m: u32,
    blocked: bool,
    p_d1: *mut f64,
    p_d2: *mut f64,
    absorbed: *mut f64,
) -> MzisimStatus {
    if p_d1.is_null() || p_d2.is_null() || absorbed.is_null() {
        return MzisimStatus::NullPointer;
    }
    if n == 0 || m == 0 {
        return MzisimStatus::InvalidArgument;
    }
    match mzisim::chained_detection_probs(n as usize, m as usize, blocked) {
        Ok((a, b, c)) => {
            *p_d1 = a;
            *p_d2 = b;
            *absorbed = c;
            MzisimStatus::Ok
        }
        Err(_) => MzisimStatus::ComputeError,
    }
}

/// Full protocol report as a JSON string (see the library documentation for
/// the schema); free with `mzisim_string_free`. Returns null on invalid
/// arguments.
#[no_mangle]
pub extern "C" fn mzisim_protocol_report_json(epsilon: f64, t1: f64, theta_w: f64) -> *mut c_char {
    match mzisim::protocol_violation(epsilon, t1, theta_w) {
        Ok(rep) => {
            let mut v = serde_json::to_value(&rep).unwrap();
            v["schema_version"] = mzisim::SCHEMA_VERSION.into();
            CString::new(serde_json::to_string(&v).unwrap())
                .map_or(std::ptr::null_mut(), CString::into_raw)
        }
        Err(_) => std::ptr::null_mut(),
    }
}
