//! C ABI for `thermoform`.
//!
//! Every entry point returns a [`ThermoStatus`] and writes results through
//! out-pointers. Systems, potentials and measures are opaque handles owned by
//! the caller and released with the matching `*_free` function. After a
//! non-zero status, `thermo_last_error` describes the failure on the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::slice;

use thermoform::config::parse_config;
use thermoform::ergopt::max_ergodic_average;
use thermoform::paths::{solve_intermediate_entropy, solve_intermediate_pressure, SolveReport};
use thermoform::potentials::{fixed_point_potential, Potential};
use thermoform::sft::{admissible_blocks, build_sft, topological_entropy, Sft};
use thermoform::transfer::{integrate, pressure, pressure_and_equilibrium, MarkovMeasure};
use thermoform::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermoStatus {
    Ok = 0,
    NullArgument = 1,
    /// A buffer is too small or an argument is out of range.
    InvalidArgument = 2,
    Validation = 3,
    /// The solver target is out of range or only reached asymptotically.
    Solver = 4,
    NoConvergence = 5,
    Panic = 6,
}

/// A subshift of finite type.
pub struct ThermoSft(Sft);

/// A locally constant potential on a fixed system.
pub struct ThermoPotential(Potential);

/// A shift-invariant Markov measure.
pub struct ThermoMeasure(MarkovMeasure);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ThermoSolveResult {
    pub t: f64,
    pub achieved: f64,
    pub residual: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub iterations: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ThermoMaximization {
    pub beta: f64,
    pub ground_entropy: f64,
    pub unique: bool,
    pub critical_edge_count: usize,
    pub cycle_length: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(ThermoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Validation => ThermoStatus::Validation,
            ErrorKind::Solver => ThermoStatus::Solver,
            ErrorKind::Convergence => ThermoStatus::NoConvergence,
        };
        Failure(status, format!("{}: {e}", e.name()))
    }
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> ThermoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            ThermoStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {message}"));
            ThermoStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .ok_or_else(|| Failure(ThermoStatus::NullArgument, format!("{name} is null")))
}

unsafe fn write<T>(ptr: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(Failure(ThermoStatus::NullArgument, format!("{name} is null")));
    }
    ptr.write(value);
    Ok(())
}

unsafe fn copy_out(values: impl ExactSizeIterator<Item = f64>, out: *mut f64, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(ThermoStatus::NullArgument, "out is null".into()));
    }
    if len < values.len() {
        return Err(Failure(
            ThermoStatus::InvalidArgument,
            format!("buffer holds {len} values, need {}", values.len()),
        ));
    }
    let buffer = slice::from_raw_parts_mut(out, len);
    for (slot, v) in buffer.iter_mut().zip(values) {
        *slot = v;
    }
    Ok(())
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn thermo_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Builds a system from a row-major `alphabet * alphabet` 0/1 matrix.
///
/// # Safety
/// `transitions` must point to `alphabet * alphabet` bytes.
#[no_mangle]
pub unsafe extern "C" fn thermo_sft_new(
    alphabet: usize,
    transitions: *const u8,
    out: *mut *mut ThermoSft,
) -> ThermoStatus {
    guard(|| {
        if transitions.is_null() {
            return Err(Failure(ThermoStatus::NullArgument, "transitions is null".into()));
        }
        let cells = alphabet
            .checked_mul(alphabet)
            .ok_or_else(|| Failure(ThermoStatus::InvalidArgument, "alphabet too large".into()))?;
        let flat = slice::from_raw_parts(transitions, cells);
        let rows: Vec<Vec<u8>> = flat.chunks(alphabet.max(1)).map(<[u8]>::to_vec).collect();
        let sft = build_sft(alphabet, &rows)?;
        write(out, "out", Box::into_raw(Box::new(ThermoSft(sft))))
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thermo_sft_full_shift(alphabet: usize, out: *mut *mut ThermoSft) -> ThermoStatus {
    guard(|| write(out, "out", Box::into_raw(Box::new(ThermoSft(Sft::full_shift(alphabet)?)))))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thermo_sft_golden_mean(out: *mut *mut ThermoSft) -> ThermoStatus {
    guard(|| write(out, "out", Box::into_raw(Box::new(ThermoSft(Sft::golden_mean())))))
}

/// # Safety
/// `sft` must come from this library and not be used afterwards. Null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn thermo_sft_free(sft: *mut ThermoSft) {
    if !sft.is_null() {
        drop(Box::from_raw(sft));
    }
}

/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_sft_alphabet_size(sft: *const ThermoSft, out: *mut usize) -> ThermoStatus {
    guard(|| write(out, "out", deref(sft, "sft")?.0.alphabet_size()))
}

/// Topological entropy in nats.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_sft_entropy(sft: *const ThermoSft, out: *mut f64) -> ThermoStatus {
    guard(|| write(out, "out", topological_entropy(&deref(sft, "sft")?.0)))
}

/// Number of admissible blocks of length `k`, which is also the number of
/// values a memory-`k` potential takes.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_sft_block_count(sft: *const ThermoSft, k: usize, out: *mut usize) -> ThermoStatus {
    guard(|| write(out, "out", admissible_blocks(&deref(sft, "sft")?.0, k)?.len()))
}

/// Potential of memory `memory` with one value per admissible block, blocks
/// in lexicographic order.
///
/// # Safety
/// `values` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn thermo_potential_new(
    sft: *const ThermoSft,
    memory: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut ThermoPotential,
) -> ThermoStatus {
    guard(|| {
        let sft = deref(sft, "sft")?;
        if values.is_null() {
            return Err(Failure(ThermoStatus::NullArgument, "values is null".into()));
        }
        let values = slice::from_raw_parts(values, len).to_vec();
        let phi = Potential::new(&sft.0, memory, values)?;
        write(out, "out", Box::into_raw(Box::new(ThermoPotential(phi))))
    })
}

/// `0` on the fixed point `p p`, `-1` on every other 2-block.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_potential_fixed_point(
    sft: *const ThermoSft,
    p: usize,
    out: *mut *mut ThermoPotential,
) -> ThermoStatus {
    guard(|| {
        let phi = fixed_point_potential(&deref(sft, "sft")?.0, p)?;
        write(out, "out", Box::into_raw(Box::new(ThermoPotential(phi))))
    })
}

/// # Safety
/// `phi` must come from this library and not be used afterwards. Null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn thermo_potential_free(phi: *mut ThermoPotential) {
    if !phi.is_null() {
        drop(Box::from_raw(phi));
    }
}

/// Pressure in nats.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_pressure(
    sft: *const ThermoSft,
    phi: *const ThermoPotential,
    out: *mut f64,
) -> ThermoStatus {
    guard(|| {
        let p = pressure(&deref(sft, "sft")?.0, &deref(phi, "phi")?.0)?;
        write(out, "out", p.value)
    })
}

/// Equilibrium state as a Markov measure. `pressure_out` may be null.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_equilibrium(
    sft: *const ThermoSft,
    phi: *const ThermoPotential,
    pressure_out: *mut f64,
    out: *mut *mut ThermoMeasure,
) -> ThermoStatus {
    guard(|| {
        let (p, mu) = pressure_and_equilibrium(&deref(sft, "sft")?.0, &deref(phi, "phi")?.0)?;
        if out.is_null() {
            return Err(Failure(ThermoStatus::NullArgument, "out is null".into()));
        }
        if !pressure_out.is_null() {
            pressure_out.write(p.value);
        }
        write(out, "out", Box::into_raw(Box::new(ThermoMeasure(mu))))
    })
}

/// # Safety
/// `mu` must come from this library and not be used afterwards. Null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn thermo_measure_free(mu: *mut ThermoMeasure) {
    if !mu.is_null() {
        drop(Box::from_raw(mu));
    }
}

/// Block length of the measure's states.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_measure_order(mu: *const ThermoMeasure, out: *mut usize) -> ThermoStatus {
    guard(|| write(out, "out", deref(mu, "mu")?.0.order()))
}

/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_measure_state_count(mu: *const ThermoMeasure, out: *mut usize) -> ThermoStatus {
    guard(|| write(out, "out", deref(mu, "mu")?.0.states().len()))
}

/// Entropy in nats.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_measure_entropy(mu: *const ThermoMeasure, out: *mut f64) -> ThermoStatus {
    guard(|| write(out, "out", deref(mu, "mu")?.0.entropy()))
}

/// Copies the stationary vector into `out[0..state_count]`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn thermo_measure_stationary(
    mu: *const ThermoMeasure,
    out: *mut f64,
    len: usize,
) -> ThermoStatus {
    guard(|| copy_out(deref(mu, "mu")?.0.stationary().iter().copied(), out, len))
}

/// Copies the transition matrix, row-major, into
/// `out[0..state_count * state_count]`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn thermo_measure_kernel(mu: *const ThermoMeasure, out: *mut f64, len: usize) -> ThermoStatus {
    guard(|| {
        let kernel = deref(mu, "mu")?.0.kernel();
        let flat: Vec<f64> = kernel.iter().flatten().copied().collect();
        copy_out(flat.into_iter(), out, len)
    })
}

/// `int phi dmu`.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_measure_integrate(
    mu: *const ThermoMeasure,
    phi: *const ThermoPotential,
    out: *mut f64,
) -> ThermoStatus {
    guard(|| write(out, "out", integrate(&deref(mu, "mu")?.0, &deref(phi, "phi")?.0)?))
}

/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_max_ergodic_average(
    sft: *const ThermoSft,
    phi: *const ThermoPotential,
    out: *mut ThermoMaximization,
) -> ThermoStatus {
    guard(|| {
        let r = max_ergodic_average(&deref(sft, "sft")?.0, &deref(phi, "phi")?.0)?;
        let summary = ThermoMaximization {
            beta: r.beta,
            ground_entropy: r.ground_entropy,
            unique: r.unique_flag,
            critical_edge_count: r.critical_edges.len(),
            cycle_length: r.witness_cycle.len(),
        };
        write(out, "out", summary)
    })
}

fn solve_result(r: SolveReport) -> ThermoSolveResult {
    ThermoSolveResult {
        t: r.t_found,
        achieved: r.achieved,
        residual: r.residual,
        bracket_lo: r.bracket.0,
        bracket_hi: r.bracket.1,
        iterations: r.iterations,
    }
}

/// Finds `t >= 0` where the equilibrium state of `t phi` has entropy `target`.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_solve_entropy(
    sft: *const ThermoSft,
    phi: *const ThermoPotential,
    target: f64,
    out: *mut ThermoSolveResult,
) -> ThermoStatus {
    guard(|| {
        let r = solve_intermediate_entropy(&deref(sft, "sft")?.0, &deref(phi, "phi")?.0, target)?;
        write(out, "out", solve_result(r))
    })
}

/// Finds `t >= 0` where the equilibrium state of `psi + t phi` has
/// `h + int psi` equal to `target`.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn thermo_solve_pressure(
    sft: *const ThermoSft,
    psi: *const ThermoPotential,
    phi: *const ThermoPotential,
    target: f64,
    out: *mut ThermoSolveResult,
) -> ThermoStatus {
    guard(|| {
        let sft = &deref(sft, "sft")?.0;
        let r = solve_intermediate_pressure(sft, &deref(psi, "psi")?.0, &deref(phi, "phi")?.0, target)?;
        write(out, "out", solve_result(r))
    })
}

/// Loads a JSON config and returns its system and the named potential.
/// `phi_out` may be null when only the system is wanted.
///
/// # Safety
/// `path` and `name` must be NUL-terminated strings; `name` may be null.
#[no_mangle]
pub unsafe extern "C" fn thermo_config_load(
    path: *const c_char,
    name: *const c_char,
    sft_out: *mut *mut ThermoSft,
    phi_out: *mut *mut ThermoPotential,
) -> ThermoStatus {
    guard(|| {
        let path = CStr::from_ptr(deref(path, "path")?)
            .to_str()
            .map_err(|_| Failure(ThermoStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let config = parse_config(Path::new(path)).map_err(|e| Failure(ThermoStatus::Validation, e.to_string()))?;
        let phi = if name.is_null() {
            None
        } else {
            let name = CStr::from_ptr(name).to_string_lossy();
            let phi = config.potentials.get(name.as_ref()).cloned().ok_or_else(|| {
                Failure(ThermoStatus::InvalidArgument, format!("no potential named {name:?}"))
            })?;
            Some(phi)
        };
        if sft_out.is_null() || (phi.is_some() && phi_out.is_null()) {
            return Err(Failure(ThermoStatus::NullArgument, "output pointer is null".into()));
        }
        sft_out.write(Box::into_raw(Box::new(ThermoSft(config.sft))));
        if let Some(phi) = phi {
            phi_out.write(Box::into_raw(Box::new(ThermoPotential(phi))));
        }
        Ok(())
    })
}
