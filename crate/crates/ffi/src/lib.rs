//! C ABI over `photon-zne`.
//!
//! Every fallible call returns a [`PzStatus`]; on failure the message is
//! available from [`pz_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use photon_zne::harness::vqe::{run_vqe, RunSeed, RunSpec, VqeRunResult};
use photon_zne::harness::{ExperimentConfig, ShotMode};
use photon_zne::mitigation::{self, MitigationSchedule};
use photon_zne::processor::{self, BasisId, ChipLayout};
use photon_zne::sampling::ShotScale;
use photon_zne::schwinger::{self, EnergyEstimate};
use photon_zne::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Post-selection or extrapolation became numerically degenerate.
    Degenerate = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PzBasis {
    X = 0,
    Y = 1,
    Z = 2,
}

fn basis_of(raw: u32) -> Result<BasisId, (PzStatus, String)> {
    match raw {
        r if r == PzBasis::X as u32 => Ok(BasisId::X),
        r if r == PzBasis::Y as u32 => Ok(BasisId::Y),
        r if r == PzBasis::Z as u32 => Ok(BasisId::Z),
        _ => Err((PzStatus::InvalidArgument, format!("unknown basis {raw}"))),
    }
}

/// Opaque chip layout.
pub struct PzChip(ChipLayout);

/// Opaque result of one VQE run.
pub struct PzVqeResult(VqeRunResult);

/// Inputs for [`pz_run_vqe`]. A non-positive `shots` selects exact
/// probabilities; `eps2` is ignored when `k1 == 0`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PzVqeParams {
    pub m: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub k0: usize,
    pub k1: usize,
    pub shots: f64,
    pub master_seed: u64,
    pub run_index: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PzStatus {
    match err {
        Error::DegeneratePostSelection(_) | Error::SingularExtrapolation(_) => PzStatus::Degenerate,
        _ => PzStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (PzStatus, String)>) -> PzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PzStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PzStatus::Panic
        }
    }
}

fn lib<T>(r: photon_zne::Result<T>) -> Result<T, (PzStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PzStatus, String) {
    (PzStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or valid for reads of `N` values.
unsafe fn read_array<T: Copy, const N: usize>(
    p: *const T,
    what: &str,
) -> Result<[T; N], (PzStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { *(p as *const [T; N]) })
}

/// # Safety
/// `p` must be null or valid for a write of `T`.
unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), (PzStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { p.write(value) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pz_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn pz_chip_new() -> *mut PzChip {
    Box::into_raw(Box::new(PzChip(processor::build_chip())))
}

/// # Safety
/// `chip` must be null or come from [`pz_chip_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pz_chip_free(chip: *mut PzChip) {
    if !chip.is_null() {
        drop(unsafe { Box::from_raw(chip) });
    }
}

/// Post-selected outcome probabilities `(p00, p01, p10, p11)` and the
/// success probability for preparation phases `prep[0..4]`. `basis` is a
/// [`PzBasis`] value.
///
/// # Safety
/// `prep` must point to 4 doubles and `out_probs` to space for 4.
#[no_mangle]
pub unsafe extern "C" fn pz_outcome_probabilities(
    chip: *const PzChip,
    prep: *const f64,
    basis: u32,
    epsilon: f64,
    out_probs: *mut f64,
    out_success: *mut f64,
) -> PzStatus {
    guard(|| {
        let chip = unsafe { chip.as_ref() }.ok_or_else(|| null("chip"))?;
        let basis = basis_of(basis)?;
        let prep: [f64; 4] = unsafe { read_array(prep, "prep") }?;
        if out_probs.is_null() {
            return Err(null("out_probs"));
        }
        let (probs, success) = lib(processor::outcome_probabilities(
            &chip.0, prep, basis, epsilon,
        ))?;
        unsafe { ptr::copy_nonoverlapping(probs.0.as_ptr(), out_probs, 4) };
        unsafe { write(out_success, success, "out_success") }
    })
}

/// # Safety
/// `chip` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pz_hom_visibility(
    chip: *const PzChip,
    epsilon: f64,
    out: *mut f64,
) -> PzStatus {
    guard(|| {
        let chip = unsafe { chip.as_ref() }.ok_or_else(|| null("chip"))?;
        let v = lib(processor::hom_visibility(&chip.0, epsilon))?;
        unsafe { write(out, v, "out") }
    })
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pz_exact_ground_energy(m: f64, out: *mut f64) -> PzStatus {
    guard(|| {
        if !m.is_finite() {
            return Err((PzStatus::InvalidArgument, "m must be finite".into()));
        }
        unsafe { write(out, schwinger::exact_ground_energy(m), "out") }
    })
}

/// # Safety
/// Each probability pointer must point to 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn pz_energy_from_probs(
    px: *const f64,
    py: *const f64,
    pz: *const f64,
    m: f64,
    out: *mut f64,
) -> PzStatus {
    guard(|| {
        let px = processor::OutcomeProbs(unsafe { read_array(px, "px") }?);
        let py = processor::OutcomeProbs(unsafe { read_array(py, "py") }?);
        let pz = processor::OutcomeProbs(unsafe { read_array(pz, "pz") }?);
        let e = lib(schwinger::energy_from_probs(&px, &py, &pz, m))?;
        unsafe { write(out, e, "out") }
    })
}

/// # Safety
/// Each count pointer must point to 4 integers.
#[no_mangle]
pub unsafe extern "C" fn pz_energy_from_counts(
    cx: *const u64,
    cy: *const u64,
    cz: *const u64,
    m: f64,
    out_value: *mut f64,
    out_std: *mut f64,
) -> PzStatus {
    guard(|| {
        let cx = unsafe { read_array(cx, "cx") }?;
        let cy = unsafe { read_array(cy, "cy") }?;
        let cz = unsafe { read_array(cz, "cz") }?;
        let e = lib(schwinger::energy_from_counts(cx, cy, cz, m))?;
        unsafe { write(out_value, e.value, "out_value") }?;
        unsafe { write(out_std, e.std, "out_std") }
    })
}

/// Two-point extrapolation to zero noise.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pz_linear_zne(
    e1: f64,
    std1: f64,
    e2: f64,
    std2: f64,
    eps1: f64,
    eps2: f64,
    out_value: *mut f64,
    out_std: *mut f64,
) -> PzStatus {
    guard(|| {
        let z = lib(mitigation::linear_zne(
            EnergyEstimate {
                value: e1,
                std: std1,
            },
            EnergyEstimate {
                value: e2,
                std: std2,
            },
            eps1,
            eps2,
        ))?;
        unsafe { write(out_value, z.value, "out_value") }?;
        unsafe { write(out_std, z.std, "out_std") }
    })
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pz_zne_variance(
    var1: f64,
    var2: f64,
    eps1: f64,
    eps2: f64,
    out: *mut f64,
) -> PzStatus {
    guard(|| {
        let v = lib(mitigation::zne_variance(var1, var2, eps1, eps2))?;
        unsafe { write(out, v, "out") }
    })
}

/// Basis measurements spent by `k0` unmitigated and `k1` mitigated
/// iterations at `n` measurements per unmitigated iteration.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pz_measurements_used(
    k0: usize,
    k1: usize,
    n: usize,
    out: *mut usize,
) -> PzStatus {
    guard(|| {
        let schedule = lib(MitigationSchedule::new(k0, k1, n))?;
        unsafe { write(out, mitigation::measurements_used(&schedule), "out") }
    })
}

/// Noise level set by a half-wave plate at angle `theta` (radians).
#[no_mangle]
pub extern "C" fn pz_epsilon_of_theta(theta: f64) -> f64 {
    mitigation::epsilon_of_theta(theta)
}

/// Runs one VQE instance with default optimizer settings. On success
/// `*out` owns a result handle.
///
/// # Safety
/// `chip`, `params` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pz_run_vqe(
    chip: *const PzChip,
    params: *const PzVqeParams,
    out: *mut *mut PzVqeResult,
) -> PzStatus {
    guard(|| {
        let chip = unsafe { chip.as_ref() }.ok_or_else(|| null("chip"))?;
        let p = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let shots = if p.shots > 0.0 {
            ShotMode::Sampled(lib(ShotScale::new(p.shots))?)
        } else {
            ShotMode::Exact
        };
        let spec = RunSpec {
            m: p.m,
            eps1: p.eps1,
            eps2: (p.k1 > 0).then_some(p.eps2),
            k0: p.k0,
            k1: p.k1,
        };
        let seed = RunSeed {
            master_seed: p.master_seed,
            grid_index: 0,
            run_index: p.run_index,
        };
        let spsa = ExperimentConfig::default().spsa(1);
        let result = lib(run_vqe(&chip.0, &spec, shots, &spsa, seed))?;
        unsafe { out.write(Box::into_raw(Box::new(PzVqeResult(result)))) };
        Ok(())
    })
}

/// # Safety
/// `result` must be null or come from [`pz_run_vqe`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pz_vqe_result_free(result: *mut PzVqeResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Trailing-window energy of the final stage.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pz_vqe_result_energy(
    result: *const PzVqeResult,
    out_value: *mut f64,
    out_std: *mut f64,
) -> PzStatus {
    guard(|| {
        let r = unsafe { result.as_ref() }.ok_or_else(|| null("result"))?;
        unsafe { write(out_value, r.0.final_energy.value, "out_value") }?;
        unsafe { write(out_std, r.0.final_energy.std, "out_std") }
    })
}

/// Number of recorded iterations, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn pz_vqe_result_iterations(result: *const PzVqeResult) -> usize {
    unsafe { result.as_ref() }.map_or(0, |r| r.0.iterations.len())
}

/// Estimate and cumulative measurement count of iteration `index`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pz_vqe_result_iteration(
    result: *const PzVqeResult,
    index: usize,
    out_estimate: *mut f64,
    out_measurements: *mut usize,
) -> PzStatus {
    guard(|| {
        let r = unsafe { result.as_ref() }.ok_or_else(|| null("result"))?;
        let log = r.0.iterations.get(index).ok_or_else(|| {
            (
                PzStatus::InvalidArgument,
                format!("iteration {index} out of range"),
            )
        })?;
        unsafe { write(out_estimate, log.estimate, "out_estimate") }?;
        unsafe { write(out_measurements, log.measurements, "out_measurements") }
    })
}

/// Final preparation phases.
///
/// # Safety
/// `out_phases` must have room for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn pz_vqe_result_phases(
    result: *const PzVqeResult,
    out_phases: *mut f64,
) -> PzStatus {
    guard(|| {
        let r = unsafe { result.as_ref() }.ok_or_else(|| null("result"))?;
        unsafe { write(out_phases as *mut [f64; 4], r.0.final_phases, "out_phases") }
    })
}
