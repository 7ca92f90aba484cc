//! C ABI over `sq-toolkit`.
//!
//! Every function returns an [`SqStatus`]; results come back through out
//! pointers. Handles are opaque and must be released with the matching
//! `_free` function. After a non-OK status, [`sq_last_error_message`]
//! describes the failure on the calling thread.
//!
//! Amplitudes cross the boundary as interleaved `re, im` doubles in
//! row-major multi-index order.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use num_complex::Complex64;
use sq_toolkit::linalg::{seeded_rng, ComplexVector};
use sq_toolkit::scattering::{collide, CollisionModel};
use sq_toolkit::{schmidt, sq_bipartite, sq_search, Error, SearchOptions, StateVector};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidState = 3,
    NotBipartite = 4,
    DimensionMismatch = 5,
    StateTooLarge = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque pure state.
pub struct SqState(StateVector);

/// Opaque two-particle collision model.
pub struct SqCollisionModel(CollisionModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(SqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NotBipartite(_) => SqStatus::NotBipartite,
            Error::DimensionMismatch { .. } => SqStatus::DimensionMismatch,
            Error::StateTooLarge { .. } => SqStatus::StateTooLarge,
            Error::InvalidState(_) => SqStatus::InvalidState,
            _ => SqStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SqStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SqStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            SqStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SqStatus::Panic
        }
    }
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a state from `n_factors` dims and `2 * n_amplitudes` interleaved
/// doubles. The amplitudes must already be normalized.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_state_new(
    factor_dims: *const usize,
    n_factors: usize,
    amplitudes: *const f64,
    n_amplitudes: usize,
    out: *mut *mut SqState,
) -> SqStatus {
    guard(|| {
        let dims = slice_arg(factor_dims, n_factors, "factor_dims")?.to_vec();
        let raw = slice_arg(amplitudes, 2 * n_amplitudes, "amplitudes")?;
        let amps = ComplexVector::from_iterator(
            n_amplitudes,
            raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])),
        );
        let state = StateVector::new(dims, amps)?;
        write_out(out, Box::into_raw(Box::new(SqState(state))), "out")
    })
}

/// Seeded random state; `product` draws independent local states.
///
/// # Safety
/// `factor_dims` must hold `n_factors` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_state_random(
    factor_dims: *const usize,
    n_factors: usize,
    seed: u64,
    product: bool,
    out: *mut *mut SqState,
) -> SqStatus {
    guard(|| {
        let dims = slice_arg(factor_dims, n_factors, "factor_dims")?;
        let mut rng = seeded_rng(seed);
        let state = if product {
            StateVector::random_product(dims, &mut rng)?
        } else {
            StateVector::random(dims, &mut rng)?
        };
        write_out(out, Box::into_raw(Box::new(SqState(state))), "out")
    })
}

/// Releases a state; null is ignored.
///
/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sq_state_free(state: *mut SqState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Total Hilbert-space dimension.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_state_dim(state: *const SqState, out: *mut usize) -> SqStatus {
    guard(|| write_out(out, ref_arg(state, "state")?.0.dim(), "out"))
}

/// Number of tensor factors.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_state_n_factors(state: *const SqState, out: *mut usize) -> SqStatus {
    guard(|| write_out(out, ref_arg(state, "state")?.0.n_factors(), "out"))
}

/// Copies `2 * dim` interleaved doubles into `out`, which holds `capacity`
/// doubles. `written` receives the required length even when the buffer is
/// too small.
///
/// # Safety
/// `out` must be writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sq_state_amplitudes(
    state: *const SqState,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> SqStatus {
    guard(|| {
        let s = &ref_arg(state, "state")?.0;
        let values: Vec<f64> = s.amplitudes().iter().flat_map(|c| [c.re, c.im]).collect();
        copy_out(&values, out, capacity, written)
    })
}

unsafe fn copy_out(values: &[f64], out: *mut f64, capacity: usize, written: *mut usize) -> Result<(), Failure> {
    write_out(written, values.len(), "written")?;
    if values.len() > capacity {
        return Err(Failure(
            SqStatus::BufferTooSmall,
            format!("need {} doubles, buffer holds {capacity}", values.len()),
        ));
    }
    if !values.is_empty() {
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    }
    Ok(())
}

/// Nonzero Schmidt weights of a bipartite state, descending. `rank`
/// receives their count even when the buffer is too small.
///
/// # Safety
/// `weights` must be writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sq_schmidt_weights(
    state: *const SqState,
    weights: *mut f64,
    capacity: usize,
    rank: *mut usize,
) -> SqStatus {
    guard(|| {
        let form = schmidt(&ref_arg(state, "state")?.0)?;
        copy_out(&form.weights, weights, capacity, rank)
    })
}

/// Closed-form S_q (nats) of a bipartite state.
///
/// # Safety
/// `state` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_closed_form(state: *const SqState, value: *mut f64) -> SqStatus {
    guard(|| {
        let result = sq_bipartite(&ref_arg(state, "state")?.0)?;
        write_out(value, result.value, "value")
    })
}

/// Numerical S_q (nats) of a state with any number of factors.
///
/// # Safety
/// `state` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_search_value(
    state: *const SqState,
    restarts: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
    value: *mut f64,
) -> SqStatus {
    guard(|| {
        let s = &ref_arg(state, "state")?.0;
        if restarts == 0 || max_iters == 0 || !tol.is_finite() || tol < 0.0 {
            return Err(Failure(
                SqStatus::InvalidArgument,
                "restarts and max_iters must be positive and tol finite and non-negative".into(),
            ));
        }
        let result = sq_search(s, &SearchOptions::new(restarts, max_iters, tol, seed));
        write_out(value, result.value, "value")
    })
}

/// Reference model: two `d`-level particles with levels `0, 1, …, d−1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_model_reference(
    d: usize,
    interaction_seed: u64,
    coupling: f64,
    duration: f64,
    out: *mut *mut SqCollisionModel,
) -> SqStatus {
    guard(|| {
        let m = CollisionModel::reference(d, interaction_seed)
            .with_coupling(coupling)
            .with_duration(duration);
        m.validate()?;
        write_out(out, Box::into_raw(Box::new(SqCollisionModel(m))), "out")
    })
}

/// Model with explicit single-particle energies.
///
/// # Safety
/// `energies_1` and `energies_2` must hold `d1` and `d2` doubles.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sq_model_new(
    d1: usize,
    energies_1: *const f64,
    d2: usize,
    energies_2: *const f64,
    coupling: f64,
    interaction_seed: u64,
    duration: f64,
    out: *mut *mut SqCollisionModel,
) -> SqStatus {
    guard(|| {
        let m = CollisionModel {
            d1,
            d2,
            free_energies_1: slice_arg(energies_1, d1, "energies_1")?.to_vec(),
            free_energies_2: slice_arg(energies_2, d2, "energies_2")?.to_vec(),
            coupling,
            interaction_seed,
            duration,
        };
        m.validate()?;
        write_out(out, Box::into_raw(Box::new(SqCollisionModel(m))), "out")
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sq_model_free(model: *mut SqCollisionModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Out-state of one collision of two single-particle states.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_collide(
    model: *const SqCollisionModel,
    in1: *const SqState,
    in2: *const SqState,
    out: *mut *mut SqState,
) -> SqStatus {
    guard(|| {
        let m = &ref_arg(model, "model")?.0;
        let state = collide(m, &ref_arg(in1, "in1")?.0, &ref_arg(in2, "in2")?.0)?;
        write_out(out, Box::into_raw(Box::new(SqState(state))), "out")
    })
}
