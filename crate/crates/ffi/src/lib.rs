//! C ABI over the `lifshitz` crate.
//!
//! The surface is deliberately small: an opaque parameter handle, the
//! streaming eigenvalue counter and longest-run scan (the two O(L)
//! primitives a host language cannot cheaply reimplement), and the
//! closed-form envelope evaluators. Everything is deterministic in
//! (seed, index), matching the Rust side bit for bit.
//!
//! Conventions:
//! * functions returning [`LifStatus`] write results through out
//!   pointers and never touch them on failure;
//! * pure real-valued evaluators return NaN on a domain error instead;
//! * `lif_params_free` is null-safe; every other pointer argument must be
//!   valid, and handles must not be shared across threads while mutated
//!   (they never are: all operations take them by const pointer).

use lifshitz::bounds;
use lifshitz::intervals::longest_zero_run;
use lifshitz::model::{ModelParams, OccupancyStream};
use lifshitz::spectral::count_below_streamed;
use std::os::raw::c_char;

/// Opaque model-parameter handle (lattice size, zero-site probability,
/// potential height).
pub struct LifParams {
    inner: ModelParams,
}

/// Call outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter was outside its documented domain.
    InvalidArgument = 2,
    /// An internal computation failed.
    RuntimeError = 3,
}

/// Allocates a parameter handle for an L-site lattice with P[V = 0] = p
/// and potential height b at occupied sites. Writes the handle to `out`.
///
/// # Safety
/// `out` must be a valid pointer. The returned handle must be released
/// with [`lif_params_free`].
#[no_mangle]
pub unsafe extern "C" fn lif_params_new(
    sites: u64,
    p: f64,
    b: f64,
    out: *mut *mut LifParams,
) -> LifStatus {
    if out.is_null() {
        return LifStatus::NullPointer;
    }
    let sites = match usize::try_from(sites) {
        Ok(s) => s,
        Err(_) => return LifStatus::InvalidArgument,
    };
    match ModelParams::new(sites, p, b) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(LifParams { inner }));
            LifStatus::Ok
        }
        Err(_) => LifStatus::InvalidArgument,
    }
}

/// Releases a handle from [`lif_params_new`]. Null is a no-op.
///
/// # Safety
/// `params` must be a handle produced by [`lif_params_new`] that has not
/// been freed, or null.
#[no_mangle]
pub unsafe extern "C" fn lif_params_free(params: *mut LifParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Counts eigenvalues strictly below `epsilon` for the realization drawn
/// from (seed, index), streaming over the lattice in O(1) memory.
///
/// # Safety
/// `params` must be a live handle; `out_count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lif_count_below(
    params: *const LifParams,
    seed: u64,
    index: u64,
    epsilon: f64,
    out_count: *mut u64,
) -> LifStatus {
    if params.is_null() || out_count.is_null() {
        return LifStatus::NullPointer;
    }
    if !epsilon.is_finite() {
        return LifStatus::InvalidArgument;
    }
    let p = &(*params).inner;
    *out_count = count_below_streamed(p, seed, index, epsilon).count as u64;
    LifStatus::Ok
}

/// Length of the longest zero-potential run of the realization drawn
/// from (seed, index); 0 when every site is occupied.
///
/// # Safety
/// `params` must be a live handle; `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lif_longest_zero_run(
    params: *const LifParams,
    seed: u64,
    index: u64,
    out_len: *mut u64,
) -> LifStatus {
    if params.is_null() || out_len.is_null() {
        return LifStatus::NullPointer;
    }
    let p = &(*params).inner;
    *out_len = longest_zero_run(OccupancyStream::new(p, seed, index)) as u64;
    LifStatus::Ok
}

/// Lower IDS envelope q p^T / (1 - p^T) with T = pi/sqrt(epsilon).
/// NaN unless epsilon > 0 and 0 < p < 1.
#[no_mangle]
pub extern "C" fn lif_lower_bound_ids(epsilon: f64, p: f64) -> f64 {
    if !(epsilon > 0.0 && p > 0.0 && p < 1.0) {
        return f64::NAN;
    }
    bounds::lower_bound_ids(epsilon, p)
}

/// Upper IDS envelope q p^(T - pi^2/b) / (p^2 (1 - p^(T + C sqrt(eps)))).
/// NaN unless epsilon > 0, 0 < p < 1, b > 0, c >= 0.
#[no_mangle]
pub extern "C" fn lif_upper_bound_ids(epsilon: f64, p: f64, b: f64, c: f64) -> f64 {
    if !(epsilon > 0.0 && p > 0.0 && p < 1.0 && b > 0.0 && c >= 0.0) {
        return f64::NAN;
    }
    bounds::upper_bound_ids(epsilon, p, b, c)
}

/// Finite-volume lower coefficient with the run-length sum truncated at
/// ell0 (may be +inf). NaN unless epsilon > 0, 0 < p < 1, ell0 >= 0.
#[no_mangle]
pub extern "C" fn lif_finite_lower_coeff(epsilon: f64, p: f64, ell0: f64) -> f64 {
    if !(epsilon > 0.0 && p > 0.0 && p < 1.0 && ell0 >= 0.0) {
        return f64::NAN;
    }
    bounds::finite_lower_coeff(epsilon, p, ell0)
}

/// Energy of the w-th sine mode on a zero run of `len` sites:
/// 4 sin^2(w pi / (2 (len+1))). NaN unless 1 <= w <= len.
#[no_mangle]
pub extern "C" fn lif_sine_energy(len: u64, w: u64) -> f64 {
    if w < 1 || w > len {
        return f64::NAN;
    }
    match (usize::try_from(len), usize::try_from(w)) {
        (Ok(len), Ok(w)) => lifshitz::sine::sine_energy(len, w),
        _ => f64::NAN,
    }
}

/// Longest-run threshold (ln n - ln y) / ln(1/p).
/// NaN unless y > 0, n > 0, 0 < p < 1.
#[no_mangle]
pub extern "C" fn lif_run_threshold(y: f64, n: f64, p: f64) -> f64 {
    if !(y > 0.0 && n > 0.0 && p > 0.0 && p < 1.0) {
        return f64::NAN;
    }
    bounds::run_threshold(y, n, p)
}

/// Limit probability 1 - e^{-y} of exceeding the threshold. NaN for
/// negative y.
#[no_mangle]
pub extern "C" fn lif_run_limit_probability(y: f64) -> f64 {
    if !(y >= 0.0) {
        return f64::NAN;
    }
    bounds::run_limit_probability(y)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lif_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
