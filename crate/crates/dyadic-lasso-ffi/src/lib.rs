//! C ABI over the solver, the level-selection procedure and the
//! regularization schedules.
//!
//! Conventions: every fallible function returns a `dl_status`; outputs
//! go through out-pointers. Handles are opaque and freed with their
//! `*_free` function. On failure a thread-local message is readable via
//! `dl_last_error_message` until the next failing call on that thread.

#![allow(non_camel_case_types)]
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dyadic_lasso::dictionaries::{
    enumerate_heaviside, make_fourier_grid, make_gaussian_design, make_haar_grid,
    make_orthonormal_sequence, Dictionary,
};
use dyadic_lasso::error::Error;
use dyadic_lasso::geometry::{Design, SampleVector};
use dyadic_lasso::rng::RandomStream;
use dyadic_lasso::selection::{lambda_nn, lambda_p, pen_p, selected_lasso};
use dyadic_lasso::solver::{lasso_cd, soft_threshold_fit, LassoFit};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum dl_status {
    DL_OK = 0,
    /// Invalid parameter, configuration, or dimension.
    DL_ERR_PARAM = 1,
    /// Solver did not reach its tolerance.
    DL_ERR_SOLVER = 2,
    /// Outside the valid regime of the requested procedure.
    DL_ERR_REGIME = 3,
    /// A required pointer was null.
    DL_ERR_NULL = 4,
    /// Internal panic; state may be inconsistent.
    DL_ERR_INTERNAL = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "?")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> dl_status {
    match err {
        Error::NonConvergence { .. } | Error::SolverAtLevel { .. } | Error::Replication { .. } => {
            dl_status::DL_ERR_SOLVER
        }
        Error::Regime(_) | Error::GridWidening { .. } => dl_status::DL_ERR_REGIME,
        _ => dl_status::DL_ERR_PARAM,
    }
}

fn guard<F: FnOnce() -> dl_status>(f: F) -> dl_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            dl_status::DL_ERR_INTERNAL
        }
    }
}

/// Message of the most recent failure on this thread. Valid until the
/// next failing call; never null.
#[no_mangle]
pub extern "C" fn dl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Crate version as a static string.
#[no_mangle]
pub extern "C" fn dl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque dictionary handle.
pub struct dl_dictionary {
    inner: Dictionary,
}

/// Opaque fit handle (single-level or selected).
pub struct dl_fit {
    inner: LassoFit,
    p_hat: usize,
}

unsafe fn write_dictionary(
    out: *mut *mut dl_dictionary,
    made: Result<Dictionary, Error>,
) -> dl_status {
    if out.is_null() {
        set_error("out pointer is null");
        return dl_status::DL_ERR_NULL;
    }
    match made {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(dl_dictionary { inner }));
            dl_status::DL_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Orthonormal sequence dictionary with `p` columns.
#[no_mangle]
pub unsafe extern "C" fn dl_dictionary_orthonormal(
    p: usize,
    out: *mut *mut dl_dictionary,
) -> dl_status {
    guard(|| write_dictionary(out, make_orthonormal_sequence(p)))
}

/// Haar system on the regular grid of size `n` (a power of two).
#[no_mangle]
pub unsafe extern "C" fn dl_dictionary_haar(n: usize, out: *mut *mut dl_dictionary) -> dl_status {
    guard(|| write_dictionary(out, make_haar_grid(n)))
}

/// Fourier system with `p` columns on the regular grid of size `n`.
#[no_mangle]
pub unsafe extern "C" fn dl_dictionary_fourier(
    n: usize,
    p: usize,
    out: *mut *mut dl_dictionary,
) -> dl_status {
    guard(|| write_dictionary(out, make_fourier_grid(n, p)))
}

/// Seeded Gaussian design with `p` columns on `n` points.
#[no_mangle]
pub unsafe extern "C" fn dl_dictionary_gaussian(
    n: usize,
    p: usize,
    seed: u64,
    out: *mut *mut dl_dictionary,
) -> dl_status {
    guard(|| {
        let mut rng = RandomStream::from_seed(seed);
        write_dictionary(out, make_gaussian_design(n, p, &mut rng))
    })
}

/// All distinct Heaviside columns on the regular 1-d grid of size `n`.
#[no_mangle]
pub unsafe extern "C" fn dl_dictionary_heaviside_grid(
    n: usize,
    out: *mut *mut dl_dictionary,
) -> dl_status {
    guard(|| {
        write_dictionary(
            out,
            Design::grid_1d(n).and_then(|d| enumerate_heaviside(&d)),
        )
    })
}

/// Number of columns.
#[no_mangle]
pub unsafe extern "C" fn dl_dictionary_len(dict: *const dl_dictionary) -> usize {
    if dict.is_null() {
        return 0;
    }
    (*dict).inner.len()
}

/// Number of design points.
#[no_mangle]
pub unsafe extern "C" fn dl_dictionary_n(dict: *const dl_dictionary) -> usize {
    if dict.is_null() {
        return 0;
    }
    (*dict).inner.design().n()
}

#[no_mangle]
pub unsafe extern "C" fn dl_dictionary_free(dict: *mut dl_dictionary) {
    if !dict.is_null() {
        drop(Box::from_raw(dict));
    }
}

/// Coordinate-descent Lasso fit of `y` (length = number of design
/// points) at penalty `lambda`. `tol <= 0` or `max_iter == 0` select
/// the defaults.
#[no_mangle]
pub unsafe extern "C" fn dl_lasso_cd(
    dict: *const dl_dictionary,
    y: *const f64,
    y_len: usize,
    lambda: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut dl_fit,
) -> dl_status {
    guard(|| {
        if dict.is_null() || y.is_null() || out.is_null() {
            set_error("null pointer argument");
            return dl_status::DL_ERR_NULL;
        }
        let tol = if tol > 0.0 {
            tol
        } else {
            dyadic_lasso::solver::DEFAULT_TOL
        };
        let max_iter = if max_iter > 0 {
            max_iter
        } else {
            dyadic_lasso::solver::DEFAULT_MAX_ITER
        };
        let obs = SampleVector::new(std::slice::from_raw_parts(y, y_len).to_vec());
        match lasso_cd(&(*dict).inner, &obs, lambda, tol, max_iter) {
            Ok(fit) => {
                *out = Box::into_raw(Box::new(dl_fit {
                    inner: fit,
                    p_hat: 0,
                }));
                dl_status::DL_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Selected Lasso over the dyadic truncation levels up to `p_max` at
/// noise level `eps`; the chosen level is readable via `dl_fit_p_hat`.
#[no_mangle]
pub unsafe extern "C" fn dl_selected_lasso(
    dict: *const dl_dictionary,
    y: *const f64,
    y_len: usize,
    eps: f64,
    p_max: usize,
    tol: f64,
    out: *mut *mut dl_fit,
) -> dl_status {
    guard(|| {
        if dict.is_null() || y.is_null() || out.is_null() {
            set_error("null pointer argument");
            return dl_status::DL_ERR_NULL;
        }
        let tol = if tol > 0.0 {
            tol
        } else {
            dyadic_lasso::solver::DEFAULT_TOL
        };
        let obs = SampleVector::new(std::slice::from_raw_parts(y, y_len).to_vec());
        match selected_lasso(&(*dict).inner, &obs, eps, p_max, tol) {
            Ok(trace) => {
                let p_hat = trace.p_hat;
                let fit = trace.chosen_fit().clone();
                *out = Box::into_raw(Box::new(dl_fit { inner: fit, p_hat }));
                dl_status::DL_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Number of coefficients in the fit.
#[no_mangle]
pub unsafe extern "C" fn dl_fit_num_coeffs(fit: *const dl_fit) -> usize {
    if fit.is_null() {
        return 0;
    }
    (*fit).inner.theta.len()
}

/// Copy the coefficients into `buf` (capacity `buf_len`); returns the
/// number written.
#[no_mangle]
pub unsafe extern "C" fn dl_fit_coeffs(fit: *const dl_fit, buf: *mut f64, buf_len: usize) -> usize {
    if fit.is_null() || buf.is_null() {
        return 0;
    }
    let theta = &(*fit).inner.theta;
    let count = theta.len().min(buf_len);
    std::ptr::copy_nonoverlapping(theta.as_ptr(), buf, count);
    count
}

/// Penalized objective value at the fit.
#[no_mangle]
pub unsafe extern "C" fn dl_fit_objective(fit: *const dl_fit) -> f64 {
    if fit.is_null() {
        return f64::NAN;
    }
    (*fit).inner.objective
}

/// Optimality certificate (maximal subgradient violation).
#[no_mangle]
pub unsafe extern "C" fn dl_fit_kkt_violation(fit: *const dl_fit) -> f64 {
    if fit.is_null() {
        return f64::NAN;
    }
    (*fit).inner.kkt_violation
}

/// l1 norm of the coefficients.
#[no_mangle]
pub unsafe extern "C" fn dl_fit_l1_norm(fit: *const dl_fit) -> f64 {
    if fit.is_null() {
        return f64::NAN;
    }
    (*fit).inner.l1_norm()
}

/// Coordinate passes spent by the solver.
#[no_mangle]
pub unsafe extern "C" fn dl_fit_iterations(fit: *const dl_fit) -> usize {
    if fit.is_null() {
        return 0;
    }
    (*fit).inner.iterations
}

/// Selected truncation level, or 0 for a single-level fit.
#[no_mangle]
pub unsafe extern "C" fn dl_fit_p_hat(fit: *const dl_fit) -> usize {
    if fit.is_null() {
        return 0;
    }
    (*fit).p_hat
}

#[no_mangle]
pub unsafe extern "C" fn dl_fit_free(fit: *mut dl_fit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Half-threshold `sign(y_j) max(|y_j| - lambda/2, 0)` written in place
/// over `out` (length `len`).
#[no_mangle]
pub unsafe extern "C" fn dl_soft_threshold(
    y: *const f64,
    len: usize,
    lambda: f64,
    out: *mut f64,
) -> dl_status {
    guard(|| {
        if y.is_null() || out.is_null() {
            set_error("null pointer argument");
            return dl_status::DL_ERR_NULL;
        }
        let theta = soft_threshold_fit(std::slice::from_raw_parts(y, len), lambda);
        std::ptr::copy_nonoverlapping(theta.as_ptr(), out, len);
        dl_status::DL_OK
    })
}

unsafe fn write_scalar(out: *mut f64, value: Result<f64, Error>) -> dl_status {
    if out.is_null() {
        set_error("out pointer is null");
        return dl_status::DL_ERR_NULL;
    }
    match value {
        Ok(v) => {
            *out = v;
            dl_status::DL_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// `lambda_p = 4 eps (sqrt(ln p) + 1)`.
#[no_mangle]
pub unsafe extern "C" fn dl_lambda_p(p: usize, eps: f64, out: *mut f64) -> dl_status {
    guard(|| write_scalar(out, lambda_p(p, eps)))
}

/// `pen(p) = 5 eps^2 ln p`.
#[no_mangle]
pub unsafe extern "C" fn dl_pen_p(p: usize, eps: f64, out: *mut f64) -> dl_status {
    guard(|| write_scalar(out, pen_p(p, eps)))
}

/// `lambda = (28 sigma / sqrt(n)) (sqrt((d+1) ln(n+1)) + 4)`.
#[no_mangle]
pub unsafe extern "C" fn dl_lambda_nn(n: usize, d: usize, sigma: f64, out: *mut f64) -> dl_status {
    guard(|| write_scalar(out, lambda_nn(n, d, sigma)))
}
