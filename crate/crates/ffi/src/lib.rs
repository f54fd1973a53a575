//! C ABI for the relufit solver library.
//!
//! The surface follows the usual opaque-handle pattern: datasets and solve
//! traces live behind `RelufitDataset*` / `RelufitTrace*` pointers, every
//! fallible call returns a [`RelufitStatus`], and the last error message is
//! kept per thread and retrievable via [`relufit_last_error_message`].
//!
//! The C header is generated by cbindgen at build time into
//! `include/relufit.h`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use relufit::constraint::{ConstraintKind, ConstraintSet};
use relufit::geometry::{estimate_width_mc, phi_gamma, width_analytic_l1, DescentConeDescriptor};
use relufit::model::{make_planted, Dataset, PlantedSpec, Structure, WeightVector};
use relufit::solver::{solve, SolveConfig, SolveTrace};
use relufit::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelufitStatus {
    RelufitOk = 0,
    RelufitNullArgument = 1,
    RelufitInvalidArgument = 2,
    RelufitBufferTooSmall = 3,
    RelufitDivergence = 4,
    RelufitRuntimeError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
}

fn status_of(err: &Error) -> RelufitStatus {
    match err {
        Error::NonFiniteIterate { .. } => RelufitStatus::RelufitDivergence,
        Error::InvalidSpec(_)
        | Error::InvalidParameter(_)
        | Error::ZeroVector(_)
        | Error::DimensionMismatch(_)
        | Error::Config(_) => RelufitStatus::RelufitInvalidArgument,
        _ => RelufitStatus::RelufitRuntimeError,
    }
}

fn guard(body: impl FnOnce() -> Result<(), RelufitStatus>) -> RelufitStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RelufitStatus::RelufitOk,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            RelufitStatus::RelufitRuntimeError
        }
    }
}

fn fail<T>(status: RelufitStatus, msg: &str) -> Result<T, RelufitStatus> {
    set_error(msg);
    Err(status)
}

fn core_err<T>(err: Error) -> Result<T, RelufitStatus> {
    let status = status_of(&err);
    set_error(&err.to_string());
    Err(status)
}

/// A generated dataset together with its planted vector.
pub struct RelufitDataset {
    data: Dataset,
    w_star: Option<WeightVector>,
}

/// A recorded solve trace.
pub struct RelufitTrace {
    trace: SolveTrace,
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn relufit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent error on this thread (empty if none). The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn relufit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Generates a planted dataset: `sparsity = 0` plants a dense vector,
/// otherwise exactly `sparsity` nonzeros; labels are exact ReLU responses.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives an owned handle
/// that must be released with [`relufit_dataset_free`].
#[no_mangle]
pub unsafe extern "C" fn relufit_dataset_generate(
    d: usize,
    sparsity: usize,
    norm: f64,
    n: usize,
    seed: u64,
    out: *mut *mut RelufitDataset,
) -> RelufitStatus {
    guard(|| {
        if out.is_null() {
            return fail(RelufitStatus::RelufitNullArgument, "out is null");
        }
        let structure = if sparsity == 0 {
            Structure::Dense
        } else {
            Structure::Sparse(sparsity)
        };
        let spec = PlantedSpec {
            d,
            structure,
            norm,
            seed,
        };
        let w_star = match make_planted(&spec) {
            Ok(w) => w,
            Err(e) => return core_err(e),
        };
        let data = match Dataset::generate(&w_star, n, seed) {
            Ok(data) => data,
            Err(e) => return core_err(e),
        };
        let handle = Box::new(RelufitDataset {
            data,
            w_star: Some(w_star),
        });
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// Releases a dataset handle; a null pointer is a no-op.
///
/// # Safety
/// `handle` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn relufit_dataset_free(handle: *mut RelufitDataset) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Sample count and dimension of a dataset.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn relufit_dataset_dims(
    handle: *const RelufitDataset,
    n: *mut usize,
    d: *mut usize,
) -> RelufitStatus {
    guard(|| {
        if handle.is_null() || n.is_null() || d.is_null() {
            return fail(RelufitStatus::RelufitNullArgument, "null argument");
        }
        let ds = unsafe { &*handle };
        unsafe {
            *n = ds.data.n();
            *d = ds.data.d();
        }
        Ok(())
    })
}

/// Copies the planted vector into `buf` (length must be at least `d`).
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn relufit_dataset_planted(
    handle: *const RelufitDataset,
    buf: *mut f64,
    len: usize,
) -> RelufitStatus {
    guard(|| {
        if handle.is_null() || buf.is_null() {
            return fail(RelufitStatus::RelufitNullArgument, "null argument");
        }
        let ds = unsafe { &*handle };
        let Some(w) = &ds.w_star else {
            return fail(
                RelufitStatus::RelufitInvalidArgument,
                "dataset carries no planted vector",
            );
        };
        if len < w.d() {
            return fail(RelufitStatus::RelufitBufferTooSmall, "buffer too small");
        }
        let out = unsafe { std::slice::from_raw_parts_mut(buf, w.d()) };
        out.copy_from_slice(w.0.as_slice().expect("contiguous"));
        Ok(())
    })
}

fn build_constraint(
    kind: c_int,
    radius: f64,
    k: usize,
    w_star: Option<&WeightVector>,
) -> Result<ConstraintSet, RelufitStatus> {
    let kind = match kind {
        0 => ConstraintKind::None,
        1 => ConstraintKind::L2,
        2 => ConstraintKind::L1,
        3 => ConstraintKind::Sparsity,
        other => {
            return fail(
                RelufitStatus::RelufitInvalidArgument,
                &format!("unknown constraint kind {other}; expected 0..=3 (none, l2, l1, sparsity)"),
            )
        }
    };
    let natural = |w: Option<&WeightVector>| -> Result<ConstraintSet, RelufitStatus> {
        let Some(w) = w else {
            return fail(
                RelufitStatus::RelufitInvalidArgument,
                "auto constraint level requires a planted vector",
            );
        };
        ConstraintSet::natural_radius(kind, w).or_else(core_err)
    };
    match kind {
        ConstraintKind::None => Ok(ConstraintSet::Unconstrained),
        ConstraintKind::L2 if radius > 0.0 => Ok(ConstraintSet::L2Ball { radius }),
        ConstraintKind::L1 if radius > 0.0 => Ok(ConstraintSet::L1Ball { radius }),
        ConstraintKind::Sparsity if k > 0 => Ok(ConstraintSet::SparsityK { k }),
        _ => natural(w_star),
    }
}

/// Runs projected gradient descent from the origin on a dataset.
///
/// `constraint_kind`: 0 none, 1 l2, 2 l1, 3 sparsity. A nonpositive
/// `radius` (or `k = 0`) selects the natural level from the dataset's
/// planted vector. The solution is written into `solution` (length `d`);
/// when `trace_out` is non-null it receives an owned trace handle.
///
/// # Safety
/// `handle` and `solution` must be valid; `solution_len >= d`.
#[no_mangle]
pub unsafe extern "C" fn relufit_solve(
    handle: *const RelufitDataset,
    constraint_kind: c_int,
    radius: f64,
    k: usize,
    max_iters: usize,
    step_size: f64,
    target_rel_err: f64,
    solution: *mut f64,
    solution_len: usize,
    trace_out: *mut *mut RelufitTrace,
) -> RelufitStatus {
    guard(|| {
        if handle.is_null() || solution.is_null() {
            return fail(RelufitStatus::RelufitNullArgument, "null argument");
        }
        let ds = unsafe { &*handle };
        if solution_len < ds.data.d() {
            return fail(
                RelufitStatus::RelufitBufferTooSmall,
                "solution buffer too small",
            );
        }
        let set = build_constraint(constraint_kind, radius, k, ds.w_star.as_ref())?;
        let cfg = SolveConfig {
            max_iters,
            step_size,
            target_rel_err,
        };
        let (w, trace) = match solve(&ds.data, &set, &cfg, ds.w_star.as_ref()) {
            Ok(pair) => pair,
            Err(e) => return core_err(e),
        };
        let out = unsafe { std::slice::from_raw_parts_mut(solution, ds.data.d()) };
        out.copy_from_slice(w.0.as_slice().expect("contiguous"));
        if !trace_out.is_null() {
            unsafe { *trace_out = Box::into_raw(Box::new(RelufitTrace { trace })) };
        }
        Ok(())
    })
}

/// Releases a trace handle; a null pointer is a no-op.
///
/// # Safety
/// `handle` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn relufit_trace_free(handle: *mut RelufitTrace) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Number of recorded iterates (iterations run plus one); 0 for null.
///
/// # Safety
/// `handle` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn relufit_trace_len(handle: *const RelufitTrace) -> usize {
    if handle.is_null() {
        return 0;
    }
    unsafe { &*handle }.trace.losses.len()
}

/// Iterate index at which a stopping rule fired, or -1.
///
/// # Safety
/// `handle` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn relufit_trace_converged_at(handle: *const RelufitTrace) -> i64 {
    if handle.is_null() {
        return -1;
    }
    match unsafe { &*handle }.trace.converged_at {
        Some(tau) => tau as i64,
        None => -1,
    }
}

unsafe fn copy_series(
    values: Option<&[f64]>,
    buf: *mut f64,
    len: usize,
) -> Result<(), RelufitStatus> {
    let Some(series) = values else {
        return fail(
            RelufitStatus::RelufitInvalidArgument,
            "trace does not carry this series",
        );
    };
    if buf.is_null() {
        return fail(RelufitStatus::RelufitNullArgument, "buffer is null");
    }
    if len < series.len() {
        return fail(RelufitStatus::RelufitBufferTooSmall, "buffer too small");
    }
    let out = unsafe { std::slice::from_raw_parts_mut(buf, series.len()) };
    out.copy_from_slice(series);
    Ok(())
}

/// Copies per-iterate relative errors (present when the dataset carried a
/// planted vector) into `buf`; use [`relufit_trace_len`] to size it.
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn relufit_trace_rel_errs(
    handle: *const RelufitTrace,
    buf: *mut f64,
    len: usize,
) -> RelufitStatus {
    guard(|| {
        if handle.is_null() {
            return fail(RelufitStatus::RelufitNullArgument, "handle is null");
        }
        let t = unsafe { &*handle };
        unsafe { copy_series(t.trace.rel_errs.as_deref(), buf, len) }
    })
}

/// Copies per-iterate loss values into `buf`.
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn relufit_trace_losses(
    handle: *const RelufitTrace,
    buf: *mut f64,
    len: usize,
) -> RelufitStatus {
    guard(|| {
        if handle.is_null() {
            return fail(RelufitStatus::RelufitNullArgument, "handle is null");
        }
        let t = unsafe { &*handle };
        unsafe { copy_series(Some(&t.trace.losses), buf, len) }
    })
}

/// Euclidean projection onto a constraint set, written into `out`
/// (length `d`). Constraint encoding matches [`relufit_solve`], but the
/// level must be explicit (no planted vector is available here).
///
/// # Safety
/// `v` and `out` must point to `d` readable/writable doubles.
#[no_mangle]
pub unsafe extern "C" fn relufit_project(
    constraint_kind: c_int,
    radius: f64,
    k: usize,
    v: *const f64,
    d: usize,
    out: *mut f64,
) -> RelufitStatus {
    guard(|| {
        if v.is_null() || out.is_null() {
            return fail(RelufitStatus::RelufitNullArgument, "null argument");
        }
        if d == 0 {
            return fail(RelufitStatus::RelufitInvalidArgument, "d must be >= 1");
        }
        let input = unsafe { std::slice::from_raw_parts(v, d) }.to_vec();
        let w = match WeightVector::new(input) {
            Ok(w) => w,
            Err(e) => return core_err(e),
        };
        let set = build_constraint(constraint_kind, radius, k, None)?;
        let p = match set.project(&w) {
            Ok(p) => p,
            Err(e) => return core_err(e),
        };
        let out = unsafe { std::slice::from_raw_parts_mut(out, d) };
        out.copy_from_slice(p.0.as_slice().expect("contiguous"));
        Ok(())
    })
}

/// Closed-form minimal-sample value for the l1 descent cone at an
/// `s`-sparse anchor in dimension `d`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn relufit_width_analytic_l1(
    d: usize,
    s: usize,
    out: *mut f64,
) -> RelufitStatus {
    guard(|| {
        if out.is_null() {
            return fail(RelufitStatus::RelufitNullArgument, "out is null");
        }
        match width_analytic_l1(d, s) {
            Ok(value) => {
                unsafe { *out = value };
                Ok(())
            }
            Err(e) => core_err(e),
        }
    })
}

/// `phi(t) = sqrt(2) Gamma((t+1)/2) / Gamma(t/2)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn relufit_phi_gamma(t: f64, out: *mut f64) -> RelufitStatus {
    guard(|| {
        if out.is_null() {
            return fail(RelufitStatus::RelufitNullArgument, "out is null");
        }
        match phi_gamma(t) {
            Ok(value) => {
                unsafe { *out = value };
                Ok(())
            }
            Err(e) => core_err(e),
        }
    })
}

/// Monte Carlo minimal-sample estimate. `cone_kind`: 0 full space,
/// 1 subspace of dimension `structural_dim`, 2 l1 cone at a
/// `structural_dim`-sparse anchor.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn relufit_width_mc(
    cone_kind: c_int,
    d: usize,
    structural_dim: usize,
    num_samples: usize,
    seed: u64,
    n0: *mut f64,
    omega_sq_mc: *mut f64,
    stderr_out: *mut f64,
) -> RelufitStatus {
    guard(|| {
        if n0.is_null() || omega_sq_mc.is_null() || stderr_out.is_null() {
            return fail(RelufitStatus::RelufitNullArgument, "null output pointer");
        }
        let cone = match cone_kind {
            0 => Ok(DescentConeDescriptor::full(d)),
            1 => DescentConeDescriptor::subspace(d, structural_dim),
            2 => DescentConeDescriptor::l1_canonical(d, structural_dim),
            other => {
                return fail(
                    RelufitStatus::RelufitInvalidArgument,
                    &format!("unknown cone kind {other}; expected 0..=2"),
                )
            }
        };
        let cone = match cone {
            Ok(cone) => cone,
            Err(e) => return core_err(e),
        };
        match estimate_width_mc(&cone, num_samples, seed) {
            Ok(est) => {
                unsafe {
                    *n0 = est.n0;
                    *omega_sq_mc = est.omega_sq_mc;
                    *stderr_out = est.stderr;
                }
                Ok(())
            }
            Err(e) => core_err(e),
        }
    })
}
