//! C ABI over `moreau-core`.
//!
//! Functions are handed around as opaque `MoreauFunction` handles. Every
//! fallible call returns a `MoreauStatus`; on failure a message is kept per
//! thread and read back with `moreau_last_error_message`. Output buffers are
//! caller-owned and must hold `dim` doubles unless stated otherwise.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use moreau_core::conjugate::conjugate_value;
use moreau_core::envelope::{env_dgamma, env_gradient, env_hessian, env_moduli, env_value, proximal_point_minimize};
use moreau_core::nc::nc_estimate;
use moreau_core::prox::prox_lipschitz_constant;
use moreau_core::zoo::{function_from_str, make_function};
use moreau_core::{prox, AxisBox, Error, ExtendedReal, FunctionSpec};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoreauStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InadmissibleGamma = 4,
    UnknownFunction = 5,
    NotConverged = 6,
    Unsupported = 7,
    NumericError = 8,
    Panic = 9,
}

impl From<&Error> for MoreauStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => MoreauStatus::DimensionMismatch,
            Error::InadmissibleGamma { .. } => MoreauStatus::InadmissibleGamma,
            Error::UnknownFunction(_) | Error::InvalidParams(_) => MoreauStatus::UnknownFunction,
            Error::NotConverged { .. } => MoreauStatus::NotConverged,
            Error::GradientUnavailable
            | Error::HessianUnavailable
            | Error::Unsupported(_)
            | Error::NotConvex(_)
            | Error::SingularResolvent(_) => MoreauStatus::Unsupported,
            Error::InfiniteValue(_)
            | Error::NonFiniteOracle
            | Error::NonFinitePoint
            | Error::UnboundedConjugate
            | Error::EmptyGrid => MoreauStatus::NumericError,
            Error::InvalidBracket { .. } | Error::InvalidArgument(_) => MoreauStatus::InvalidArgument,
        }
    }
}

/// Opaque handle to an immutable function. Safe to share between threads.
pub struct MoreauFunction {
    spec: FunctionSpec,
}

/// `f(x)` for `x` of length `dim`; return `+inf` outside the domain.
pub type MoreauValueFn = Option<unsafe extern "C" fn(x: *const f64, dim: usize, user_data: *mut c_void) -> f64>;

/// Writes `grad f(x)` into `out` (length `dim`); a nonzero return marks `x`
/// as a point without gradient.
pub type MoreauGradientFn =
    Option<unsafe extern "C" fn(x: *const f64, dim: usize, out: *mut f64, user_data: *mut c_void) -> i32>;

/// Sharp moduli of an envelope. Optional fields carry a `has_` flag.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoreauEnvModuli {
    pub weak: f64,
    pub strong: f64,
    pub has_strong: bool,
    pub smooth: f64,
    pub smooth_prox_image: f64,
    pub has_smooth_prox_image: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: MoreauStatus, msg: &str) -> MoreauStatus {
    set_error(msg);
    status
}

fn from_core(e: Error) -> MoreauStatus {
    fail(MoreauStatus::from(&e), &e.to_string())
}

/// Runs `body`, turning panics into `MoreauStatus::Panic`.
fn guard(body: impl FnOnce() -> Result<(), MoreauStatus>) -> MoreauStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MoreauStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(MoreauStatus::Panic, "internal panic"),
    }
}

unsafe fn handle<'a>(f: *const MoreauFunction) -> Result<&'a FunctionSpec, MoreauStatus> {
    f.as_ref().map(|h| &h.spec).ok_or_else(|| fail(MoreauStatus::NullPointer, "null function handle"))
}

unsafe fn input<'a>(f: &FunctionSpec, x: *const f64, dim: usize) -> Result<&'a [f64], MoreauStatus> {
    if x.is_null() {
        return Err(fail(MoreauStatus::NullPointer, "null input vector"));
    }
    if dim != f.dim() {
        return Err(from_core(Error::DimensionMismatch { expected: f.dim(), got: dim }));
    }
    Ok(slice::from_raw_parts(x, dim))
}

unsafe fn output<'a>(out: *mut f64, len: usize) -> Result<&'a mut [f64], MoreauStatus> {
    if out.is_null() {
        return Err(fail(MoreauStatus::NullPointer, "null output buffer"));
    }
    Ok(slice::from_raw_parts_mut(out, len))
}

unsafe fn scalar_out<'a, T>(out: *mut T) -> Result<&'a mut T, MoreauStatus> {
    out.as_mut().ok_or_else(|| fail(MoreauStatus::NullPointer, "null output pointer"))
}

fn core<T>(r: moreau_core::Result<T>) -> Result<T, MoreauStatus> {
    r.map_err(from_core)
}

fn publish(spec: FunctionSpec, out: *mut *mut MoreauFunction) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(MoreauFunction { spec })) };
}

/// Creates a zoo member, e.g. `("quadratic", {2.0}, 1)`.
///
/// # Safety
/// `name` must be a NUL-terminated string, `params` must hold `n_params`
/// doubles (or be null when `n_params` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_function_new(
    name: *const c_char,
    params: *const f64,
    n_params: usize,
    out: *mut *mut MoreauFunction,
) -> MoreauStatus {
    guard(|| {
        if name.is_null() || out.is_null() || (params.is_null() && n_params > 0) {
            return Err(fail(MoreauStatus::NullPointer, "null argument"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| fail(MoreauStatus::InvalidArgument, "name is not UTF-8"))?;
        let params = if n_params == 0 { &[][..] } else { slice::from_raw_parts(params, n_params) };
        publish(core(make_function(name, params))?.spec, out);
        Ok(())
    })
}

/// Creates a zoo member from its label, e.g. `"indicator(0,1)"`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_function_parse(text: *const c_char, out: *mut *mut MoreauFunction) -> MoreauStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return Err(fail(MoreauStatus::NullPointer, "null argument"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|_| fail(MoreauStatus::InvalidArgument, "label is not UTF-8"))?;
        publish(core(function_from_str(text))?.spec, out);
        Ok(())
    })
}

struct Callbacks {
    value: unsafe extern "C" fn(*const f64, usize, *mut c_void) -> f64,
    user_data: *mut c_void,
}

// SAFETY: the caller promises thread-safe callbacks and user data.
unsafe impl Send for Callbacks {}
unsafe impl Sync for Callbacks {}

/// Creates a function from C callbacks. `gradient` may be null. When
/// `differentiable` is true the gradient must exist everywhere and enables
/// the gradient inner solver; otherwise only one-dimensional functions can
/// be prox-evaluated.
///
/// # Safety
/// The callbacks must be callable from any thread with `user_data`, which
/// must outlive the handle. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_function_from_callbacks(
    dim: usize,
    rho: f64,
    value: MoreauValueFn,
    gradient: MoreauGradientFn,
    differentiable: bool,
    user_data: *mut c_void,
    out: *mut *mut MoreauFunction,
) -> MoreauStatus {
    guard(|| {
        let (Some(value), false) = (value, out.is_null()) else {
            return Err(fail(MoreauStatus::NullPointer, "null value callback or output"));
        };
        if differentiable && gradient.is_none() {
            return Err(fail(MoreauStatus::InvalidArgument, "differentiable functions need a gradient callback"));
        }
        let cb = std::sync::Arc::new(Callbacks { value, user_data });
        let v = cb.clone();
        let mut spec = core(FunctionSpec::new("callback", dim, rho, move |x: &[f64]| {
            // SAFETY: x has `dim` entries; callback contract is the caller's.
            let y = unsafe { (v.value)(x.as_ptr(), x.len(), v.user_data) };
            if y == f64::INFINITY {
                ExtendedReal::PosInfinity
            } else {
                ExtendedReal::Finite(y)
            }
        }))?;
        if let Some(g) = gradient {
            let c = cb.clone();
            let oracle = move |x: &[f64]| {
                let mut buf = vec![0.0; x.len()];
                // SAFETY: buf has room for `dim` doubles.
                let rc = unsafe { g(x.as_ptr(), x.len(), buf.as_mut_ptr(), c.user_data) };
                (rc == 0).then_some(buf)
            };
            spec = if differentiable { spec.with_gradient(oracle) } else { spec.with_partial_gradient(oracle) };
        }
        publish(spec, out);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `f` must come from one of the constructors and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn moreau_function_free(f: *mut MoreauFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Dimension of the function, 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moreau_function_dim(f: *const MoreauFunction) -> usize {
    f.as_ref().map_or(0, |h| h.spec.dim())
}

/// Declared weak-convexity modulus, NaN for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moreau_function_rho(f: *const MoreauFunction) -> f64 {
    f.as_ref().map_or(f64::NAN, |h| h.spec.rho())
}

/// `f(x)`; `+inf` outside the domain.
///
/// # Safety
/// `x` must hold `dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_evaluate(f: *const MoreauFunction, x: *const f64, dim: usize, out: *mut f64) -> MoreauStatus {
    guard(|| {
        let spec = handle(f)?;
        let x = input(spec, x, dim)?;
        *scalar_out(out)? = core(spec.evaluate(x))?.to_f64();
        Ok(())
    })
}

/// `Prox_{gamma f}(x)` into `out`.
///
/// # Safety
/// `x` and `out` must each hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn moreau_prox(
    f: *const MoreauFunction,
    gamma: f64,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> MoreauStatus {
    guard(|| {
        let spec = handle(f)?;
        let x = input(spec, x, dim)?;
        let out = output(out, dim)?;
        out.copy_from_slice(core(prox(spec, gamma, x))?.point.as_slice());
        Ok(())
    })
}

/// Envelope value `f^gamma(x)`.
///
/// # Safety
/// `x` must hold `dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_env_value(
    f: *const MoreauFunction,
    gamma: f64,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> MoreauStatus {
    guard(|| {
        let spec = handle(f)?;
        let x = input(spec, x, dim)?;
        *scalar_out(out)? = core(env_value(spec, gamma, x))?;
        Ok(())
    })
}

/// Envelope gradient `(x - Prox_{gamma f}(x)) / gamma` into `out`.
///
/// # Safety
/// `x` and `out` must each hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn moreau_env_gradient(
    f: *const MoreauFunction,
    gamma: f64,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> MoreauStatus {
    guard(|| {
        let spec = handle(f)?;
        let x = input(spec, x, dim)?;
        let out = output(out, dim)?;
        out.copy_from_slice(core(env_gradient(spec, gamma, x))?.as_slice());
        Ok(())
    })
}

/// Derivative of the envelope in `gamma`.
///
/// # Safety
/// `x` must hold `dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_env_dgamma(
    f: *const MoreauFunction,
    gamma: f64,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> MoreauStatus {
    guard(|| {
        let spec = handle(f)?;
        let x = input(spec, x, dim)?;
        *scalar_out(out)? = core(env_dgamma(spec, gamma, x))?;
        Ok(())
    })
}

/// Diagonal of the envelope Hessian into `out`. Needs a Hessian oracle.
///
/// # Safety
/// `x` and `out` must each hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn moreau_env_hessian_diag(
    f: *const MoreauFunction,
    gamma: f64,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> MoreauStatus {
    guard(|| {
        let spec = handle(f)?;
        let x = input(spec, x, dim)?;
        let out = output(out, dim)?;
        let diag = core(env_hessian(spec, gamma, x))?
            .diagonal()
            .ok_or_else(|| fail(MoreauStatus::Unsupported, "envelope Hessian is not diagonal"))?;
        out.copy_from_slice(&diag);
        Ok(())
    })
}

/// `1 / (1 - gamma rho)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_prox_lipschitz_constant(rho: f64, gamma: f64, out: *mut f64) -> MoreauStatus {
    guard(|| {
        *scalar_out(out)? = core(prox_lipschitz_constant(rho, gamma))?;
        Ok(())
    })
}

/// Envelope moduli; pass NaN for an unknown curvature bound.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_env_moduli(
    rho: f64,
    gamma: f64,
    curvature_bound: f64,
    out: *mut MoreauEnvModuli,
) -> MoreauStatus {
    guard(|| {
        let bound = (!curvature_bound.is_nan()).then_some(curvature_bound);
        let m = core(env_moduli(rho, gamma, bound))?;
        *scalar_out(out)? = MoreauEnvModuli {
            weak: m.weak,
            strong: m.strong.unwrap_or(f64::NAN),
            has_strong: m.strong.is_some(),
            smooth: m.smooth,
            smooth_prox_image: m.smooth_prox_image.unwrap_or(f64::NAN),
            has_smooth_prox_image: m.smooth_prox_image.is_some(),
        };
        Ok(())
    })
}

/// Proximal point iterations from `x0`. The last iterate goes to `out`;
/// a run that hits `max_iter` still fills the outputs and returns
/// `MOREAU_STATUS_NOT_CONVERGED`.
///
/// # Safety
/// `x0` and `out` must each hold `dim` doubles; `iterations` and
/// `converged` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_proximal_point(
    f: *const MoreauFunction,
    gamma: f64,
    x0: *const f64,
    dim: usize,
    tol: f64,
    max_iter: usize,
    out: *mut f64,
    iterations: *mut usize,
    converged: *mut bool,
) -> MoreauStatus {
    guard(|| {
        let spec = handle(f)?;
        let x0 = input(spec, x0, dim)?;
        let out = output(out, dim)?;
        let r = core(proximal_point_minimize(spec, gamma, x0, tol, max_iter))?;
        out.copy_from_slice(r.point.as_slice());
        if let Some(it) = iterations.as_mut() {
            *it = r.iterations;
        }
        if let Some(c) = converged.as_mut() {
            *c = r.converged;
        }
        if r.converged {
            Ok(())
        } else {
            Err(fail(MoreauStatus::NotConverged, &format!("no fixed point after {} iterations", r.iterations)))
        }
    })
}

/// Grid estimate of the conjugate `f*(w)`; `+inf` when unbounded.
///
/// # Safety
/// `w` must hold `dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_conjugate_value(
    f: *const MoreauFunction,
    w: *const f64,
    dim: usize,
    out: *mut f64,
) -> MoreauStatus {
    guard(|| {
        let spec = handle(f)?;
        let w = input(spec, w, dim)?;
        *scalar_out(out)? = core(conjugate_value(spec, w))?.value.to_f64();
        Ok(())
    })
}

/// Seeded lower estimate of the nonconvexity criterion over the box
/// `[lower, upper]`, which must lie inside the domain.
///
/// # Safety
/// `lower` and `upper` must each hold `dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn moreau_nc_estimate(
    f: *const MoreauFunction,
    lower: *const f64,
    upper: *const f64,
    dim: usize,
    budget: usize,
    seed: u64,
    out: *mut f64,
) -> MoreauStatus {
    guard(|| {
        let spec = handle(f)?;
        let lo = input(spec, lower, dim)?.to_vec();
        let hi = input(spec, upper, dim)?.to_vec();
        let sample_box = core(AxisBox::new(lo, hi))?;
        *scalar_out(out)? = core(nc_estimate(spec, &sample_box, budget, seed))?.value;
        Ok(())
    })
}

/// Message of the last failure on this thread; empty when none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn moreau_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn moreau_status_message(status: i32) -> *const c_char {
    let s: &'static CStr = match status {
        0 => c"ok",
        1 => c"null pointer",
        2 => c"invalid argument",
        3 => c"dimension mismatch",
        4 => c"inadmissible gamma",
        5 => c"unknown function",
        6 => c"not converged",
        7 => c"unsupported",
        8 => c"numeric error",
        9 => c"internal panic",
        _ => c"unknown status",
    };
    s.as_ptr()
}
