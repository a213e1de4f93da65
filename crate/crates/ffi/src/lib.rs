//! C ABI for the composition and scoring core, so other languages can bind.
//!
//! Conventions:
//! - every function returns an [`EcStatus`]; results go through out-pointers
//! - fitted models are opaque handles with explicit `_free` functions
//! - on any non-`Ok` status, `ec_last_error_message` returns a
//!   thread-local, NUL-terminated description of what went wrong
//! - vectors are contiguous `double` arrays of length `dim`; matrices of
//!   training data are row-major `n x dim`

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use embcomp::compose::{
    compose_dilation, compose_multiplicative, compose_simple_add, compose_weighted_add,
    ridge_fit, ridge_predict, DilationParams, RidgeModel, TrainingPair, WeightedAddParams,
};
use embcomp::embeddings::synthetic_embed;
use embcomp::error::Error;
use embcomp::metrics::{cosine_similarity, js_divergence, kde_estimate, SimilarityDistribution};
use embcomp::vector::Vector;

/// Status codes returned by every function in this library.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// An argument violated the documented domain (shape, range, emptiness).
    InvalidArgument = 2,
    /// A numeric procedure failed (singular system, divergence).
    NumericalError = 3,
    /// Unexpected internal failure; see `ec_last_error_message`.
    InternalError = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> EcStatus {
    match err {
        Error::Shape(_) | Error::Parameter(_) | Error::Usage(_) | Error::Degenerate(_) => {
            EcStatus::InvalidArgument
        }
        Error::Numerical(_) | Error::Training(_) => EcStatus::NumericalError,
        _ => EcStatus::InternalError,
    }
}

fn run(body: impl FnOnce() -> Result<(), (EcStatus, String)>) -> EcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => EcStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("panic inside embcomp");
            EcStatus::InternalError
        }
    }
}

fn failure<T>(err: Error) -> Result<T, (EcStatus, String)> {
    Err((status_of(&err), err.to_string()))
}

/// # Safety
/// `ptr` must point to `len` readable doubles.
unsafe fn vector_from(ptr: *const f64, len: usize) -> Result<Vector, (EcStatus, String)> {
    if ptr.is_null() {
        return Err((EcStatus::NullPointer, "null vector pointer".into()));
    }
    let slice = unsafe { std::slice::from_raw_parts(ptr, len) };
    Vector::new(slice.to_vec()).or_else(failure)
}

/// Last error message for the calling thread, NUL-terminated. Owned by the
/// library; valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn ec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ec_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// `out[i] = u[i] + v[i]`
/// # Safety
/// `u`, `v` must point to `dim` readable doubles and `out` to `dim`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ec_compose_simple_add(
    u: *const f64,
    v: *const f64,
    dim: usize,
    out: *mut f64,
) -> EcStatus {
    run(|| {
        if out.is_null() {
            return Err((EcStatus::NullPointer, "null output pointer".into()));
        }
        let u = unsafe { vector_from(u, dim)? };
        let v = unsafe { vector_from(v, dim)? };
        let result = compose_simple_add(&u, &v).or_else(failure)?;
        unsafe { std::ptr::copy_nonoverlapping(result.as_slice().as_ptr(), out, dim) };
        Ok(())
    })
}

/// `out[i] = u[i] * v[i]`
/// # Safety
/// `u`, `v` must point to `dim` readable doubles and `out` to `dim`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ec_compose_multiplicative(
    u: *const f64,
    v: *const f64,
    dim: usize,
    out: *mut f64,
) -> EcStatus {
    run(|| {
        if out.is_null() {
            return Err((EcStatus::NullPointer, "null output pointer".into()));
        }
        let u = unsafe { vector_from(u, dim)? };
        let v = unsafe { vector_from(v, dim)? };
        let result = compose_multiplicative(&u, &v).or_else(failure)?;
        unsafe { std::ptr::copy_nonoverlapping(result.as_slice().as_ptr(), out, dim) };
        Ok(())
    })
}

/// `out = alpha*u + beta*v`
/// # Safety
/// `u`, `v` must point to `dim` readable doubles and `out` to `dim`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ec_compose_weighted_add(
    u: *const f64,
    v: *const f64,
    dim: usize,
    alpha: f64,
    beta: f64,
    out: *mut f64,
) -> EcStatus {
    run(|| {
        if out.is_null() {
            return Err((EcStatus::NullPointer, "null output pointer".into()));
        }
        let u = unsafe { vector_from(u, dim)? };
        let v = unsafe { vector_from(v, dim)? };
        let params = WeightedAddParams::new(alpha, beta).or_else(failure)?;
        let result = compose_weighted_add(&u, &v, &params).or_else(failure)?;
        unsafe { std::ptr::copy_nonoverlapping(result.as_slice().as_ptr(), out, dim) };
        Ok(())
    })
}

/// `out = (u.u) v + (lambda - 1)(u.v) u`
/// # Safety
/// `u`, `v` must point to `dim` readable doubles and `out` to `dim`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ec_compose_dilation(
    u: *const f64,
    v: *const f64,
    dim: usize,
    lambda: f64,
    out: *mut f64,
) -> EcStatus {
    run(|| {
        if out.is_null() {
            return Err((EcStatus::NullPointer, "null output pointer".into()));
        }
        let u = unsafe { vector_from(u, dim)? };
        let v = unsafe { vector_from(v, dim)? };
        let params = DilationParams::new(lambda).or_else(failure)?;
        let result = compose_dilation(&u, &v, &params).or_else(failure)?;
        unsafe { std::ptr::copy_nonoverlapping(result.as_slice().as_ptr(), out, dim) };
        Ok(())
    })
}

/// Cosine similarity; 0 when either vector has zero norm.
/// # Safety
/// `a`, `b` must point to `dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ec_cosine_similarity(
    a: *const f64,
    b: *const f64,
    dim: usize,
    out: *mut f64,
) -> EcStatus {
    run(|| {
        if out.is_null() {
            return Err((EcStatus::NullPointer, "null output pointer".into()));
        }
        let a = unsafe { vector_from(a, dim)? };
        let b = unsafe { vector_from(b, dim)? };
        let value = cosine_similarity(&a, &b).or_else(failure)?;
        unsafe { *out = value };
        Ok(())
    })
}

/// Opaque fitted ridge model.
pub struct EcRidgeModel {
    inner: RidgeModel,
}

/// Fit ridge regression on `n` training triples. `us`, `vs`, `ws` are
/// row-major `n x dim` arrays. On success `*out_model` owns the handle;
/// release it with `ec_ridge_model_free`.
/// # Safety
/// The three data pointers must each cover `n * dim` readable doubles and
/// `out_model` must be a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn ec_ridge_fit(
    us: *const f64,
    vs: *const f64,
    ws: *const f64,
    n: usize,
    dim: usize,
    regularization: f64,
    out_model: *mut *mut EcRidgeModel,
) -> EcStatus {
    run(|| {
        if out_model.is_null() {
            return Err((EcStatus::NullPointer, "null output pointer".into()));
        }
        if us.is_null() || vs.is_null() || ws.is_null() {
            return Err((EcStatus::NullPointer, "null training data pointer".into()));
        }
        if n == 0 || dim == 0 {
            return Err((EcStatus::InvalidArgument, "n and dim must be positive".into()));
        }
        let read_row = |base: *const f64, row: usize| -> Vec<f64> {
            unsafe { std::slice::from_raw_parts(base.add(row * dim), dim).to_vec() }
        };
        let mut pairs = Vec::with_capacity(n);
        for i in 0..n {
            pairs.push(TrainingPair {
                u: Vector::new(read_row(us, i)).or_else(failure)?,
                v: Vector::new(read_row(vs, i)).or_else(failure)?,
                w: Vector::new(read_row(ws, i)).or_else(failure)?,
            });
        }
        let inner = ridge_fit(&pairs, regularization).or_else(failure)?;
        let handle = Box::new(EcRidgeModel { inner });
        unsafe { *out_model = Box::into_raw(handle) };
        Ok(())
    })
}

/// Embedding dimension the model was trained for; 0 for a NULL handle.
/// # Safety
/// `model` must be NULL or a live handle from `ec_ridge_fit`.
#[no_mangle]
pub unsafe extern "C" fn ec_ridge_model_dim(model: *const EcRidgeModel) -> usize {
    if model.is_null() {
        return 0;
    }
    unsafe { (*model).inner.trained_dim() }
}

/// Predict a compound embedding from two constituent embeddings.
/// # Safety
/// `model` must be a live handle; `u`, `v` must point to `dim` readable
/// doubles where `dim = ec_ridge_model_dim(model)`; `out` must be writable
/// for `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn ec_ridge_predict(
    model: *const EcRidgeModel,
    u: *const f64,
    v: *const f64,
    out: *mut f64,
) -> EcStatus {
    run(|| {
        if model.is_null() {
            return Err((EcStatus::NullPointer, "null model handle".into()));
        }
        if out.is_null() {
            return Err((EcStatus::NullPointer, "null output pointer".into()));
        }
        let dim = unsafe { (*model).inner.trained_dim() };
        let u = unsafe { vector_from(u, dim)? };
        let v = unsafe { vector_from(v, dim)? };
        let result = unsafe { ridge_predict(&(*model).inner, &u, &v) }.or_else(failure)?;
        unsafe { std::ptr::copy_nonoverlapping(result.as_slice().as_ptr(), out, dim) };
        Ok(())
    })
}

/// Release a model handle. NULL is tolerated.
/// # Safety
/// `model` must be NULL or a handle obtained from `ec_ridge_fit`, and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ec_ridge_model_free(model: *mut EcRidgeModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Jensen-Shannon divergence (base-2, in [0,1]) between Gaussian KDEs of two
/// similarity sample sets evaluated on a shared grid. `bandwidth <= 0`
/// selects the larger of the two Scott's-rule bandwidths so the result stays
/// symmetric.
/// # Safety
/// `p` and `q` must point to `np` / `nq` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ec_js_divergence_from_samples(
    p: *const f64,
    np: usize,
    q: *const f64,
    nq: usize,
    bandwidth: f64,
    out: *mut f64,
) -> EcStatus {
    run(|| {
        if out.is_null() {
            return Err((EcStatus::NullPointer, "null output pointer".into()));
        }
        if p.is_null() || q.is_null() {
            return Err((EcStatus::NullPointer, "null sample pointer".into()));
        }
        let ps = unsafe { std::slice::from_raw_parts(p, np) };
        let qs = unsafe { std::slice::from_raw_parts(q, nq) };
        let dp = SimilarityDistribution::new(ps.to_vec(), "p").or_else(failure)?;
        let dq = SimilarityDistribution::new(qs.to_vec(), "q").or_else(failure)?;
        let h = if bandwidth > 0.0 {
            bandwidth
        } else {
            let auto_p = kde_estimate(&dp, None).or_else(failure)?.bandwidth;
            let auto_q = kde_estimate(&dq, None).or_else(failure)?.bandwidth;
            auto_p.max(auto_q)
        };
        let kp = kde_estimate(&dp, Some(h)).or_else(failure)?;
        let kq = kde_estimate(&dq, Some(h)).or_else(failure)?;
        let value = js_divergence(&kp, &kq).or_else(failure)?;
        unsafe { *out = value };
        Ok(())
    })
}

/// Deterministic unit-norm synthetic embedding for `text` (NUL-terminated
/// UTF-8), keyed by `seed`. Useful for exercising bindings without any
/// provider access.
/// # Safety
/// `text` must be a NUL-terminated string; `out` must cover `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn ec_synthetic_embed(
    text: *const c_char,
    dim: usize,
    seed: u64,
    out: *mut f64,
) -> EcStatus {
    run(|| {
        if text.is_null() || out.is_null() {
            return Err((EcStatus::NullPointer, "null pointer argument".into()));
        }
        let text = unsafe { std::ffi::CStr::from_ptr(text) }
            .to_str()
            .map_err(|_| (EcStatus::InvalidArgument, "text is not valid UTF-8".to_string()))?;
        let v = synthetic_embed(text, dim, seed).or_else(failure)?;
        unsafe { std::ptr::copy_nonoverlapping(v.as_slice().as_ptr(), out, dim) };
        Ok(())
    })
}
