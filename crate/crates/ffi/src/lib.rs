//! C ABI for `apsdet`.
//!
//! Models and involutions are opaque handles created by `aps_*_new`-style
//! constructors and released with the matching `_free`. Every fallible call
//! returns an [`ApsStatus`] and writes its result through an out pointer; on
//! failure [`aps_last_error`] describes the cause for the calling thread.
//!
//! Complex matrices are passed as row-major arrays of interleaved
//! `(re, im)` pairs, `2 n²` doubles for an `n × n` matrix.

use apsdet::dtn::{self, BulkModel};
use apsdet::linalg::{C64, CMatrix};
use apsdet::model::{self as m, BoundaryModel, Involution};
use apsdet::spectrum::{CylinderProblem, EndCondition};
use apsdet::{scattering, zeta, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    NotInvertible = 4,
    Numeric = 5,
    Panic = 6,
}

/// Boundary model: `B`, `G` and the derived mode basis.
pub struct ApsModel {
    inner: Arc<BoundaryModel>,
}

/// Unitary involution on `ker B` anticommuting with `G`.
pub struct ApsInvolution {
    inner: Involution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ApsStatus {
    use Error::*;
    match e {
        Dimension(_) | SymmetryViolation { .. } | OddKernel(_) | KernelImbalance { .. } | NonPositiveEigenvalue(_) | EmptyKernel
        | InvalidInvolution { .. } | NotGCommuting(_) | WrongInvolutionShape(_) => ApsStatus::InvalidModel,
        AngleOutOfRange(_) | AngleCount { .. } | GridTooCoarse(_) | NonPositiveArgument(_) | OffsetOutOfRange(_)
        | NonPositiveLength(_) | LambdaOutOfRange { .. } => ApsStatus::InvalidArgument,
        NotInvertible(_) | SingularR | Inadmissible(_) | SingularDifference => ApsStatus::NotInvertible,
        _ => ApsStatus::Numeric,
    }
}

struct Failure(ApsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ApsStatus::NullPointer, format!("`{what}` is null"))
}

/// Run `f`, trapping panics and recording errors.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> ApsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ApsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ApsStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn matrix(p: *const f64, n: usize, what: &str) -> Result<CMatrix, Failure> {
    let data = slice(p, 2 * n * n, what)?;
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        C64::new(data[k], data[k + 1])
    }))
}

unsafe fn model_ref<'a>(p: *const ApsModel) -> Result<&'a ApsModel, Failure> {
    p.as_ref().ok_or_else(|| null("model"))
}

unsafe fn inv_ref<'a>(p: *const ApsInvolution, what: &str) -> Result<&'a Involution, Failure> {
    p.as_ref().map(|i| &i.inner).ok_or_else(|| null(what))
}

/// A null involution means a Dirichlet end.
unsafe fn end(p: *const ApsInvolution) -> EndCondition {
    match p.as_ref() {
        Some(i) => EndCondition::Aps(i.inner.clone()),
        None => EndCondition::Dirichlet,
    }
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(v);
    Ok(())
}

fn boxed_model(inner: BoundaryModel) -> *mut ApsModel {
    Box::into_raw(Box::new(ApsModel { inner: Arc::new(inner) }))
}

fn boxed_inv(inner: Involution) -> *mut ApsInvolution {
    Box::into_raw(Box::new(ApsInvolution { inner }))
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn aps_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn aps_status_message(status: ApsStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        ApsStatus::Ok => b"ok\0",
        ApsStatus::NullPointer => b"null pointer\0",
        ApsStatus::InvalidArgument => b"invalid argument\0",
        ApsStatus::InvalidModel => b"invalid model or involution\0",
        ApsStatus::NotInvertible => b"not invertible\0",
        ApsStatus::Numeric => b"numeric failure\0",
        ApsStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Canonical model with `dim ker B = 2l` and the eigenvalue pairs `±eigs[i]`.
///
/// # Safety
/// `eigs` must point to `n` doubles (or be null when `n == 0`); `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn aps_model_canonical(l: usize, eigs: *const f64, n: usize, out: *mut *mut ApsModel) -> ApsStatus {
    guard(|| {
        let eigs = slice(eigs, n, "eigs")?;
        let model = m::canonical_model(l, eigs)?;
        write(out, boxed_model(model))
    })
}

/// Model from explicit `n × n` matrices `B` (Hermitian) and `G`.
///
/// # Safety
/// `b` and `g` must each point to `2 n²` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_model_from_matrices(n: usize, b: *const f64, g: *const f64, out: *mut *mut ApsModel) -> ApsStatus {
    guard(|| {
        let model = m::build_model(matrix(b, n, "b")?, matrix(g, n, "g")?)?;
        write(out, boxed_model(model))
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aps_model_free(model: *mut ApsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Dimension of the boundary space.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_model_dim(model: *const ApsModel, out: *mut usize) -> ApsStatus {
    guard(|| write(out, model_ref(model)?.inner.dim()))
}

/// Half the dimension of `ker B`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_model_half_kernel_dim(model: *const ApsModel, out: *mut usize) -> ApsStatus {
    guard(|| write(out, model_ref(model)?.inner.half_kernel_dim()))
}

/// `τ`, or the empty involution when `ker B = 0`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_involution_tau(model: *const ApsModel, out: *mut *mut ApsInvolution) -> ApsStatus {
    guard(|| {
        let model = &model_ref(model)?.inner;
        let tau = if model.half_kernel_dim() == 0 { Involution::empty() } else { m::make_tau(model)? };
        write(out, boxed_inv(tau))
    })
}

/// `σ_θ` with one angle in `(0, π/2)` per kernel block.
///
/// # Safety
/// `angles` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_involution_sigma_theta(
    model: *const ApsModel,
    angles: *const f64,
    n: usize,
    out: *mut *mut ApsInvolution,
) -> ApsStatus {
    guard(|| {
        let model = &model_ref(model)?.inner;
        let s = m::make_sigma_theta(model, slice(angles, n, "angles")?)?;
        write(out, boxed_inv(s))
    })
}

/// Involution from an explicit `2l × 2l` matrix in kernel coordinates.
///
/// # Safety
/// `entries` must point to `8 l²` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_involution_from_matrix(l: usize, entries: *const f64, out: *mut *mut ApsInvolution) -> ApsStatus {
    guard(|| {
        let s = Involution::new(matrix(entries, 2 * l, "entries")?)?;
        write(out, boxed_inv(s))
    })
}

/// Random involution, reproducible from `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_involution_random(l: usize, seed: u64, out: *mut *mut ApsInvolution) -> ApsStatus {
    guard(|| {
        let s = if l == 0 { Involution::empty() } else { Involution::random(l, &mut ChaCha8Rng::seed_from_u64(seed)) };
        write(out, boxed_inv(s))
    })
}

/// # Safety
/// `inv` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aps_involution_free(inv: *mut ApsInvolution) {
    if !inv.is_null() {
        drop(Box::from_raw(inv));
    }
}

/// `log Det` on the cylinder `[0, r]`. A null end means Dirichlet.
///
/// # Safety
/// Handles must be live or null where allowed; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_cylinder_logdet(
    model: *const ApsModel,
    r: f64,
    left: *const ApsInvolution,
    right: *const ApsInvolution,
    out: *mut f64,
) -> ApsStatus {
    guard(|| {
        let p = CylinderProblem::new(model_ref(model)?.inner.clone(), r, end(left), end(right))?;
        write(out, zeta::logdet_cylinder(&p)?.value)
    })
}

/// `Det(C, σ₁) / Det(C, σ₂)` on the cylinder `[0, r]`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_cylinder_det_ratio(
    model: *const ApsModel,
    r: f64,
    left: *const ApsInvolution,
    sigma1: *const ApsInvolution,
    sigma2: *const ApsInvolution,
    out: *mut f64,
) -> ApsStatus {
    guard(|| {
        let v = zeta::cylinder_det_ratio(
            &model_ref(model)?.inner,
            r,
            inv_ref(left, "left")?,
            inv_ref(sigma1, "sigma1")?,
            inv_ref(sigma2, "sigma2")?,
        )?;
        write(out, v)
    })
}

/// `det(C − σ₁) / det(C − σ₂)` on `ker B`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_kernel_det_ratio(
    c0: *const ApsInvolution,
    sigma1: *const ApsInvolution,
    sigma2: *const ApsInvolution,
    out: *mut f64,
) -> ApsStatus {
    guard(|| {
        let v = scattering::theorem13_ratio(inv_ref(c0, "c0")?, inv_ref(sigma1, "sigma1")?, inv_ref(sigma2, "sigma2")?)?;
        write(out, v)
    })
}

unsafe fn bulk(model: *const ApsModel, length: f64, far: *const ApsInvolution) -> Result<BulkModel, Failure> {
    Ok(BulkModel::new(model_ref(model)?.inner.clone(), length, end(far))?)
}

/// Residual of the gluing formula for a bulk of length `length` (far end
/// `far`, null for Dirichlet) glued to a cylinder of length `r` with
/// `APS(σ)` at its end.
///
/// # Safety
/// Handles must be live or null where allowed; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_gluing_residual(
    model: *const ApsModel,
    length: f64,
    far: *const ApsInvolution,
    r: f64,
    sigma: *const ApsInvolution,
    out: *mut f64,
) -> ApsStatus {
    guard(|| {
        let b = bulk(model, length, far)?;
        let sigma = inv_ref(sigma, "sigma")?;
        dtn::screen_invertibility(&b, sigma)?;
        write(out, dtn::bfk_check(&b, r, sigma)?.residual)
    })
}

/// `det R_{r,σ₁} / det R_{r,σ₂}` as a Fredholm determinant on `ker B`.
///
/// # Safety
/// Handles must be live or null where allowed; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_fredholm_ratio(
    model: *const ApsModel,
    length: f64,
    far: *const ApsInvolution,
    r: f64,
    sigma1: *const ApsInvolution,
    sigma2: *const ApsInvolution,
    out: *mut f64,
) -> ApsStatus {
    guard(|| {
        let b = bulk(model, length, far)?;
        write(out, dtn::theorem12_ratio(&b, r, inv_ref(sigma1, "sigma1")?, inv_ref(sigma2, "sigma2")?)?)
    })
}

/// `ζ(0, α)` and `∂_s ζ(0, α)`.
///
/// # Safety
/// `zeta0` and `dzeta0` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aps_hurwitz_at_zero(alpha: f64, zeta0: *mut f64, dzeta0: *mut f64) -> ApsStatus {
    guard(|| {
        let (z, d) = zeta::hurwitz_zeta_at_zero(alpha)?;
        write(zeta0, z)?;
        write(dzeta0, d)
    })
}
