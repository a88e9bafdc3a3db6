//! C ABI for `thermal-arealaw`.
//!
//! Every fallible function returns a [`TaStatus`]; on failure the message is
//! available from [`ta_last_error`] on the same thread. Results are written
//! through caller-provided out pointers. Diagonalized systems live behind the
//! opaque [`TaPrepared`] handle, released with [`ta_prepared_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use thermal_arealaw::bounds::{self, BoundChain, ChainParams, Prepared};
use thermal_arealaw::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DimensionGuard = 3,
    Eigen = 4,
    Quadrature = 5,
    Config = 6,
    Io = 7,
    Panic = 8,
}

impl From<&Error> for TaStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => TaStatus::InvalidParameter,
            Error::DimensionGuard { .. } => TaStatus::DimensionGuard,
            Error::Eigen(_) => TaStatus::Eigen,
            Error::Quadrature { .. } => TaStatus::Quadrature,
            Error::Config(_) => TaStatus::Config,
            Error::Io(_) => TaStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

/// Runs `f`, recording any error or panic for [`ta_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (TaStatus, String)>) -> TaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            TaStatus::Panic
        }
    }
}

fn lift(e: Error) -> (TaStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(what: &str) -> (TaStatus, String) {
    (TaStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn ta_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ta_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parameters of one chain evaluation. Zero `width` and `n_cap` mean unset,
/// as does a non-positive `gamma`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TaChainParams {
    pub dim: usize,
    pub side: usize,
    pub width: usize,
    pub n_max: usize,
    pub n_cap: usize,
    pub j: f64,
    pub u: f64,
    pub mu: f64,
    pub gamma: f64,
    pub quad_tol: f64,
    pub dim_guard: usize,
    pub sector_cutoff: f64,
    pub pinsker: bool,
}

impl From<&ChainParams> for TaChainParams {
    fn from(p: &ChainParams) -> Self {
        TaChainParams {
            dim: p.dim,
            side: p.side,
            width: p.width.unwrap_or(0),
            n_max: p.n_max,
            n_cap: p.n_cap.unwrap_or(0),
            j: p.j,
            u: p.u,
            mu: p.mu,
            gamma: p.gamma.unwrap_or(0.0),
            quad_tol: p.quad_tol,
            dim_guard: p.dim_guard,
            sector_cutoff: p.sector_cutoff,
            pinsker: p.pinsker,
        }
    }
}

impl From<&TaChainParams> for ChainParams {
    fn from(p: &TaChainParams) -> Self {
        let mut out = ChainParams::new(p.dim, p.side, p.n_max, p.j, p.u, p.mu);
        out.width = (p.width > 0).then_some(p.width);
        out.n_cap = (p.n_cap > 0).then_some(p.n_cap);
        out.gamma = (p.gamma > 0.0).then_some(p.gamma);
        out.quad_tol = p.quad_tol;
        out.dim_guard = p.dim_guard;
        out.sector_cutoff = p.sector_cutoff;
        out.pinsker = p.pinsker;
        out
    }
}

/// Every value of the bound chain at one temperature.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct TaChainResult {
    pub beta: f64,
    pub gamma: f64,
    pub boundary_bonds: usize,
    pub exact_mi: f64,
    pub mean_particles: f64,
    pub translation_deviation: f64,
    pub lemma1_value: f64,
    pub prop1_value: f64,
    pub prop2_value: f64,
    pub theorem_value: f64,
    pub slack_lemma1: f64,
    pub slack_prop1: f64,
    pub slack_theorem: f64,
    pub g: f64,
    pub f_value: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub main_constant: f64,
    /// Number of chain links that failed their check.
    pub violations: usize,
}

impl From<&BoundChain> for TaChainResult {
    fn from(c: &BoundChain) -> Self {
        TaChainResult {
            beta: c.beta,
            gamma: c.gamma,
            boundary_bonds: c.boundary_bonds,
            exact_mi: c.exact_mi,
            mean_particles: c.mean_particles,
            translation_deviation: c.translation_deviation,
            lemma1_value: c.lemma1_value,
            prop1_value: c.prop1_value,
            prop2_value: c.prop2_value,
            theorem_value: c.theorem_value,
            slack_lemma1: c.slack_lemma1,
            slack_prop1: c.slack_prop1,
            slack_theorem: c.slack_theorem,
            g: c.g,
            f_value: c.f_value,
            eps1: c.eps1,
            eps2: c.eps2,
            main_constant: c.main_constant,
            violations: c.violations.len(),
        }
    }
}

/// Opaque handle to a diagonalized Hamiltonian.
pub struct TaPrepared(Prepared);

/// Fills `out` with the library defaults for the given model.
///
/// # Safety
/// `out` must be null or point to writable memory for a `TaChainParams`.
#[no_mangle]
pub unsafe extern "C" fn ta_chain_params_init(
    dim: usize,
    side: usize,
    n_max: usize,
    j: f64,
    u: f64,
    mu: f64,
    out: *mut TaChainParams,
) -> TaStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = (&ChainParams::new(dim, side, n_max, j, u, mu)).into();
        Ok(())
    })
}

/// Closed-form constant `c(J, U, μ)` of the area law in dimension `dim`.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn ta_main_constant(
    j: f64,
    u: f64,
    mu: f64,
    dim: usize,
    out: *mut f64,
) -> TaStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = bounds::main_constant(j, u, mu, dim).map_err(lift)?;
        Ok(())
    })
}

/// Area-law bound `c · max{1, β} · L^{d-1}`.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn ta_theorem_bound(
    beta: f64,
    side: usize,
    dim: usize,
    j: f64,
    u: f64,
    mu: f64,
    out: *mut f64,
) -> TaStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = bounds::theorem_bound(beta, side, dim, j, u, mu).map_err(lift)?;
        Ok(())
    })
}

/// Diagonalizes and evaluates the chain at a single temperature.
///
/// # Safety
/// `params` must be null or point to a valid `TaChainParams`; `out` must be
/// null or point to writable memory for a `TaChainResult`.
#[no_mangle]
pub unsafe extern "C" fn ta_verify_chain(
    params: *const TaChainParams,
    beta: f64,
    out: *mut TaChainResult,
) -> TaStatus {
    guard(|| {
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let chain = bounds::verify_chain(&params.into(), beta).map_err(lift)?;
        *out = (&chain).into();
        Ok(())
    })
}

/// Diagonalizes once for all of `betas` and stores the handle in `out`.
///
/// # Safety
/// `params` must point to a valid `TaChainParams`, `betas` to `n_betas`
/// readable doubles, and `out` to a writable handle pointer. The handle must
/// be released with [`ta_prepared_free`].
#[no_mangle]
pub unsafe extern "C" fn ta_prepared_new(
    params: *const TaChainParams,
    betas: *const f64,
    n_betas: usize,
    out: *mut *mut TaPrepared,
) -> TaStatus {
    guard(|| {
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if betas.is_null() && n_betas > 0 {
            return Err(null("betas"));
        }
        let betas = if n_betas == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(betas, n_betas)
        };
        let prepared = Prepared::new(&params.into(), betas).map_err(lift)?;
        *out = Box::into_raw(Box::new(TaPrepared(prepared)));
        Ok(())
    })
}

/// Evaluates the chain of a prepared system at `beta`.
///
/// # Safety
/// `prepared` must be null or a live handle from [`ta_prepared_new`]; `out`
/// must be null or point to writable memory for a `TaChainResult`.
#[no_mangle]
pub unsafe extern "C" fn ta_prepared_evaluate(
    prepared: *const TaPrepared,
    beta: f64,
    out: *mut TaChainResult,
) -> TaStatus {
    guard(|| {
        let prepared = prepared.as_ref().ok_or_else(|| null("prepared"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = (&prepared.0.evaluate(beta).map_err(lift)?).into();
        Ok(())
    })
}

/// Releases a handle from [`ta_prepared_new`]. Null is ignored.
///
/// # Safety
/// `prepared` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ta_prepared_free(prepared: *mut TaPrepared) {
    if !prepared.is_null() {
        drop(Box::from_raw(prepared));
    }
}
