//! C ABI over the `prabhakar` crate.
//!
//! Every entry point returns a [`PrbStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`prb_last_error`]. Operators and Cauchy problems are opaque handles that
//! the caller releases with the matching `_free` function. Panics never
//! cross the boundary; they surface as `PRB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use prabhakar::cauchy::{volterra_solve, CauchyProblem, SeriesOptions, SeriesSolution};
use prabhakar::operators::{
    bound_constant, prabhakar_apply_detailed, prabhakar_power, prabhakar_power_right, Grid, OperatorSpec,
    SampledFunction,
};
use prabhakar::psi::{PsiDescriptor, PsiMap};
use prabhakar::special_fn::{self, MlParams, SeriesControl};
use prabhakar::Error;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrbStatus {
    Ok = 0,
    InvalidArgument = 1,
    Domain = 2,
    NotConverged = 3,
    OutsideEnvelope = 4,
    Grid = 5,
    Psi = 6,
    SingularStep = 7,
    NullPointer = 8,
    Panic = 9,
}

/// Built-in ψ families; see [`prb_operator_new`] for the parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrbPsiKind {
    Identity = 0,
    /// p0 + p1·x
    Affine = 1,
    Log = 2,
    /// x^p0
    Power = 3,
    Exp = 4,
}

/// Series truncation controls; zeroed fields take the library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PrbSeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

/// A summed series with its diagnostics.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PrbSeriesResult {
    pub value: f64,
    pub terms: usize,
    pub converged: bool,
}

/// Opaque operator handle.
pub struct PrbOperator {
    spec: OperatorSpec,
}

/// Opaque Cauchy problem handle.
pub struct PrbProblem {
    problem: CauchyProblem,
}

struct Failure {
    status: PrbStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain { .. } => PrbStatus::Domain,
            Error::InvalidParameter(_) => PrbStatus::InvalidArgument,
            Error::NotConverged { .. } => PrbStatus::NotConverged,
            Error::OutsideEnvelope { .. } => PrbStatus::OutsideEnvelope,
            Error::Grid(_) => PrbStatus::Grid,
            Error::Psi(_) => PrbStatus::Psi,
            Error::SingularStep { .. } => PrbStatus::SingularStep,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn null(what: &str) -> Failure {
    Failure {
        status: PrbStatus::NullPointer,
        message: format!("{what} is NULL"),
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PrbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PrbStatus::Ok
        }
        Ok(Err(f)) => {
            set_last_error(&f.message);
            f.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            PrbStatus::Panic
        }
    }
}

/// # Safety
/// `p` is NULL or valid for a write of `T`.
unsafe fn write<T>(p: *mut T, what: &str, v: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// # Safety
/// `p` is NULL or points to `n` readable values.
unsafe fn read_slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

/// # Safety
/// `p` is NULL or points to `n` writable values.
unsafe fn write_slice<'a, T>(p: *mut T, n: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, n))
}

fn control(ctl: *const PrbSeriesControl) -> Result<SeriesControl, Failure> {
    let mut out = SeriesControl::default();
    // SAFETY: callers pass NULL or a valid struct
    if let Some(c) = unsafe { ctl.as_ref() } {
        if c.rel_tol != 0.0 {
            out.rel_tol = c.rel_tol;
        }
        if c.max_terms != 0 {
            out.max_terms = c.max_terms;
        }
    }
    Ok(SeriesControl::new(out.rel_tol, out.max_terms)?)
}

/// Message of the last failed call on this thread, or NULL after a
/// successful one. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn prb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn prb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// ln Γ(x) for x > 0.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prb_log_gamma(x: f64, out: *mut f64) -> PrbStatus {
    guard(|| write(out, "out", special_fn::log_gamma(x)?))
}

/// B(x, y) for x, y > 0.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prb_beta(x: f64, y: f64, out: *mut f64) -> PrbStatus {
    guard(|| write(out, "out", special_fn::beta(x, y)?))
}

/// Rising factorial (γ)_k.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prb_pochhammer(gamma: f64, k: u32, out: *mut f64) -> PrbStatus {
    guard(|| write(out, "out", special_fn::pochhammer(gamma, k)))
}

/// E^γ_{ρ,α}(z). `ctl` may be NULL. A sum that hits the term cap is still
/// written to `out` and the call returns `PRB_STATUS_NOT_CONVERGED`.
///
/// # Safety
/// `ctl` is NULL or valid for reads; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prb_ml3(
    rho: f64,
    alpha: f64,
    gamma: f64,
    z: f64,
    ctl: *const PrbSeriesControl,
    out: *mut PrbSeriesResult,
) -> PrbStatus {
    guard(|| {
        let p = MlParams::new(rho, alpha, gamma, 0.0)?;
        let s = special_fn::ml3(&p, z, &control(ctl)?)?;
        write(
            out,
            "out",
            PrbSeriesResult {
                value: s.value,
                terms: s.terms,
                converged: s.converged,
            },
        )?;
        s.into_result().map(drop).map_err(Failure::from)
    })
}

/// Creates a left-sided operator with base point `a` on the ψ domain
/// `[a, b]`. `p0` and `p1` parametrise affine (offset, slope) and power
/// (exponent) maps and are ignored otherwise.
///
/// # Safety
/// `out` must be valid for writes. The handle is released with
/// [`prb_operator_free`].
#[no_mangle]
pub unsafe extern "C" fn prb_operator_new(
    rho: f64,
    alpha: f64,
    gamma: f64,
    omega: f64,
    psi: PrbPsiKind,
    p0: f64,
    p1: f64,
    a: f64,
    b: f64,
    out: *mut *mut PrbOperator,
) -> PrbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let desc = match psi {
            PrbPsiKind::Identity => PsiDescriptor::Identity,
            PrbPsiKind::Affine => PsiDescriptor::Affine { c0: p0, c1: p1 },
            PrbPsiKind::Log => PsiDescriptor::Log,
            PrbPsiKind::Power => PsiDescriptor::Power { sigma: p0 },
            PrbPsiKind::Exp => PsiDescriptor::Exp,
        };
        let map = PsiMap::builtin(desc, a, b)?;
        let spec = OperatorSpec::new(MlParams::new(rho, alpha, gamma, omega)?, map)?;
        out.write(Box::into_raw(Box::new(PrbOperator { spec })));
        Ok(())
    })
}

/// Releases an operator. NULL is ignored.
///
/// # Safety
/// `op` is NULL or a handle from [`prb_operator_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn prb_operator_free(op: *mut PrbOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Closed form of the operator on (ψ(t) − ψ(a))^{δ−1} at `x`.
///
/// # Safety
/// `op` is a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prb_operator_power(
    op: *const PrbOperator,
    delta: f64,
    x: f64,
    out: *mut f64,
) -> PrbStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        write(
            out,
            "out",
            prabhakar_power(&op.spec, delta, x, &SeriesControl::default())?,
        )
    })
}

/// Right-sided counterpart on (ψ(b) − ψ(t))^{δ−1}, with `b` the right end of
/// the ψ domain.
///
/// # Safety
/// `op` is a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prb_operator_power_right(
    op: *const PrbOperator,
    delta: f64,
    x: f64,
    out: *mut f64,
) -> PrbStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        write(
            out,
            "out",
            prabhakar_power_right(&op.spec, delta, x, &SeriesControl::default())?,
        )
    })
}

/// Applies the operator to samples `f[i] = f(nodes[i])` (increasing nodes,
/// the first at `a`) and evaluates the result at each of `xs`.
///
/// # Safety
/// `op` is a live handle; `nodes` and `f` hold `n` values; `xs` and `out`
/// hold `m` values.
#[no_mangle]
pub unsafe extern "C" fn prb_operator_apply(
    op: *const PrbOperator,
    nodes: *const f64,
    f: *const f64,
    n: usize,
    xs: *const f64,
    m: usize,
    out: *mut f64,
) -> PrbStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        let nodes = read_slice(nodes, n, "nodes")?;
        let f = read_slice(f, n, "f")?;
        let xs = read_slice(xs, m, "xs")?;
        let out = write_slice(out, m, "out")?;
        let grid = Arc::new(Grid::new(op.spec.psi.clone(), nodes.to_vec())?);
        let sampled = SampledFunction::new(grid, f.to_vec())?;
        let ctl = SeriesControl::default();
        for (o, &x) in out.iter_mut().zip(xs) {
            *o = prabhakar_apply_detailed(&op.spec, &sampled, x, &ctl)?.into_result()?;
        }
        Ok(())
    })
}

/// Operator-norm bound on `[a, b_end]`.
///
/// # Safety
/// `op` is a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn prb_operator_bound(op: *const PrbOperator, b_end: f64, out: *mut f64) -> PrbStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        write(
            out,
            "out",
            bound_constant(&op.spec, b_end, &SeriesControl::default())?,
        )
    })
}

/// Parses a Cauchy problem from NUL-terminated UTF-8 JSON.
///
/// # Safety
/// `json` is a valid C string; `out` must be valid for writes. The handle is
/// released with [`prb_problem_free`].
#[no_mangle]
pub unsafe extern "C" fn prb_problem_from_json(json: *const c_char, out: *mut *mut PrbProblem) -> PrbStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| Failure {
            status: PrbStatus::InvalidArgument,
            message: format!("problem JSON is not UTF-8: {e}"),
        })?;
        let problem = CauchyProblem::from_json(text)?;
        out.write(Box::into_raw(Box::new(PrbProblem { problem })));
        Ok(())
    })
}

/// Releases a problem. NULL is ignored.
///
/// # Safety
/// `p` is NULL or a handle from [`prb_problem_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn prb_problem_free(p: *mut PrbProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Series solution at each of `xs`. Values are written even when some
/// point does not converge; the call then returns
/// `PRB_STATUS_NOT_CONVERGED`.
///
/// # Safety
/// `p` is a live handle; `xs` and `out` hold `m` values.
#[no_mangle]
pub unsafe extern "C" fn prb_problem_series(
    p: *const PrbProblem,
    xs: *const f64,
    m: usize,
    out: *mut f64,
) -> PrbStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let xs = read_slice(xs, m, "xs")?;
        let out = write_slice(out, m, "out")?;
        let sums = SeriesSolution::new(&p.problem, SeriesOptions::default()).evaluate_many(xs)?;
        for (o, s) in out.iter_mut().zip(&sums) {
            *o = s.value;
        }
        match sums.iter().position(|s| !s.converged) {
            None => Ok(()),
            Some(i) => Err(Failure {
                status: PrbStatus::NotConverged,
                message: format!("outer series did not converge at x = {}", xs[i]),
            }),
        }
    })
}

/// Volterra-equation solution on `n` nodes uniform in ψ over the problem
/// interval; writes the nodes to `x_out` and the solution to `u_out`.
///
/// # Safety
/// `p` is a live handle; `x_out` and `u_out` hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn prb_problem_volterra(
    p: *const PrbProblem,
    n: usize,
    x_out: *mut f64,
    u_out: *mut f64,
) -> PrbStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let x_out = write_slice(x_out, n, "x_out")?;
        let u_out = write_slice(u_out, n, "u_out")?;
        let grid = Arc::new(Grid::over_domain(p.problem.op.psi.clone(), n)?);
        let u = volterra_solve(&p.problem, grid.clone(), &SeriesControl::default())?;
        x_out.copy_from_slice(grid.x());
        u_out.copy_from_slice(u.values());
        Ok(())
    })
}
