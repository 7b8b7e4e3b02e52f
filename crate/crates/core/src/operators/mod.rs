//! ψ-Riemann-Liouville integrals, ψ-Caputo derivatives and the Prabhakar
//! operator
//!
//! ```text
//! E^{γ;ψ}_{ρ,α,ω;a+} f(x) = ∫_a^x ψ′(t) (ψ(x)−ψ(t))^{α−1} E^γ_{ρ,α}[ω(ψ(x)−ψ(t))^ρ] f(t) dt
//! ```
//!
//! Quadrature works in the variable `s = ψ(t)`, where the operator becomes
//! the series Σ_k ω^k (γ)_k / k! · I^{α+ρk} of plain Riemann-Liouville
//! integrals; each of them is evaluated by product integration (see
//! [`product`]). Closed forms are provided for power functions.
//!
//! Only left-sided operators have a quadrature path. Right-sided values are
//! obtained from [`PsiMap::reflected`], or in closed form from
//! [`prabhakar_power_right`].

mod caputo;
mod grid;
mod inverse;
mod product;

use std::sync::Arc;

use rayon::prelude::*;

pub use caputo::{caputo_apply, caputo_apply_sampled, psi_derivative_sampled, CaputoInput, CaputoOptions};
pub use grid::{Grid, SampledFunction};
pub use inverse::{inverse_apply, inverse_apply_many};
pub(crate) use product::{check_envelope, Window};

use crate::error::{Error, Result};
use crate::psi::PsiMap;
use crate::special_fn::{log_gamma, ml3, MlParams, SeriesControl, SeriesSum};

/// Fewer nodes than this in `[a, x]` triggers a coarse-grid warning.
pub const MIN_NODES_WARNING: usize = 8;

/// Which end the operator integrates from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
}

/// The operator E^{γ;ψ}_{ρ,α,ω;a+}: kernel parameters, ψ and base point `a`
/// (the left end of the ψ domain).
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub ml: MlParams,
    pub psi: PsiMap,
    pub a: f64,
    pub side: Side,
}

impl OperatorSpec {
    /// Requires α > 0, except for the identity operator α = γ = 0, and a ψ
    /// that passes [`PsiMap::validate`].
    pub fn new(ml: MlParams, psi: PsiMap) -> Result<Self> {
        ml.validate()?;
        if !(ml.alpha > 0.0 || (ml.alpha == 0.0 && ml.gamma == 0.0)) {
            return Err(Error::invalid(format!(
                "operator order alpha must be > 0 (or alpha = gamma = 0), got alpha = {}, gamma = {}",
                ml.alpha, ml.gamma
            )));
        }
        let diag = psi.validate();
        if !diag.passed {
            return Err(Error::Psi(diag.message.unwrap_or_default()));
        }
        let a = psi.domain().0;
        Ok(OperatorSpec {
            ml,
            psi,
            a,
            side: Side::Left,
        })
    }

    /// Same ψ, ρ and ω with a different order and Pochhammer parameter.
    pub fn with_order(&self, alpha: f64, gamma: f64) -> Result<Self> {
        OperatorSpec::new(
            MlParams::new(self.ml.rho, alpha, gamma, self.ml.omega)?,
            self.psi.clone(),
        )
    }

    /// α = γ = 0: the operator returns its argument.
    pub fn is_identity(&self) -> bool {
        self.ml.alpha == 0.0 && self.ml.gamma == 0.0
    }

    /// `ψ(x) − ψ(a)`.
    pub fn shifted(&self, x: f64) -> Result<f64> {
        Ok(self.psi.eval(x)? - self.psi.value(self.a))
    }

    pub(crate) fn check_grid(&self, f: &SampledFunction) -> Result<()> {
        let s0 = f.grid().s()[0];
        let sa = self.psi.value(self.a);
        if (s0 - sa).abs() > 1e-12 * (1.0 + sa.abs()) {
            return Err(Error::Grid(format!(
                "grid starts at psi = {s0}, operator base point has psi(a) = {sa}"
            )));
        }
        Ok(())
    }
}

/// Weighted sup-norm max |(ψ(x)−ψ(a))^ν f(x)| over grid nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNorm {
    pub nu: f64,
    pub value: f64,
}

fn check_positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: v,
            expected: "a positive finite order",
        })
    }
}

fn target_s(f: &SampledFunction, x: f64) -> Result<f64> {
    let g = f.grid();
    let s = g.psi().eval(x)?;
    let (lo, hi) = (g.s()[0], g.s()[g.len() - 1]);
    if s < lo || s > hi {
        return Err(Error::Domain {
            what: "evaluation point",
            value: x,
            expected: "x inside the grid",
        });
    }
    let inside = g.s().partition_point(|&v| v <= s);
    if inside < MIN_NODES_WARNING && s > lo {
        log::warn!("only {inside} grid nodes in [a, {x}]; product rule may be inaccurate");
    }
    Ok(s)
}

/// Closed form I^{α;ψ}_{a+}(ψ(t)−ψ(a))^{δ−1} = Γ(δ)/Γ(α+δ)·(ψ(x)−ψ(a))^{α+δ−1}.
pub fn rl_power(alpha: f64, delta: f64, psi: &PsiMap, a: f64, x: f64) -> Result<f64> {
    check_positive("rl_power alpha", alpha)?;
    check_positive("rl_power delta", delta)?;
    let s = psi.eval(x)? - psi.eval(a)?;
    if s < 0.0 {
        return Err(Error::Domain {
            what: "rl_power",
            value: x,
            expected: "x >= a",
        });
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok((log_gamma(delta)? - log_gamma(alpha + delta)?).exp() * s.powf(alpha + delta - 1.0))
}

/// Product-integration approximation of I^{α;ψ}_{a+} f(x), the base point
/// being the first grid node.
pub fn rl_apply(alpha: f64, f: &SampledFunction, x: f64) -> Result<f64> {
    check_positive("rl_apply alpha", alpha)?;
    let s = target_s(f, x)?;
    Ok(match Window::new(f.grid().s(), f.values(), s) {
        Some(w) => w.riemann_liouville(alpha),
        None => 0.0,
    })
}

/// I^{α;ψ}_{a+} f at every grid node.
pub fn rl_apply_grid(alpha: f64, f: &SampledFunction) -> Result<SampledFunction> {
    check_positive("rl_apply alpha", alpha)?;
    let s = f.grid().s();
    let values = (0..s.len())
        .into_par_iter()
        .map(|j| match Window::new(s, f.values(), s[j]) {
            Some(w) => w.riemann_liouville(alpha),
            None => 0.0,
        })
        .collect();
    SampledFunction::new(f.grid().clone(), values)
}

/// E^{γ;ψ}_{ρ,α,ω;a+} f(x) with its truncation diagnostics.
pub fn prabhakar_apply_detailed(
    spec: &OperatorSpec,
    f: &SampledFunction,
    x: f64,
    ctl: &SeriesControl,
) -> Result<SeriesSum> {
    spec.check_grid(f)?;
    let s = target_s(f, x)?;
    if spec.is_identity() {
        return Ok(SeriesSum {
            value: f.eval_at_s(s),
            terms: 0,
            converged: true,
            last_term: 0.0,
        });
    }
    let m = &spec.ml;
    match Window::new(f.grid().s(), f.values(), s) {
        Some(w) => w.prabhakar(m.rho, m.alpha, m.gamma, m.omega, ctl),
        None => Ok(SeriesSum {
            value: 0.0,
            terms: 0,
            converged: true,
            last_term: 0.0,
        }),
    }
}

/// E^{γ;ψ}_{ρ,α,ω;a+} f(x); non-convergence of the term series is an error.
pub fn prabhakar_apply(spec: &OperatorSpec, f: &SampledFunction, x: f64, ctl: &SeriesControl) -> Result<f64> {
    prabhakar_apply_detailed(spec, f, x, ctl)?.into_result()
}

/// The operator applied at every node of `f`'s grid.
pub fn prabhakar_apply_grid(
    spec: &OperatorSpec,
    f: &SampledFunction,
    ctl: &SeriesControl,
) -> Result<SampledFunction> {
    spec.check_grid(f)?;
    if spec.is_identity() {
        return Ok(f.clone());
    }
    let m = spec.ml;
    let s = f.grid().s();
    let values = (0..s.len())
        .into_par_iter()
        .map(|j| match Window::new(s, f.values(), s[j]) {
            Some(w) => w.prabhakar(m.rho, m.alpha, m.gamma, m.omega, ctl)?.into_result(),
            None => Ok(0.0),
        })
        .collect::<Result<Vec<f64>>>()?;
    SampledFunction::new(f.grid().clone(), values)
}

/// Convenience: sample `g` on `grid` and apply the operator at all nodes.
pub fn prabhakar_apply_fn(
    spec: &OperatorSpec,
    grid: &Arc<Grid>,
    g: impl Fn(f64) -> f64,
    ctl: &SeriesControl,
) -> Result<SampledFunction> {
    let f = SampledFunction::from_fn(grid.clone(), g)?;
    prabhakar_apply_grid(spec, &f, ctl)
}

fn power_closed_form(ml: &MlParams, beta: f64, s: f64, ctl: &SeriesControl) -> Result<f64> {
    check_positive("power exponent beta", beta)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    if ml.alpha == 0.0 && ml.gamma == 0.0 {
        return Ok(s.powf(beta - 1.0));
    }
    let z = ml.omega * s.powf(ml.rho);
    check_envelope(z)?;
    let p = MlParams::new(ml.rho, ml.alpha + beta, ml.gamma, ml.omega)?;
    let e = ml3(&p, z, ctl)?.into_result()?;
    Ok(log_gamma(beta)?.exp() * s.powf(ml.alpha + beta - 1.0) * e)
}

/// Closed form of the operator on the power function (ψ(t)−ψ(a))^{β−1}:
/// Γ(β)(ψ(x)−ψ(a))^{α+β−1} E^γ_{ρ,α+β}[ω(ψ(x)−ψ(a))^ρ].
pub fn prabhakar_power(spec: &OperatorSpec, beta: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    let s = spec.shifted(x)?;
    power_closed_form(&spec.ml, beta, s, ctl)
}

/// Right-sided mirror: E^{γ;ψ}_{ρ,α,ω;b−} applied to (ψ(b)−ψ(t))^{β−1}, with
/// `b` the right end of the ψ domain.
pub fn prabhakar_power_right(spec: &OperatorSpec, beta: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    let b = spec.psi.domain().1;
    let s = spec.psi.value(b) - spec.psi.eval(x)?;
    power_closed_form(&spec.ml, beta, s, ctl)
}

/// M = |(ψ(b)−ψ(a))^α E^γ_{ρ,α+1}[ω(ψ(b)−ψ(a))^ρ]|, the bound of the
/// operator on the weighted spaces over `[a, b]`.
pub fn bound_constant(spec: &OperatorSpec, b: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(b > spec.a) {
        return Err(Error::Domain {
            what: "bound_constant",
            value: b,
            expected: "b > a",
        });
    }
    check_positive("bound_constant alpha", spec.ml.alpha)?;
    let d = spec.shifted(b)?;
    let m = &spec.ml;
    let z = m.omega * d.powf(m.rho);
    let p = MlParams::new(m.rho, m.alpha + 1.0, m.gamma, m.omega)?;
    let e = ml3(&p, z, ctl)?.into_result()?;
    Ok((d.powf(m.alpha) * e).abs())
}

/// max over nodes of |(ψ(x_j)−ψ(a))^ν f(x_j)|, with `a` the left end of the
/// ψ domain of `f`'s grid.
pub fn weighted_norm(f: &SampledFunction, nu: f64) -> Result<WeightedNorm> {
    if !(0.0..1.0).contains(&nu) {
        return Err(Error::Domain {
            what: "weighted_norm",
            value: nu,
            expected: "0 <= nu < 1",
        });
    }
    let g = f.grid();
    let sa = g.psi().value(g.psi().domain().0);
    let value = g
        .s()
        .iter()
        .zip(f.values())
        .map(|(&s, &v)| ((s - sa).max(0.0).powf(nu) * v).abs())
        .fold(0.0_f64, f64::max);
    Ok(WeightedNorm { nu, value })
}
