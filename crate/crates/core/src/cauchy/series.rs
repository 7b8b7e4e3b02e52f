use std::sync::Arc;

use rayon::prelude::*;

use super::{CauchyProblem, Forcing};
use crate::error::{Error, Result};
use crate::operators::{check_envelope, Grid, SampledFunction, Window};
use crate::special_fn::{log_gamma, ml3, MlParams, SeriesControl, SeriesSum};

/// Truncation of the outer sum over j and of the inner series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub j_max: usize,
    pub ctl: SeriesControl,
    /// Grid size used when a callable forcing must be sampled.
    pub nodes: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            j_max: 60,
            ctl: SeriesControl::default(),
            nodes: 400,
        }
    }
}

fn ml(rho: f64, alpha: f64, gamma: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    ml3(&MlParams::new(rho, alpha, gamma, 0.0)?, z, ctl)?.into_result()
}

/// Shared pieces of the j-th outer term at a fixed point.
struct Outer<'p> {
    p: &'p CauchyProblem,
    s: f64,
    z: f64,
    order: f64,
}

impl<'p> Outer<'p> {
    fn new(p: &'p CauchyProblem, x: f64) -> Result<Self> {
        let s = p.op.shifted(x)?;
        let z = p.op.ml.omega * s.powf(p.op.ml.rho);
        check_envelope(z)?;
        Ok(Outer {
            p,
            s,
            z,
            order: p.op.ml.alpha + p.beta,
        })
    }

    fn lambda_pow(&self, j: usize) -> f64 {
        self.p.lambda.powi(j as i32)
    }

    /// λ^j Σ_i b_i s^{i+j(α+β)} E^{jγ}_{ρ,j(α+β)+i+1}(ωs^ρ)
    fn homogeneous(&self, j: usize, ctl: &SeriesControl) -> Result<f64> {
        let lj = self.lambda_pow(j);
        if lj == 0.0 {
            return Ok(0.0);
        }
        let jo = j as f64 * self.order;
        let jg = j as f64 * self.p.op.ml.gamma;
        let mut acc = 0.0;
        for (i, &bi) in self.p.b.iter().enumerate() {
            if bi == 0.0 {
                continue;
            }
            let e = ml(self.p.op.ml.rho, jo + i as f64 + 1.0, jg, self.z, ctl)?;
            acc += bi * self.s.powf(jo + i as f64) * e;
        }
        Ok(lj * acc)
    }

    /// λ^j c Γ(δ) s^{j(α+β)+β+δ−1} E^{jγ}_{ρ,j(α+β)+β+δ}(ωs^ρ)
    fn power(&self, j: usize, c: f64, delta: f64, ctl: &SeriesControl) -> Result<f64> {
        self.closed_form(j, c * log_gamma(delta)?.exp(), delta, 0.0, ctl)
    }

    /// λ^j ξ s^{j(α+β)+β+μ−1} E^{jγ+σ}_{ρ,j(α+β)+β+μ}(ωs^ρ)
    fn closed_form(&self, j: usize, amp: f64, shift: f64, sigma: f64, ctl: &SeriesControl) -> Result<f64> {
        let lj = self.lambda_pow(j);
        if lj == 0.0 || amp == 0.0 {
            return Ok(0.0);
        }
        let jo = j as f64 * self.order;
        let idx = jo + self.p.beta + shift;
        let e = ml(
            self.p.op.ml.rho,
            idx,
            j as f64 * self.p.op.ml.gamma + sigma,
            self.z,
            ctl,
        )?;
        let v = lj * amp * self.s.powf(idx - 1.0) * e;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain {
                what: "forcing term at the base point",
                value: self.s,
                expected: "a forcing that keeps the solution finite at x = a",
            })
        }
    }
}

/// Runs the outer sum with the shared stopping rule; `term(j)` returns the
/// homogeneous and forcing parts of the j-th term.
fn outer_sum(opts: &SeriesOptions, mut term: impl FnMut(usize) -> Result<(f64, f64)>) -> Result<SeriesSum> {
    let mut tr = opts.ctl.tracker();
    let mut total = 0.0;
    for j in 0..opts.j_max {
        let (h, q) = term(j)?;
        total += h + q;
        if tr.push_magnitude(h.abs().max(q.abs()), total.abs()) {
            return Ok(tr.finish(total, true));
        }
    }
    Ok(tr.finish(total, false))
}

/// f sampled on a grid ending at `x` (or taken from its own grid) as a
/// product-integration window.
fn forcing_window(p: &CauchyProblem, x: f64, nodes: usize) -> Result<Option<Window>> {
    let psi = &p.op.psi;
    let sx = psi.eval(x)?;
    match &p.forcing {
        Forcing::Sampled(f) => {
            p.op.check_grid(f)?;
            if sx > *f.grid().s().last().unwrap() {
                return Err(Error::Domain {
                    what: "solve_series",
                    value: x,
                    expected: "x inside the sampled forcing's grid",
                });
            }
            Ok(Window::new(f.grid().s(), f.values(), sx))
        }
        _ => {
            if x == p.op.a {
                return Ok(None);
            }
            let grid = Arc::new(Grid::uniform_in_s(psi.clone(), p.op.a, x, nodes)?);
            let values = grid
                .x()
                .iter()
                .map(|&t| p.forcing.eval(&p.op, t))
                .collect::<Result<Vec<_>>>()?;
            let f = SampledFunction::new(grid, values)?;
            Ok(Window::new(f.grid().s(), f.values(), sx))
        }
    }
}

/// The series solution at `x` with the forcing part
/// Σ_j λ^j E^{jγ;ψ}_{ρ,j(α+β)+β,ω;a+} f(x).
///
/// Power forcing uses its closed form. Every other forcing, including
/// [`Forcing::Ml`], goes through product integration of sampled f.
pub fn solve_series(p: &CauchyProblem, x: f64, opts: &SeriesOptions) -> Result<SeriesSum> {
    let outer = Outer::new(p, x)?;
    let ctl = &opts.ctl;
    let m = p.op.ml;
    let window = match p.forcing {
        Forcing::Zero | Forcing::Power { .. } => None,
        _ => forcing_window(p, x, opts.nodes)?,
    };
    outer_sum(opts, |j| {
        let h = outer.homogeneous(j, ctl)?;
        let q = match (&p.forcing, &window) {
            (Forcing::Zero, _) => 0.0,
            (Forcing::Power { c, delta }, _) => outer.power(j, *c, *delta, ctl)?,
            (_, None) => 0.0,
            (_, Some(w)) => {
                let lj = outer.lambda_pow(j);
                if lj == 0.0 {
                    0.0
                } else {
                    let order = j as f64 * outer.order + p.beta;
                    lj * w
                        .prabhakar(m.rho, order, j as f64 * m.gamma, m.omega, ctl)?
                        .into_result()?
                }
            }
        };
        Ok((h, q))
    })
}

/// Fully closed-form solution for [`Forcing::Ml`].
pub fn solve_particular(p: &CauchyProblem, x: f64, opts: &SeriesOptions) -> Result<SeriesSum> {
    let Forcing::Ml(f) = p.forcing else {
        return Err(Error::invalid("solve_particular needs Mittag-Leffler forcing"));
    };
    let outer = Outer::new(p, x)?;
    let ctl = &opts.ctl;
    outer_sum(opts, |j| {
        Ok((
            outer.homogeneous(j, ctl)?,
            outer.closed_form(j, f.xi, f.mu, f.sigma, ctl)?,
        ))
    })
}

/// [`solve_series`] at many points in parallel.
pub fn solve_series_many(p: &CauchyProblem, xs: &[f64], opts: &SeriesOptions) -> Result<Vec<SeriesSum>> {
    xs.par_iter().map(|&x| solve_series(p, x, opts)).collect()
}

/// The series solution of a problem: closed form for Mittag-Leffler
/// forcing, [`solve_series`] otherwise.
#[derive(Debug, Clone)]
pub struct SeriesSolution<'p> {
    pub problem: &'p CauchyProblem,
    pub opts: SeriesOptions,
}

impl<'p> SeriesSolution<'p> {
    pub fn new(problem: &'p CauchyProblem, opts: SeriesOptions) -> Self {
        SeriesSolution { problem, opts }
    }

    pub fn evaluate(&self, x: f64) -> Result<SeriesSum> {
        match self.problem.forcing {
            Forcing::Ml(_) => solve_particular(self.problem, x, &self.opts),
            _ => solve_series(self.problem, x, &self.opts),
        }
    }

    pub fn evaluate_many(&self, xs: &[f64]) -> Result<Vec<SeriesSum>> {
        xs.par_iter().map(|&x| self.evaluate(x)).collect()
    }
}
