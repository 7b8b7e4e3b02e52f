use std::sync::Arc;

use rayon::prelude::*;

use super::{CauchyProblem, Forcing};
use crate::error::{Error, Result};
use crate::operators::{
    check_envelope, prabhakar_apply_grid, rl_apply, rl_apply_grid, rl_power, Grid, OperatorSpec,
    SampledFunction, Window,
};
use crate::special_fn::{ml3, MlParams, SeriesControl};

/// Smallest admissible |1 − w_NN| in forward substitution.
const PIVOT_FLOOR: f64 = 1e-12;

/// The second-kind equation u = u₀ + ∫_a^x K(x,t) u(t) dt + g(x).
#[derive(Debug, Clone)]
pub struct VolterraForm<'p> {
    pub problem: &'p CauchyProblem,
    /// E^{γ;ψ}_{ρ,α+β,ω;a+}; the integral term is λ times this operator.
    pub kernel_op: OperatorSpec,
}

pub fn to_volterra(p: &CauchyProblem) -> Result<VolterraForm<'_>> {
    let m = p.op.ml;
    Ok(VolterraForm {
        problem: p,
        kernel_op: OperatorSpec {
            ml: MlParams::new(m.rho, m.alpha + p.beta, m.gamma, m.omega)?,
            psi: p.op.psi.clone(),
            a: p.op.a,
            side: p.op.side,
        },
    })
}

fn check_start(p: &CauchyProblem, grid: &Grid) -> Result<()> {
    let sa = p.op.psi.value(p.op.a);
    if (grid.s()[0] - sa).abs() > 1e-12 * (1.0 + sa.abs()) {
        return Err(Error::Grid(format!(
            "grid starts at x = {}, the problem at a = {}",
            grid.start(),
            p.op.a
        )));
    }
    Ok(())
}

impl VolterraForm<'_> {
    /// u₀(x) = Σ_{i<n} b_i (ψ(x)−ψ(a))^i / i!
    pub fn free_term(&self, x: f64) -> Result<f64> {
        self.problem.free_term(x)
    }

    /// K(x,t) = λψ′(t)(ψ(x)−ψ(t))^{α+β−1} E^γ_{ρ,α+β}[ω(ψ(x)−ψ(t))^ρ] for
    /// t < x, zero otherwise.
    pub fn kernel(&self, x: f64, t: f64) -> Result<f64> {
        let psi = &self.kernel_op.psi;
        let d = psi.eval(x)? - psi.eval(t)?;
        if d <= 0.0 || self.problem.lambda == 0.0 {
            return Ok(0.0);
        }
        let m = &self.kernel_op.ml;
        let z = m.omega * d.powf(m.rho);
        check_envelope(z)?;
        let e = ml3(m, z, &SeriesControl::default())?.into_result()?;
        Ok(self.problem.lambda * psi.prime(t)? * d.powf(m.alpha - 1.0) * e)
    }

    /// g(x) = I^{β;ψ}_{a+} f(x). Closed forms for power and Mittag-Leffler
    /// forcing, product integration otherwise (a callable is sampled on
    /// `nodes` points over `[a, x]`).
    pub fn source(&self, x: f64, nodes: usize) -> Result<f64> {
        let p = self.problem;
        if let Some(v) = self.closed_source(x)? {
            return Ok(v);
        }
        match &p.forcing {
            Forcing::Sampled(f) => {
                p.op.check_grid(f)?;
                rl_apply(p.beta, f, x)
            }
            _ => {
                if x == p.op.a {
                    return Ok(0.0);
                }
                let grid = Arc::new(Grid::uniform_in_s(p.op.psi.clone(), p.op.a, x, nodes)?);
                let f = self.sample_forcing(&grid)?;
                rl_apply(p.beta, &f, x)
            }
        }
    }

    fn closed_source(&self, x: f64) -> Result<Option<f64>> {
        let p = self.problem;
        Ok(match p.forcing {
            Forcing::Zero => Some(0.0),
            Forcing::Power { c, delta } => Some(c * rl_power(p.beta, delta, &p.op.psi, p.op.a, x)?),
            Forcing::Ml(f) => {
                // term-wise: I^β s^{ρk+μ−1} raises every Γ index by β
                let s = p.op.shifted(x)?;
                if s == 0.0 {
                    return Ok(Some(0.0));
                }
                let m = &p.op.ml;
                let z = m.omega * s.powf(m.rho);
                check_envelope(z)?;
                let e = ml3(
                    &MlParams::new(m.rho, f.mu + p.beta, f.sigma, m.omega)?,
                    z,
                    &SeriesControl::default(),
                )?
                .into_result()?;
                Some(f.xi * s.powf(f.mu + p.beta - 1.0) * e)
            }
            _ => None,
        })
    }

    fn sample_forcing(&self, grid: &Arc<Grid>) -> Result<SampledFunction> {
        let p = self.problem;
        let values = grid
            .x()
            .iter()
            .map(|&t| p.forcing.eval(&p.op, t))
            .collect::<Result<Vec<_>>>()?;
        SampledFunction::new(grid.clone(), values)
    }

    /// g at every node of `grid`.
    pub fn source_on_grid(&self, grid: &Arc<Grid>) -> Result<Vec<f64>> {
        let p = self.problem;
        check_start(p, grid)?;
        match &p.forcing {
            Forcing::Function(_) => Ok(rl_apply_grid(p.beta, &self.sample_forcing(grid)?)?.into_values()),
            Forcing::Sampled(f) if f.grid().x() == grid.x() => Ok(rl_apply_grid(p.beta, f)?.into_values()),
            Forcing::Sampled(f) => {
                p.op.check_grid(f)?;
                grid.x().iter().map(|&x| rl_apply(p.beta, f, x)).collect()
            }
            _ => grid
                .x()
                .iter()
                .map(|&x| Ok(self.closed_source(x)?.expect("closed-form forcing")))
                .collect(),
        }
    }

    /// max |u₀ + g + λE u − u| / max |u| over the grid of `u`.
    pub fn residual(&self, u: &SampledFunction, ctl: &SeriesControl) -> Result<f64> {
        let p = self.problem;
        let g = self.source_on_grid(u.grid())?;
        let eu = prabhakar_apply_grid(&self.kernel_op, u, ctl)?;
        let mut diff = 0.0_f64;
        let mut scale = 0.0_f64;
        for (j, &x) in u.grid().x().iter().enumerate() {
            let rhs = self.free_term(x)? + g[j] + p.lambda * eu.values()[j];
            diff = diff.max((rhs - u.values()[j]).abs());
            scale = scale.max(u.values()[j].abs());
        }
        Ok(diff / scale.max(f64::MIN_POSITIVE))
    }
}

/// Product-integration solution on `grid` (which must start at `a`) by
/// forward substitution: at node N,
/// `u_N = (u₀_N + g_N + λ Σ_{l<N} w_{Nl} u_l) / (1 − λ w_{NN})`,
/// the weights w integrating the Mittag-Leffler kernel exactly against
/// piecewise-linear u.
pub fn volterra_solve(p: &CauchyProblem, grid: Arc<Grid>, ctl: &SeriesControl) -> Result<SampledFunction> {
    let form = to_volterra(p)?;
    let n = grid.len();
    let mut u = grid
        .x()
        .iter()
        .map(|&x| form.free_term(x))
        .collect::<Result<Vec<f64>>>()?;
    let g = form.source_on_grid(&grid)?;
    u.iter_mut().zip(&g).for_each(|(v, gv)| *v += gv);
    if p.lambda != 0.0 {
        let m = form.kernel_op.ml;
        let s = grid.s();
        let rows = (1..n)
            .into_par_iter()
            .map(|node| {
                let w = Window::at_node(s, node).expect("node > 0");
                let (wt, sum) = w.prabhakar_weights(m.rho, m.alpha, m.gamma, m.omega, ctl)?;
                if sum.converged {
                    Ok(wt)
                } else {
                    Err(Error::NotConverged {
                        terms: sum.terms,
                        last_term: sum.last_term,
                        value: sum.value,
                    })
                }
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        for (node, row) in (1..n).zip(&rows) {
            let hist: f64 = row[..node].iter().zip(&u[..node]).map(|(w, v)| w * v).sum();
            let pivot = 1.0 - p.lambda * row[node];
            if pivot.abs() < PIVOT_FLOOR {
                return Err(Error::SingularStep { node, pivot });
            }
            u[node] = (u[node] + p.lambda * hist) / pivot;
        }
    }
    SampledFunction::new(grid, u)
}

/// Successive approximations u₀, …, u_m on `grid`:
/// `u_k = u₀ + g + λ E^{γ;ψ}_{ρ,α+β,ω} u_{k−1}`, with u₀ the free term only.
pub fn picard_iterates(
    p: &CauchyProblem,
    grid: Arc<Grid>,
    m: usize,
    ctl: &SeriesControl,
) -> Result<Vec<SampledFunction>> {
    let form = to_volterra(p)?;
    let free = grid
        .x()
        .iter()
        .map(|&x| form.free_term(x))
        .collect::<Result<Vec<f64>>>()?;
    let g = form.source_on_grid(&grid)?;
    let mut out = vec![SampledFunction::new(grid.clone(), free.clone())?];
    for _ in 0..m {
        let prev = out.last().expect("non-empty");
        let values = if p.lambda == 0.0 {
            free.iter().zip(&g).map(|(a, b)| a + b).collect()
        } else {
            let e = prabhakar_apply_grid(&form.kernel_op, prev, ctl)?;
            free.iter()
                .zip(&g)
                .zip(e.values())
                .map(|((a, b), ev)| a + b + p.lambda * ev)
                .collect()
        };
        out.push(SampledFunction::new(grid.clone(), values)?);
    }
    Ok(out)
}

/// u_m(x), iterating on `nodes` points uniform in ψ over `[a, x]`.
pub fn picard_iterate(p: &CauchyProblem, m: usize, x: f64, nodes: usize, ctl: &SeriesControl) -> Result<f64> {
    if x == p.op.a {
        return p.free_term(x);
    }
    let grid = Arc::new(Grid::uniform_in_s(p.op.psi.clone(), p.op.a, x, nodes)?);
    let it = picard_iterates(p, grid, m, ctl)?;
    Ok(*it[m].values().last().expect("non-empty grid"))
}
