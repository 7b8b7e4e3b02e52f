//! ψ-Caputo derivative ᶜD^{β;ψ}_{a+} f = I^{n−β;ψ}_{a+} f^{[n]}_ψ, with
//! f^{[n]}_ψ = ((1/ψ′) d/dx)^n f = dⁿ/dsⁿ f(ψ⁻¹(s)) and n = ⌊β⌋ + 1.

use std::sync::Arc;

use super::grid::{Grid, SampledFunction};
use super::product::Window;
use super::MIN_NODES_WARNING;
use crate::error::{Error, Result};
use crate::psi::PsiMap;

/// How the integrand of the derivative is obtained.
#[derive(Clone, Copy)]
pub enum CaputoInput<'a> {
    /// `f(x)`; its n-th ψ-derivative is taken by finite differences in `s`.
    Function(&'a dyn Fn(f64) -> f64),
    /// `f^{[n]}_ψ(x)` supplied directly.
    PsiDerivative(&'a dyn Fn(f64) -> f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaputoOptions {
    /// Nodes of the `s`-uniform grid over `[a, x]`.
    pub nodes: usize,
    /// Finite-difference step as a fraction of `ψ(b) − ψ(a)`.
    pub step_fraction: f64,
}

impl Default for CaputoOptions {
    fn default() -> Self {
        CaputoOptions {
            nodes: 400,
            step_fraction: 1e-4,
        }
    }
}

fn derivative_count(beta: f64) -> Result<usize> {
    if !(beta > 0.0 && beta.is_finite()) || beta.fract() == 0.0 {
        return Err(Error::Domain {
            what: "Caputo order beta",
            value: beta,
            expected: "a positive non-integer (use an ordinary derivative for integers)",
        });
    }
    Ok(beta.floor() as usize + 1)
}

/// Finite-difference weights for the `order`-th derivative at 0 on the given
/// offsets (Fornberg's recursion).
fn fd_weights(offsets: &[f64], order: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Second-order stencil for the `n`-th derivative at `s` that stays inside
/// `[lo, hi]`: central where possible, one-sided near the ends.
fn stencil(n: usize, s: f64, h: f64, lo: f64, hi: f64) -> Vec<i32> {
    let m = n.div_ceil(2) as i32;
    let reach = (n + 1) as i32;
    if s - f64::from(m) * h >= lo && s + f64::from(m) * h <= hi {
        (-m..=m).collect()
    } else if s - f64::from(m) * h < lo {
        (0..=reach).collect()
    } else {
        (-reach..=0).collect()
    }
}

fn psi_derivative_fd(n: usize, psi: &PsiMap, f: &dyn Fn(f64) -> f64, s: f64, h: f64) -> f64 {
    let (a, b) = psi.domain();
    let (lo, hi) = (psi.value(a), psi.value(b));
    let offs = stencil(n, s, h, lo, hi);
    let w = fd_weights(&offs.iter().map(|&o| f64::from(o)).collect::<Vec<_>>(), n);
    let sum: f64 = offs
        .iter()
        .zip(&w)
        .map(|(&o, &wk)| wk * f(psi.inverse(s + f64::from(o) * h)))
        .sum();
    sum / h.powi(n as i32)
}

/// ᶜD^{β;ψ}_{a+} f(x), with `a` the left end of the ψ domain.
pub fn caputo_apply(
    beta: f64,
    psi: &PsiMap,
    f: CaputoInput<'_>,
    x: f64,
    opts: &CaputoOptions,
) -> Result<f64> {
    let n = derivative_count(beta)?;
    if opts.nodes < 2 || !(opts.step_fraction > 0.0) {
        return Err(Error::invalid(
            "Caputo options need nodes >= 2 and a positive step",
        ));
    }
    let (a, b) = psi.domain();
    let sx = psi.eval(x)?;
    if x == a {
        return Ok(0.0);
    }
    if opts.nodes < MIN_NODES_WARNING {
        log::warn!("only {} nodes in [a, {x}] for the Caputo integral", opts.nodes);
    }
    let grid = Arc::new(Grid::uniform_in_s(psi.clone(), a, x, opts.nodes)?);
    let values: Vec<f64> = match f {
        CaputoInput::PsiDerivative(g) => grid.x().iter().map(|&t| g(t)).collect(),
        CaputoInput::Function(g) => {
            let h = opts.step_fraction * (psi.value(b) - psi.value(a));
            grid.s()
                .iter()
                .map(|&s| psi_derivative_fd(n, psi, g, s, h))
                .collect()
        }
    };
    let sampled = SampledFunction::new(grid, values)?;
    let w = Window::new(sampled.grid().s(), sampled.values(), sx).expect("x > a gives a non-empty window");
    Ok(w.riemann_liouville(n as f64 - beta))
}

/// First ψ-derivative of a sampled function: three-point second-order
/// differences on the (possibly non-uniform) node images.
pub fn psi_derivative_sampled(f: &SampledFunction) -> Result<SampledFunction> {
    let s = f.grid().s();
    let v = f.values();
    let m = s.len();
    if m < 3 {
        return Err(Error::Grid("need at least 3 nodes to differentiate".into()));
    }
    let three = |i: usize, j: usize, k: usize, at: usize| {
        // derivative at s[at] of the parabola through nodes i, j, k
        let (x0, x1, x2) = (s[i], s[j], s[k]);
        let t = s[at];
        v[i] * (2.0 * t - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + v[j] * (2.0 * t - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + v[k] * (2.0 * t - x0 - x1) / ((x2 - x0) * (x2 - x1))
    };
    let d = (0..m)
        .map(|j| match j {
            0 => three(0, 1, 2, 0),
            _ if j == m - 1 => three(m - 3, m - 2, m - 1, m - 1),
            _ => three(j - 1, j, j + 1, j),
        })
        .collect();
    SampledFunction::new(f.grid().clone(), d)
}

/// ᶜD^{β;ψ} of a sampled function at `x`: n − 1 grid derivatives in `s`
/// followed by the L1 formula for the remaining order β − n + 1 ∈ (0, 1).
///
/// Suited to functions whose first ψ-derivative is singular at `a`, such as
/// the output of a fractional integral, where differentiating first loses
/// accuracy. The base point is the first grid node.
pub fn caputo_apply_sampled(beta: f64, h: &SampledFunction, x: f64) -> Result<f64> {
    let n = derivative_count(beta)?;
    let s = h.grid().psi().eval(x)?;
    let mut g = h.clone();
    for _ in 1..n {
        g = psi_derivative_sampled(&g)?;
    }
    let q = beta - (n - 1) as f64;
    Ok(match Window::new(g.grid().s(), g.values(), s) {
        Some(w) => w.caputo_l1(q),
        None => 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::recip_gamma;
    use approx::assert_relative_eq;

    #[test]
    fn fornberg_weights() {
        let w = fd_weights(&[-1.0, 0.0, 1.0], 1);
        assert_relative_eq!(w[0], -0.5);
        assert_relative_eq!(w[2], 0.5);
        assert!(w[1].abs() < 1e-15);
        let w = fd_weights(&[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
        let w = fd_weights(&[0.0, 1.0, 2.0], 1);
        assert_relative_eq!(w[0], -1.5);
        assert_relative_eq!(w[1], 2.0);
        assert_relative_eq!(w[2], -0.5);
    }

    #[test]
    fn caputo_examples() {
        let id = PsiMap::identity(0.0, 1.0).unwrap();
        let o = CaputoOptions::default();
        let c = |_: f64| 3.0;
        assert!(
            caputo_apply(0.5, &id, CaputoInput::Function(&c), 0.7, &o)
                .unwrap()
                .abs()
                < 1e-10
        );
        let lin = |x: f64| x;
        let v = caputo_apply(0.5, &id, CaputoInput::Function(&lin), 1.0, &o).unwrap();
        assert_relative_eq!(v, recip_gamma(1.5), max_relative = 1e-10);
        let sq = |x: f64| x * x;
        let v = caputo_apply(1.5, &id, CaputoInput::Function(&sq), 1.0, &o).unwrap();
        assert_relative_eq!(v, 2.0 * recip_gamma(1.5), max_relative = 1e-7);
        let two = |_: f64| 2.0;
        let v = caputo_apply(1.5, &id, CaputoInput::PsiDerivative(&two), 1.0, &o).unwrap();
        assert_relative_eq!(v, 2.0 * recip_gamma(1.5), max_relative = 1e-14);
        assert_eq!(
            caputo_apply(0.5, &id, CaputoInput::Function(&lin), 0.0, &o).unwrap(),
            0.0
        );
    }

    #[test]
    fn integer_order_rejected() {
        let id = PsiMap::identity(0.0, 1.0).unwrap();
        let f = |x: f64| x;
        let o = CaputoOptions::default();
        assert!(caputo_apply(1.0, &id, CaputoInput::Function(&f), 0.5, &o).is_err());
        assert!(caputo_apply(-0.5, &id, CaputoInput::Function(&f), 0.5, &o).is_err());
    }

    #[test]
    fn caputo_with_log_psi() {
        // f = (ln x)^2 on [1, e]: ᶜD^{0.4} = Γ(3)/Γ(2.6)(ln x)^{1.6}
        let psi = PsiMap::log(1.0, std::f64::consts::E).unwrap();
        let f = |x: f64| x.ln().powi(2);
        let x = 2.2_f64;
        let exact = 2.0 * recip_gamma(2.6) * x.ln().powf(1.6);
        let v = caputo_apply(0.4, &psi, CaputoInput::Function(&f), x, &CaputoOptions::default()).unwrap();
        assert_relative_eq!(v, exact, max_relative = 1e-8);
    }

    #[test]
    fn sampled_route_matches_closed_form() {
        let psi = PsiMap::identity(0.0, 1.0).unwrap();
        let g = Arc::new(Grid::over_domain(psi, 401).unwrap());
        let h = SampledFunction::from_fn(g, |x| x * x).unwrap();
        let v = caputo_apply_sampled(1.5, &h, 1.0).unwrap();
        assert_relative_eq!(v, 2.0 * recip_gamma(1.5), max_relative = 1e-4);
        let v = caputo_apply_sampled(0.5, &h, 0.5).unwrap();
        let exact = 2.0 * recip_gamma(2.5) * 0.5_f64.powf(1.5);
        // L1 error is O(h^{2−q})
        assert_relative_eq!(v, exact, max_relative = 5e-4);
    }
}
