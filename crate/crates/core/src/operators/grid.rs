use std::sync::Arc;

use crate::error::{Error, Result};
use crate::psi::PsiMap;

/// Quadrature nodes carrying both `x_j` and `s_j = ψ(x_j)`.
#[derive(Debug, Clone)]
pub struct Grid {
    psi: PsiMap,
    x: Vec<f64>,
    s: Vec<f64>,
}

impl Grid {
    /// Grid on explicit x-nodes; they must be strictly increasing and lie in
    /// the ψ domain.
    pub fn new(psi: PsiMap, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Grid(format!("need at least 2 nodes, got {}", nodes.len())));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Grid("nodes must be strictly increasing".into()));
        }
        let s = nodes.iter().map(|&x| psi.eval(x)).collect::<Result<Vec<_>>>()?;
        if !s.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Grid("psi is not increasing on the nodes".into()));
        }
        Ok(Grid { psi, x: nodes, s })
    }

    /// `n` nodes uniformly spaced in `s = ψ(x)` over `[lo, hi]`.
    pub fn uniform_in_s(psi: PsiMap, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 nodes, got {n}")));
        }
        if !(hi > lo) {
            return Err(Error::Grid(format!("empty interval [{lo}, {hi}]")));
        }
        let s_lo = psi.eval(lo)?;
        let s_hi = psi.eval(hi)?;
        let step = (s_hi - s_lo) / (n - 1) as f64;
        let s: Vec<f64> = (0..n)
            .map(|j| if j == n - 1 { s_hi } else { s_lo + step * j as f64 })
            .collect();
        let x: Vec<f64> = s
            .iter()
            .enumerate()
            .map(|(j, &sj)| match j {
                0 => lo,
                _ if j == n - 1 => hi,
                _ => psi.inverse(sj),
            })
            .collect();
        if !x.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Grid("grid too fine for the psi inverse".into()));
        }
        Ok(Grid { psi, x, s })
    }

    /// `n` nodes uniform in `s` over the whole ψ domain.
    pub fn over_domain(psi: PsiMap, n: usize) -> Result<Self> {
        let (a, b) = psi.domain();
        Self::uniform_in_s(psi, a, b, n)
    }

    pub fn psi(&self) -> &PsiMap {
        &self.psi
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.x[0]
    }

    pub fn end(&self) -> f64 {
        self.x[self.x.len() - 1]
    }
}

/// A function known through its values on a [`Grid`], reconstructed
/// piecewise-linearly in `s`.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Grid(format!(
                "non-finite value {} at node x = {}",
                values[j],
                grid.x()[j]
            )));
        }
        Ok(SampledFunction { grid, values })
    }

    /// Samples `f(x)` at the grid nodes.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.x().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    /// Samples `g(s)` at the node images `s_j = ψ(x_j)`.
    pub fn from_fn_of_s(grid: Arc<Grid>, g: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.s().iter().map(|&s| g(s)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Piecewise-linear interpolation in `s`, at the point `s` itself.
    pub fn eval_at_s(&self, s: f64) -> f64 {
        let ss = self.grid.s();
        let n = ss.len();
        if s <= ss[0] {
            return self.values[0];
        }
        if s >= ss[n - 1] {
            return self.values[n - 1];
        }
        let j = ss.partition_point(|&v| v <= s) - 1;
        let t = (s - ss[j]) / (ss[j + 1] - ss[j]);
        self.values[j] + t * (self.values[j + 1] - self.values[j])
    }

    /// Interpolated value at `x`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval_at_s(self.grid.psi().eval(x)?))
    }

    /// Linear combination `λ·self + μ·other` on a shared grid.
    pub fn combine(&self, lambda: f64, other: &SampledFunction, mu: f64) -> Result<Self> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.x() != other.grid.x() {
            return Err(Error::Grid("functions live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(f, g)| lambda * f + mu * g)
            .collect();
        Self::new(self.grid.clone(), values)
    }
}
