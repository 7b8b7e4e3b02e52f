//! Product integration against `(S − s)^{p−1}` with a piecewise-linear
//! reconstruction of the integrand in `s`.
//!
//! For a target `S` the nodes `s_0 < … < s_m ≤ S` (plus `S` itself, with an
//! interpolated value, when it is not a node) are rewritten as normalised
//! distances `δ_l = (S − s_l)/D`, `D = S − s_0`, so `δ_0 = 1` and the last
//! distance is 0. On each piece the two moments
//!
//! ```text
//! A = ∫ u^{p−1} du = (δ_l^p − δ_{l+1}^p)/p
//! B = ∫ u^p     du = (δ_l^{p+1} − δ_{l+1}^{p+1})/(p+1)
//! ```
//!
//! are exact, so the weak singularity at `s = S` costs nothing. Powers are
//! carried in arrays so that the orders `p_k = α + ρk` of a Prabhakar series
//! are reached by one multiplication per node and term.

use crate::error::{Error, Result};
use crate::special_fn::{recip_gamma, MlTerms, SeriesControl, SeriesSum, SERIES_ENVELOPE};

#[derive(Debug, Clone)]
pub(crate) struct Window {
    span: f64,
    delta: Vec<f64>,
    values: Vec<f64>,
}

impl Window {
    /// Window ending at `target`; `values` are the node values (same length as
    /// `s`). Returns `None` for an empty range (`target ≤ s_0`).
    pub(crate) fn new(s: &[f64], values: &[f64], target: f64) -> Option<Window> {
        debug_assert_eq!(s.len(), values.len());
        let s0 = s[0];
        if !(target > s0) {
            return None;
        }
        let span = target - s0;
        let m = s.partition_point(|&v| v < target);
        let mut delta = Vec::with_capacity(m + 1);
        let mut vals = Vec::with_capacity(m + 1);
        for l in 0..m {
            delta.push((target - s[l]) / span);
            vals.push(values[l]);
        }
        let end_value = if m < s.len() && s[m] == target {
            values[m]
        } else if m < s.len() {
            let t = (target - s[m - 1]) / (s[m] - s[m - 1]);
            values[m - 1] + t * (values[m] - values[m - 1])
        } else {
            values[s.len() - 1]
        };
        delta.push(0.0);
        vals.push(end_value);
        delta[0] = 1.0;
        Some(Window {
            span,
            delta,
            values: vals,
        })
    }

    /// Window on the first `n + 1` nodes, ending exactly on node `n`; values
    /// are left empty (weights only).
    pub(crate) fn at_node(s: &[f64], n: usize) -> Option<Window> {
        if n == 0 {
            return None;
        }
        let target = s[n];
        let span = target - s[0];
        let mut delta: Vec<f64> = s[..=n].iter().map(|&v| (target - v) / span).collect();
        delta[0] = 1.0;
        delta[n] = 0.0;
        Some(Window {
            span,
            delta,
            values: Vec::new(),
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.delta.len()
    }

    fn log_delta(&self) -> Vec<f64> {
        self.delta.iter().map(|d| d.ln()).collect()
    }

    /// `δ_l^p` from precomputed `ln δ_l`.
    fn powers_from(&self, ln: &[f64], p: f64) -> Vec<f64> {
        if p == 1.0 {
            self.delta.clone()
        } else {
            ln.iter().map(|l| (p * l).exp()).collect()
        }
    }

    fn powers(&self, p: f64) -> Vec<f64> {
        self.powers_from(&self.log_delta(), p)
    }

    /// Node coefficients `(cx, cy)` such that, for `pw[l] = δ_l^p`, the sum
    /// over pieces of ∫ δ^{p−1}·(linear interpolant of `values`) equals
    /// `Σ pw·cx / p + Σ pw·cy / (p+1)` (summation by parts of the exact
    /// piecewise moments).
    fn duals(&self, values: &[f64]) -> Duals {
        let d = &self.delta;
        let n = d.len();
        let mut cx = vec![0.0; n];
        let mut cy = vec![0.0; n];
        let (mut x_prev, mut y_prev) = (0.0, 0.0);
        for l in 0..n {
            let (x, y) = if l + 1 < n {
                let h = d[l] - d[l + 1];
                (
                    (d[l] * values[l + 1] - d[l + 1] * values[l]) / h,
                    (values[l] - values[l + 1]) / h,
                )
            } else {
                (0.0, 0.0)
            };
            cx[l] = x - x_prev;
            cy[l] = d[l] * (y - y_prev);
            x_prev = x;
            y_prev = y;
        }
        Duals { cx, cy }
    }

    /// Adds `scale ×` the node weights of the same moment into `out`.
    fn add_weights(&self, p: f64, pw: &[f64], scale: f64, out: &mut [f64]) {
        let d = &self.delta;
        for l in 0..d.len() - 1 {
            let h = d[l] - d[l + 1];
            let a = (pw[l] - pw[l + 1]) / p;
            let b = (pw[l] * d[l] - pw[l + 1] * d[l + 1]) / (p + 1.0);
            out[l] += scale * (b - d[l + 1] * a) / h;
            out[l + 1] += scale * (d[l] * a - b) / h;
        }
    }

    /// ψ-Riemann-Liouville integral of order `p` of the window values.
    pub(crate) fn riemann_liouville(&self, p: f64) -> f64 {
        let pw = self.powers(p);
        let duals = self.duals(&self.values);
        duals.rl_term(p, &pw, recip_gamma(p), self.span.powf(p))
    }

    /// Σ_k ω^k (γ)_k / k! · I^{α+ρk} applied to the window values.
    pub(crate) fn prabhakar(
        &self,
        rho: f64,
        alpha: f64,
        gamma: f64,
        omega: f64,
        ctl: &SeriesControl,
    ) -> Result<SeriesSum> {
        let z = omega * self.span.powf(rho);
        check_envelope(z)?;
        let scale = self.span.powf(alpha);
        let ln = self.log_delta();
        let ratio = self.powers_from(&ln, rho);
        let mut pw = self.powers_from(&ln, alpha);
        let duals = self.duals(&self.values);
        let mut tr = ctl.tracker();
        let mut p = alpha;
        for coef in MlTerms::new_unchecked(rho, alpha, gamma, z).take(ctl.max_terms) {
            let term = if coef == 0.0 {
                0.0
            } else {
                duals.rl_term(p, &pw, coef, scale)
            };
            if tr.push(term) {
                return Ok(tr.finish(tr.sum(), true));
            }
            p += rho;
            for (w, r) in pw.iter_mut().zip(&ratio) {
                *w *= r;
            }
        }
        let converged = tr.terms() < ctl.max_terms;
        Ok(tr.finish(tr.sum(), converged))
    }

    /// Node weights `w_l` with `Σ_l w_l u_l = E^{γ}_{ρ,α,ω} u (S)` for a
    /// window built by [`Window::at_node`].
    pub(crate) fn prabhakar_weights(
        &self,
        rho: f64,
        alpha: f64,
        gamma: f64,
        omega: f64,
        ctl: &SeriesControl,
    ) -> Result<(Vec<f64>, SeriesSum)> {
        let z = omega * self.span.powf(rho);
        check_envelope(z)?;
        let scale = self.span.powf(alpha);
        let ln = self.log_delta();
        let ratio = self.powers_from(&ln, rho);
        let mut pw = self.powers_from(&ln, alpha);
        let mut weights = vec![0.0; self.len()];
        let mut term_w = vec![0.0; self.len()];
        let mut tr = ctl.tracker();
        let mut p = alpha;
        for coef in MlTerms::new_unchecked(rho, alpha, gamma, z).take(ctl.max_terms) {
            let mut term_max = 0.0_f64;
            if coef != 0.0 {
                term_w.iter_mut().for_each(|w| *w = 0.0);
                self.add_weights(p, &pw, scale * coef, &mut term_w);
                for (w, t) in weights.iter_mut().zip(&term_w) {
                    *w += t;
                    term_max = term_max.max(t.abs());
                }
            }
            let total = weights.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
            if tr.push_magnitude(term_max, total) {
                return Ok((weights, tr.finish(total, true)));
            }
            p += rho;
            for (w, r) in pw.iter_mut().zip(&ratio) {
                *w *= r;
            }
        }
        let total = weights.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
        let converged = tr.terms() < ctl.max_terms;
        Ok((weights, tr.finish(total, converged)))
    }

    /// Exact derivative in `S` of `I^{1−q}[v − v(s_0)](S)` for the
    /// piecewise-linear reconstruction, `0 < q < 1` (the L1 formula).
    pub(crate) fn caputo_l1(&self, q: f64) -> f64 {
        let d = &self.delta;
        let v = &self.values;
        let e = 1.0 - q;
        let mut acc = 0.0;
        let mut prev = 1.0; // δ_0^{1−q}
        for l in 0..d.len() - 1 {
            let next = if d[l + 1] == 0.0 { 0.0 } else { d[l + 1].powf(e) };
            let h = d[l] - d[l + 1];
            acc += (v[l + 1] - v[l]) / h * (prev - next);
            prev = next;
        }
        acc * self.span.powf(-q) * recip_gamma(2.0 - q)
    }
}

struct Duals {
    cx: Vec<f64>,
    cy: Vec<f64>,
}

impl Duals {
    #[inline]
    fn rl_term(&self, p: f64, pw: &[f64], coef: f64, scale: f64) -> f64 {
        let (sx, sy) = pw
            .iter()
            .zip(self.cx.iter().zip(&self.cy))
            .fold((0.0, 0.0), |(sx, sy), (w, (x, y))| (sx + w * x, sy + w * y));
        (scale * (sx / p + sy / (p + 1.0))) * coef
    }
}

pub(crate) fn check_envelope(z: f64) -> Result<()> {
    if z.abs() <= SERIES_ENVELOPE {
        Ok(())
    } else {
        Err(Error::OutsideEnvelope {
            z,
            limit: SERIES_ENVELOPE,
        })
    }
}
