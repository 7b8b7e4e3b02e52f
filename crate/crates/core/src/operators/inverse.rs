//! Left inverse D = ᶜD^{α_d;ψ} ∘ E^{−γ;ψ}_{ρ,α_d−μ,ω} of the operator of
//! order μ.

use super::caputo::caputo_apply_sampled;
use super::grid::SampledFunction;
use super::{prabhakar_apply_grid, OperatorSpec};
use crate::error::{Error, Result};
use crate::special_fn::SeriesControl;

/// D f at each of `xs`. `spec` is the operator to invert (its α is μ); the
/// inner operator runs on `f`'s grid, and the Caputo step uses the sampled
/// (L1) route.
pub fn inverse_apply_many(
    spec: &OperatorSpec,
    alpha_d: f64,
    f: &SampledFunction,
    xs: &[f64],
    ctl: &SeriesControl,
) -> Result<Vec<f64>> {
    let mu = spec.ml.alpha;
    if !(alpha_d >= mu) || alpha_d.fract() == 0.0 {
        return Err(Error::Domain {
            what: "inverse order alpha_d",
            value: alpha_d,
            expected: "a non-integer alpha_d >= mu",
        });
    }
    if alpha_d == mu && spec.ml.gamma != 0.0 {
        return Err(Error::invalid(
            "alpha_d = mu needs gamma = 0 (the inner operator would have order 0)",
        ));
    }
    let inner = spec.with_order(alpha_d - mu, -spec.ml.gamma)?;
    let h = prabhakar_apply_grid(&inner, f, ctl)?;
    xs.iter().map(|&x| caputo_apply_sampled(alpha_d, &h, x)).collect()
}

/// D f(x).
pub fn inverse_apply(
    spec: &OperatorSpec,
    alpha_d: f64,
    f: &SampledFunction,
    x: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    Ok(inverse_apply_many(spec, alpha_d, f, &[x], ctl)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{prabhakar_apply_grid, Grid};
    use crate::psi::PsiMap;
    use crate::special_fn::MlParams;
    use std::sync::Arc;

    #[test]
    fn degenerate_case_is_caputo_after_rl() {
        let psi = PsiMap::identity(0.0, 1.0).unwrap();
        let spec = OperatorSpec::new(MlParams::new(1.0, 0.6, 0.0, 0.2).unwrap(), psi.clone()).unwrap();
        let g = Arc::new(Grid::over_domain(psi, 401).unwrap());
        let f = SampledFunction::from_fn(g, |x| 1.0 + x).unwrap();
        let ctl = SeriesControl::default();
        let ef = prabhakar_apply_grid(&spec, &f, &ctl).unwrap();
        for &x in &[0.25, 0.5, 0.9] {
            let v = inverse_apply(&spec, 0.6, &ef, x, &ctl).unwrap();
            assert!((v - (1.0 + x)).abs() < 1e-3 * (1.0 + x), "x={x}: {v}");
        }
    }

    #[test]
    fn undoes_prabhakar_operator() {
        let psi = PsiMap::identity(0.0, 1.0).unwrap();
        let spec = OperatorSpec::new(MlParams::new(1.0, 0.5, 1.0, 0.3).unwrap(), psi.clone()).unwrap();
        let g = Arc::new(Grid::over_domain(psi, 401).unwrap());
        let f = SampledFunction::from_fn(g, |_| 1.0).unwrap();
        let ctl = SeriesControl::default();
        let ef = prabhakar_apply_grid(&spec, &f, &ctl).unwrap();
        let xs = [0.2, 0.5, 0.8];
        for v in inverse_apply_many(&spec, 0.75, &ef, &xs, &ctl).unwrap() {
            assert!((v - 1.0).abs() < 1e-3, "{v}");
        }
    }

    #[test]
    fn rejects_bad_orders() {
        let psi = PsiMap::identity(0.0, 1.0).unwrap();
        let spec = OperatorSpec::new(MlParams::new(1.0, 0.5, 1.0, 0.3).unwrap(), psi.clone()).unwrap();
        let g = Arc::new(Grid::over_domain(psi, 11).unwrap());
        let f = SampledFunction::from_fn(g, |_| 1.0).unwrap();
        let ctl = SeriesControl::default();
        assert!(inverse_apply(&spec, 0.4, &f, 0.5, &ctl).is_err());
        assert!(inverse_apply(&spec, 1.0, &f, 0.5, &ctl).is_err());
        assert!(inverse_apply(&spec, 0.5, &f, 0.5, &ctl).is_err());
    }
}
