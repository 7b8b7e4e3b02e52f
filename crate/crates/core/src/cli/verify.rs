//! Seeded property suites behind `prabhakar verify`.

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cauchy::{solve_particular, volterra_solve, CauchyProblem, Forcing, MlForcing, SeriesOptions};
use crate::error::Result;
use crate::operators::{
    inverse_apply_many, prabhakar_apply, prabhakar_apply_grid, prabhakar_power, rl_apply, Grid, OperatorSpec,
    SampledFunction,
};
use crate::psi::{PsiDescriptor, PsiMap};
use crate::special_fn::{log_gamma, ml3, MlParams, SeriesControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Ml,
    Psi,
    Reduction,
    Power,
    Semigroup,
    Inverse,
    Cauchy,
}

impl Suite {
    const EACH: [Suite; 7] = [
        Suite::Ml,
        Suite::Psi,
        Suite::Reduction,
        Suite::Power,
        Suite::Semigroup,
        Suite::Inverse,
        Suite::Cauchy,
    ];

    fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Ml => "ml",
            Suite::Psi => "psi",
            Suite::Reduction => "reduction",
            Suite::Power => "power",
            Suite::Semigroup => "semigroup",
            Suite::Inverse => "inverse",
            Suite::Cauchy => "cauchy",
        }
    }
}

/// Outcome of one suite: worst measured error against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<10} cases={} max_err={:.3e} tol={:.0e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_error,
            self.tolerance
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Runs `suite` (or every suite) with `cases` random cases each. Each suite
/// seeds its own generator from `seed` and its name, so a suite's result
/// does not depend on which other suites ran.
pub fn run_suites(suite: Suite, seed: u64, cases: usize) -> Vec<SuiteReport> {
    let chosen: Vec<Suite> = match suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    chosen
        .into_iter()
        .map(|s| {
            let tag = s
                .name()
                .bytes()
                .fold(0u64, |h, b| h.wrapping_mul(31).wrapping_add(u64::from(b)));
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag);
            let cases = cases.max(1);
            let (tolerance, measured) = match s {
                Suite::Ml => (1e-12, ml_suite(&mut rng, cases)),
                Suite::Psi => (1e-6, psi_suite(&mut rng, cases)),
                Suite::Reduction => (0.0, reduction_suite(&mut rng, cases)),
                Suite::Power => (1e-10, power_suite(&mut rng, cases)),
                Suite::Semigroup => (1e-5, semigroup_suite(&mut rng, cases)),
                Suite::Inverse => (1e-3, inverse_suite(&mut rng, cases)),
                Suite::Cauchy => (1e-4, cauchy_suite(&mut rng, cases)),
                Suite::All => unreachable!("expanded above"),
            };
            let (max_error, detail) = match measured {
                Ok(v) => (v, String::new()),
                Err(e) => (f64::INFINITY, e.to_string()),
            };
            SuiteReport {
                name: s.name(),
                passed: max_error <= tolerance,
                cases,
                max_error,
                tolerance,
                detail,
            }
        })
        .collect()
}

fn identity() -> PsiMap {
    PsiMap::identity(0.0, 1.0).expect("valid map")
}

fn log_unit() -> PsiMap {
    PsiMap::log(1.0, E).expect("valid map")
}

fn any_psi(rng: &mut ChaCha8Rng) -> PsiMap {
    if rng.gen_bool(0.5) {
        identity()
    } else {
        log_unit()
    }
}

fn grid(psi: &PsiMap, n: usize) -> Result<Arc<Grid>> {
    Ok(Arc::new(Grid::over_domain(psi.clone(), n)?))
}

fn spec(psi: &PsiMap, rho: f64, alpha: f64, gamma: f64, omega: f64) -> Result<OperatorSpec> {
    OperatorSpec::new(MlParams::new(rho, alpha, gamma, omega)?, psi.clone())
}

/// `m` evenly spaced interior points of the ψ domain.
fn interior(psi: &PsiMap, m: usize) -> Vec<f64> {
    let (a, b) = psi.domain();
    (1..=m).map(|k| a + (b - a) * k as f64 / (m + 1) as f64).collect()
}

/// max |got − want| / max |want|
fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    let diff = got
        .iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs())
        .fold(0.0, f64::max);
    let scale = want.iter().map(|w| w.abs()).fold(0.0, f64::max);
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn ml_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let ctl = SeriesControl::default();
    let exp_p = MlParams::new(1.0, 1.0, 1.0, 0.0)?;
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let z = rng.gen_range(-5.0..5.0);
        let v = ml3(&exp_p, z, &ctl)?.into_result()?;
        worst = worst.max((v - z.exp()).abs() / z.abs().exp());

        // γ = 0 leaves only the constant term 1/Γ(α)
        let alpha = rng.gen_range(0.2..3.0);
        let p = MlParams::new(rng.gen_range(0.5..2.0), alpha, 0.0, 0.0)?;
        let want = (-log_gamma(alpha)?).exp();
        worst = worst.max((ml3(&p, z, &ctl)?.into_result()? - want).abs() / want);
    }
    Ok(worst)
}

fn psi_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let maps = [
        PsiMap::builtin(PsiDescriptor::Affine { c0: 0.5, c1: 2.0 }, -1.0, 1.0)?,
        log_unit(),
        PsiMap::builtin(PsiDescriptor::Power { sigma: 0.5 }, 0.1, 2.0)?,
        PsiMap::builtin(PsiDescriptor::Exp, -1.0, 1.0)?,
    ];
    let mut worst = 0.0_f64;
    for psi in &maps {
        let (a, b) = psi.domain();
        let h = 1e-5 * (b - a);
        let mut xs: Vec<f64> = (0..cases.max(2))
            .map(|_| rng.gen_range(a + 2.0 * h..b - 2.0 * h))
            .collect();
        for &x in &xs {
            let fd = (psi.value(x + h) - psi.value(x - h)) / (2.0 * h);
            let d = psi.derivative(x);
            worst = worst.max((fd - d).abs() / d.abs());
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let increasing = xs.windows(2).all(|w| psi.value(w[0]) < psi.value(w[1]));
        if !increasing || !psi.validate().passed {
            return Ok(f64::INFINITY);
        }
    }
    Ok(worst)
}

fn random_poly(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let degree = rng.gen_range(0..=4);
    (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn reduction_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let ctl = SeriesControl::default();
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let psi = any_psi(rng);
        let g = grid(&psi, 200)?;
        let coef = random_poly(rng);
        let f = SampledFunction::from_fn(g, |x| coef.iter().rev().fold(0.0, |acc, c| acc * x + c))?;
        let alpha = rng.gen_range(0.3..2.0);
        let sp = spec(
            &psi,
            rng.gen_range(0.5..2.0),
            alpha,
            0.0,
            rng.gen_range(-1.0..1.0),
        )?;
        for x in interior(&psi, 5) {
            let e = prabhakar_apply(&sp, &f, x, &ctl)?;
            let r = rl_apply(alpha, &f, x)?;
            if e.to_bits() != r.to_bits() {
                worst = worst.max((e - r).abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    Ok(worst)
}

fn power_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let ctl = SeriesControl::default();
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let psi = any_psi(rng);
        let g = grid(&psi, 400)?;
        let sa = g.s()[0];
        let sp = spec(
            &psi,
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.3..2.0),
            rng.gen_range(0.0..2.0),
            rng.gen_range(-1.0..1.0),
        )?;
        // linear interpolation in s is exact for these exponents
        let delta = if rng.gen_bool(0.5) { 1.0 } else { 2.0 };
        let f = SampledFunction::from_fn_of_s(g, |s| (s - sa).powf(delta - 1.0))?;
        let xs = interior(&psi, 8);
        let got = xs
            .iter()
            .map(|&x| prabhakar_apply(&sp, &f, x, &ctl))
            .collect::<Result<Vec<_>>>()?;
        let want = xs
            .iter()
            .map(|&x| prabhakar_power(&sp, delta, x, &ctl))
            .collect::<Result<Vec<_>>>()?;
        worst = worst.max(rel_err(&got, &want));
    }
    Ok(worst)
}

/// Outer operator applied by quadrature to the closed-form image of
/// (ψ − ψ(a)) under the inner one, against the closed form of the fused
/// operator (orders and γ added).
fn semigroup_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let ctl = SeriesControl::default();
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let psi = any_psi(rng);
        let g = grid(&psi, 800)?;
        let rho = rng.gen_range(0.7..1.5);
        let omega = rng.gen_range(-0.8..0.8);
        let (a1, a2) = (rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5));
        let (g1, g2) = (rng.gen_range(0.0..1.5), rng.gen_range(0.0..1.5));
        let inner = spec(&psi, rho, a2, g2, omega)?;
        let outer = spec(&psi, rho, a1, g1, omega)?;
        let fused = spec(&psi, rho, a1 + a2, g1 + g2, omega)?;
        let values = g
            .x()
            .iter()
            .map(|&x| prabhakar_power(&inner, 2.0, x, &ctl))
            .collect::<Result<Vec<_>>>()?;
        let mid = SampledFunction::new(g.clone(), values)?;
        let xs = interior(&psi, 10);
        let got = xs
            .iter()
            .map(|&x| prabhakar_apply(&outer, &mid, x, &ctl))
            .collect::<Result<Vec<_>>>()?;
        let want = xs
            .iter()
            .map(|&x| prabhakar_power(&fused, 2.0, x, &ctl))
            .collect::<Result<Vec<_>>>()?;
        worst = worst.max(rel_err(&got, &want));
    }
    Ok(worst)
}

fn inverse_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let ctl = SeriesControl::default();
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let psi = any_psi(rng);
        // the L1 step converges slowly; 800 nodes sit right at 1e-3
        let g = grid(&psi, 1600)?;
        let sa = g.s()[0];
        let alpha = rng.gen_range(0.4..0.6);
        let sp = spec(
            &psi,
            rng.gen_range(0.8..1.2),
            alpha,
            rng.gen_range(0.5..1.5),
            rng.gen_range(-0.5..0.5),
        )?;
        let shifted = rng.gen_bool(0.5);
        let target = |s: f64| if shifted { s - sa } else { 1.0 };
        let f = SampledFunction::from_fn_of_s(g.clone(), target)?;
        let ef = prabhakar_apply_grid(&sp, &f, &ctl)?;
        let xs = interior(&psi, 10);
        let back = inverse_apply_many(&sp, alpha + 0.25, &ef, &xs, &ctl)?;
        for (&x, v) in xs.iter().zip(back) {
            let want = target(psi.value(x));
            worst = worst.max((v - want).abs() / want.abs());
        }
    }
    Ok(worst)
}

fn cauchy_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let ctl = SeriesControl::default();
    let opts = SeriesOptions::default();
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let psi = any_psi(rng);
        let op = spec(
            &psi,
            1.0,
            rng.gen_range(0.3..1.0),
            rng.gen_range(0.5..1.5),
            rng.gen_range(-0.5..0.5),
        )?;
        let forcing = Forcing::Ml(MlForcing {
            xi: rng.gen_range(0.5..1.5),
            mu: rng.gen_range(1.0..2.0),
            sigma: 1.0,
        });
        let p = CauchyProblem::new(
            rng.gen_range(0.5..0.9),
            op,
            rng.gen_range(-0.5..0.5),
            vec![1.0],
            forcing,
        )?;
        let g = grid(&psi, 400)?;
        let u = volterra_solve(&p, g.clone(), &ctl)?;
        let (got, want): (Vec<f64>, Vec<f64>) = g
            .x()
            .iter()
            .zip(u.values())
            .step_by(20)
            .map(|(&x, &v)| Ok((v, solve_particular(&p, x, &opts)?.into_result()?)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        worst = worst.max(rel_err(&got, &want));
    }
    Ok(worst)
}
