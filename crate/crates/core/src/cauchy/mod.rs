//! The fractional Cauchy problem
//!
//! ```text
//! ᶜD^{β;ψ}_{a+} u(x) = λ E^{γ;ψ}_{ρ,α,ω;a+} u(x) + f(x),
//! u^{[i]}_ψ(a) = b_i,  i = 0, …, n−1,  n = ⌊β⌋ + 1,
//! ```
//!
//! its second-kind Volterra form
//! `u = Σ b_i (ψ−ψ(a))^i / i! + λ E^{γ;ψ}_{ρ,α+β,ω;a+} u + I^{β;ψ}_{a+} f`,
//! and three ways of solving it: the closed-form double series
//! ([`solve_series`], [`solve_particular`]), successive approximations
//! ([`picard_iterates`]) and a product-integration solver
//! ([`volterra_solve`]).

mod series;
mod volterra;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use series::{solve_particular, solve_series, solve_series_many, SeriesOptions, SeriesSolution};
pub use volterra::{picard_iterate, picard_iterates, to_volterra, volterra_solve, VolterraForm};

use crate::error::{Error, Result};
use crate::operators::{OperatorSpec, SampledFunction};
use crate::psi::{PsiDescriptor, PsiMap};
use crate::special_fn::{ml3, MlParams, SeriesControl};

/// Forcing ξ(ψ(x)−ψ(a))^{μ−1} E^σ_{ρ,μ}[ω(ψ(x)−ψ(a))^ρ], sharing ρ and ω
/// with the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlForcing {
    pub xi: f64,
    pub mu: f64,
    pub sigma: f64,
}

pub type ForcingFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Right-hand side f of the equation.
#[derive(Clone)]
pub enum Forcing {
    Zero,
    /// c(ψ(x)−ψ(a))^{δ−1}
    Power {
        c: f64,
        delta: f64,
    },
    Ml(MlForcing),
    /// Arbitrary f(x); sampled when needed.
    Function(ForcingFn),
    /// Tabulated f; its grid must start at `a`.
    Sampled(SampledFunction),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::Power { c, delta } => write!(f, "Power {{ c: {c}, delta: {delta} }}"),
            Forcing::Ml(m) => write!(f, "Ml({m:?})"),
            Forcing::Function(_) => write!(f, "Function(..)"),
            Forcing::Sampled(s) => write!(f, "Sampled({} nodes)", s.values().len()),
        }
    }
}

impl Forcing {
    /// f(x) for an operator with base point `op.a`.
    pub fn eval(&self, op: &OperatorSpec, x: f64) -> Result<f64> {
        match self {
            Forcing::Zero => Ok(0.0),
            Forcing::Power { c, delta } => Ok(c * op.shifted(x)?.powf(delta - 1.0)),
            Forcing::Ml(m) => {
                let s = op.shifted(x)?;
                let e = ml3(
                    &MlParams::new(op.ml.rho, m.mu, m.sigma, op.ml.omega)?,
                    op.ml.omega * s.powf(op.ml.rho),
                    &SeriesControl::default(),
                )?
                .into_result()?;
                Ok(m.xi * s.powf(m.mu - 1.0) * e)
            }
            Forcing::Function(g) => Ok(g(x)),
            Forcing::Sampled(f) => f.eval(x),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("forcing {what} must be finite, got {v}")))
            }
        };
        match self {
            Forcing::Power { c, delta } => {
                finite(*c, "c")?;
                if !(*delta > 0.0 && delta.is_finite()) {
                    return Err(Error::invalid(format!("forcing delta must be > 0, got {delta}")));
                }
            }
            Forcing::Ml(m) => {
                finite(m.xi, "xi")?;
                finite(m.sigma, "sigma")?;
                if !(m.mu > 0.0 && m.mu.is_finite()) {
                    return Err(Error::invalid(format!("forcing mu must be > 0, got {}", m.mu)));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// A validated problem; `op.psi`'s domain is the solution interval.
#[derive(Debug, Clone)]
pub struct CauchyProblem {
    pub beta: f64,
    pub op: OperatorSpec,
    pub lambda: f64,
    pub b: Vec<f64>,
    pub forcing: Forcing,
}

impl CauchyProblem {
    pub fn new(beta: f64, op: OperatorSpec, lambda: f64, b: Vec<f64>, forcing: Forcing) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) || beta.fract() == 0.0 {
            return Err(Error::Domain {
                what: "Caputo order beta",
                value: beta,
                expected: "a positive non-integer",
            });
        }
        let n = beta.floor() as usize + 1;
        if b.len() != n {
            return Err(Error::invalid(format!(
                "beta = {beta} needs {n} initial values, got {}",
                b.len()
            )));
        }
        if let Some(v) = b.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("initial value {v} is not finite")));
        }
        if !(op.ml.alpha > 0.0) {
            return Err(Error::invalid("operator order alpha must be > 0"));
        }
        if !lambda.is_finite() {
            return Err(Error::invalid("lambda must be finite"));
        }
        forcing.validate()?;
        Ok(CauchyProblem {
            beta,
            op,
            lambda,
            b,
            forcing,
        })
    }

    /// Number of initial conditions, ⌊β⌋ + 1.
    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn interval(&self) -> (f64, f64) {
        self.op.psi.domain()
    }

    /// Σ_{i<n} b_i (ψ(x)−ψ(a))^i / i!
    pub fn free_term(&self, x: f64) -> Result<f64> {
        let s = self.op.shifted(x)?;
        let mut pow = 1.0;
        let mut acc = 0.0;
        for (i, &bi) in self.b.iter().enumerate() {
            if i > 0 {
                pow *= s / i as f64;
            }
            acc += bi * pow;
        }
        Ok(acc)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProblemJson =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("problem JSON: {e}")))?;
        raw.into_problem()
    }

    /// JSON form; `None` for user ψ maps and callable or sampled forcing.
    pub fn to_json(&self) -> Option<String> {
        let forcing = match &self.forcing {
            Forcing::Zero => ForcingJson::Zero,
            Forcing::Power { c, delta } => ForcingJson::Power { c: *c, delta: *delta },
            Forcing::Ml(m) => ForcingJson::Ml(*m),
            _ => return None,
        };
        let (a, b) = self.interval();
        let raw = ProblemJson {
            beta: self.beta,
            lambda: self.lambda,
            op: OpJson {
                rho: self.op.ml.rho,
                alpha: self.op.ml.alpha,
                gamma: self.op.ml.gamma,
                omega: self.op.ml.omega,
            },
            psi: self.op.psi.descriptor()?,
            interval: [a, b],
            b: self.b.clone(),
            forcing,
        };
        serde_json::to_string(&raw).ok()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpJson {
    rho: f64,
    alpha: f64,
    gamma: f64,
    omega: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ForcingJson {
    Zero,
    Power { c: f64, delta: f64 },
    Ml(MlForcing),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemJson {
    beta: f64,
    lambda: f64,
    op: OpJson,
    psi: PsiDescriptor,
    interval: [f64; 2],
    b: Vec<f64>,
    forcing: ForcingJson,
}

impl ProblemJson {
    fn into_problem(self) -> Result<CauchyProblem> {
        let [a, b] = self.interval;
        let psi = PsiMap::builtin(self.psi, a, b)?;
        let ml = MlParams::new(self.op.rho, self.op.alpha, self.op.gamma, self.op.omega)?;
        let op = OperatorSpec::new(ml, psi)?;
        let forcing = match self.forcing {
            ForcingJson::Zero => Forcing::Zero,
            ForcingJson::Power { c, delta } => Forcing::Power { c, delta },
            ForcingJson::Ml(m) => Forcing::Ml(m),
        };
        CauchyProblem::new(self.beta, op, self.lambda, self.b, forcing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{"beta":0.7,"lambda":0.4,"op":{"rho":1.0,"alpha":0.5,"gamma":1.0,"omega":0.3},"psi":{"kind":"identity"},"interval":[0,1],"b":[1.0],"forcing":{"type":"ml","xi":1.0,"mu":1.2,"sigma":1.0}}"#;

    #[test]
    fn parses_example_json() {
        let p = CauchyProblem::from_json(EXAMPLE).unwrap();
        assert_eq!(p.n(), 1);
        assert_eq!(p.interval(), (0.0, 1.0));
        assert!(
            matches!(p.forcing, Forcing::Ml(MlForcing { xi, mu, sigma }) if xi == 1.0 && mu == 1.2 && sigma == 1.0)
        );
        let again = CauchyProblem::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(again.beta, p.beta);
        assert_eq!(again.b, p.b);
    }

    #[test]
    fn json_forcing_variants() {
        let zero = EXAMPLE.replace(
            r#"{"type":"ml","xi":1.0,"mu":1.2,"sigma":1.0}"#,
            r#"{"type":"zero"}"#,
        );
        assert!(matches!(
            CauchyProblem::from_json(&zero).unwrap().forcing,
            Forcing::Zero
        ));
        let pow = EXAMPLE.replace(
            r#"{"type":"ml","xi":1.0,"mu":1.2,"sigma":1.0}"#,
            r#"{"type":"power","c":2.0,"delta":1.5}"#,
        );
        assert!(matches!(
            CauchyProblem::from_json(&pow).unwrap().forcing,
            Forcing::Power { c, delta } if c == 2.0 && delta == 1.5
        ));
    }

    #[test]
    fn rejects_bad_problems() {
        // wrong number of initial values
        assert!(CauchyProblem::from_json(&EXAMPLE.replace("[1.0]", "[1.0,2.0]")).is_err());
        // integer order
        assert!(CauchyProblem::from_json(&EXAMPLE.replace("0.7", "1.0")).is_err());
        // unknown field
        assert!(CauchyProblem::from_json(&EXAMPLE.replace("\"lambda\"", "\"lam\"")).is_err());
        // mu must be positive
        assert!(CauchyProblem::from_json(&EXAMPLE.replace("1.2", "-1.0")).is_err());
        // log psi needs a > 0
        let log = EXAMPLE.replace("identity", "log");
        assert!(CauchyProblem::from_json(&log).is_err());
    }

    #[test]
    fn free_term_is_taylor_polynomial() {
        let p = CauchyProblem::from_json(&EXAMPLE.replace("0.7", "2.5").replace("[1.0]", "[1.0,2.0,6.0]"))
            .unwrap();
        assert_eq!(p.n(), 3);
        let x = 0.4;
        assert!((p.free_term(x).unwrap() - (1.0 + 2.0 * x + 3.0 * x * x)).abs() < 1e-15);
        assert_eq!(p.free_term(0.0).unwrap(), 1.0);
    }
}
