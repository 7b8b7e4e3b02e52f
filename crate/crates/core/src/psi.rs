//! Increasing maps ψ with ψ′ > 0 on a finite working interval.
//!
//! Operators never need ψ⁻¹ during quadrature (grid nodes carry both `x` and
//! `s = ψ(x)`), but grids that are uniform in `s` and the finite-difference
//! ψ-derivatives do; built-in maps invert in closed form, user maps by
//! bisection.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of Chebyshev points used by [`PsiMap::validate`].
pub const DEFAULT_VALIDATION_POINTS: usize = 129;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied ψ with its derivative.
#[derive(Clone)]
pub struct UserPsi {
    pub name: String,
    value: ScalarFn,
    derivative: ScalarFn,
}

impl fmt::Debug for UserPsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserPsi").field("name", &self.name).finish()
    }
}

/// The family a [`PsiMap`] belongs to.
#[derive(Debug, Clone)]
pub enum PsiKind {
    Identity,
    /// ψ(x) = c0 + c1·x with c1 > 0.
    Affine {
        c0: f64,
        c1: f64,
    },
    /// ψ(x) = ln x on x > 0.
    Log,
    /// ψ(x) = x^σ on x ≥ 0, σ > 0.
    Power {
        sigma: f64,
    },
    /// ψ(x) = eˣ.
    Exp,
    User(UserPsi),
}

/// JSON descriptor of the built-in maps, e.g. `{"kind":"log"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PsiDescriptor {
    Identity,
    Affine { c0: f64, c1: f64 },
    Log,
    Power { sigma: f64 },
    Exp,
}

/// An increasing map ψ on the interval `[a, b]`.
#[derive(Debug, Clone)]
pub struct PsiMap {
    kind: PsiKind,
    a: f64,
    b: f64,
}

/// Outcome of [`PsiMap::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PsiDiagnostics {
    pub passed: bool,
    pub min_derivative: f64,
    pub argmin: f64,
    pub samples: usize,
    pub message: Option<String>,
}

impl PsiMap {
    /// Built-in map on `[a, b]`; the domain is checked against the family and
    /// ψ′ is validated on the default Chebyshev sample.
    pub fn builtin(desc: PsiDescriptor, a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        let kind = match desc {
            PsiDescriptor::Identity => PsiKind::Identity,
            PsiDescriptor::Affine { c0, c1 } => {
                if !(c1 > 0.0) || !c0.is_finite() || !c1.is_finite() {
                    return Err(Error::Psi(format!(
                        "affine map needs finite c0 and c1 > 0, got c1 = {c1}"
                    )));
                }
                PsiKind::Affine { c0, c1 }
            }
            PsiDescriptor::Log => {
                if !(a > 0.0) {
                    return Err(Error::Psi(format!("log map needs a > 0, got a = {a}")));
                }
                PsiKind::Log
            }
            PsiDescriptor::Power { sigma } => {
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::Psi(format!("power map needs sigma > 0, got {sigma}")));
                }
                if a < 0.0 {
                    return Err(Error::Psi(format!("power map needs a >= 0, got a = {a}")));
                }
                PsiKind::Power { sigma }
            }
            PsiDescriptor::Exp => PsiKind::Exp,
        };
        let map = PsiMap { kind, a, b };
        let diag = map.validate();
        if !diag.passed {
            return Err(Error::Psi(diag.message.unwrap_or_default()));
        }
        Ok(map)
    }

    pub fn identity(a: f64, b: f64) -> Result<Self> {
        Self::builtin(PsiDescriptor::Identity, a, b)
    }

    pub fn log(a: f64, b: f64) -> Result<Self> {
        Self::builtin(PsiDescriptor::Log, a, b)
    }

    /// User map from a value and derivative closure. Not validated here:
    /// call [`PsiMap::validate`] (operator constructors do).
    pub fn user<F, G>(name: &str, value: F, derivative: G, a: f64, b: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_interval(a, b)?;
        Ok(PsiMap {
            kind: PsiKind::User(UserPsi {
                name: name.to_string(),
                value: Arc::new(value),
                derivative: Arc::new(derivative),
            }),
            a,
            b,
        })
    }

    /// The reflected map ψ̃(x) = −ψ(a + b − x) on the same interval.
    ///
    /// Left-sided operators built on ψ̃ evaluated at `a + b − x` give the
    /// right-sided operators of ψ at `x`.
    pub fn reflected(&self) -> PsiMap {
        let inner = self.clone();
        let inner_d = self.clone();
        let (a, b) = (self.a, self.b);
        PsiMap {
            kind: PsiKind::User(UserPsi {
                name: format!("reflected({})", self.name()),
                value: Arc::new(move |x| -inner.value(a + b - x)),
                derivative: Arc::new(move |x| inner_d.derivative(a + b - x)),
            }),
            a,
            b,
        }
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn name(&self) -> String {
        match &self.kind {
            PsiKind::Identity => "identity".into(),
            PsiKind::Affine { c0, c1 } => format!("affine({c0}, {c1})"),
            PsiKind::Log => "log".into(),
            PsiKind::Power { sigma } => format!("power({sigma})"),
            PsiKind::Exp => "exp".into(),
            PsiKind::User(u) => u.name.clone(),
        }
    }

    /// Descriptor of a built-in map; `None` for user maps.
    pub fn descriptor(&self) -> Option<PsiDescriptor> {
        Some(match self.kind {
            PsiKind::Identity => PsiDescriptor::Identity,
            PsiKind::Affine { c0, c1 } => PsiDescriptor::Affine { c0, c1 },
            PsiKind::Log => PsiDescriptor::Log,
            PsiKind::Power { sigma } => PsiDescriptor::Power { sigma },
            PsiKind::Exp => PsiDescriptor::Exp,
            PsiKind::User(_) => return None,
        })
    }

    fn check_domain(&self, x: f64, what: &'static str) -> Result<()> {
        if x >= self.a && x <= self.b {
            Ok(())
        } else {
            Err(Error::Domain {
                what,
                value: x,
                expected: "x inside the psi domain [a, b]",
            })
        }
    }

    /// ψ(x), checked against the domain.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_domain(x, "psi_eval")?;
        Ok(self.value(x))
    }

    /// ψ′(x), checked against the domain and for positivity.
    pub fn prime(&self, x: f64) -> Result<f64> {
        self.check_domain(x, "psi_prime")?;
        let d = self.derivative(x);
        if d > 0.0 && d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Psi(format!(
                "{}: psi'({x}) = {d} is not positive",
                self.name()
            )))
        }
    }

    /// ψ(x) without the domain check.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            PsiKind::Identity => x,
            PsiKind::Affine { c0, c1 } => c0 + c1 * x,
            PsiKind::Log => x.ln(),
            PsiKind::Power { sigma } => x.powf(*sigma),
            PsiKind::Exp => x.exp(),
            PsiKind::User(u) => (u.value)(x),
        }
    }

    /// ψ′(x) without checks.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.kind {
            PsiKind::Identity => 1.0,
            PsiKind::Affine { c1, .. } => *c1,
            PsiKind::Log => 1.0 / x,
            PsiKind::Power { sigma } => sigma * x.powf(sigma - 1.0),
            PsiKind::Exp => x.exp(),
            PsiKind::User(u) => (u.derivative)(x),
        }
    }

    /// ψ⁻¹(s), clamped to the domain.
    pub fn inverse(&self, s: f64) -> f64 {
        let x = match &self.kind {
            PsiKind::Identity => s,
            PsiKind::Affine { c0, c1 } => (s - c0) / c1,
            PsiKind::Log => s.exp(),
            PsiKind::Power { sigma } => s.max(0.0).powf(1.0 / sigma),
            PsiKind::Exp => s.ln(),
            PsiKind::User(_) => return self.bisect(s),
        };
        x.clamp(self.a, self.b)
    }

    fn bisect(&self, s: f64) -> f64 {
        let (mut lo, mut hi) = (self.a, self.b);
        if s <= self.value(lo) {
            return lo;
        }
        if s >= self.value(hi) {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Samples ψ′ at the default number of Chebyshev-Lobatto points.
    pub fn validate(&self) -> PsiDiagnostics {
        self.validate_with(DEFAULT_VALIDATION_POINTS)
    }

    /// Samples ψ′ (and ψ for finiteness) at `n` Chebyshev-Lobatto points,
    /// endpoints included. Fails if any sampled ψ′ is not strictly positive
    /// or any value is non-finite.
    pub fn validate_with(&self, n: usize) -> PsiDiagnostics {
        let n = n.max(2);
        let mid = 0.5 * (self.a + self.b);
        let half = 0.5 * (self.b - self.a);
        let mut min_d = f64::INFINITY;
        let mut argmin = self.a;
        let mut message = None;
        for j in 0..n {
            // sine form puts the centre and both endpoints on exact nodes
            let theta = std::f64::consts::FRAC_PI_2 * ((n - 1) as f64 - 2.0 * j as f64) / (n - 1) as f64;
            let x = (mid - half * theta.sin()).clamp(self.a, self.b);
            let d = self.derivative(x);
            let v = self.value(x);
            if !v.is_finite() || !d.is_finite() {
                message.get_or_insert_with(|| format!("{}: non-finite psi or psi' at x = {x}", self.name()));
            }
            if d < min_d || d.is_nan() {
                min_d = d;
                argmin = x;
            }
        }
        if message.is_none() && !(min_d > 0.0) {
            message = Some(format!(
                "{}: psi' = {min_d} at x = {argmin} is not positive",
                self.name()
            ));
        }
        PsiDiagnostics {
            passed: message.is_none(),
            min_derivative: min_d,
            argmin,
            samples: n,
            message,
        }
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::Psi(format!(
            "working interval must be finite with a < b, got [{a}, {b}]"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn builtins() -> Vec<PsiMap> {
        vec![
            PsiMap::identity(0.0, 3.0).unwrap(),
            PsiMap::builtin(PsiDescriptor::Affine { c0: -1.0, c1: 2.5 }, -1.0, 2.0).unwrap(),
            PsiMap::log(1.0, 10.0).unwrap(),
            PsiMap::builtin(PsiDescriptor::Power { sigma: 2.0 }, 0.5, 4.0).unwrap(),
            PsiMap::builtin(PsiDescriptor::Exp, -1.0, 2.0).unwrap(),
        ]
    }

    #[test]
    fn eval_examples() {
        assert_eq!(PsiMap::identity(0.0, 5.0).unwrap().eval(2.5).unwrap(), 2.5);
        let log = PsiMap::log(1.0, 10.0).unwrap();
        assert_relative_eq!(log.eval(std::f64::consts::E).unwrap(), 1.0);
        let pow = PsiMap::builtin(PsiDescriptor::Power { sigma: 2.0 }, 0.0, 5.0);
        // ψ′(0) = 0 for x², so validation rejects a domain starting at 0
        assert!(pow.is_err());
        let pow = PsiMap::builtin(PsiDescriptor::Power { sigma: 2.0 }, 1.0, 5.0).unwrap();
        assert_eq!(pow.eval(3.0).unwrap(), 9.0);
    }

    #[test]
    fn prime_examples() {
        assert_eq!(PsiMap::identity(0.0, 1.0).unwrap().prime(0.7).unwrap(), 1.0);
        assert_eq!(PsiMap::log(1.0, 3.0).unwrap().prime(2.0).unwrap(), 0.5);
        let exp = PsiMap::builtin(PsiDescriptor::Exp, -1.0, 1.0).unwrap();
        assert_eq!(exp.prime(0.0).unwrap(), 1.0);
    }

    #[test]
    fn outside_domain_is_an_error() {
        let m = PsiMap::identity(0.0, 1.0).unwrap();
        assert!(matches!(m.eval(1.5), Err(Error::Domain { .. })));
        assert!(matches!(m.prime(-0.1), Err(Error::Domain { .. })));
        assert!(PsiMap::log(0.0, 1.0).is_err());
        assert!(PsiMap::identity(1.0, 1.0).is_err());
    }

    #[test]
    fn validate_examples() {
        let d = PsiMap::identity(0.0, 1.0).unwrap().validate();
        assert!(d.passed);
        assert_eq!(d.min_derivative, 1.0);

        let cube = PsiMap::user("cube", |x| x * x * x, |x| 3.0 * x * x, -1.0, 1.0).unwrap();
        let d = cube.validate();
        assert!(!d.passed);
        assert_eq!(d.argmin, 0.0);
        assert_eq!(d.min_derivative, 0.0);

        let d = PsiMap::log(1.0, 10.0).unwrap().validate();
        assert!(d.passed);
        assert_relative_eq!(d.min_derivative, 0.1, max_relative = 1e-15);
        assert_eq!(d.argmin, 10.0);
        assert_eq!(d.samples, 129);
    }

    #[test]
    fn user_positivity_violation_from_prime() {
        let m = PsiMap::user("dec", |x| -x, |_| -1.0, 0.0, 1.0).unwrap();
        assert!(matches!(m.prime(0.5), Err(Error::Psi(_))));
    }

    #[test]
    fn finite_difference_matches_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in builtins() {
            let (a, b) = m.domain();
            for _ in 0..100 {
                let x = rng.gen_range(a + 0.01 * (b - a)..b - 0.01 * (b - a));
                let h = 1e-5 * (b - a);
                let fd = (m.value(x + h) - m.value(x - h)) / (2.0 * h);
                let d = m.prime(x).unwrap();
                assert!((fd - d).abs() <= 1e-6 * d.abs(), "{} at {x}", m.name());
            }
        }
    }

    #[test]
    fn monotone_on_sorted_grids() {
        for m in builtins() {
            let (a, b) = m.domain();
            let n = 257;
            let vals: Vec<f64> = (0..n)
                .map(|i| m.eval(a + (b - a) * i as f64 / (n - 1) as f64).unwrap())
                .collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]), "{}", m.name());
        }
    }

    #[test]
    fn inverse_round_trips() {
        let user = PsiMap::user("cubic", |x| x + x * x * x, |x| 1.0 + 3.0 * x * x, 0.0, 2.0).unwrap();
        let mut maps = builtins();
        maps.push(user);
        for m in maps {
            let (a, b) = m.domain();
            for i in 0..=20 {
                let x = a + (b - a) * f64::from(i) / 20.0;
                let back = m.inverse(m.value(x));
                assert!(
                    (back - x).abs() <= 1e-12 * (1.0 + x.abs()),
                    "{}: {x} -> {back}",
                    m.name()
                );
            }
        }
    }

    #[test]
    fn reflection_is_increasing() {
        let m = PsiMap::log(1.0, 3.0).unwrap().reflected();
        assert!(m.validate().passed);
        assert_relative_eq!(m.value(1.0), -(3.0_f64).ln());
        assert_relative_eq!(m.derivative(1.0), 1.0 / 3.0);
    }

    #[test]
    fn descriptor_json() {
        let d: PsiDescriptor = serde_json::from_str(r#"{"kind":"log"}"#).unwrap();
        assert_eq!(d, PsiDescriptor::Log);
        let d: PsiDescriptor = serde_json::from_str(r#"{"kind":"power","sigma":0.5}"#).unwrap();
        assert_eq!(d, PsiDescriptor::Power { sigma: 0.5 });
        assert!(serde_json::from_str::<PsiDescriptor>(r#"{"kind":"cube"}"#).is_err());
        let m = PsiMap::builtin(d, 0.25, 1.0).unwrap();
        assert_eq!(m.descriptor(), Some(d));
    }
}
