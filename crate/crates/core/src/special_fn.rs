//! Scalar special functions: log-gamma, Pochhammer symbol, beta function and
//! the three-parameter Mittag-Leffler function
//!
//! ```text
//! E^γ_{ρ,α}(z) = Σ_{k≥0} (γ)_k z^k / (Γ(ρk + α) k!)
//! ```
//!
//! evaluated by direct summation with an explicit truncation rule. No
//! asymptotic expansion is attempted; callers working with operators keep
//! `|z|` inside [`SERIES_ENVELOPE`].

use crate::error::{Error, Result};

/// Largest `|ω|·(ψ(b) − ψ(a))^ρ` accepted by the operator and solver layers.
pub const SERIES_ENVELOPE: f64 = 50.0;

/// Guards the relative stopping test when the partial sum is near zero.
pub const SUM_FLOOR: f64 = 1e-300;

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "log_gamma",
            value: x,
            expected: "x > 0 and finite",
        });
    }
    Ok(libm::lgamma(x))
}

/// 1/Γ(x) for x > 0. Callers guarantee the domain.
#[inline]
pub(crate) fn recip_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    (-libm::lgamma(x)).exp()
}

/// Rising factorial (γ)_k = γ(γ+1)⋯(γ+k−1), with (γ)_0 = 1.
pub fn pochhammer(gamma: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (gamma + f64::from(i)))
}

/// Euler beta function B(x, y) = Γ(x)Γ(y)/Γ(x+y).
pub fn beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) || !(y > 0.0) {
        return Err(Error::Domain {
            what: "beta",
            value: if x > 0.0 { y } else { x },
            expected: "x > 0 and y > 0",
        });
    }
    Ok((log_gamma(x)? + log_gamma(y)? - log_gamma(x + y)?).exp())
}

/// The quadruple (ρ, α, γ, ω) of a Prabhakar kernel.
///
/// `omega` is carried for the operator layer; [`ml3`] takes its argument `z`
/// directly and ignores it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MlParams {
    pub rho: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub omega: f64,
}

impl MlParams {
    pub fn new(rho: f64, alpha: f64, gamma: f64, omega: f64) -> Result<Self> {
        let p = MlParams {
            rho,
            alpha,
            gamma,
            omega,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks the invariants; used after deserialization too.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho", self.rho),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("omega", self.omega),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if self.rho <= 0.0 {
            return Err(Error::invalid(format!("rho must be > 0, got {}", self.rho)));
        }
        if self.alpha < 0.0 {
            return Err(Error::invalid(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Truncation settings shared by every series in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Relative stop threshold on |term| / |partial sum|.
    pub rel_tol: f64,
    /// Hard cap on the number of terms.
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-14,
            max_terms: 1000,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::invalid(format!(
                "rel_tol must lie in (0, 1), got {rel_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(Error::invalid("max_terms must be >= 1"));
        }
        Ok(SeriesControl { rel_tol, max_terms })
    }

    pub(crate) fn tracker(&self) -> Truncation {
        Truncation {
            rel_tol: self.rel_tol,
            sum: 0.0,
            prev_abs: f64::INFINITY,
            count: 0,
            last_abs: 0.0,
        }
    }
}

/// Result of a truncated series together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Number of terms evaluated (including the one that triggered the stop).
    pub terms: usize,
    pub converged: bool,
    /// Magnitude of the last evaluated term.
    pub last_term: f64,
}

impl SeriesSum {
    /// Turns a non-converged sum into [`Error::NotConverged`].
    pub fn into_result(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NotConverged {
                terms: self.terms,
                last_term: self.last_term,
                value: self.value,
            })
        }
    }
}

/// Running state of the stopping rule
/// `|t_k| ≤ rel_tol·max(|S_k|, floor)` and `|t_k| ≤ |t_{k−1}|`.
#[derive(Debug, Clone)]
pub(crate) struct Truncation {
    rel_tol: f64,
    sum: f64,
    prev_abs: f64,
    count: usize,
    last_abs: f64,
}

impl Truncation {
    /// Adds a scalar term; returns `true` once the series may stop.
    pub(crate) fn push(&mut self, term: f64) -> bool {
        self.sum += term;
        let scale = self.sum.abs();
        self.push_magnitude(term.abs(), scale)
    }

    /// Stop test for vector-valued series: `term_abs` and `scale` are norms of
    /// the increment and of the accumulated quantity.
    pub(crate) fn push_magnitude(&mut self, term_abs: f64, scale: f64) -> bool {
        let first = self.count == 0;
        self.count += 1;
        let stop = !first && term_abs <= self.rel_tol * scale.max(SUM_FLOOR) && term_abs <= self.prev_abs;
        self.prev_abs = term_abs;
        self.last_abs = term_abs;
        stop
    }

    pub(crate) fn finish(&self, value: f64, converged: bool) -> SeriesSum {
        SeriesSum {
            value,
            terms: self.count,
            converged,
            last_term: self.last_abs,
        }
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum
    }

    pub(crate) fn terms(&self) -> usize {
        self.count
    }
}

/// Terms `c_k = (γ)_k z^k / (Γ(ρk + α) k!)` of the three-parameter
/// Mittag-Leffler series, evaluated in the log domain so that neither the
/// powers of `z` nor the gamma functions overflow.
///
/// Yields `None` after a vanishing term when every later term is zero too
/// (`z = 0` or a non-positive integer γ).
#[derive(Debug, Clone)]
pub struct MlTerms {
    rho: f64,
    alpha: f64,
    gamma: f64,
    ln_abs_z: f64,
    z_negative: bool,
    k: u32,
    // ln|(γ)_k| and its sign
    ln_poch: f64,
    poch_sign: f64,
    ln_fact: f64,
    exhausted: bool,
}

impl MlTerms {
    pub(crate) fn new_unchecked(rho: f64, alpha: f64, gamma: f64, z: f64) -> Self {
        MlTerms {
            rho,
            alpha,
            gamma,
            ln_abs_z: z.abs().ln(),
            z_negative: z < 0.0,
            k: 0,
            ln_poch: 0.0,
            poch_sign: 1.0,
            ln_fact: 0.0,
            exhausted: false,
        }
    }
}

impl Iterator for MlTerms {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.exhausted {
            return None;
        }
        let k = self.k;
        let term = if k == 0 {
            recip_gamma(self.alpha)
        } else {
            let kf = f64::from(k);
            let factor = self.gamma + kf - 1.0;
            if factor == 0.0 || self.ln_abs_z == f64::NEG_INFINITY {
                self.exhausted = true;
                0.0
            } else {
                self.ln_poch += factor.abs().ln();
                if factor < 0.0 {
                    self.poch_sign = -self.poch_sign;
                }
                self.ln_fact += kf.ln();
                let ln_mag = self.ln_poch + kf * self.ln_abs_z
                    - self.ln_fact
                    - libm::lgamma(self.rho * kf + self.alpha);
                let z_sign = if self.z_negative && k % 2 == 1 { -1.0 } else { 1.0 };
                self.poch_sign * z_sign * ln_mag.exp()
            }
        };
        self.k += 1;
        Some(term)
    }
}

/// Iterator over the terms of E^γ_{ρ,α}(z); requires ρ > 0 and α > 0.
pub fn ml3_terms(p: &MlParams, z: f64) -> Result<MlTerms> {
    check_ml_args(p, z)?;
    Ok(MlTerms::new_unchecked(p.rho, p.alpha, p.gamma, z))
}

fn check_ml_args(p: &MlParams, z: f64) -> Result<()> {
    p.validate()?;
    if p.alpha <= 0.0 {
        return Err(Error::Domain {
            what: "ml3",
            value: p.alpha,
            expected: "alpha > 0 (gamma arguments must stay positive)",
        });
    }
    if !z.is_finite() {
        return Err(Error::Domain {
            what: "ml3",
            value: z,
            expected: "finite z",
        });
    }
    Ok(())
}

/// Three-parameter Mittag-Leffler function E^γ_{ρ,α}(z).
///
/// The returned [`SeriesSum`] reports the number of terms used and whether
/// the stopping rule was met before `ctl.max_terms`; a non-converged sum is
/// still returned with `converged = false`.
pub fn ml3(p: &MlParams, z: f64, ctl: &SeriesControl) -> Result<SeriesSum> {
    check_ml_args(p, z)?;
    let mut tr = ctl.tracker();
    for term in MlTerms::new_unchecked(p.rho, p.alpha, p.gamma, z).take(ctl.max_terms) {
        if tr.push(term) {
            return Ok(tr.finish(tr.sum(), true));
        }
    }
    // exhausted iterator means the remaining terms are identically zero
    let converged = tr.count < ctl.max_terms;
    Ok(tr.finish(tr.sum(), converged))
}

/// Shorthand for [`ml3`] with default control, failing on non-convergence.
pub fn ml3_value(rho: f64, alpha: f64, gamma: f64, z: f64) -> Result<f64> {
    let p = MlParams {
        rho,
        alpha,
        gamma,
        omega: 0.0,
    };
    ml3(&p, z, &SeriesControl::default())?.into_result()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(rho: f64, alpha: f64, gamma: f64) -> MlParams {
        MlParams::new(rho, alpha, gamma, 0.0).unwrap()
    }

    #[test]
    fn log_gamma_known_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_relative_eq!(
            log_gamma(0.5).unwrap(),
            0.572_364_942_924_700_087_1,
            max_relative = 1e-15
        );
        // mpmath, 60 digits: ln(6.3·5.3·4.3·3.3·2.3·1.3) + ln Γ(1.3)
        assert_relative_eq!(
            log_gamma(7.3).unwrap(),
            7.147_892_523_022_249_032_8,
            max_relative = 1e-14
        );
    }

    #[test]
    fn log_gamma_rejects_non_positive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain { .. })));
        assert!(matches!(log_gamma(-2.5), Err(Error::Domain { .. })));
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn log_gamma_matches_factorials() {
        let mut ln_fact = 0.0_f64;
        for n in 1..=170u32 {
            // ln Γ(n+1) = ln n!
            ln_fact += f64::from(n).ln();
            let lg = log_gamma(f64::from(n) + 1.0).unwrap();
            assert_relative_eq!(lg, ln_fact, max_relative = 1e-13, epsilon = 1e-15);
        }
    }

    #[test]
    fn log_gamma_recurrence_over_range() {
        // ln Γ(x+1) − ln Γ(x) = ln x on [1e-3, 1e4]
        let mut x = 1e-3_f64;
        while x < 1e4 {
            let lhs = log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap();
            assert!((lhs - x.ln()).abs() <= 1e-13 * (1.0 + log_gamma(x).unwrap().abs()));
            x *= 1.37;
        }
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(5.2, 0), 1.0);
        assert_eq!(pochhammer(1.0, 3), 6.0);
        assert_eq!(pochhammer(-2.0, 4), 0.0);
        assert_eq!(pochhammer(0.0, 2), 0.0);
        assert_eq!(pochhammer(-0.5, 2), -0.25);
    }

    #[test]
    fn pochhammer_recurrence() {
        for &g in &[-3.0, -0.5, 0.0, 1.0, 2.7] {
            for k in 0..=20u32 {
                let lhs = pochhammer(g, k) * (g + f64::from(k));
                let rhs = pochhammer(g, k + 1);
                assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs.abs());
            }
        }
    }

    #[test]
    fn beta_examples() {
        assert_relative_eq!(beta(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(beta(2.0, 3.0).unwrap(), 1.0 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(
            beta(0.5, 0.5).unwrap(),
            std::f64::consts::PI,
            max_relative = 1e-14
        );
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn beta_is_symmetric(x in 1e-3f64..20.0, y in 1e-3f64..20.0) {
            let a = beta(x, y).unwrap();
            let b = beta(y, x).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }

    #[test]
    fn ml3_gamma_zero_is_single_term() {
        let ctl = SeriesControl::default();
        let out = ml3(&params(1.0, 1.0, 0.0), 3.7, &ctl).unwrap();
        assert_eq!(out.value, 1.0);
        assert!(out.converged);
        for &a in &[0.3, 1.0, 2.5] {
            let out = ml3(&params(0.7, a, 0.0), -4.0, &ctl).unwrap();
            assert_eq!(out.value, recip_gamma(a));
        }
    }

    #[test]
    fn ml3_exponential_cases() {
        let ctl = SeriesControl::default();
        let e = std::f64::consts::E;
        let v = ml3(&params(1.0, 1.0, 1.0), 1.0, &ctl).unwrap();
        assert_relative_eq!(v.value, e, max_relative = 1e-15);
        let v = ml3(&params(1.0, 2.0, 1.0), 1.0, &ctl).unwrap();
        assert_relative_eq!(v.value, e - 1.0, max_relative = 1e-14);
    }

    #[test]
    fn ml3_high_precision_oracle() {
        // 60-digit summation of 600 terms (mpmath)
        let v = ml3(&params(0.7, 1.2, 2.5), 0.9, &SeriesControl::default()).unwrap();
        assert!(v.converged);
        assert_relative_eq!(v.value, 9.385_413_280_349_582_111, max_relative = 1e-13);
    }

    #[test]
    fn ml3_exp_over_range() {
        let ctl = SeriesControl::default();
        let p = params(1.0, 1.0, 1.0);
        for i in 0..=100 {
            let z = -5.0 + 0.1 * f64::from(i);
            let v = ml3(&p, z, &ctl).unwrap();
            assert!((v.value - z.exp()).abs() <= 1e-12 * z.abs().exp(), "z = {z}");
        }
    }

    #[test]
    fn ml3_negative_integer_gamma_is_polynomial() {
        // γ = −2: 1/Γ(α) − 2z/Γ(ρ+α) + z²/Γ(2ρ+α)
        let p = params(1.0, 1.0, -2.0);
        let z = 0.8;
        let v = ml3(&p, z, &SeriesControl::default()).unwrap();
        assert!(v.converged);
        assert_relative_eq!(v.value, 1.0 - 2.0 * z + z * z / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn ml3_term_ratio_decays() {
        for &rho in &[0.7, 1.0, 2.0] {
            for &z in &[-10.0, -3.0, 0.5, 10.0] {
                let p = params(rho, 0.8, 1.5);
                let terms: Vec<f64> = ml3_terms(&p, z)
                    .unwrap()
                    .take(200)
                    .take_while(|t| *t != 0.0)
                    .collect();
                let first_small = terms
                    .windows(2)
                    .enumerate()
                    .skip(1)
                    .find(|(_, w)| (w[1] / w[0]).abs() < 0.5);
                assert!(first_small.is_some(), "rho={rho} z={z}");
                // the ratio keeps shrinking far out
                let n = terms.len();
                let late = (terms[n - 1] / terms[n - 2]).abs();
                assert!(late < 0.5, "rho={rho} z={z} late ratio {late}");
            }
        }
    }

    #[test]
    fn ml3_reports_non_convergence() {
        let ctl = SeriesControl::new(1e-14, 5).unwrap();
        let v = ml3(&params(1.0, 1.0, 1.0), 20.0, &ctl).unwrap();
        assert!(!v.converged);
        assert_eq!(v.terms, 5);
        assert!(matches!(v.into_result(), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn ml3_rejects_bad_parameters() {
        assert!(MlParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(MlParams::new(1.0, f64::NAN, 1.0, 0.0).is_err());
        assert!(MlParams::new(1.0, 1.0, f64::INFINITY, 0.0).is_err());
        let p = MlParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
        assert!(ml3(&p, 0.5, &SeriesControl::default()).is_err());
        assert!(SeriesControl::new(0.0, 10).is_err());
        assert!(SeriesControl::new(1e-10, 0).is_err());
    }
}
