//! Separable time profiles `f(t) = Σ c_k t^{β_k}` and their Laplace-domain
//! algebra.
//!
//! Profiles of this form are closed under the Laplace transform
//! (`L[t^β] = Γ(β+1) / s^{β+1}`) and under the Caputo derivative
//! (`∂^α t^β = Γ(β+1)/Γ(β+1−α) · t^{β−α}` for `β > 0`, and `0` for constants),
//! which is exactly what the built-in problem library needs to manufacture
//! consistent sources.

use crate::error::{Error, Result};
use crate::laplace::gamma::gamma;

/// A finite sum of power-law terms `Σ c_k t^{β_k}` with every `β_k > −1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProfile {
    terms: Vec<(f64, f64)>, // (coefficient, exponent)
}

impl TimeProfile {
    /// Builds a profile from `(coefficient, exponent)` pairs.
    ///
    /// Exponents must be `> −1` so every term is Laplace-integrable at 0.
    pub fn new(terms: Vec<(f64, f64)>) -> Result<Self> {
        for &(c, beta) in &terms {
            if !(beta > -1.0) || !beta.is_finite() || !c.is_finite() {
                return Err(Error::Domain(format!(
                    "profile term {c}*t^{beta}: exponent must be finite and > -1"
                )));
            }
        }
        Ok(Self { terms })
    }

    /// `c0 + c1·t`, the affine profile used by several manufactured solutions.
    pub fn affine(c0: f64, c1: f64) -> Self {
        Self {
            terms: vec![(c0, 0.0), (c1, 1.0)],
        }
    }

    /// A single constant term `c`.
    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![(c, 0.0)],
        }
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    /// f(t). At `t = 0` terms with `β > 0` contribute 0 and terms with
    /// `β < 0` diverge (the result is then infinite, matching the invariant
    /// that `value_at(0)` is finite iff all exponents are ≥ 0).
    pub fn value_at(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &(c, beta) in &self.terms {
            if t == 0.0 {
                if beta == 0.0 {
                    acc += c;
                } else if beta < 0.0 {
                    acc += c * f64::INFINITY;
                }
            } else {
                acc += c * t.powf(beta);
            }
        }
        acc
    }

    /// Termwise Laplace transform `Σ c_k Γ(β_k+1) s^{−β_k−1}` for `s > 0`.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("laplace transform requires s > 0, got {s}")));
        }
        Ok(self
            .terms
            .iter()
            .map(|&(c, beta)| c * gamma(beta + 1.0) * s.powf(-beta - 1.0))
            .sum())
    }

    /// Termwise Caputo derivative of order `α ∈ (0,1)`.
    ///
    /// Constant terms drop out; `t^β` with `β > 0` maps to
    /// `Γ(β+1)/Γ(β+1−α) · t^{β−α}`. Terms with `β < 0` are outside the
    /// Caputo domain used here and are rejected.
    pub fn caputo(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let mut terms = Vec::new();
        for &(c, beta) in &self.terms {
            if beta == 0.0 {
                continue;
            }
            if beta < 0.0 {
                return Err(Error::Domain(format!(
                    "caputo derivative of t^{beta} with negative exponent is not supported"
                )));
            }
            let coeff = c * gamma(beta + 1.0) / gamma(beta + 1.0 - alpha);
            terms.push((coeff, beta - alpha));
        }
        Ok(Self { terms })
    }

    /// Scales every coefficient by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|&(c, b)| (factor * c, b)).collect(),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "fractional order must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Laplace transform of the Caputo derivative: `s^α f̃(s) − s^{α−1} f(0)`.
///
/// Requires `s > 0` and `α ∈ (0,1)`; approaches the classical
/// `s f̃ − f(0)` continuously as `α → 1`.
pub fn caputo_laplace(s: f64, alpha: f64, f_tilde: f64, f0: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("caputo_laplace requires s > 0, got {s}")));
    }
    check_alpha(alpha)?;
    Ok(s.powf(alpha) * f_tilde - s.powf(alpha - 1.0) * f0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn constant_profile_transforms_to_one_over_s() {
        let p = TimeProfile::constant(1.0);
        // Γ(1) carries the Lanczos approximation's ~1e-16 wobble.
        assert_relative_eq!(p.laplace(2.0).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn linear_profile_transforms_to_one_over_s_squared() {
        let p = TimeProfile::new(vec![(1.0, 1.0)]).unwrap();
        for &s in &[0.3, 1.0, 4.5, 80.0] {
            assert_relative_eq!(p.laplace(s).unwrap(), 1.0 / (s * s), max_relative = 1e-13);
        }
    }

    #[test]
    fn fractional_term_value() {
        // 2 t^{1-α} with α = 0.5 at s = 1: 2 Γ(1.5).
        let p = TimeProfile::new(vec![(2.0, 0.5)]).unwrap();
        assert_relative_eq!(
            p.laplace(1.0).unwrap(),
            2.0 * gamma(1.5),
            max_relative = 1e-13
        );
        assert_relative_eq!(2.0 * gamma(1.5), 1.772_453_850_905_516, max_relative = 1e-12);
    }

    #[test]
    fn non_positive_s_is_rejected() {
        let p = TimeProfile::constant(1.0);
        assert!(p.laplace(0.0).is_err());
        assert!(p.laplace(-3.0).is_err());
    }

    #[test]
    fn exponents_at_or_below_minus_one_are_rejected() {
        assert!(TimeProfile::new(vec![(1.0, -1.0)]).is_err());
        assert!(TimeProfile::new(vec![(1.0, -1.5)]).is_err());
        assert!(TimeProfile::new(vec![(1.0, -0.5)]).is_ok());
    }

    #[test]
    fn value_at_zero() {
        let p = TimeProfile::new(vec![(3.0, 0.0), (7.0, 1.0), (2.0, 0.5)]).unwrap();
        assert_eq!(p.value_at(0.0), 3.0);
        let q = TimeProfile::new(vec![(1.0, -0.5)]).unwrap();
        assert!(!p.value_at(0.0).is_infinite());
        assert!(q.value_at(0.0).is_infinite());
    }

    #[test]
    fn caputo_of_constant_is_zero_through_the_transform() {
        // f(t) = 1: f̃ = 1/s, f(0) = 1 → s^α/s − s^{α−1} ≈ 0.
        for &s in &[0.07, 0.9, 3.0, 55.0, 417.0] {
            for &alpha in &[0.1, 0.5, 0.9] {
                let v = caputo_laplace(s, alpha, 1.0 / s, 1.0).unwrap();
                assert_abs_diff_eq!(v, 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn caputo_laplace_of_linear_profile() {
        // f(t) = t, α = 0.5, s = 4: s^α f̃ = 2/16 = 0.125.
        let v = caputo_laplace(4.0, 0.5, 1.0 / 16.0, 0.0).unwrap();
        assert_relative_eq!(v, 0.125, max_relative = 1e-14);
    }

    #[test]
    fn zero_initial_value_reduces_to_pure_power() {
        for &s in &[0.3, 2.0, 100.0] {
            let v = caputo_laplace(s, 0.37, 0.8, 0.0).unwrap();
            assert_eq!(v, s.powf(0.37) * 0.8);
        }
    }

    #[test]
    fn alpha_outside_unit_interval_is_rejected() {
        assert!(caputo_laplace(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(caputo_laplace(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(caputo_laplace(1.0, 1.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn caputo_then_laplace_matches_transform_rule() {
        // L[∂^α t^β] computed termwise must equal s^α L[t^β] (zero initial
        // value for β > 0).
        for &beta in &[0.25, 0.5, 1.0, 1.5, 2.0] {
            for &alpha in &[0.2, 0.5, 0.8] {
                for &s in &[0.1, 1.0, 7.0, 250.0] {
                    let p = TimeProfile::new(vec![(1.3, beta)]).unwrap();
                    let lhs = caputo_laplace(s, alpha, p.laplace(s).unwrap(), 0.0).unwrap();
                    let rhs = p.caputo(alpha).unwrap().laplace(s).unwrap();
                    assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn caputo_drops_constants() {
        let p = TimeProfile::affine(5.0, 2.0);
        let d = p.caputo(0.5).unwrap();
        assert_eq!(d.terms().len(), 1);
        let (c, b) = d.terms()[0];
        assert_relative_eq!(c, 2.0 / gamma(1.5), max_relative = 1e-13);
        assert_relative_eq!(b, 0.5, max_relative = 1e-15);
    }
}
