//! Gaver-Stehfest numerical inversion of the Laplace transform.
//!
//! The inversion of `f̃` at time `t > 0` is the real-node quadrature
//!
//! ```text
//! f(t) ≈ (ln2/t) Σ_{i=1}^{M} μ_i f̃(i·ln2/t)
//! ```
//!
//! with weights
//!
//! ```text
//! μ_i = (−1)^{M/2+i} Σ_{k=⌊(i+1)/2⌋}^{min(i,M/2)}
//!         k^{M/2} (2k)! / [ (M/2−k)! k! (k−1)! (i−k)! (2k−i)! ]
//! ```
//!
//! The weights are computed in exact big-integer rational arithmetic
//! (factorials first, division last) and only then exported to `f64`, so the
//! moment identities `Σμ_i = 0` and `Σμ_i/i = 1` hold exactly on the stored
//! rationals for every even `M`. On the `f64` export they hold to better than
//! `1e-12` only up to `M = 8`; from `M = 10` the coefficients grow past 2^26
//! and their rounding alone leaves residuals around `1e-11`..`1e-8`
//! (`M = 10`..`14`). Identity checks therefore run on the rationals, and the
//! export is separately verified to be within 1 ulp of them.
//!
//! Supported order: even `2 ≤ M ≤ 18`. Beyond 18 double precision destroys
//! the alternating sum. With transforms produced by a trained network, small
//! `M` is not merely adequate but preferable: reconstruction error grows
//! sharply with `M` (see the training docs), and `M = 4` is the default.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Maximum supported (even) number of Stehfest terms.
pub const MAX_TERMS: usize = 18;

/// An exact rational with positive denominator, used for the coefficient
/// arithmetic and identity checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ratio {
    num: BigInt,
    den: BigInt,
}

fn gcd(mut a: BigInt, mut b: BigInt) -> BigInt {
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a.abs()
}

impl Ratio {
    pub fn new(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = Self { num, den };
        r.reduce();
        r
    }

    pub fn from_int(n: i64) -> Self {
        Self {
            num: BigInt::from(n),
            den: BigInt::from(1),
        }
    }

    /// Exact conversion: every finite `f64` is a dyadic rational.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "cannot convert non-finite value");
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074i64) // subnormal (or zero)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mut num = BigInt::from(mant);
        let mut den = BigInt::from(1u8);
        if exp >= 0 {
            num <<= exp as usize;
        } else {
            den <<= (-exp) as usize;
        }
        if negative {
            num = -num;
        }
        Self::new(num, den)
    }

    fn reduce(&mut self) {
        if self.den.is_negative() {
            self.num = -std::mem::take(&mut self.num);
            self.den = -std::mem::take(&mut self.den);
        }
        let g = gcd(self.num.clone(), self.den.clone());
        if !g.is_zero() && g != BigInt::from(1u8) {
            self.num = &self.num / &g;
            self.den = &self.den / &g;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            &self.num * &other.den + &other.num * &self.den,
            &self.den * &other.den,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            &self.num * &other.den - &other.num * &self.den,
            &self.den * &other.den,
        )
    }

    pub fn div_int(&self, k: i64) -> Self {
        Self::new(self.num.clone(), &self.den * BigInt::from(k))
    }

    pub fn abs(&self) -> Self {
        Self {
            num: self.num.abs(),
            den: self.den.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Exact comparison `|self| <= |other|` by cross multiplication.
    pub fn abs_le(&self, other: &Self) -> bool {
        self.num.abs() * &other.den <= other.num.abs() * &self.den
    }

    pub fn to_f64(&self) -> f64 {
        // Post-reduction magnitudes for M <= 18 stay far from f64 overflow.
        self.num.to_f64().unwrap() / self.den.to_f64().unwrap()
    }
}

fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::from(1u8);
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

fn check_terms(m: usize) -> Result<()> {
    if m < 2 || m > MAX_TERMS || m % 2 != 0 {
        return Err(Error::Domain(format!(
            "Stehfest term count must be even and within [2, {MAX_TERMS}], got {m}"
        )));
    }
    Ok(())
}

/// Exact Stehfest weights `μ_1..μ_M` as rationals.
pub fn stehfest_coefficients_exact(m: usize) -> Result<Vec<Ratio>> {
    check_terms(m)?;
    let half = m / 2;
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        let mut sum = Ratio::from_int(0);
        for k in (i + 1) / 2..=i.min(half) {
            let num = BigInt::from(k).pow(half as u32) * factorial(2 * k);
            let den = factorial(half - k)
                * factorial(k)
                * factorial(k - 1)
                * factorial(i - k)
                * factorial(2 * k - i);
            sum = sum.add(&Ratio::new(num, den));
        }
        if (half + i) % 2 == 1 {
            sum = Ratio::from_int(0).sub(&sum);
        }
        out.push(sum);
    }
    Ok(out)
}

/// Stehfest weights exported to `f64` (each within 1 ulp of the exact value).
pub fn stehfest_coefficients(m: usize) -> Result<Vec<f64>> {
    Ok(stehfest_coefficients_exact(m)?
        .iter()
        .map(Ratio::to_f64)
        .collect())
}

/// A Stehfest rule: the even term count and its weights, both as the `f64`
/// export and as the exact rationals behind it.
#[derive(Debug, Clone)]
pub struct StehfestRule {
    m: usize,
    coefficients: Vec<f64>,
    exact: Vec<Ratio>,
}

impl StehfestRule {
    pub fn new(m: usize) -> Result<Self> {
        let exact = stehfest_coefficients_exact(m)?;
        let coefficients = exact.iter().map(Ratio::to_f64).collect();
        Ok(Self {
            m,
            coefficients,
            exact,
        })
    }

    /// Builds a rule directly from `f64` weights, treating each as exact.
    ///
    /// Intended for diagnostics and sensitivity checks; such a rule will fail
    /// [`StehfestRule::identity_residuals`] unless the values satisfy the
    /// moment identities.
    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        let exact = coefficients.iter().map(|&c| Ratio::from_f64(c)).collect();
        Self {
            m: coefficients.len(),
            coefficients,
            exact,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// The evaluation nodes `s_i = i·ln2/t`, computed from the formula each
    /// call (never a cached grid).
    pub fn nodes(&self, t: f64) -> Result<Vec<f64>> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("inversion time must be positive, got {t}")));
        }
        let a = std::f64::consts::LN_2 / t;
        Ok((1..=self.m).map(|i| a * i as f64).collect())
    }

    /// `(ln2/t) Σ μ_i f̃(i·ln2/t)` with Neumaier-compensated summation.
    pub fn invert<F: Fn(f64) -> f64>(&self, f_tilde: F, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("inversion time must be positive, got {t}")));
        }
        let a = std::f64::consts::LN_2 / t;
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (i, &mu) in self.coefficients.iter().enumerate() {
            let s = a * (i + 1) as f64;
            let value = f_tilde(s);
            if !value.is_finite() {
                return Err(Error::Domain(format!(
                    "transform value at s = {s} is not finite ({value})"
                )));
            }
            let term = mu * value;
            let t2 = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t2) + term;
            } else {
                comp += (term - t2) + sum;
            }
            sum = t2;
        }
        Ok(a * (sum + comp))
    }

    /// `(|Σμ_i|, |Σμ_i/i − 1|)` evaluated in exact rational arithmetic on the
    /// stored weights. Zero (exactly) for rules built by [`StehfestRule::new`].
    pub fn identity_residuals(&self) -> (f64, f64) {
        let mut s0 = Ratio::from_int(0);
        let mut s1 = Ratio::from_int(0);
        for (i, c) in self.exact.iter().enumerate() {
            s0 = s0.add(c);
            s1 = s1.add(&c.div_int(i as i64 + 1));
        }
        let s1 = s1.sub(&Ratio::from_int(1));
        (s0.abs().to_f64(), s1.abs().to_f64())
    }

    /// True iff every exported `f64` weight is within 1 ulp of its exact
    /// rational, verified exactly.
    pub fn export_within_one_ulp(&self) -> bool {
        self.coefficients.iter().zip(&self.exact).all(|(&f, e)| {
            let diff = Ratio::from_f64(f).sub(e);
            let ulp = f64::from_bits(f.abs().to_bits() + 1) - f.abs();
            diff.abs_le(&Ratio::from_f64(ulp))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn two_term_rule() {
        assert_eq!(stehfest_coefficients(2).unwrap(), vec![2.0, -2.0]);
    }

    #[test]
    fn four_term_rule() {
        assert_eq!(
            stehfest_coefficients(4).unwrap(),
            vec![-2.0, 26.0, -48.0, 24.0]
        );
    }

    #[test]
    fn six_term_rule() {
        assert_eq!(
            stehfest_coefficients(6).unwrap(),
            vec![1.0, -49.0, 366.0, -858.0, 810.0, -270.0]
        );
    }

    #[test]
    fn odd_or_out_of_range_term_counts_are_rejected() {
        for m in [0, 1, 3, 7, 20, 100] {
            assert!(stehfest_coefficients(m).is_err(), "m = {m}");
        }
    }

    #[test]
    fn moment_identities_hold_exactly_for_all_supported_orders() {
        for m in (2..=MAX_TERMS).step_by(2) {
            let rule = StehfestRule::new(m).unwrap();
            let (r0, r1) = rule.identity_residuals();
            assert_eq!(r0, 0.0, "sum of weights, m = {m}");
            assert_eq!(r1, 0.0, "weighted sum, m = {m}");
        }
    }

    #[test]
    fn export_is_faithful_to_one_ulp() {
        for m in (2..=MAX_TERMS).step_by(2) {
            assert!(StehfestRule::new(m).unwrap().export_within_one_ulp());
        }
    }

    #[test]
    fn float_sums_are_tiny_through_m_eight_only() {
        // Pins the f64 behavior documented in the module docs: below 1e-12
        // through M = 8, visibly above from M = 10.
        for m in [2usize, 4, 6, 8] {
            let c = stehfest_coefficients(m).unwrap();
            let s0: f64 = c.iter().sum();
            let s1: f64 = c.iter().enumerate().map(|(i, &v)| v / (i + 1) as f64).sum();
            assert!(s0.abs() <= 1e-12 && (s1 - 1.0).abs() <= 1e-12, "m = {m}");
        }
        let c = stehfest_coefficients(12).unwrap();
        let s1: f64 = c.iter().enumerate().map(|(i, &v)| v / (i + 1) as f64).sum();
        assert!(
            (s1 - 1.0).abs() > 1e-12,
            "f64 quantization floor unexpectedly vanished; update the docs"
        );
    }

    #[test]
    fn corrupting_a_coefficient_breaks_the_weighted_identity() {
        let mut c = stehfest_coefficients(4).unwrap();
        c[2] += 1e-6;
        let rule = StehfestRule::from_coefficients(c);
        let (_, r1) = rule.identity_residuals();
        assert!(r1 > 1e-8, "corruption must be detected, residual {r1}");
    }

    #[test]
    fn inverts_one_over_s_to_machine_accuracy_for_small_m() {
        for m in [2usize, 4, 6, 8] {
            let rule = StehfestRule::new(m).unwrap();
            for &t in &[0.01, 0.5, 1.0, 7.3] {
                let v = rule.invert(|s| 1.0 / s, t).unwrap();
                assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn inverts_one_over_s_squared() {
        let rule = StehfestRule::new(12).unwrap();
        let v = rule.invert(|s| 1.0 / (s * s), 1.0).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn inverts_exponential_pair() {
        let rule = StehfestRule::new(12).unwrap();
        for &t in &[0.5, 1.0, 2.0] {
            let v = rule.invert(|s| 1.0 / (s + 1.0), t).unwrap();
            assert_relative_eq!(v, (-t).exp(), max_relative = 1e-2);
        }
    }

    #[test]
    fn inversion_is_linear_in_the_transform() {
        // Linearity is algebraically exact; in floats the weighted sum
        // re-rounds, leaving a residue of order Σ|μ|·eps.
        for m in [4usize, 8, 12] {
            let rule = StehfestRule::new(m).unwrap();
            let f1 = |s: f64| 1.0 / s;
            let f2 = |s: f64| 1.0 / (s + 2.0);
            for &(a, b) in &[(2.0, -3.0), (0.125, 4.0), (1.0, 1.0)] {
                let combined = rule.invert(|s| a * f1(s) + b * f2(s), 0.8).unwrap();
                let separate =
                    a * rule.invert(f1, 0.8).unwrap() + b * rule.invert(f2, 0.8).unwrap();
                let scale: f64 = rule.coefficients().iter().map(|c| c.abs()).sum();
                assert!(
                    (combined - separate).abs() <= 100.0 * f64::EPSILON * scale,
                    "m={m} a={a} b={b}: {combined} vs {separate}"
                );
            }
        }
    }

    #[test]
    fn rejects_non_positive_time_and_non_finite_transforms() {
        let rule = StehfestRule::new(4).unwrap();
        assert!(rule.invert(|s| 1.0 / s, 0.0).is_err());
        assert!(rule.invert(|s| 1.0 / s, -1.0).is_err());
        assert!(rule.invert(|_| f64::NAN, 1.0).is_err());
    }

    #[test]
    fn nodes_follow_the_formula_exactly() {
        let rule = StehfestRule::new(6).unwrap();
        let t = 0.37;
        let nodes = rule.nodes(t).unwrap();
        for (i, &s) in nodes.iter().enumerate() {
            assert_eq!(s, std::f64::consts::LN_2 / t * (i + 1) as f64);
        }
    }
}
