//! Brute-force quadrature oracles for the Laplace-domain algebra: every
//! closed-form transform the library computes is also evaluated by direct
//! numerical integration of `∫ e^{-st} f(t) dt`.

mod common;

use common::{laplace_quadrature, rel_err, TestRng};
use subdiff::laplace::{caputo_laplace, gamma, TimeProfile};
use subdiff::problem::presets;

#[test]
fn profile_transform_matches_quadrature_for_fractional_powers() {
    // 2 t^{1/2} at s = 1 → 2 Γ(3/2), plus random power laws.
    let q = laplace_quadrature(|t| 2.0 * t.sqrt(), 1.0);
    let p = TimeProfile::new(vec![(2.0, 0.5)]).unwrap();
    assert!(rel_err(p.laplace(1.0).unwrap(), q, 1e-9) < 1e-8, "{q}");

    let mut rng = TestRng::new(11);
    for _ in 0..12 {
        let beta = rng.range(0.0, 2.0);
        let c = rng.range(-3.0, 3.0);
        let s = rng.range(0.4, 20.0);
        let profile = TimeProfile::new(vec![(c, beta)]).unwrap();
        let analytic = profile.laplace(s).unwrap();
        let quad = laplace_quadrature(|t| c * t.powf(beta), s);
        assert!(
            rel_err(analytic, quad, 1e-6) < 1e-6,
            "beta={beta} c={c} s={s}: {analytic} vs {quad}"
        );
    }
}

#[test]
fn caputo_laplace_of_linear_profile_matches_derivative_quadrature() {
    // ∂^{1/2} t = t^{1/2}/Γ(3/2); its transform at s = 4 is 0.125.
    let alpha = 0.5;
    let s = 4.0;
    let lhs = caputo_laplace(s, alpha, 1.0 / (s * s), 0.0).unwrap();
    let quad = laplace_quadrature(|t| t.sqrt() / gamma(1.5), s);
    assert!(rel_err(lhs, quad, 1e-9) < 1e-7, "{lhs} vs {quad}");
    assert!((lhs - 0.125).abs() < 1e-14);
}

#[test]
fn caputo_laplace_matches_derivative_quadrature_for_general_powers() {
    let mut rng = TestRng::new(5);
    for _ in 0..8 {
        // Keep β − α ≥ 0.05: below that the derivative t^{β−α} approaches a
        // 1/√t singularity and composite Simpson loses the digits under test.
        let beta = rng.range(0.3, 1.8);
        let alpha = rng.range(0.15, (beta - 0.05).min(0.85));
        let s = rng.range(0.5, 10.0);
        let p = TimeProfile::new(vec![(1.0, beta)]).unwrap();
        let lhs = caputo_laplace(s, alpha, p.laplace(s).unwrap(), 0.0).unwrap();
        // ∂^α t^β = Γ(β+1)/Γ(β+1−α) t^{β−α}, integrated numerically.
        let coeff = gamma(beta + 1.0) / gamma(beta + 1.0 - alpha);
        let quad = laplace_quadrature(|t| coeff * t.powf(beta - alpha), s);
        assert!(
            rel_err(lhs, quad, 1e-6) < 1e-6,
            "beta={beta} alpha={alpha} s={s}: {lhs} vs {quad}"
        );
    }
}

#[test]
fn laplace_rhs_of_forward3d_matches_quadrature_at_the_paper_point() {
    // F(x,s) at x = (1/2,1/2,1/2), s = 2 for the 3D manufactured problem:
    // quadrature of ∫ e^{-st} f(x,t) dt plus s^{α-1} u0(x).
    let alpha = 0.5;
    let (spec, _) = presets::forward3d(alpha);
    let x = [0.5, 0.5, 0.5];
    let s = 2.0;
    let analytic = spec.laplace_rhs(&x, s).unwrap();
    let f_quad = laplace_quadrature(|t| spec.source_value(&x, t), s);
    let expected = s.powf(alpha - 1.0) * spec.initial_value().eval(&x) + f_quad;
    assert!(
        rel_err(analytic, expected, 1e-6) < 1e-6,
        "{analytic} vs {expected}"
    );
}

#[test]
fn inverse3d_rhs_matches_quadrature_with_variable_coefficient() {
    // The corrected source (with the ∇a·∇u term) must still transform
    // consistently at an off-node point.
    let alpha = 0.4;
    let prob = presets::inverse3d(alpha);
    let x = [0.31, 0.62, 0.48];
    let s = 3.0;
    let analytic = prob.spec.laplace_rhs(&x, s).unwrap();
    let f_quad = laplace_quadrature(|t| prob.spec.source_value(&x, t), s);
    let expected = s.powf(alpha - 1.0) * prob.spec.initial_value().eval(&x) + f_quad;
    assert!(
        rel_err(analytic, expected, 1e-6) < 2e-6,
        "{analytic} vs {expected}"
    );
}
