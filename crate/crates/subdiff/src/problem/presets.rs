//! The built-in problem library.
//!
//! Two kinds of problems live here:
//!
//! - forward benchmarks with no closed-form solution (`forward2d_t1`,
//!   `forward2d_t10`), validated against the finite-difference solver;
//! - manufactured problems, where a separable exact solution `P(t)·S(x)` is
//!   chosen and the source is generated so the pair satisfies the equation:
//!
//!   ```text
//!   f = ∂t^α(P)·S − P·(a ΔS + ∇a·∇S + c S).
//!   ```
//!
//!   Generating the source (rather than writing it down) keeps the pair
//!   consistent for spatially varying coefficients, where the cross term
//!   `∇a·∇S` is easy to drop by hand; for constant `a` it reduces to the
//!   familiar `[∂t^α P + (ω² a − c) P]·S` form.
//!
//! Every constructor takes α, since all quantitative results are
//! parameterized over the fractional order (default 0.5 in configs).

use std::f64::consts::PI;

use crate::laplace::TimeProfile;
use crate::problem::fields::{sine_product, Coefficient, ScalarField};
use crate::problem::{ExactSolution, ProblemSpec, SourceTerm};

/// Builds the manufactured problem for a chosen exact solution.
pub fn manufactured(
    name: &str,
    domain: Vec<(f64, f64)>,
    alpha: f64,
    t_final: f64,
    a: Coefficient,
    c: ScalarField,
    exact: &ExactSolution,
) -> ProblemSpec {
    let u0_scale = exact.profile.value_at(0.0);
    let spatial = exact.spatial.clone();
    let u0 = {
        let s = spatial.clone();
        ScalarField::new(move |x| u0_scale * s.value(x))
    };

    let caputo_term = SourceTerm {
        spatial: spatial.as_scalar_field(),
        profile: exact
            .profile
            .caputo(alpha)
            .expect("manufactured profiles have nonnegative exponents"),
    };
    let elliptic_term = SourceTerm {
        spatial: {
            let (a, c, s) = (a.clone(), c.clone(), spatial.clone());
            ScalarField::new(move |x| {
                let d = x.len();
                let mut grad = [0.0; crate::nn::MAX_DIM];
                let mut sec = [0.0; crate::nn::MAX_DIM];
                s.gradient_into(x, &mut grad[..d]);
                s.second_into(x, &mut sec[..d]);
                let mut ga = [0.0; crate::nn::MAX_DIM];
                a.gradient_into(x, &mut ga[..d]);
                let lap: f64 = sec[..d].iter().sum();
                let cross: f64 = grad[..d].iter().zip(&ga[..d]).map(|(&g, &h)| g * h).sum();
                -(a.eval(x) * lap + cross + c.eval(x) * s.value(x))
            })
        },
        profile: exact.profile.clone(),
    };

    ProblemSpec::new(
        name,
        domain,
        alpha,
        t_final,
        a,
        c,
        u0,
        vec![caputo_term, elliptic_term],
    )
    .expect("library problems are well formed")
}

fn unit_box(d: usize) -> Vec<(f64, f64)> {
    vec![(0.0, 1.0); d]
}

/// 2D forward benchmark on `[0,1]²`, `T = 1`: `a = 1`, `c = 0`,
/// `u0 = sin(πx)sin(πy)`, `f = 5 sin(2πx) sin(3πy)`.
pub fn forward2d_t1(alpha: f64) -> ProblemSpec {
    ProblemSpec::new(
        "forward2d-t1",
        unit_box(2),
        alpha,
        1.0,
        Coefficient::constant(1.0),
        ScalarField::constant(0.0),
        ScalarField::new(|x| (PI * x[0]).sin() * (PI * x[1]).sin()),
        vec![SourceTerm {
            spatial: ScalarField::new(|x| 5.0 * (2.0 * PI * x[0]).sin() * (3.0 * PI * x[1]).sin()),
            profile: TimeProfile::constant(1.0),
        }],
    )
    .expect("library problems are well formed")
}

/// 2D forward benchmark on `[0,1]²`, `T = 10`: `u0 = 3 sin(πx)sin(πy)`,
/// `f = 3 sin(πx) sin(2πy)`.
pub fn forward2d_t10(alpha: f64) -> ProblemSpec {
    ProblemSpec::new(
        "forward2d-t10",
        unit_box(2),
        alpha,
        10.0,
        Coefficient::constant(1.0),
        ScalarField::constant(0.0),
        ScalarField::new(|x| 3.0 * (PI * x[0]).sin() * (PI * x[1]).sin()),
        vec![SourceTerm {
            spatial: ScalarField::new(|x| 3.0 * (PI * x[0]).sin() * (2.0 * PI * x[1]).sin()),
            profile: TimeProfile::constant(1.0),
        }],
    )
    .expect("library problems are well formed")
}

fn linear_in_time_sines(dim: usize) -> ExactSolution {
    ExactSolution::new(
        dim,
        sine_product(1.0, &vec![PI; dim]),
        TimeProfile::affine(5.0, 2.0),
    )
}

/// 1D manufactured problem: `u = (2t+5) sin(πx)`, `a = 1`, `c = 0`, `T = 1`.
pub fn manufactured_1d(alpha: f64) -> (ProblemSpec, ExactSolution) {
    let exact = linear_in_time_sines(1);
    let spec = manufactured(
        "forward1d",
        unit_box(1),
        alpha,
        1.0,
        Coefficient::constant(1.0),
        ScalarField::constant(0.0),
        &exact,
    );
    (spec, exact)
}

/// 1D manufactured problem quadratic in time: `u = (t²+5) sin(πx)`.
///
/// Solutions linear in `t` are reproduced exactly by the L1 quadrature, so
/// temporal-order measurements need this one.
pub fn manufactured_1d_quadratic(alpha: f64) -> (ProblemSpec, ExactSolution) {
    let exact = ExactSolution::new(
        1,
        sine_product(1.0, &[PI]),
        TimeProfile::new(vec![(5.0, 0.0), (1.0, 2.0)]).unwrap(),
    );
    let spec = manufactured(
        "forward1d-quadratic",
        unit_box(1),
        alpha,
        1.0,
        Coefficient::constant(1.0),
        ScalarField::constant(0.0),
        &exact,
    );
    (spec, exact)
}

/// 2D manufactured analog: `u = (2t+5) sin(πx) sin(πy)`.
pub fn manufactured_2d(alpha: f64) -> (ProblemSpec, ExactSolution) {
    let exact = linear_in_time_sines(2);
    let spec = manufactured(
        "forward2d-manufactured",
        unit_box(2),
        alpha,
        1.0,
        Coefficient::constant(1.0),
        ScalarField::constant(0.0),
        &exact,
    );
    (spec, exact)
}

/// 3D forward benchmark with the manufactured solution
/// `u = (2t+5) sin(πx) sin(πy) sin(πz)` on `[0,1]³`, `T = 1`.
pub fn forward3d(alpha: f64) -> (ProblemSpec, ExactSolution) {
    let exact = linear_in_time_sines(3);
    let spec = manufactured(
        "forward3d",
        unit_box(3),
        alpha,
        1.0,
        Coefficient::constant(1.0),
        ScalarField::constant(0.0),
        &exact,
    );
    (spec, exact)
}

/// An inverse-identification problem: the spec (with the true coefficient
/// baked into the source), the fabricated solution, and the true coefficient
/// to recover.
#[derive(Debug, Clone)]
pub struct InverseProblem {
    pub spec: ProblemSpec,
    pub exact: ExactSolution,
    pub a_true: Coefficient,
}

fn exp_sum_coefficient() -> Coefficient {
    Coefficient::new(
        ScalarField::new(move |x: &[f64]| 0.5 + (-x.iter().sum::<f64>()).exp()),
        move |x: &[f64], g: &mut [f64]| {
            let e = (-x.iter().sum::<f64>()).exp();
            g.fill(-e);
        },
    )
}

fn inverse_exact(dim: usize) -> ExactSolution {
    let mut freqs = vec![PI; dim];
    freqs[0] = 2.0 * PI;
    ExactSolution::new(dim, sine_product(1.0, &freqs), TimeProfile::affine(5.0, 3.0))
}

/// 3D coefficient-identification benchmark: `u = (3t+5) sin(2πx) sin(πy)
/// sin(πz)`, `a = 0.5 + e^{−(x+y+z)}`, `c = 0`, `T = 1`.
pub fn inverse3d(alpha: f64) -> InverseProblem {
    let a_true = exp_sum_coefficient();
    let exact = inverse_exact(3);
    let spec = manufactured(
        "inverse3d",
        unit_box(3),
        alpha,
        1.0,
        a_true.clone(),
        ScalarField::constant(0.0),
        &exact,
    );
    InverseProblem {
        spec,
        exact,
        a_true,
    }
}

/// 2D desk-scale analog of the 3D identification problem:
/// `u = (3t+5) sin(2πx) sin(πy)`, `a = 0.5 + e^{−(x+y)}`.
pub fn inverse2d(alpha: f64) -> InverseProblem {
    let a_true = exp_sum_coefficient();
    let exact = inverse_exact(2);
    let spec = manufactured(
        "inverse2d-desk",
        unit_box(2),
        alpha,
        1.0,
        a_true.clone(),
        ScalarField::constant(0.0),
        &exact,
    );
    InverseProblem {
        spec,
        exact,
        a_true,
    }
}
