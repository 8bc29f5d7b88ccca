//! Fast invariant suite behind `subdiff verify`: Stehfest identities,
//! Caputo-transform identities, derivative-engine spot checks against finite
//! differences, manufactured-residual zeros, and L1-weight properties.
//!
//! Each check returns a [`CheckResult`]; the CLI prints one row per check and
//! exits nonzero iff any failed. The whole suite runs in a few seconds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::laplace::{caputo_laplace, gamma, StehfestRule, TimeProfile};
use crate::nn::{BundleAdjoint, InputKind, JetMode, NeuralField};
use crate::problem::{laplace_residual, presets};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub group: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(group: &'static str, name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            group,
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Moment identities (on the exact rationals) and export faithfulness of one
/// Stehfest rule. A rule with corrupted coefficients fails here.
pub fn check_stehfest_rule(rule: &StehfestRule) -> Vec<CheckResult> {
    let (r0, r1) = rule.identity_residuals();
    vec![
        CheckResult::new(
            "stehfest",
            format!("sum of weights is zero (M={})", rule.m()),
            r0 <= 1e-12,
            format!("|sum| = {r0:.3e}"),
        ),
        CheckResult::new(
            "stehfest",
            format!("weighted sum inverts 1/s (M={})", rule.m()),
            r1 <= 1e-12,
            format!("|sum/i - 1| = {r1:.3e}"),
        ),
    ]
}

fn stehfest_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for m in (2..=14).step_by(2) {
        out.extend(check_stehfest_rule(&StehfestRule::new(m).unwrap()));
    }
    let four = StehfestRule::new(4).unwrap();
    out.push(CheckResult::new(
        "stehfest",
        "M=4 weights equal [-2, 26, -48, 24]",
        four.coefficients() == [-2.0, 26.0, -48.0, 24.0],
        format!("{:?}", four.coefficients()),
    ));
    let ulp_ok = (2..=18).step_by(2).all(|m| {
        StehfestRule::new(m).unwrap().export_within_one_ulp()
    });
    out.push(CheckResult::new(
        "stehfest",
        "f64 export within 1 ulp of the exact rationals (M<=18)",
        ulp_ok,
        String::new(),
    ));
    out
}

fn caputo_checks(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_const = 0.0f64;
    for _ in 0..100 {
        let s = 0.05 + rng.random::<f64>() * 500.0;
        let alpha = 0.02 + rng.random::<f64>() * 0.96;
        let v = caputo_laplace(s, alpha, 1.0 / s, 1.0).unwrap();
        worst_const = worst_const.max(v.abs());
    }
    let mut worst_power = 0.0f64;
    for &beta in &[0.5, 1.0, 1.5] {
        for &alpha in &[0.2, 0.5, 0.8] {
            for &s in &[0.1, 1.0, 10.0, 300.0] {
                let p = TimeProfile::new(vec![(1.0, beta)]).unwrap();
                let lhs = caputo_laplace(s, alpha, p.laplace(s).unwrap(), 0.0).unwrap();
                let rhs = p.caputo(alpha).unwrap().laplace(s).unwrap();
                worst_power = worst_power.max((lhs - rhs).abs() / rhs.abs().max(1e-30));
            }
        }
    }
    let gamma_half = (gamma(0.5) - std::f64::consts::PI.sqrt()).abs();
    vec![
        CheckResult::new(
            "caputo-laplace",
            "transform of a constant's derivative vanishes",
            worst_const <= 1e-12,
            format!("worst |value| = {worst_const:.3e} over 100 random (s, alpha)"),
        ),
        CheckResult::new(
            "caputo-laplace",
            "power-law rule matches analytic derivative transform",
            worst_power <= 1e-10,
            format!("worst relative = {worst_power:.3e}"),
        ),
        CheckResult::new(
            "caputo-laplace",
            "gamma(1/2) = sqrt(pi)",
            gamma_half <= 1e-13,
            format!("|diff| = {gamma_half:.3e}"),
        ),
    ]
}

fn nilt_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for m in [2usize, 4, 6, 8] {
        let rule = StehfestRule::new(m).unwrap();
        for &t in &[0.02, 0.7, 3.0] {
            worst = worst.max((rule.invert(|s| 1.0 / s, t).unwrap() - 1.0).abs());
        }
    }
    out.push(CheckResult::new(
        "nilt-pairs",
        "1/s inverts to 1 within 1e-12 (M <= 8)",
        worst <= 1e-12,
        format!("worst |error| = {worst:.3e}"),
    ));
    let rule = StehfestRule::new(12).unwrap();
    let ramp = (rule.invert(|s| 1.0 / (s * s), 1.0).unwrap() - 1.0).abs();
    out.push(CheckResult::new(
        "nilt-pairs",
        "1/s^2 inverts to t at t=1 within 1e-3 (M=12)",
        ramp <= 1e-3,
        format!("|error| = {ramp:.3e}"),
    ));
    let mut worst_exp = 0.0f64;
    for &t in &[0.5, 1.0, 2.0] {
        let v = rule.invert(|s| 1.0 / (s + 1.0), t).unwrap();
        worst_exp = worst_exp.max((v - (-t).exp()).abs() / (-t).exp());
    }
    out.push(CheckResult::new(
        "nilt-pairs",
        "1/(s+1) inverts to exp(-t) within 1e-2 relative (M=12)",
        worst_exp <= 1e-2,
        format!("worst relative = {worst_exp:.3e}"),
    ));
    out
}

fn derivative_checks(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_grad = 0.0f64;
    let mut worst_second = 0.0f64;
    let mut worst_param = 0.0f64;

    for dim in 1..=3usize {
        let net = NeuralField::new(
            InputKind::SpatialLogS { dim },
            &[24, 24],
            seed + dim as u64,
        );
        for _ in 0..5 {
            let x: Vec<f64> = (0..dim).map(|_| 0.1 + 0.8 * rng.random::<f64>()).collect();
            let s = 1.0 + 200.0 * rng.random::<f64>();
            let b = net.derivatives(&x, s);
            let h = 1e-4;
            let mut xp = x.clone();
            for k in 0..dim {
                xp[k] = x[k] + h;
                let fp = net.eval(&xp, s);
                xp[k] = x[k] - h;
                let fm = net.eval(&xp, s);
                xp[k] = x[k];
                let f0 = net.eval(&x, s);
                let fd_g = (fp - fm) / (2.0 * h);
                let fd_q = (fp - 2.0 * f0 + fm) / (h * h);
                worst_grad = worst_grad
                    .max((b.gradient[k] - fd_g).abs() / b.gradient[k].abs().max(fd_g.abs()).max(1e-3));
                worst_second = worst_second
                    .max((b.second[k] - fd_q).abs() / b.second[k].abs().max(fd_q.abs()).max(1e-3));
            }
        }
        // Parameter gradient of a laplacian-bearing loss vs central FD.
        let xs: Vec<f64> = (0..4 * dim).map(|_| 0.1 + 0.8 * rng.random::<f64>()).collect();
        let ss: Vec<f64> = (0..4).map(|_| 1.0 + 50.0 * rng.random::<f64>()).collect();
        let loss = |net: &NeuralField| -> f64 {
            (0..4)
                .map(|j| {
                    let b = net.derivatives(&xs[j * dim..(j + 1) * dim], ss[j]);
                    let r = b.value + b.second.iter().sum::<f64>();
                    r * r / 4.0
                })
                .sum()
        };
        let mut grad = vec![0.0; net.param_count()];
        net.loss_gradient(
            &xs,
            Some(&ss),
            JetMode::Second,
            |_, b| {
                let r = b.value + b.second.iter().sum::<f64>();
                let mut adj = BundleAdjoint {
                    d_value: 2.0 * r / 4.0,
                    ..Default::default()
                };
                for k in 0..dim {
                    adj.d_second[k] = 2.0 * r / 4.0;
                }
                (r * r / 4.0, adj)
            },
            &mut grad,
        )
        .unwrap();
        let scale = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
        for _ in 0..8 {
            let i = (rng.random::<f64>() * net.param_count() as f64) as usize;
            let i = i.min(net.param_count() - 1);
            let h = 1e-5;
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            worst_param =
                worst_param.max((grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1e-3 * scale));
        }
    }

    vec![
        CheckResult::new(
            "derivative-engine",
            "spatial gradient matches finite differences (1e-6)",
            worst_grad <= 1e-6,
            format!("worst relative = {worst_grad:.3e}"),
        ),
        CheckResult::new(
            "derivative-engine",
            "pure second derivatives match finite differences (1e-4)",
            worst_second <= 1e-4,
            format!("worst relative = {worst_second:.3e}"),
        ),
        CheckResult::new(
            "derivative-engine",
            "parameter gradients match finite differences (1e-4)",
            worst_param <= 1e-4,
            format!("worst relative = {worst_param:.3e}"),
        ),
    ]
}

fn manufactured_checks(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let cases: Vec<(&str, crate::problem::ProblemSpec, crate::problem::ExactSolution)> = vec![
        {
            let (spec, exact) = presets::manufactured_1d(0.5);
            ("1D", spec, exact)
        },
        {
            let (spec, exact) = presets::manufactured_2d(0.5);
            ("2D", spec, exact)
        },
        {
            let (spec, exact) = presets::forward3d(0.5);
            ("3D", spec, exact)
        },
    ];
    for (label, spec, exact) in &cases {
        let d = spec.dim();
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let s = 0.7 + rng.random::<f64>() * 276.0;
            let r = laplace_residual(exact, spec, &x, s).unwrap();
            worst = worst.max(r.abs());
        }
        out.push(CheckResult::new(
            "manufactured-residual",
            format!("{label} exact solution zeroes the residual (1e-9)"),
            worst <= 1e-9,
            format!("worst |r| = {worst:.3e} over 100 random (x, s)"),
        ));
    }
    out
}

fn l1_checks() -> Vec<CheckResult> {
    let mut monotone = true;
    for &alpha in &[0.1, 0.3, 0.5, 0.8, 0.95] {
        let w = crate::fdm::l1_weights(alpha, 128);
        if w[0] != 1.0 || w.windows(2).any(|p| p[1] <= 0.0 || p[1] >= p[0]) {
            monotone = false;
        }
    }
    let near_euler = crate::fdm::l1_weights(0.999, 64);
    let tail_ok = near_euler[1..].iter().all(|&b| b.abs() < 1e-2);
    vec![
        CheckResult::new(
            "l1-weights",
            "weights positive and strictly decreasing",
            monotone,
            String::new(),
        ),
        CheckResult::new(
            "l1-weights",
            "alpha -> 1 approaches backward Euler (b_0 = 1, tail < 1e-2)",
            near_euler[0] == 1.0 && tail_ok,
            String::new(),
        ),
    ]
}

/// Runs every check group. Deterministic for a fixed seed.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.extend(stehfest_checks());
    out.extend(caputo_checks(seed));
    out.extend(nilt_checks());
    out.extend(derivative_checks(seed));
    out.extend(manufactured_checks(seed));
    out.extend(l1_checks());
    out
}
