//! Shared oracles for the integration tests: finite differences and
//! brute-force Laplace quadrature. Everything here is deliberately
//! independent of the library's analytic paths.

#![allow(dead_code)]

use subdiff::nn::NeuralField;

/// Relative error with an absolute floor to keep near-zero denominators from
/// dominating.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Central-difference gradient of `f` at `x`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        xp[k] = x[k] + h;
        let fp = f(&xp);
        xp[k] = x[k] - h;
        let fm = f(&xp);
        xp[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Second-order central difference of each pure second derivative.
pub fn fd_second<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let f0 = f(x);
    let mut out = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        xp[k] = x[k] + h;
        let fp = f(&xp);
        xp[k] = x[k] - h;
        let fm = f(&xp);
        xp[k] = x[k];
        out[k] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    out
}

/// Forward finite difference of `loss` with respect to the chosen parameters.
pub fn fd_param_grad_forward<F: Fn(&NeuralField) -> f64>(
    net: &NeuralField,
    loss: F,
    indices: &[usize],
    h: f64,
) -> Vec<f64> {
    let base = loss(net);
    indices
        .iter()
        .map(|&i| {
            let mut bumped = net.clone();
            bumped.params_mut()[i] += h;
            (loss(&bumped) - base) / h
        })
        .collect()
}

/// Central finite difference of `loss` with respect to the chosen parameters.
pub fn fd_param_grad_central<F: Fn(&NeuralField) -> f64>(
    net: &NeuralField,
    loss: F,
    indices: &[usize],
    h: f64,
) -> Vec<f64> {
    indices
        .iter()
        .map(|&i| {
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            (loss(&plus) - loss(&minus)) / (2.0 * h)
        })
        .collect()
}

/// Brute-force Laplace transform `∫_0^∞ e^{-st} f(t) dt` by composite Simpson
/// after the substitution `t = τ²` (which smooths the `t^β` kinks at zero for
/// β ≥ 0 and compresses the tail).
pub fn laplace_quadrature<F: Fn(f64) -> f64>(f: F, s: f64) -> f64 {
    assert!(s > 0.0);
    // e^{-s τ²} < 1e-26 once s τ² > 60.
    let tau_max = (60.0 / s).sqrt();
    let panels = 200_000usize;
    let h = tau_max / panels as f64;
    let g = |tau: f64| {
        if tau == 0.0 {
            0.0
        } else {
            2.0 * tau * (-s * tau * tau).exp() * f(tau * tau)
        }
    };
    let mut acc = g(0.0) + g(tau_max);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(i as f64 * h);
    }
    acc * h / 3.0
}

/// Deterministic xorshift for test-local randomness (independent of the
/// library's RNG choices).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
