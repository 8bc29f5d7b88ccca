//! Oracle tests for the neural field: independent forward-pass
//! reimplementation, finite-difference derivative checks, hand-computable
//! affine cases, and the determinism/linearity contracts.

mod common;

use common::{fd_gradient, fd_param_grad_forward, fd_second, rel_err, TestRng};
use subdiff::nn::{BundleAdjoint, InputKind, JetMode, NeuralField};

/// Straightforward re-implementation of the documented forward contract:
/// layer-major flat parameters, row-major weights, Swish hidden layers,
/// identity output, inputs `(x, ln s)` when the network has an s channel.
fn naive_forward(net: &NeuralField, x: &[f64], s: Option<f64>) -> f64 {
    let mut input = x.to_vec();
    if let Some(s) = s {
        input.push(s.ln());
    }
    let widths = net.widths();
    let params = net.params();
    let mut offset = 0;
    let mut h = input;
    for l in 1..widths.len() {
        let (w_in, w_out) = (widths[l - 1], widths[l]);
        let mut z = vec![0.0; w_out];
        for r in 0..w_out {
            let mut acc = params[offset + w_out * w_in + r]; // bias
            for c in 0..w_in {
                acc += params[offset + r * w_in + c] * h[c];
            }
            z[r] = acc;
        }
        offset += w_out * w_in + w_out;
        if l + 1 < widths.len() {
            for v in &mut z {
                *v = *v / (1.0 + (-*v).exp()); // z·sigmoid(z) with z factored
                // (kept apart from the library's sigmoid on purpose)
            }
            // note: z·sigmoid(z) = z/(1+e^{-z})
        }
        h = z;
    }
    h[0]
}

#[test]
fn zero_network_evaluates_to_zero() {
    let net = NeuralField::zeroed(InputKind::SpatialLogS { dim: 2 }, &[8, 8]);
    assert_eq!(net.eval(&[0.3, 0.7], 2.0), 0.0);
    let b = net.derivatives(&[0.3, 0.7], 2.0);
    assert_eq!(b.value, 0.0);
    assert!(b.gradient.iter().all(|&g| g == 0.0));
    assert!(b.second.iter().all(|&q| q == 0.0));
}

#[test]
fn constant_network_has_exactly_zero_derivatives() {
    // All hidden weights zero but biases nonzero: output is constant in x.
    let mut net = NeuralField::zeroed(InputKind::SpatialLogS { dim: 3 }, &[4]);
    let n_w1 = 4 * 4; // (d+1=4) inputs × 4 neurons
    for i in 0..4 {
        net.params_mut()[n_w1 + i] = 0.8 + i as f64; // hidden biases
    }
    let last = net.param_count() - 1;
    net.params_mut()[last] = -0.25; // output bias
    let b = net.derivatives(&[0.1, 0.5, 0.9], 3.0);
    assert!(b.gradient.iter().all(|&g| g == 0.0));
    assert!(b.second.iter().all(|&q| q == 0.0));
    assert_ne!(b.value, 0.0);
}

#[test]
fn single_affine_layer_matches_closed_form() {
    // Spatial-only single layer: value = w·x + b, gradient = w, seconds = 0.
    let mut net = NeuralField::zeroed(InputKind::Spatial { dim: 3 }, &[]);
    let w = [1.5, -2.0, 0.25];
    net.params_mut()[..3].copy_from_slice(&w);
    net.params_mut()[3] = 0.7;
    let x = [0.2, 0.4, -1.0];
    let expect = 1.5 * 0.2 - 2.0 * 0.4 + 0.25 * (-1.0) + 0.7;
    assert_eq!(net.eval_spatial(&x), expect);
    let b = net.derivatives_spatial(&x);
    assert_eq!(b.value, expect);
    assert_eq!(b.gradient, w.to_vec());
    assert_eq!(b.second, vec![0.0; 3]);
}

#[test]
fn affine_layer_with_s_channel_uses_log_s() {
    // With the documented (x, ln s) input map, a single affine layer gives
    // w·(x, ln s) + b; the spatial gradient is still the x part of the row.
    let mut net = NeuralField::zeroed(InputKind::SpatialLogS { dim: 2 }, &[]);
    net.params_mut()[..3].copy_from_slice(&[2.0, -1.0, 0.5]);
    net.params_mut()[3] = 0.1;
    let (x, s) = ([0.3, 0.9], 4.0f64);
    let expect = 2.0 * 0.3 - 1.0 * 0.9 + 0.5 * s.ln() + 0.1;
    assert_eq!(net.eval(&x, s), expect);
    let b = net.derivatives(&x, s);
    assert_eq!(b.gradient, vec![2.0, -1.0]);
    assert_eq!(b.second, vec![0.0; 2]);
}

#[test]
fn forward_pass_matches_independent_reimplementation() {
    let mut rng = TestRng::new(99);
    for (dim, hidden, seed) in [
        (1usize, vec![16, 16], 7u64),
        (2, vec![24, 24], 8),
        (3, vec![8, 8, 8], 9),
    ] {
        let net = NeuralField::new(InputKind::SpatialLogS { dim }, &hidden, seed);
        for _ in 0..20 {
            let x: Vec<f64> = (0..dim).map(|_| rng.range(-1.0, 1.0)).collect();
            let s = rng.range(0.1, 300.0);
            let ours = net.eval(&x, s);
            let naive = naive_forward(&net, &x, Some(s));
            assert!(
                rel_err(ours, naive, 1e-12) < 1e-14,
                "dim={dim} ours={ours} naive={naive}"
            );
        }
        let spatial = NeuralField::new(InputKind::Spatial { dim }, &hidden, seed + 100);
        for _ in 0..10 {
            let x: Vec<f64> = (0..dim).map(|_| rng.range(-1.0, 1.0)).collect();
            let ours = spatial.eval_spatial(&x);
            let naive = naive_forward(&spatial, &x, None);
            assert!(rel_err(ours, naive, 1e-12) < 1e-14);
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = TestRng::new(3);
    for (dim, hidden, seed) in [(1usize, vec![32, 32], 1u64), (2, vec![16, 16, 16], 2), (3, vec![20], 3)] {
        let net = NeuralField::new(InputKind::SpatialLogS { dim }, &hidden, seed);
        for _ in 0..15 {
            let x: Vec<f64> = (0..dim).map(|_| rng.range(0.05, 0.95)).collect();
            let s = rng.range(0.5, 200.0);
            let bundle = net.derivatives(&x, s);
            let fd = fd_gradient(|p| net.eval(p, s), &x, 1e-4);
            for k in 0..dim {
                assert!(
                    rel_err(bundle.gradient[k], fd[k], 1e-3) < 1e-6,
                    "dim={dim} k={k}: analytic {} vs fd {}",
                    bundle.gradient[k],
                    fd[k]
                );
            }
        }
    }
}

#[test]
fn pure_second_derivatives_match_finite_differences() {
    let mut rng = TestRng::new(4);
    for (dim, hidden, seed) in [(1usize, vec![32, 32], 11u64), (2, vec![16, 16, 16], 12), (3, vec![20], 13)] {
        let net = NeuralField::new(InputKind::SpatialLogS { dim }, &hidden, seed);
        for _ in 0..15 {
            let x: Vec<f64> = (0..dim).map(|_| rng.range(0.05, 0.95)).collect();
            let s = rng.range(0.5, 200.0);
            let bundle = net.derivatives(&x, s);
            let fd = fd_second(|p| net.eval(p, s), &x, 1e-4);
            for k in 0..dim {
                assert!(
                    rel_err(bundle.second[k], fd[k], 1e-3) < 1e-4,
                    "dim={dim} k={k}: analytic {} vs fd {}",
                    bundle.second[k],
                    fd[k]
                );
            }
        }
    }
}

#[test]
fn value_of_derivative_bundle_equals_eval() {
    // The two paths run GEMMs of different shapes, so agreement is to
    // rounding, not bitwise.
    let net = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[16, 16], 21);
    let (x, s) = ([0.37, 0.81], 7.0);
    let (a, b) = (net.derivatives(&x, s).value, net.eval(&x, s));
    assert!(rel_err(a, b, 1e-12) < 1e-14, "{a} vs {b}");
}

#[test]
fn constant_loss_has_zero_gradient() {
    let net = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[8, 8], 5);
    let mut grad = vec![0.0; net.param_count()];
    let loss = net
        .loss_gradient(
            &[0.2, 0.3, 0.6, 0.9],
            Some(&[1.0, 2.0]),
            JetMode::Value,
            |_, _| (0.75, BundleAdjoint::default()),
            &mut grad,
        )
        .unwrap();
    assert_eq!(loss, 1.5);
    assert!(grad.iter().all(|&g| g == 0.0));
}

#[test]
fn affine_squared_loss_gradient_is_hand_computable() {
    // One affine layer, loss = eval(x)²: d/dw_j = 2·eval·x_j, d/db = 2·eval.
    let mut net = NeuralField::zeroed(InputKind::Spatial { dim: 2 }, &[]);
    net.params_mut().copy_from_slice(&[1.25, -0.5, 0.3]);
    let x = [0.4, -0.7];
    let value = 1.25 * 0.4 + 0.5 * 0.7 + 0.3;
    let mut grad = vec![0.0; 3];
    let loss = net
        .loss_gradient(
            &x,
            None,
            JetMode::Value,
            |_, b| {
                let adj = BundleAdjoint {
                    d_value: 2.0 * b.value,
                    ..Default::default()
                };
                (b.value * b.value, adj)
            },
            &mut grad,
        )
        .unwrap();
    assert!((loss - value * value).abs() < 1e-15);
    assert!((grad[0] - 2.0 * value * 0.4).abs() < 1e-15);
    assert!((grad[1] - 2.0 * value * (-0.7)).abs() < 1e-15);
    assert!((grad[2] - 2.0 * value).abs() < 1e-15);
}

/// A laplacian-containing batch loss: Σ_points (value + Σ_k ∂²/∂x_k²)² / n.
fn laplacian_loss(net: &NeuralField, xs: &[f64], ss: &[f64]) -> f64 {
    let d = net.spatial_dim();
    let n = ss.len();
    let mut acc = 0.0;
    for j in 0..n {
        let b = net.derivatives(&xs[j * d..(j + 1) * d], ss[j]);
        let r = b.value + b.second.iter().sum::<f64>();
        acc += r * r;
    }
    acc / n as f64
}

#[test]
fn laplacian_loss_gradient_matches_forward_differences() {
    let net = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[24, 24], 17);
    let mut rng = TestRng::new(40);
    let n = 8;
    let xs: Vec<f64> = (0..n * 2).map(|_| rng.range(0.1, 0.9)).collect();
    let ss: Vec<f64> = (0..n).map(|_| rng.range(1.0, 50.0)).collect();

    let mut grad = vec![0.0; net.param_count()];
    net.loss_gradient(
        &xs,
        Some(&ss),
        JetMode::Second,
        |_, b| {
            let r = b.value + b.second.iter().sum::<f64>();
            let mut adj = BundleAdjoint {
                d_value: 2.0 * r / n as f64,
                ..Default::default()
            };
            for k in 0..2 {
                adj.d_second[k] = 2.0 * r / n as f64;
            }
            (r * r / n as f64, adj)
        },
        &mut grad,
    )
    .unwrap();

    let indices: Vec<usize> = (0..20).map(|_| rng.index(net.param_count())).collect();
    let fd = fd_param_grad_forward(&net, |m| laplacian_loss(m, &xs, &ss), &indices, 1e-5);
    let scale = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
    for (j, &i) in indices.iter().enumerate() {
        assert!(
            rel_err(grad[i], fd[j], 1e-3 * scale) < 1e-4,
            "param {i}: analytic {} vs fd {}",
            grad[i],
            fd[j]
        );
    }
}

#[test]
fn doubling_output_layer_weights_doubles_output_exactly() {
    let net = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[16, 16], 23);
    let mut doubled = net.clone();
    let off = {
        // The output layer is the last widths[n-2]·1 weights plus 1 bias.
        let n = doubled.param_count();
        let w_in = doubled.widths()[doubled.widths().len() - 2];
        n - w_in - 1
    };
    for p in &mut doubled.params_mut()[off..] {
        *p *= 2.0;
    }
    for (x, s) in [([0.1, 0.9], 1.0), ([0.5, 0.5], 40.0), ([0.8, 0.2], 277.0)] {
        assert_eq!(doubled.eval(&x, s), 2.0 * net.eval(&x, s));
    }
}

#[test]
fn initialization_and_evaluation_are_deterministic() {
    let a = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[32, 32], 77);
    let b = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[32, 32], 77);
    assert_eq!(a.params(), b.params());
    let x = [0.123, 0.456];
    assert_eq!(a.eval(&x, 3.0).to_bits(), b.eval(&x, 3.0).to_bits());

    let mut ga = vec![0.0; a.param_count()];
    let mut gb = vec![0.0; b.param_count()];
    let phi = |_: usize, bundle: subdiff::nn::BundleView<'_>| {
        let r = bundle.value + bundle.gradient[0];
        let adj = BundleAdjoint {
            d_value: 2.0 * r,
            d_grad: [2.0 * r, 0.0, 0.0],
            d_second: [0.0; 3],
        };
        (r * r, adj)
    };
    let xs = [0.2, 0.3, 0.7, 0.6];
    let ss = [2.0, 90.0];
    let la = a.loss_gradient(&xs, Some(&ss), JetMode::Second, phi, &mut ga).unwrap();
    let lb = b.loss_gradient(&xs, Some(&ss), JetMode::Second, phi, &mut gb).unwrap();
    assert_eq!(la.to_bits(), lb.to_bits());
    assert!(ga.iter().zip(&gb).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn different_seeds_differ() {
    let a = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[8], 1);
    let b = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[8], 2);
    assert_ne!(a.params(), b.params());
}

#[test]
fn parameter_count_matches_shape_sum() {
    let net = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[128, 128, 128], 0);
    // (3·128 + 128) + 2·(128·128 + 128) + (128·1 + 1)
    assert_eq!(net.param_count(), 3 * 128 + 128 + 2 * (128 * 128 + 128) + 128 + 1);
}

#[test]
fn checkpoint_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.ckpt");
    let net = NeuralField::new(InputKind::SpatialLogS { dim: 3 }, &[16, 8], 31415);
    net.save(&path).unwrap();
    let loaded = NeuralField::load(&path).unwrap();
    assert_eq!(net, loaded);
    assert_eq!(loaded.seed(), 31415);
    // A corrupted file is rejected.
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    assert!(NeuralField::load(&path).is_err());
}

#[test]
#[should_panic(expected = "s values")]
fn spatial_network_rejects_s_input() {
    let net = NeuralField::new(InputKind::Spatial { dim: 2 }, &[4], 0);
    net.eval(&[0.1, 0.2], 1.0);
}

#[test]
#[should_panic(expected = "multiple of dimension")]
fn dimension_mismatch_panics() {
    let net = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[4], 0);
    net.eval(&[0.1, 0.2, 0.3], 1.0);
}

#[test]
#[should_panic(expected = "positive")]
fn non_positive_s_panics() {
    let net = NeuralField::new(InputKind::SpatialLogS { dim: 2 }, &[4], 0);
    net.eval(&[0.1, 0.2], 0.0);
}
