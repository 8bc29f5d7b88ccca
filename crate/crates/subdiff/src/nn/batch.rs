//! Batched forward and backward passes.
//!
//! A batch of `n` points is propagated as one column-major matrix per layer
//! whose `C·n` columns hold jet components in blocks: `[V | G_1..G_d |
//! Q_1..Q_d]`, where `V` carries values, `G_k` the derivative with respect to
//! `x_k`, and `Q_k` the pure second derivative `∂²/∂x_k²`. Affine layers act
//! on all blocks with a single GEMM; the Swish nonlinearity couples the
//! blocks pointwise:
//!
//! ```text
//! h_v = σ(z_v),   h_gk = σ'(z_v) z_gk,   h_qk = σ''(z_v) z_gk² + σ'(z_v) z_qk.
//! ```
//!
//! Parameter gradients run reverse over the same tape. Seeding the output
//! adjoints `(v̄, ḡ_k, q̄_k)` from a loss, the hidden-layer pullback is
//!
//! ```text
//! z̄_v  = v̄ σ' + Σ_k ḡ_k σ'' z_gk + Σ_k q̄_k (σ''' z_gk² + σ'' z_qk)
//! z̄_gk = ḡ_k σ' + 2 q̄_k σ'' z_gk
//! z̄_qk = q̄_k σ'
//! ```
//!
//! which is exact — finite differences only ever appear in tests. All loops
//! are sequential and fixed-order, so results are bit-reproducible.

use faer::mat::{MatMut, MatRef};
use faer::Accum;

use super::activation::{sigmoid, swish_jets};
use super::gemm::gemm;
use super::colmat::ColMat;
use super::field::{DerivativeBundle, NeuralField};
use crate::error::{Error, Result};

/// Highest spatial dimension the engine supports.
pub const MAX_DIM: usize = 3;

/// Which jet components a batch propagates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetMode {
    /// Values only.
    Value,
    /// Values and spatial gradients.
    First,
    /// Values, gradients, and pure second derivatives.
    Second,
}

impl JetMode {
    pub(crate) fn components(self, d: usize) -> usize {
        match self {
            JetMode::Value => 1,
            JetMode::First => 1 + d,
            JetMode::Second => 1 + 2 * d,
        }
    }

    fn has_first(self) -> bool {
        !matches!(self, JetMode::Value)
    }

    fn has_second(self) -> bool {
        matches!(self, JetMode::Second)
    }
}

/// Network outputs for a batch; `grads`/`seconds` are `n×d` row-major and
/// empty when the mode did not request them.
#[derive(Debug, Clone)]
pub struct BatchOutput {
    pub n: usize,
    pub d: usize,
    pub mode: JetMode,
    pub values: Vec<f64>,
    pub grads: Vec<f64>,
    pub seconds: Vec<f64>,
}

impl BatchOutput {
    /// Borrowed view of point `i`'s outputs.
    pub fn bundle(&self, i: usize) -> BundleView<'_> {
        let r = i * self.d..(i + 1) * self.d;
        BundleView {
            value: self.values[i],
            gradient: if self.grads.is_empty() { &[] } else { &self.grads[r.clone()] },
            second: if self.seconds.is_empty() { &[] } else { &self.seconds[r] },
        }
    }

    pub fn bundle_owned(&self, i: usize) -> DerivativeBundle {
        let b = self.bundle(i);
        DerivativeBundle {
            value: b.value,
            gradient: b.gradient.to_vec(),
            second: b.second.to_vec(),
        }
    }
}

/// Borrowed per-point outputs handed to loss closures.
#[derive(Debug, Clone, Copy)]
pub struct BundleView<'a> {
    pub value: f64,
    pub gradient: &'a [f64],
    pub second: &'a [f64],
}

/// Partial derivatives of a scalar loss with respect to one point's bundle.
#[derive(Debug, Clone, Copy, Default)]
pub struct BundleAdjoint {
    pub d_value: f64,
    pub d_grad: [f64; MAX_DIM],
    pub d_second: [f64; MAX_DIM],
}

/// Saved forward state for one batch, consumed by [`NeuralField::backward_batch`].
pub struct BatchTrace {
    mode: JetMode,
    n: usize,
    h0: ColMat,
    layers: Vec<LayerTrace>,
}

struct LayerTrace {
    z: ColMat,
    /// Sigmoid values, hidden layers only.
    p: Option<ColMat>,
    /// Post-activation output, hidden layers only (the output layer is
    /// identity, so its `h` is `z`).
    h: Option<ColMat>,
}

/// Scratch reused across points and layers.
struct Scratch {
    s1: Vec<f64>,
    s2: Vec<f64>,
    s3: Vec<f64>,
    tv: Vec<f64>,
}

impl Scratch {
    fn new(max_width: usize) -> Self {
        Self {
            s1: vec![0.0; max_width],
            s2: vec![0.0; max_width],
            s3: vec![0.0; max_width],
            tv: vec![0.0; max_width],
        }
    }
}

impl NeuralField {
    fn assemble_inputs(&self, xs: &[f64], ss: Option<&[f64]>, mode: JetMode) -> (usize, ColMat) {
        let d = self.spatial_dim();
        assert!(d >= 1 && d <= MAX_DIM, "spatial dimension {d} unsupported");
        assert!(
            xs.len() % d == 0,
            "point buffer length {} not a multiple of dimension {d}",
            xs.len()
        );
        let n = xs.len() / d;
        assert!(n > 0, "empty batch");
        assert_eq!(
            self.input.has_s_channel(),
            ss.is_some(),
            "s values must be supplied iff the network has an s channel"
        );
        if let Some(ss) = ss {
            assert_eq!(ss.len(), n, "one s value per point required");
        }

        let c = mode.components(d);
        let in_dim = self.input.input_dim();
        let mut h0 = ColMat::zeros(in_dim, c * n);
        for j in 0..n {
            let col = h0.col_mut(j);
            col[..d].copy_from_slice(&xs[j * d..(j + 1) * d]);
            if let Some(ss) = ss {
                let s = ss[j];
                assert!(s > 0.0, "Laplace variable must be positive, got {s}");
                col[d] = s.ln();
            }
        }
        if mode.has_first() {
            for k in 0..d {
                for j in 0..n {
                    h0.col_mut((1 + k) * n + j)[k] = 1.0;
                }
            }
        }
        (n, h0)
    }

    fn affine_into(&self, l: usize, h_prev: &ColMat, z: &mut ColMat, n: usize) {
        let (w_in, w_out) = (self.widths[l], self.widths[l + 1]);
        let off = self.layer_offset(l);
        let w = MatRef::from_row_major_slice(&self.params[off..off + w_out * w_in], w_out, w_in);
        gemm(z.as_mut(), Accum::Replace, w, h_prev.as_ref());
        let bias = &self.params[off + w_out * w_in..off + w_out * w_in + w_out];
        for j in 0..n {
            let col = z.col_mut(j);
            for r in 0..w_out {
                col[r] += bias[r];
            }
        }
    }

    fn activate_into(
        &self,
        z: &ColMat,
        p: &mut ColMat,
        h: &mut ColMat,
        mode: JetMode,
        n: usize,
        scratch: &mut Scratch,
    ) {
        let d = self.spatial_dim();
        let w = z.rows();
        for j in 0..n {
            {
                let zv = z.col(j);
                let pc = p.col_mut(j);
                for r in 0..w {
                    pc[r] = sigmoid(zv[r]);
                }
            }
            if mode.has_first() {
                let zv = z.col(j);
                let pc = p.col(j);
                for r in 0..w {
                    let (_, s1, s2, _) = swish_jets(zv[r], pc[r]);
                    scratch.s1[r] = s1;
                    scratch.s2[r] = s2;
                }
            }
            {
                let zv = z.col(j);
                let pc = p.col(j);
                let hv = h.col_mut(j);
                for r in 0..w {
                    hv[r] = zv[r] * pc[r];
                }
            }
            if mode.has_first() {
                for k in 0..d {
                    let zg = z.col((1 + k) * n + j);
                    let hg = h.col_mut((1 + k) * n + j);
                    for r in 0..w {
                        hg[r] = scratch.s1[r] * zg[r];
                    }
                }
            }
            if mode.has_second() {
                for k in 0..d {
                    let zg = z.col((1 + k) * n + j);
                    let zq = z.col((1 + d + k) * n + j);
                    let hq = h.col_mut((1 + d + k) * n + j);
                    for r in 0..w {
                        hq[r] = scratch.s2[r] * zg[r] * zg[r] + scratch.s1[r] * zq[r];
                    }
                }
            }
        }
    }

    fn extract_output(&self, z_last: &ColMat, mode: JetMode, n: usize) -> BatchOutput {
        let d = self.spatial_dim();
        let values: Vec<f64> = (0..n).map(|j| z_last.col(j)[0]).collect();
        let mut grads = Vec::new();
        let mut seconds = Vec::new();
        if mode.has_first() {
            grads = vec![0.0; n * d];
            for j in 0..n {
                for k in 0..d {
                    grads[j * d + k] = z_last.col((1 + k) * n + j)[0];
                }
            }
        }
        if mode.has_second() {
            seconds = vec![0.0; n * d];
            for j in 0..n {
                for k in 0..d {
                    seconds[j * d + k] = z_last.col((1 + d + k) * n + j)[0];
                }
            }
        }
        BatchOutput {
            n,
            d,
            mode,
            values,
            grads,
            seconds,
        }
    }

    /// Forward pass without saving a tape (evaluation and reconstruction).
    ///
    /// `xs` is `n×d` row-major; `ss` holds one Laplace variable per point for
    /// networks with an `s` channel and must be `None` otherwise.
    pub fn forward_batch(&self, xs: &[f64], ss: Option<&[f64]>, mode: JetMode) -> BatchOutput {
        let (n, h0) = self.assemble_inputs(xs, ss, mode);
        let c = mode.components(self.spatial_dim());
        let layers = self.widths.len() - 1;
        let max_w = *self.widths.iter().max().unwrap();
        let mut scratch = Scratch::new(max_w);

        let mut h_prev = h0;
        for l in 0..layers {
            let mut z = ColMat::zeros(self.widths[l + 1], c * n);
            self.affine_into(l, &h_prev, &mut z, n);
            if l + 1 < self.widths.len() - 1 {
                let mut p = ColMat::zeros(self.widths[l + 1], n);
                let mut h = ColMat::zeros(self.widths[l + 1], c * n);
                self.activate_into(&z, &mut p, &mut h, mode, n, &mut scratch);
                h_prev = h;
            } else {
                h_prev = z;
            }
        }
        self.extract_output(&h_prev, mode, n)
    }

    /// Forward pass that keeps every layer's state for a subsequent
    /// [`NeuralField::backward_batch`].
    pub fn forward_batch_traced(
        &self,
        xs: &[f64],
        ss: Option<&[f64]>,
        mode: JetMode,
    ) -> (BatchOutput, BatchTrace) {
        let (n, h0) = self.assemble_inputs(xs, ss, mode);
        let c = mode.components(self.spatial_dim());
        let layers = self.widths.len() - 1;
        let max_w = *self.widths.iter().max().unwrap();
        let mut scratch = Scratch::new(max_w);

        let mut trace = BatchTrace {
            mode,
            n,
            h0,
            layers: Vec::with_capacity(layers),
        };
        for l in 0..layers {
            let mut z = ColMat::zeros(self.widths[l + 1], c * n);
            {
                let h_prev = if l == 0 {
                    &trace.h0
                } else {
                    trace.layers[l - 1].h.as_ref().unwrap()
                };
                self.affine_into(l, h_prev, &mut z, n);
            }
            if l + 1 < self.widths.len() - 1 {
                let mut p = ColMat::zeros(self.widths[l + 1], n);
                let mut h = ColMat::zeros(self.widths[l + 1], c * n);
                self.activate_into(&z, &mut p, &mut h, mode, n, &mut scratch);
                trace.layers.push(LayerTrace {
                    z,
                    p: Some(p),
                    h: Some(h),
                });
            } else {
                trace.layers.push(LayerTrace {
                    z,
                    p: None,
                    h: None,
                });
            }
        }
        let out = self.extract_output(&trace.layers[layers - 1].z, mode, n);
        (out, trace)
    }

    /// Accumulates `Σ_i ⟨adjoint_i, ∂bundle_i/∂θ⟩` into `grad` (one entry per
    /// parameter, layout as documented on the type).
    pub fn backward_batch(&self, trace: &BatchTrace, adjoints: &[BundleAdjoint], grad: &mut [f64]) {
        let d = self.spatial_dim();
        let n = trace.n;
        let mode = trace.mode;
        let c = mode.components(d);
        assert_eq!(adjoints.len(), n, "one adjoint per batch point");
        assert_eq!(grad.len(), self.param_count(), "gradient buffer size");

        let max_w = *self.widths.iter().max().unwrap();
        let mut scratch = Scratch::new(max_w);

        // Seed the output layer (identity activation): z̄_L = loss partials.
        let mut zbar = ColMat::zeros(1, c * n);
        for (j, adj) in adjoints.iter().enumerate() {
            zbar.col_mut(j)[0] = adj.d_value;
            if mode.has_first() {
                for k in 0..d {
                    zbar.col_mut((1 + k) * n + j)[0] = adj.d_grad[k];
                }
            }
            if mode.has_second() {
                for k in 0..d {
                    zbar.col_mut((1 + d + k) * n + j)[0] = adj.d_second[k];
                }
            }
        }

        let layers = self.widths.len() - 1;
        for l in (0..layers).rev() {
            let (w_in, w_out) = (self.widths[l], self.widths[l + 1]);
            let off = self.layer_offset(l);
            let h_prev = if l == 0 {
                &trace.h0
            } else {
                trace.layers[l - 1].h.as_ref().unwrap()
            };

            // ∂W accumulates over every jet block in one GEMM.
            let gw = MatMut::from_row_major_slice_mut(&mut grad[off..off + w_out * w_in], w_out, w_in);
            gemm(gw, Accum::Add, zbar.as_ref(), h_prev.as_ref().transpose());
            // ∂b sees only the value block.
            let gb = &mut grad[off + w_out * w_in..off + w_out * w_in + w_out];
            for j in 0..n {
                let col = zbar.col(j);
                for r in 0..w_out {
                    gb[r] += col[r];
                }
            }

            if l > 0 {
                let w = MatRef::from_row_major_slice(
                    &self.params[off..off + w_out * w_in],
                    w_out,
                    w_in,
                );
                let mut hbar = ColMat::zeros(w_in, c * n);
                gemm(hbar.as_mut(), Accum::Replace, w.transpose(), zbar.as_ref());
                let lt = &trace.layers[l - 1];
                self.activation_backward(&mut hbar, lt, mode, n, &mut scratch);
                zbar = hbar;
            }
        }
    }

    /// In place, turns post-activation adjoints `h̄` into pre-activation
    /// adjoints `z̄` for one hidden layer.
    fn activation_backward(
        &self,
        hbar: &mut ColMat,
        lt: &LayerTrace,
        mode: JetMode,
        n: usize,
        scratch: &mut Scratch,
    ) {
        let d = self.spatial_dim();
        let w = hbar.rows();
        let z = &lt.z;
        let p = lt.p.as_ref().expect("activation_backward on output layer");
        for j in 0..n {
            {
                let zv = z.col(j);
                let pc = p.col(j);
                for r in 0..w {
                    let (_, s1, s2, s3) = swish_jets(zv[r], pc[r]);
                    scratch.s1[r] = s1;
                    scratch.s2[r] = s2;
                    scratch.s3[r] = s3;
                }
            }
            // z̄_v accumulates contributions from every block; start from v̄ σ'.
            {
                let vbar = hbar.col(j);
                for r in 0..w {
                    scratch.tv[r] = vbar[r] * scratch.s1[r];
                }
            }
            if mode.has_first() {
                for k in 0..d {
                    let zg = z.col((1 + k) * n + j);
                    let gbar = hbar.col((1 + k) * n + j);
                    for r in 0..w {
                        scratch.tv[r] += gbar[r] * scratch.s2[r] * zg[r];
                    }
                }
            }
            if mode.has_second() {
                for k in 0..d {
                    let zg = z.col((1 + k) * n + j);
                    let zq = z.col((1 + d + k) * n + j);
                    let qbar = hbar.col((1 + d + k) * n + j);
                    for r in 0..w {
                        scratch.tv[r] +=
                            qbar[r] * (scratch.s3[r] * zg[r] * zg[r] + scratch.s2[r] * zq[r]);
                    }
                }
                // z̄_gk needs q̄_k before q̄_k is overwritten.
                for k in 0..d {
                    let zg = z.col((1 + k) * n + j);
                    let (gbar, qbar) = hbar.cols_mut2((1 + k) * n + j, (1 + d + k) * n + j);
                    for r in 0..w {
                        gbar[r] = gbar[r] * scratch.s1[r] + 2.0 * qbar[r] * scratch.s2[r] * zg[r];
                        qbar[r] *= scratch.s1[r];
                    }
                }
            } else if mode.has_first() {
                for k in 0..d {
                    let gbar = hbar.col_mut((1 + k) * n + j);
                    for r in 0..w {
                        gbar[r] *= scratch.s1[r];
                    }
                }
            }
            let vbar = hbar.col_mut(j);
            vbar[..w].copy_from_slice(&scratch.tv[..w]);
        }
    }

    /// Batched loss evaluation with exact parameter gradients.
    ///
    /// `phi` maps a point index and its bundle to that point's loss
    /// contribution and the partial derivatives of the contribution with
    /// respect to the bundle. The summed loss is returned and its parameter
    /// gradient accumulated into `grad`. A non-finite contribution aborts
    /// with a domain error naming the point.
    pub fn loss_gradient<F>(
        &self,
        xs: &[f64],
        ss: Option<&[f64]>,
        mode: JetMode,
        mut phi: F,
        grad: &mut [f64],
    ) -> Result<f64>
    where
        F: FnMut(usize, BundleView<'_>) -> (f64, BundleAdjoint),
    {
        let (out, trace) = self.forward_batch_traced(xs, ss, mode);
        let mut adjoints = vec![BundleAdjoint::default(); out.n];
        let mut total = 0.0;
        for j in 0..out.n {
            let (loss, adj) = phi(j, out.bundle(j));
            if !loss.is_finite() {
                return Err(Error::Domain(format!(
                    "non-finite loss contribution ({loss}) from batch point {j}"
                )));
            }
            total += loss;
            adjoints[j] = adj;
        }
        self.backward_batch(&trace, &adjoints, grad);
        Ok(total)
    }
}

