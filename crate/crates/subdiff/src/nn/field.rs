//! The neural field: a fully connected network with Swish hidden activations
//! and an identity output, evaluated at `(x, s)` or at `x` alone.
//!
//! Derivatives are with respect to the spatial coordinates only, never `s`.
//! Internally the network consumes `(x, ln s)` — the raw `s` spans three
//! orders of magnitude across the training interval and unnormalized inputs
//! condition badly — but the public interface takes raw `s` and the
//! transform does not touch the spatial derivative semantics.
//!
//! # Parameter flattening
//!
//! Parameters are stored (and exposed) as one flat `f64` vector in
//! layer-major order: for each layer, the weight matrix in row-major layout
//! (`out × in`, a row holds one output neuron's incoming weights) followed by
//! that layer's bias vector. Optimizer state and checkpoints rely on this
//! order being fixed.
//!
//! # Checkpoint format
//!
//! A little-endian binary container, stable across runs:
//!
//! ```text
//! magic    4 B   b"SDNF"
//! version  u32   1
//! input    u8    0 = spatial, 1 = spatial plus log-s channel
//! dim      u8    spatial dimension d
//! layers   u8    number of weight layers L
//! widths   u32×(L+1)
//! act      u8    0 = Swish hidden / identity output
//! seed     u64   seed the parameters were initialized from
//! count    u64   parameter count
//! params   f64×count
//! ```

use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// What the network takes as input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// `x` only (used for coefficient networks).
    Spatial { dim: usize },
    /// `(x, ln s)` (used for Laplace-domain solution networks).
    SpatialLogS { dim: usize },
}

impl InputKind {
    pub fn spatial_dim(self) -> usize {
        match self {
            InputKind::Spatial { dim } | InputKind::SpatialLogS { dim } => dim,
        }
    }

    pub fn input_dim(self) -> usize {
        match self {
            InputKind::Spatial { dim } => dim,
            InputKind::SpatialLogS { dim } => dim + 1,
        }
    }

    pub fn has_s_channel(self) -> bool {
        matches!(self, InputKind::SpatialLogS { .. })
    }
}

/// Value, spatial gradient, and pure second spatial derivatives of the
/// network at one point. `second[k]` is `∂²/∂x_k²`; the Laplacian is the sum.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBundle {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub second: Vec<f64>,
}

impl DerivativeBundle {
    pub fn laplacian(&self) -> f64 {
        self.second.iter().sum()
    }
}

/// Fully connected Swish network with exact spatial-derivative and
/// parameter-gradient evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralField {
    pub(crate) input: InputKind,
    /// `[in_dim, h_1, ..., h_k, 1]`.
    pub(crate) widths: Vec<usize>,
    /// Flat parameters; see the module docs for the layout.
    pub(crate) params: Vec<f64>,
    pub(crate) seed: u64,
}

impl NeuralField {
    /// Glorot-uniform weights (`U(±√(6/(fan_in+fan_out)))`, drawn layer-major,
    /// row-major within a matrix), zero biases. Fully determined by `seed`.
    pub fn new(input: InputKind, hidden: &[usize], seed: u64) -> Self {
        let mut widths = Vec::with_capacity(hidden.len() + 2);
        widths.push(input.input_dim());
        widths.extend_from_slice(hidden);
        widths.push(1);
        assert!(
            widths.iter().all(|&w| w > 0),
            "layer widths must be positive"
        );

        let count = param_count(&widths);
        let mut params = vec![0.0; count];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut offset = 0;
        for l in 1..widths.len() {
            let (fan_in, fan_out) = (widths[l - 1], widths[l]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut params[offset..offset + fan_in * fan_out] {
                *w = (rng.random::<f64>() * 2.0 - 1.0) * limit;
            }
            offset += fan_in * fan_out + fan_out; // biases stay zero
        }

        Self {
            input,
            widths,
            params,
            seed,
        }
    }

    /// All weights and biases zero (the network is identically zero).
    pub fn zeroed(input: InputKind, hidden: &[usize]) -> Self {
        let mut net = Self::new(input, hidden, 0);
        net.params.iter_mut().for_each(|p| *p = 0.0);
        net
    }

    pub fn input_kind(&self) -> InputKind {
        self.input
    }

    pub fn spatial_dim(&self) -> usize {
        self.input.spatial_dim()
    }

    /// Widths including input and output: `[in, h_1, .., h_k, 1]`.
    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn hidden_layers(&self) -> usize {
        self.widths.len() - 2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Offset of layer `l`'s weight block in the flat vector (`l` counts
    /// weight layers from 0).
    pub(crate) fn layer_offset(&self, l: usize) -> usize {
        let mut off = 0;
        for k in 0..l {
            off += self.widths[k] * self.widths[k + 1] + self.widths[k + 1];
        }
        off
    }

    /// Network value at `(x, s)`. Panics if the network has no `s` channel,
    /// if `x` has the wrong dimension, or if `s ≤ 0` (contract violations).
    pub fn eval(&self, x: &[f64], s: f64) -> f64 {
        let out = self.forward_batch(x, Some(&[s]), super::batch::JetMode::Value);
        out.values[0]
    }

    /// Network value at `x` for spatial-only networks.
    pub fn eval_spatial(&self, x: &[f64]) -> f64 {
        let out = self.forward_batch(x, None, super::batch::JetMode::Value);
        out.values[0]
    }

    /// Value, spatial gradient, and pure second derivatives at `(x, s)`.
    pub fn derivatives(&self, x: &[f64], s: f64) -> DerivativeBundle {
        let out = self.forward_batch(x, Some(&[s]), super::batch::JetMode::Second);
        out.bundle_owned(0)
    }

    /// As [`NeuralField::derivatives`] for spatial-only networks.
    pub fn derivatives_spatial(&self, x: &[f64]) -> DerivativeBundle {
        let out = self.forward_batch(x, None, super::batch::JetMode::Second);
        out.bundle_owned(0)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(32 + self.params.len() * 8);
        buf.extend_from_slice(b"SDNF");
        buf.extend_from_slice(&1u32.to_le_bytes());
        buf.push(self.input.has_s_channel() as u8);
        buf.push(self.spatial_dim() as u8);
        buf.push((self.widths.len() - 1) as u8);
        for &w in &self.widths {
            buf.extend_from_slice(&(w as u32).to_le_bytes());
        }
        buf.push(0u8); // activation tag: Swish hidden / identity output
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for &p in &self.params {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut file = std::fs::File::open(path)?;
        let mut buf = Vec::new();
        file.read_to_end(&mut buf)?;
        let mut cur = Cursor { buf: &buf, pos: 0 };

        if cur.bytes(4)? != b"SDNF" {
            return Err(Error::Format("not a checkpoint file (bad magic)".into()));
        }
        let version = cur.u32()?;
        if version != 1 {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let has_s = cur.u8()? != 0;
        let dim = cur.u8()? as usize;
        let layers = cur.u8()? as usize;
        let mut widths = Vec::with_capacity(layers + 1);
        for _ in 0..=layers {
            widths.push(cur.u32()? as usize);
        }
        let act = cur.u8()?;
        if act != 0 {
            return Err(Error::Format(format!("unknown activation tag {act}")));
        }
        let seed = cur.u64()?;
        let count = cur.u64()? as usize;

        let input = if has_s {
            InputKind::SpatialLogS { dim }
        } else {
            InputKind::Spatial { dim }
        };
        if widths.first() != Some(&input.input_dim()) || widths.last() != Some(&1) {
            return Err(Error::Format(format!("inconsistent widths {widths:?}")));
        }
        if count != param_count(&widths) {
            return Err(Error::Format(format!(
                "parameter count {count} does not match widths {widths:?}"
            )));
        }
        let mut params = Vec::with_capacity(count);
        for _ in 0..count {
            let b: [u8; 8] = cur.bytes(8)?.try_into().unwrap();
            params.push(f64::from_le_bytes(b));
        }
        if cur.pos != buf.len() {
            return Err(Error::Format("trailing bytes in checkpoint".into()));
        }
        Ok(Self {
            input,
            widths,
            params,
            seed,
        })
    }
}

pub(crate) fn param_count(widths: &[usize]) -> usize {
    (1..widths.len())
        .map(|l| widths[l - 1] * widths[l] + widths[l])
        .sum()
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format("truncated checkpoint".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }
}
