//! Problem definitions for the subdiffusion equation and the Laplace-domain
//! residual/loss assembly.
//!
//! A [`ProblemSpec`] holds the box domain, fractional order, coefficient
//! fields, initial value, and a separable source `f(x,t) = Σ g_k(x)·P_k(t)`.
//! Transforming the equation turns it into an `s`-parameterized elliptic
//! family
//!
//! ```text
//! s^α ũ − ∇·(a ∇ũ) − c ũ = F(x,s),   F(x,s) = s^{α−1} u0(x) + f̃(x,s),
//! ```
//!
//! with homogeneous Dirichlet data, and the divergence expanded as
//! `a Δũ + ∇a·∇ũ`. Anything that can produce a [`DerivativeBundle`] at
//! `(x, s)` — a trained network or a closed-form solution — can be pushed
//! through the residual.

pub mod fields;
pub mod presets;

use crate::error::{Error, Result};
use crate::laplace::TimeProfile;
use crate::nn::{DerivativeBundle, InputKind, JetMode, NeuralField};

pub use fields::{sine_product, Coefficient, ScalarField, SpatialFactor};

/// One separable source term `g(x)·P(t)`.
#[derive(Debug, Clone)]
pub struct SourceTerm {
    pub spatial: ScalarField,
    pub profile: TimeProfile,
}

/// The subdiffusion problem on a box with homogeneous Dirichlet boundary.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    name: String,
    /// Per-axis `[lo, hi]` bounds.
    domain: Vec<(f64, f64)>,
    alpha: f64,
    t_final: f64,
    a: Coefficient,
    c: ScalarField,
    u0: ScalarField,
    source: Vec<SourceTerm>,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        domain: Vec<(f64, f64)>,
        alpha: f64,
        t_final: f64,
        a: Coefficient,
        c: ScalarField,
        u0: ScalarField,
        source: Vec<SourceTerm>,
    ) -> Result<Self> {
        let dim = domain.len();
        if dim == 0 || dim > crate::nn::MAX_DIM {
            return Err(Error::Domain(format!("spatial dimension {dim} unsupported")));
        }
        for &(lo, hi) in &domain {
            if !(lo < hi) {
                return Err(Error::Domain(format!("degenerate axis [{lo}, {hi}]")));
            }
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("fractional order {alpha} outside (0,1)")));
        }
        if !(t_final > 0.0) {
            return Err(Error::Domain(format!("final time {t_final} must be positive")));
        }
        Ok(Self {
            name: name.into(),
            domain,
            alpha,
            t_final,
            a,
            c,
            u0,
            source,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn diffusion(&self) -> &Coefficient {
        &self.a
    }

    pub fn reaction(&self) -> &ScalarField {
        &self.c
    }

    pub fn initial_value(&self) -> &ScalarField {
        &self.u0
    }

    pub fn source_terms(&self) -> &[SourceTerm] {
        &self.source
    }

    /// Time-domain source `f(x, t)` (used by the finite-difference solver).
    pub fn source_value(&self, x: &[f64], t: f64) -> f64 {
        self.source
            .iter()
            .map(|term| term.spatial.eval(x) * term.profile.value_at(t))
            .sum()
    }

    /// `F(x,s) = s^{α−1} u0(x) + f̃(x,s)` with `f̃` assembled termwise.
    pub fn laplace_rhs(&self, x: &[f64], s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("laplace_rhs requires s > 0, got {s}")));
        }
        let mut acc = s.powf(self.alpha - 1.0) * self.u0.eval(x);
        for term in &self.source {
            acc += term.spatial.eval(x) * term.profile.laplace(s)?;
        }
        Ok(acc)
    }

    /// Everything the residual needs at one collocation point besides the
    /// field's own bundle.
    pub fn residual_data(&self, x: &[f64], s: f64) -> Result<ResidualData> {
        let mut grad_a = [0.0; crate::nn::MAX_DIM];
        self.a.gradient_into(x, &mut grad_a[..self.dim()]);
        Ok(ResidualData {
            s_alpha: s.powf(self.alpha),
            a: self.a.eval(x),
            grad_a,
            c: self.c.eval(x),
            rhs: self.laplace_rhs(x, s)?,
        })
    }

    /// True iff `x` lies inside the closed box.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.domain)
            .all(|(&xi, &(lo, hi))| xi >= lo && xi <= hi)
    }
}

/// Frozen per-point coefficients for the Laplace-domain residual.
#[derive(Debug, Clone, Copy)]
pub struct ResidualData {
    pub s_alpha: f64,
    pub a: f64,
    pub grad_a: [f64; crate::nn::MAX_DIM],
    pub c: f64,
    pub rhs: f64,
}

impl ResidualData {
    /// `r = s^α v − a Δv − ∇a·∇v − c v − F` for any bundle `(v, ∇v, ∂²v)`.
    #[inline]
    pub fn residual(&self, value: f64, gradient: &[f64], second: &[f64]) -> f64 {
        let lap: f64 = second.iter().sum();
        let adv: f64 = gradient
            .iter()
            .zip(&self.grad_a)
            .map(|(&g, &ga)| g * ga)
            .sum();
        self.s_alpha * value - self.a * lap - adv - self.c * value - self.rhs
    }
}

/// Anything evaluable (with spatial derivatives) in the Laplace domain.
pub trait LaplaceField {
    fn spatial_dim(&self) -> usize;

    /// Value, spatial gradient, and pure second derivatives at `(x, s)`;
    /// callers guarantee `s > 0`.
    fn bundle(&self, x: &[f64], s: f64) -> DerivativeBundle;

    fn value(&self, x: &[f64], s: f64) -> f64 {
        self.bundle(x, s).value
    }

    /// Batched values; `xs` is `n×d` row-major. The default loops pointwise;
    /// implementations with faster batch paths override it.
    fn values_batch(&self, xs: &[f64], ss: &[f64]) -> Vec<f64> {
        let d = self.spatial_dim();
        ss.iter()
            .enumerate()
            .map(|(j, &s)| self.value(&xs[j * d..(j + 1) * d], s))
            .collect()
    }
}

impl LaplaceField for NeuralField {
    fn spatial_dim(&self) -> usize {
        self.spatial_dim()
    }

    fn bundle(&self, x: &[f64], s: f64) -> DerivativeBundle {
        assert!(
            matches!(self.input_kind(), InputKind::SpatialLogS { .. }),
            "Laplace-domain evaluation needs a network with an s channel"
        );
        self.derivatives(x, s)
    }

    fn value(&self, x: &[f64], s: f64) -> f64 {
        self.eval(x, s)
    }

    fn values_batch(&self, xs: &[f64], ss: &[f64]) -> Vec<f64> {
        self.forward_batch(xs, Some(ss), JetMode::Value).values
    }
}

/// A closed-form separable solution `u(x,t) = P(t)·S(x)`, usable both in the
/// time domain and (through its transform `P̃(s)·S(x)`) as a Laplace-domain
/// field.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub spatial: SpatialFactor,
    pub profile: TimeProfile,
    dim: usize,
}

impl ExactSolution {
    pub fn new(dim: usize, spatial: SpatialFactor, profile: TimeProfile) -> Self {
        Self {
            spatial,
            profile,
            dim,
        }
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        self.profile.value_at(t) * self.spatial.value(x)
    }

    pub fn laplace_value(&self, x: &[f64], s: f64) -> Result<f64> {
        Ok(self.profile.laplace(s)? * self.spatial.value(x))
    }
}

impl LaplaceField for ExactSolution {
    fn spatial_dim(&self) -> usize {
        self.dim
    }

    fn bundle(&self, x: &[f64], s: f64) -> DerivativeBundle {
        let p = self
            .profile
            .laplace(s)
            .expect("exact-solution bundle requires s > 0");
        let d = x.len();
        let mut gradient = vec![0.0; d];
        let mut second = vec![0.0; d];
        self.spatial.gradient_into(x, &mut gradient);
        self.spatial.second_into(x, &mut second);
        gradient.iter_mut().for_each(|g| *g *= p);
        second.iter_mut().for_each(|q| *q *= p);
        DerivativeBundle {
            value: p * self.spatial.value(x),
            gradient,
            second,
        }
    }
}

/// Laplace-domain PDE residual of `field` at `(x, s)`.
pub fn laplace_residual(
    field: &dyn LaplaceField,
    spec: &ProblemSpec,
    x: &[f64],
    s: f64,
) -> Result<f64> {
    let data = spec.residual_data(x, s)?;
    let b = field.bundle(x, s);
    Ok(data.residual(b.value, &b.gradient, &b.second))
}

/// A sampled collocation batch: interior points carry the residual, boundary
/// points the Dirichlet condition. Point buffers are `n×d` row-major.
#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub interior_xs: Vec<f64>,
    pub interior_ss: Vec<f64>,
    pub boundary_xs: Vec<f64>,
    pub boundary_ss: Vec<f64>,
}

/// Loss components of the composite forward objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardLoss {
    pub total: f64,
    pub eq: f64,
    pub bd: f64,
}

/// `w_eq · mean r² + w_bd · mean ũ²` over the batch (no gradients).
pub fn forward_loss(
    field: &dyn LaplaceField,
    spec: &ProblemSpec,
    batch: &Batch,
    w_eq: f64,
    w_bd: f64,
) -> Result<ForwardLoss> {
    let d = spec.dim();
    let n_r = batch.interior_ss.len();
    let n_bd = batch.boundary_ss.len();
    if n_r == 0 {
        return Err(Error::EmptyBatch("residual points"));
    }
    if n_bd == 0 {
        return Err(Error::EmptyBatch("boundary points"));
    }

    let mut eq = 0.0;
    for j in 0..n_r {
        let x = &batch.interior_xs[j * d..(j + 1) * d];
        let r = laplace_residual(field, spec, x, batch.interior_ss[j])?;
        eq += r * r;
    }
    eq /= n_r as f64;

    let values = field.values_batch(&batch.boundary_xs, &batch.boundary_ss);
    let bd = values.iter().map(|&v| v * v).sum::<f64>() / n_bd as f64;

    Ok(ForwardLoss {
        total: w_eq * eq + w_bd * bd,
        eq,
        bd,
    })
}
