//! Collocation sampling, forward training, and time-domain reconstruction.
//!
//! Training draws fresh interior/boundary batches each iteration, minimizes
//! the composite Laplace-domain loss with Adam, and records the loss history
//! at a configurable stride. The Laplace variable is sampled from
//! `S = [ln2/T, (ln2/t1)·M]` — exactly the range the Stehfest inversion will
//! query for reconstruction times `t ∈ [t1, T]` — uniformly by default, or
//! log-uniformly via [`SSampling::LogUniform`] (the Stehfest nodes crowd
//! toward large `s` for small `t`).
//!
//! Everything is sequential and seeded: one master seed fans out to the
//! initializer and sampler streams, and reruns reproduce results bit for bit
//! on the same build.

pub mod adam;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::laplace::StehfestRule;
use crate::nn::{BundleAdjoint, InputKind, JetMode, NeuralField};
use crate::problem::{Batch, LaplaceField, ProblemSpec};

pub use adam::Adam;

/// How the Laplace variable is drawn from the training interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SSampling {
    Uniform,
    LogUniform,
}

/// Forward-training hyperparameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Interior collocation points per iteration (N_r).
    pub residual_batch: usize,
    /// Boundary collocation points per iteration (N_bd).
    pub boundary_batch: usize,
    pub weight_eq: f64,
    pub weight_bd: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    /// Stehfest term count used both for the s-interval and reconstruction.
    pub stehfest_m: usize,
    /// Smallest reconstruction time.
    pub t1: f64,
    pub s_sampling: SSampling,
    /// Loss history stride (1 = every iteration).
    pub log_stride: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            residual_batch: 1000,
            boundary_batch: 1600,
            weight_eq: 1.0,
            weight_bd: 2000.0,
            learning_rate: 1e-4,
            iterations: 120_000,
            stehfest_m: 4,
            t1: 0.01,
            s_sampling: SSampling::Uniform,
            log_stride: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, spec: &ProblemSpec) -> Result<()> {
        if self.residual_batch == 0 || self.boundary_batch == 0 {
            return Err(Error::Config("batch sizes must be at least 1".into()));
        }
        if self.stehfest_m % 2 != 0 || self.stehfest_m < 2 {
            return Err(Error::Config(format!(
                "stehfest_m must be even and >= 2, got {}",
                self.stehfest_m
            )));
        }
        if !(self.t1 > 0.0 && self.t1 < spec.t_final()) {
            return Err(Error::Config(format!(
                "t1 must lie in (0, T) = (0, {}), got {}",
                spec.t_final(),
                self.t1
            )));
        }
        if self.log_stride == 0 {
            return Err(Error::Config("log_stride must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }

    pub fn s_interval(&self, spec: &ProblemSpec) -> Result<SInterval> {
        SInterval::new(spec.t_final(), self.t1, self.stehfest_m)
    }
}

/// The training interval for the Laplace variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SInterval {
    pub s_min: f64,
    pub s_max: f64,
}

impl SInterval {
    /// `s_min = ln2/T`, `s_max = (ln2/t1)·M`.
    pub fn new(t_final: f64, t1: f64, m: usize) -> Result<Self> {
        if !(t1 > 0.0 && t1 < t_final) {
            return Err(Error::Domain(format!("need 0 < t1 < T, got t1={t1}, T={t_final}")));
        }
        let s_min = std::f64::consts::LN_2 / t_final;
        let s_max = std::f64::consts::LN_2 / t1 * m as f64;
        if !(s_min < s_max) {
            return Err(Error::Domain(format!(
                "degenerate s-interval [{s_min}, {s_max}]"
            )));
        }
        Ok(Self { s_min, s_max })
    }

    pub fn sample(&self, how: SSampling, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        match how {
            SSampling::Uniform => self.s_min + (self.s_max - self.s_min) * u,
            SSampling::LogUniform => {
                (self.s_min.ln() + (self.s_max.ln() - self.s_min.ln()) * u).exp()
            }
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        // A whisker of slack: the reconstruction nodes hit the endpoints.
        let tol = 1e-9 * self.s_max;
        s >= self.s_min - tol && s <= self.s_max + tol
    }
}

/// Deterministic fan-out of one master seed into per-purpose streams.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    // splitmix64 on master ⊕ stream·φ
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed streams used by the drivers.
pub mod streams {
    pub const NET_INIT: u64 = 0;
    pub const SAMPLER: u64 = 1;
    pub const AUX_NET_INIT: u64 = 2;
    pub const MEASUREMENTS: u64 = 3;
}

/// One fresh collocation batch: interior `x` uniform on the box, boundary `x`
/// uniform on `∂Ω` (faces weighted by area, the fixed coordinate set exactly
/// to the face value), `s` drawn independently per point.
pub fn sample_batch(
    spec: &ProblemSpec,
    residual_batch: usize,
    boundary_batch: usize,
    s_sampling: SSampling,
    sint: &SInterval,
    rng: &mut ChaCha8Rng,
) -> Batch {
    let d = spec.dim();
    let domain = spec.domain();
    let mut batch = Batch::default();

    batch.interior_xs.reserve(residual_batch * d);
    for _ in 0..residual_batch {
        for &(lo, hi) in domain {
            batch.interior_xs.push(lo + (hi - lo) * rng.random::<f64>());
        }
        batch.interior_ss.push(sint.sample(s_sampling, rng));
    }

    // Face areas: Π_{j≠k} extent_j, each axis contributing two faces.
    let mut weights = Vec::with_capacity(2 * d);
    for k in 0..d {
        let area: f64 = (0..d)
            .filter(|&j| j != k)
            .map(|j| domain[j].1 - domain[j].0)
            .product();
        weights.push(area); // low face
        weights.push(area); // high face
    }
    let total: f64 = weights.iter().sum();

    batch.boundary_xs.reserve(boundary_batch * d);
    for _ in 0..boundary_batch {
        let mut pick = rng.random::<f64>() * total;
        let mut face = 0;
        for (f, &w) in weights.iter().enumerate() {
            if pick < w || f == weights.len() - 1 {
                face = f;
                break;
            }
            pick -= w;
        }
        let axis = face / 2;
        let high = face % 2 == 1;
        for (k, &(lo, hi)) in domain.iter().enumerate() {
            if k == axis {
                batch.boundary_xs.push(if high { hi } else { lo });
            } else {
                batch.boundary_xs.push(lo + (hi - lo) * rng.random::<f64>());
            }
        }
        batch.boundary_ss.push(sint.sample(s_sampling, rng));
    }

    batch
}

/// One row of the loss history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub iteration: usize,
    pub eq: f64,
    pub bd: f64,
    pub total: f64,
}

/// A trained forward model plus its loss history.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub net: NeuralField,
    pub history: Vec<LossRecord>,
}

/// Accumulates the forward loss and its parameter gradient for one batch.
/// Returns the unweighted means `(L_eq, L_bd)`.
pub fn forward_loss_gradient(
    net: &NeuralField,
    spec: &ProblemSpec,
    batch: &Batch,
    w_eq: f64,
    w_bd: f64,
    grad: &mut [f64],
) -> Result<(f64, f64)> {
    let d = spec.dim();
    let n_r = batch.interior_ss.len();
    let n_bd = batch.boundary_ss.len();
    if n_r == 0 {
        return Err(Error::EmptyBatch("residual points"));
    }
    if n_bd == 0 {
        return Err(Error::EmptyBatch("boundary points"));
    }

    let mut data = Vec::with_capacity(n_r);
    for j in 0..n_r {
        data.push(spec.residual_data(
            &batch.interior_xs[j * d..(j + 1) * d],
            batch.interior_ss[j],
        )?);
    }
    let inv_nr = 1.0 / n_r as f64;
    let eq = net.loss_gradient(
        &batch.interior_xs,
        Some(&batch.interior_ss),
        JetMode::Second,
        |j, b| {
            let dat = &data[j];
            let r = dat.residual(b.value, b.gradient, b.second);
            let scale = 2.0 * w_eq * r * inv_nr;
            let mut adj = BundleAdjoint {
                d_value: scale * (dat.s_alpha - dat.c),
                ..Default::default()
            };
            for k in 0..d {
                adj.d_grad[k] = -scale * dat.grad_a[k];
                adj.d_second[k] = -scale * dat.a;
            }
            (r * r * inv_nr, adj)
        },
        grad,
    )?;

    let inv_nbd = 1.0 / n_bd as f64;
    let bd = net.loss_gradient(
        &batch.boundary_xs,
        Some(&batch.boundary_ss),
        JetMode::Value,
        |_, b| {
            let adj = BundleAdjoint {
                d_value: 2.0 * w_bd * b.value * inv_nbd,
                ..Default::default()
            };
            (b.value * b.value * inv_nbd, adj)
        },
        grad,
    )?;

    Ok((eq, bd))
}

/// Trains a fresh network on the forward problem.
///
/// `hidden` gives the hidden-layer widths; `seed` fans out to initializer and
/// sampler streams. With `iterations = 0` the initialized network is returned
/// untouched (and the history is empty).
pub fn train_forward(
    spec: &ProblemSpec,
    hidden: &[usize],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainResult> {
    cfg.validate(spec)?;
    let sint = cfg.s_interval(spec)?;
    let mut net = NeuralField::new(
        InputKind::SpatialLogS { dim: spec.dim() },
        hidden,
        derive_seed(seed, streams::NET_INIT),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, streams::SAMPLER));
    let mut adam = Adam::new(net.param_count(), cfg.learning_rate);
    let mut grad = vec![0.0; net.param_count()];
    let mut history = Vec::new();

    for iteration in 0..cfg.iterations {
        let batch = sample_batch(
            spec,
            cfg.residual_batch,
            cfg.boundary_batch,
            cfg.s_sampling,
            &sint,
            &mut rng,
        );
        grad.fill(0.0);
        let (eq, bd) =
            forward_loss_gradient(&net, spec, &batch, cfg.weight_eq, cfg.weight_bd, &mut grad)
                .map_err(|e| match e {
                    Error::Domain(msg) => Error::NonFinite {
                        iteration,
                        component: msg,
                    },
                    other => other,
                })?;
        let total = cfg.weight_eq * eq + cfg.weight_bd * bd;
        if !total.is_finite() {
            let component = if !eq.is_finite() { "equation loss" } else { "boundary loss" };
            return Err(Error::NonFinite {
                iteration,
                component: component.into(),
            });
        }
        if iteration % cfg.log_stride == 0 {
            history.push(LossRecord {
                iteration,
                eq,
                bd,
                total,
            });
        }
        adam.step(net.params_mut(), &grad);
    }

    Ok(TrainResult { net, history })
}

/// Stehfest reconstruction `u(x,t) = (ln2/t) Σ μ_i ũ(x, i·ln2/t)` on a set of
/// points and times.
///
/// Times must lie in the trained range `[t1, T]` and every node `i·ln2/t`
/// inside the training interval; anything else is refused rather than
/// silently extrapolated. The result is time-major: `out[ti·n + j]` is the
/// value at `times[ti]`, point `j`.
pub fn reconstruct(
    field: &dyn LaplaceField,
    points: &[f64],
    times: &[f64],
    rule: &StehfestRule,
    sint: &SInterval,
    t1: f64,
    t_final: f64,
) -> Result<Vec<f64>> {
    let d = field.spatial_dim();
    assert!(points.len() % d == 0, "point buffer not a multiple of dim");
    let n = points.len() / d;
    let mut out = vec![0.0; times.len() * n];
    let mut comp = vec![0.0; n];

    for (ti, &t) in times.iter().enumerate() {
        if !(t >= t1 && t <= t_final) {
            return Err(Error::OutOfTrainedRange { t, t1, t_final });
        }
        let nodes = rule.nodes(t)?;
        for s in &nodes {
            if !sint.contains(*s) {
                return Err(Error::Domain(format!(
                    "Stehfest node s={s} falls outside the trained interval [{}, {}]",
                    sint.s_min, sint.s_max
                )));
            }
        }
        let slot = &mut out[ti * n..(ti + 1) * n];
        comp.fill(0.0);
        for (i, &s) in nodes.iter().enumerate() {
            let mu = rule.coefficients()[i];
            let ss = vec![s; n];
            let values = field.values_batch(points, &ss);
            for (j, &v) in values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Domain(format!(
                        "non-finite transform value at point {j}, s={s}"
                    )));
                }
                // Neumaier-compensated accumulation, same as the scalar path.
                let term = mu * v;
                let sum = slot[j];
                let t2 = sum + term;
                comp[j] += if sum.abs() >= term.abs() {
                    (sum - t2) + term
                } else {
                    (term - t2) + sum
                };
                slot[j] = t2;
            }
        }
        let scale = std::f64::consts::LN_2 / t;
        for j in 0..n {
            slot[j] = scale * (slot[j] + comp[j]);
        }
    }
    Ok(out)
}
