//! Closed-form coefficient and spatial-factor fields.
//!
//! Coefficients, initial values, and separable source factors enter as
//! callables registered by the built-in problem library; the CLI exposes
//! them as named presets only (no expression parser).

use std::fmt;
use std::sync::Arc;

/// A scalar field `x ↦ value`.
#[derive(Clone)]
pub struct ScalarField(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>);

impl ScalarField {
    pub fn new<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c)
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField(..)")
    }
}

/// A coefficient field with an analytic gradient, as the expanded divergence
/// form `∇·(a∇u) = a Δu + ∇a·∇u` requires.
#[derive(Clone)]
pub struct Coefficient {
    value: ScalarField,
    gradient: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
}

impl Coefficient {
    pub fn new<G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static>(
        value: ScalarField,
        gradient: G,
    ) -> Self {
        Self {
            value,
            gradient: Arc::new(gradient),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(ScalarField::constant(c), |_, g| g.fill(0.0))
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.value.eval(x)
    }

    #[inline]
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.gradient_into(x, &mut g);
        g
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Coefficient(..)")
    }
}

/// A spatial factor with analytic gradient and pure second derivatives,
/// enough to push exact solutions through the Laplace-domain residual.
#[derive(Clone)]
pub struct SpatialFactor {
    pub(crate) value: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub(crate) gradient: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    pub(crate) second: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
}

impl SpatialFactor {
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }

    pub fn second_into(&self, x: &[f64], out: &mut [f64]) {
        (self.second)(x, out)
    }

    pub fn as_scalar_field(&self) -> ScalarField {
        let v = self.value.clone();
        ScalarField::new(move |x| v(x))
    }
}

impl fmt::Debug for SpatialFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SpatialFactor(..)")
    }
}

/// `A · Π_k sin(ω_k x_k)`: the spatial shape of every built-in exact
/// solution; vanishes on the boundary of the unit box when each `ω_k` is an
/// integer multiple of π.
pub fn sine_product(amplitude: f64, freqs: &[f64]) -> SpatialFactor {
    let d = freqs.len();
    let f1: Vec<f64> = freqs.to_vec();
    let f2 = f1.clone();
    let f3 = f1.clone();
    SpatialFactor {
        value: Arc::new(move |x: &[f64]| {
            debug_assert_eq!(x.len(), d);
            amplitude * x.iter().zip(&f1).map(|(&xi, &w)| (w * xi).sin()).product::<f64>()
        }),
        gradient: Arc::new(move |x: &[f64], out: &mut [f64]| {
            for k in 0..d {
                let mut g = amplitude;
                for (j, (&xj, &w)) in x.iter().zip(&f2).enumerate() {
                    g *= if j == k { w * (w * xj).cos() } else { (w * xj).sin() };
                }
                out[k] = g;
            }
        }),
        second: Arc::new(move |x: &[f64], out: &mut [f64]| {
            let v = amplitude * x.iter().zip(&f3).map(|(&xi, &w)| (w * xi).sin()).product::<f64>();
            for (k, &w) in f3.iter().enumerate() {
                out[k] = -w * w * v;
            }
        }),
    }
}
