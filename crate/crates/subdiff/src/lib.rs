//! Forward and inverse solvers for the time-fractional subdiffusion equation
//!
//! ```text
//! ∂t^α u = ∇·(a(x) ∇u) + c(x) u + f(x,t)   on Ω ⊂ R^d, 0 < α < 1,
//! u(x,0) = u0(x),   u = 0 on ∂Ω,
//! ```
//!
//! built around a Laplace-domain formulation: a neural field `ũ(x,s)` is
//! trained on the transformed equation (which contains no fractional
//! derivative), and time-domain solutions are recovered with the
//! Gaver-Stehfest inversion. An L1-scheme finite-difference solver provides
//! reference solutions in 1D/2D, and a dual-network driver identifies an
//! unknown diffusion coefficient from interior measurements.
//!
//! The crate is organized by subsystem:
//!
//! - [`laplace`] — time-profile transforms, the Caputo transform rule,
//!   Stehfest coefficients and inversion;
//! - [`nn`] — the neural field with analytic spatial derivatives and exact
//!   parameter gradients;
//! - [`problem`] — problem definitions, the Laplace-domain residual and
//!   forward loss, and the built-in problem library;
//! - [`train`] — collocation sampling, Adam, the forward training driver,
//!   and time-domain reconstruction;
//! - [`fdm`] — the L1 finite-difference reference solver and error metrics;
//! - [`inverse`] — dual-network diffusion-coefficient identification;
//! - [`run`] — experiment front end: configs, presets, manifests, CSV/PNG
//!   outputs, and the verification suite backing the `subdiff` binary.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod error;
pub mod fdm;
pub mod inverse;
pub mod laplace;
pub mod nn;
pub mod problem;
pub mod run;
pub mod train;

pub use error::{Error, Result};
