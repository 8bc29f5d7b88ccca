//! Neural field over `(x, s)` with analytic spatial derivatives and exact
//! parameter gradients.

pub mod activation;
mod batch;
mod colmat;
mod field;
mod gemm;

pub use batch::{BatchOutput, BatchTrace, BundleAdjoint, BundleView, JetMode, MAX_DIM};
pub use field::{DerivativeBundle, InputKind, NeuralField};

