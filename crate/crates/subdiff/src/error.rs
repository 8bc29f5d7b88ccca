//! Crate-wide error type.
//!
//! Hot-path evaluation routines (`NeuralField::eval` and friends) treat shape
//! mismatches as programmer error and panic via `assert!`; everything that can
//! fail for data-dependent reasons returns [`Error`].

use std::fmt;

/// Errors produced by solvers, training drivers, and file I/O.
#[derive(Debug)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation
    /// (non-positive `s` or `t`, `alpha` outside `(0,1)`, odd Stehfest `M`, ...).
    Domain(String),
    /// A batch-valued operation received an empty batch.
    EmptyBatch(&'static str),
    /// Reconstruction was requested outside the trained time range `[t1, T]`.
    OutOfTrainedRange { t: f64, t1: f64, t_final: f64 },
    /// Training produced a non-finite loss; carries the iteration and the
    /// offending loss component.
    NonFinite { iteration: usize, component: String },
    /// The banded linear solver met a zero (or effectively zero) pivot.
    SingularSystem { row: usize, pivot: f64 },
    /// Configuration, preset, or CLI-override problems.
    Config(String),
    /// Malformed checkpoint, grid, or manifest file.
    Format(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::EmptyBatch(what) => write!(f, "empty batch: {what}"),
            Error::OutOfTrainedRange { t, t1, t_final } => write!(
                f,
                "time {t} outside trained range [{t1}, {t_final}]; refusing to extrapolate"
            ),
            Error::NonFinite {
                iteration,
                component,
            } => write!(f, "non-finite loss at iteration {iteration} ({component})"),
            Error::SingularSystem { row, pivot } => {
                write!(f, "singular linear system: pivot {pivot:e} at row {row}")
            }
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Format(msg) => write!(f, "file format error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
