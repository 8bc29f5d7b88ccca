//! Experiment front end: configs, presets, manifests, artifact writers, and
//! the verification suite. The `subdiff` binary is a thin shell over
//! [`commands`].

pub mod commands;
pub mod config;
pub mod csvio;
pub mod manifest;
pub mod plot;
pub mod verify;

pub use commands::{cmd_fdm, cmd_forward, cmd_inverse, cmd_nilt, NiltRequest};
pub use config::RunConfig;
pub use manifest::RunManifest;
