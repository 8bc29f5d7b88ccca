//! Run manifests: the full resolved config, seed, code version, timing, and
//! final metrics, written next to the run's outputs.
//!
//! Re-running with a manifest's config and seed reproduces the metrics
//! bit-for-bit on the same build (all reductions are fixed-order).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Which subcommand produced this run.
    pub command: String,
    pub preset: String,
    pub crate_version: String,
    pub seed: u64,
    pub duration_seconds: f64,
    /// Final metrics (relative l2, final loss components, ...).
    pub metrics: BTreeMap<String, f64>,
    /// Output files, relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub config: RunConfig,
}

impl RunManifest {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Self {
            command: command.to_string(),
            preset: config.run.preset.clone(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.run.seed,
            duration_seconds: 0.0,
            metrics: BTreeMap::new(),
            outputs: Vec::new(),
            config,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_with_identical_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.toml");
        let mut m = RunManifest::new("forward", RunConfig::preset("forward2d-t1").unwrap());
        m.metrics.insert("relative_l2".into(), 0.123456789);
        m.outputs.push("loss_history.csv".into());
        m.duration_seconds = 12.5;
        m.save(&path).unwrap();
        let loaded = RunManifest::load(&path).unwrap();
        assert_eq!(m, loaded);
        assert_eq!(loaded.config, RunConfig::preset("forward2d-t1").unwrap());
    }
}
