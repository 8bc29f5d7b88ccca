//! Run configuration: flat key-value sections, every key defaulted, unknown
//! keys rejected.
//!
//! The on-disk format is TOML with one table per subsystem. Resolution order:
//! preset defaults ← config file ← repeated `--set section.key=value`
//! overrides ← `--seed`/`--out` flags. Silent hyperparameter typos are the
//! main reproduction hazard, so unknown keys anywhere are hard errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverse::InverseConfig;
use crate::train::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub preset: String,
    pub seed: u64,
    pub out_dir: String,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            preset: String::new(),
            seed: 0,
            out_dir: "runs/out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    /// Fractional order α ∈ (0,1).
    pub alpha: f64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self { alpha: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub hidden_layers: usize,
    pub width: usize,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            hidden_layers: 5,
            width: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdmSection {
    /// Space nodes per axis for the reference grid.
    pub space_nodes: usize,
    /// Time levels (including t = 0).
    pub time_nodes: usize,
}

impl Default for FdmSection {
    fn default() -> Self {
        Self {
            space_nodes: 101,
            time_nodes: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Times at which fields are exported and plotted.
    pub eval_times: Vec<f64>,
    /// Nodes per axis for exact-solution metrics and coefficient grids.
    pub metric_grid: usize,
    /// Slice height for 3D heatmaps.
    pub slice_z: f64,
    /// Time for the inverse run's solution heatmap.
    pub slice_t: f64,
    pub heatmaps: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            eval_times: vec![],
            metric_grid: 41,
            slice_z: 0.5,
            slice_t: 1.0,
            heatmaps: true,
        }
    }
}

/// Full resolved configuration for one run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub problem: ProblemSection,
    pub network: NetworkSection,
    pub training: TrainConfig,
    pub inverse: InverseConfig,
    pub fdm: FdmSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Preset defaults. Presets pin the paper-scale budgets; desk-scale runs
    /// override via `--set`.
    pub fn preset(name: &str) -> Result<Self> {
        let mut cfg = Self {
            run: RunSection {
                preset: name.to_string(),
                ..Default::default()
            },
            ..Default::default()
        };
        match name {
            "forward1d" => {
                // Desk-scale 1D manufactured problem.
                cfg.network = NetworkSection {
                    hidden_layers: 4,
                    width: 64,
                };
                cfg.training.iterations = 5000;
                cfg.output.eval_times = vec![0.02, 0.5, 1.0];
                cfg.output.metric_grid = 101;
                cfg.fdm = FdmSection {
                    space_nodes: 201,
                    time_nodes: 201,
                };
            }
            "forward2d-t1" => {
                cfg.training.iterations = 120_000;
                cfg.output.eval_times = vec![0.02, 1.0];
            }
            "forward2d-t10" => {
                cfg.training.iterations = 120_000;
                cfg.output.eval_times = vec![0.05, 10.0];
                cfg.fdm.time_nodes = 201; // puts t = 0.05 on the grid
            }
            "forward3d" => {
                cfg.training.iterations = 150_000;
                cfg.output.eval_times = vec![0.5, 1.0];
                cfg.output.metric_grid = 21;
                cfg.output.slice_z = 0.5;
            }
            "inverse3d" => {
                cfg.inverse.iterations = 150_000;
                cfg.output.slice_z = 0.8;
                cfg.output.slice_t = 1.0;
                cfg.output.metric_grid = 31;
            }
            "inverse2d-desk" => {
                cfg.inverse.iterations = 15_000;
                cfg.inverse.u_hidden_layers = 4;
                cfg.inverse.u_width = 64;
                cfg.inverse.a_hidden_layers = 3;
                cfg.inverse.a_width = 32;
                cfg.inverse.boundary_batch = 2000;
                cfg.inverse.prior_per_axis = 51;
                cfg.output.metric_grid = 41;
                cfg.output.slice_t = 1.0;
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown preset '{other}' (available: forward1d, forward2d-t1, forward2d-t10, forward3d, inverse3d, inverse2d-desk)"
                )))
            }
        }
        Ok(cfg)
    }

    /// All presets driving forward runs.
    pub const FORWARD_PRESETS: [&'static str; 4] =
        ["forward1d", "forward2d-t1", "forward2d-t10", "forward3d"];

    /// All presets driving inverse runs.
    pub const INVERSE_PRESETS: [&'static str; 2] = ["inverse3d", "inverse2d-desk"];

    /// Parses a TOML document over `self` (file keys win), rejecting unknown
    /// keys.
    pub fn merged_with_toml(&self, text: &str) -> Result<Self> {
        let base = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        let over: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let merged = merge_toml(toml::Value::Table(base), toml::Value::Table(over));
        merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    /// Applies one `section.key=value` override.
    pub fn with_override(&self, assignment: &str) -> Result<Self> {
        let (path, raw_value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        let path: Vec<&str> = path.trim().split('.').collect();
        if path.is_empty() || path.iter().any(|p| p.is_empty()) {
            return Err(Error::Config(format!("bad override path in '{assignment}'")));
        }
        // Values parse as TOML literals; bare words fall back to strings.
        let parsed: toml::Value = match format!("v = {}", raw_value.trim()).parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").unwrap(),
            Err(_) => toml::Value::String(raw_value.trim().to_string()),
        };
        let mut doc = String::new();
        if path.len() == 1 {
            doc.push_str(&format!("{} = {}", path[0], toml::Value::to_string(&parsed)));
        } else {
            doc.push_str(&format!("[{}]\n", path[..path.len() - 1].join(".")));
            doc.push_str(&format!(
                "{} = {}",
                path[path.len() - 1],
                toml::Value::to_string(&parsed)
            ));
        }
        self.merged_with_toml(&doc)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

fn merge_toml(base: toml::Value, over: toml::Value) -> toml::Value {
    match (base, over) {
        (toml::Value::Table(mut b), toml::Value::Table(o)) => {
            for (k, v) in o {
                let merged = match b.remove(&k) {
                    Some(existing) => merge_toml(existing, v),
                    None => v,
                };
                b.insert(k, merged);
            }
            toml::Value::Table(b)
        }
        (_, over) => over,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve_and_unknown_names_fail() {
        for name in RunConfig::FORWARD_PRESETS
            .iter()
            .chain(RunConfig::INVERSE_PRESETS.iter())
        {
            let cfg = RunConfig::preset(name).unwrap();
            assert_eq!(cfg.run.preset, *name);
        }
        assert!(RunConfig::preset("no-such-preset").is_err());
    }

    #[test]
    fn file_and_set_overrides_apply_in_order() {
        let cfg = RunConfig::preset("forward2d-t1").unwrap();
        let cfg = cfg
            .merged_with_toml("[training]\niterations = 777\n[network]\nwidth = 128\n")
            .unwrap();
        assert_eq!(cfg.training.iterations, 777);
        assert_eq!(cfg.network.width, 128);
        let cfg = cfg.with_override("training.iterations=888").unwrap();
        assert_eq!(cfg.training.iterations, 888);
        let cfg = cfg.with_override("training.s_sampling=\"log-uniform\"").unwrap();
        assert_eq!(cfg.training.s_sampling, crate::train::SSampling::LogUniform);
        let cfg = cfg.with_override("output.eval_times=[0.5]").unwrap();
        assert_eq!(cfg.output.eval_times, vec![0.5]);
    }

    #[test]
    fn unknown_keys_are_hard_errors() {
        let cfg = RunConfig::preset("forward2d-t1").unwrap();
        assert!(cfg.merged_with_toml("[training]\niterationz = 5\n").is_err());
        assert!(cfg.merged_with_toml("[trainingz]\niterations = 5\n").is_err());
        assert!(cfg.with_override("training.iterationz=5").is_err());
        assert!(cfg.with_override("nonsense").is_err());
    }

    #[test]
    fn toml_round_trip_preserves_the_config() {
        let cfg = RunConfig::preset("inverse2d-desk").unwrap();
        let text = cfg.to_toml_string();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
