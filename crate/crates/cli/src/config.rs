//! Experiment description, read from TOML and overridden from the command
//! line.
//!
//! ```toml
//! schema_version = 1
//! kind = "fig3"
//! pairs = [[0.3, 0.2], [0.7, 0.9]]
//! s_range = { start = 0.0, stop = 40.0, step = 1.0 }
//!
//! [sim]
//! horizon = 1000000
//! ```

use std::path::{Path, PathBuf};

use ehsense_core::{Capacity, ObservationSampler, SimConfig, ThresholdMode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// `(pi1, pe)` pairs covering both `pe < pi1` and `pe >= pi1`.
pub const DEFAULT_PAIRS: [(f64, f64); 4] = [(0.3, 0.2), (0.3, 0.5), (0.7, 0.5), (0.7, 0.9)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Optimize,
    /// Threshold sweep at fixed `s`.
    Sweep,
    #[serde(alias = "fig3")]
    SweepS,
    Simulate,
    #[serde(alias = "fig4")]
    ErrorCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SRange {
    pub fn values(&self) -> Vec<f64> {
        if self.step.is_nan() || self.step <= 0.0 || self.stop < self.start {
            return Vec::new();
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + self.step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Defaults to `s + 8`.
    pub theta_max: Option<f64>,
    pub points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            theta_max: None,
            points: 401,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub horizon: u64,
    /// Defaults to a tenth of the horizon.
    pub warmup: Option<u64>,
    pub replicas: u32,
    pub batches: u32,
    pub initial_battery: u64,
    pub sampler: ObservationSampler,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            horizon: 1_000_000,
            warmup: None,
            replicas: 1,
            batches: 20,
            initial_battery: 0,
            sampler: ObservationSampler::default(),
        }
    }
}

impl SimSection {
    pub fn to_config(&self, seed: u64) -> SimConfig {
        SimConfig {
            horizon: self.horizon,
            warmup: self.warmup.unwrap_or(self.horizon / 10),
            seed,
            initial_battery: self.initial_battery,
            replicas: self.replicas,
            batches: self.batches,
            sampler: self.sampler,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema_version: u32,
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default)]
    pub s_values: Option<Vec<f64>>,
    #[serde(default)]
    pub s_range: Option<SRange>,
    #[serde(default = "default_half")]
    pub pi1: f64,
    #[serde(default = "default_half")]
    pub pe: f64,
    #[serde(default)]
    pub pairs: Option<Vec<(f64, f64)>>,
    /// Battery size in packets; unlimited when absent.
    #[serde(default)]
    pub capacity: Option<u64>,
    #[serde(default = "default_sensors")]
    pub num_sensors: u32,
    /// Fixed threshold for `simulate`; otherwise the optimum for `mode`.
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default = "default_mode")]
    pub mode: ThresholdMode,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_s() -> f64 {
    1.0
}
fn default_half() -> f64 {
    0.5
}
fn default_sensors() -> u32 {
    4
}
fn default_mode() -> ThresholdMode {
    ThresholdMode::EnergyAdapted
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: None,
            s: default_s(),
            s_values: None,
            s_range: None,
            pi1: default_half(),
            pe: default_half(),
            pairs: None,
            capacity: None,
            num_sensors: default_sensors(),
            theta: None,
            mode: default_mode(),
            sweep: SweepSection::default(),
            sim: SimSection::default(),
            output: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if spec.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                spec.schema_version
            )));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn capacity(&self) -> Capacity {
        self.capacity.map_or(Capacity::Infinite, Capacity::Finite)
    }

    /// Noncentrality grid: explicit values, then a range, then the default
    /// for the experiment kind.
    pub fn s_grid(&self) -> Vec<f64> {
        if let Some(v) = &self.s_values {
            return v.clone();
        }
        if let Some(r) = &self.s_range {
            return r.values();
        }
        match self.kind {
            Some(ExperimentKind::ErrorCurve) => SRange {
                start: 0.0,
                stop: 10.0,
                step: 0.5,
            }
            .values(),
            _ => SRange {
                start: 0.0,
                stop: 40.0,
                step: 1.0,
            }
            .values(),
        }
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.pairs.clone().unwrap_or_else(|| DEFAULT_PAIRS.to_vec())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let grid = self.s_grid();
        if grid.is_empty() {
            return bad("s grid is empty".into());
        }
        if grid.windows(2).any(|w| w[1] <= w[0])
            || grid.iter().any(|s| !(*s >= 0.0 && s.is_finite()))
        {
            return bad("s grid must be nonnegative and strictly increasing".into());
        }
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "{name} = {p} is not a probability"
                )))
            }
        };
        prob("pi1", self.pi1)?;
        prob("pe", self.pe)?;
        for (pi1, pe) in self.pairs() {
            prob("pair pi1", pi1)?;
            prob("pair pe", pe)?;
        }
        if self.capacity == Some(0) {
            return bad("capacity must be at least 1".into());
        }
        if self.num_sensors == 0 {
            return bad("num_sensors must be at least 1".into());
        }
        if self.sweep.points < 2 {
            return bad("sweep.points must be at least 2".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let spec = ExperimentSpec::from_toml_str("schema_version = 1").unwrap();
        assert_eq!(spec, ExperimentSpec::default());
        assert_eq!(spec.s_grid().len(), 41);
        assert_eq!(spec.pairs().len(), 4);
    }

    #[test]
    fn figure_aliases() {
        let spec = ExperimentSpec::from_toml_str("schema_version = 1\nkind = \"fig4\"").unwrap();
        assert_eq!(spec.kind, Some(ExperimentKind::ErrorCurve));
        assert_eq!(spec.s_grid().last(), Some(&10.0));
        let spec = ExperimentSpec::from_toml_str("schema_version = 1\nkind = \"sweep_s\"").unwrap();
        assert_eq!(spec.kind, Some(ExperimentKind::SweepS));
    }

    #[test]
    fn rejects_wrong_schema_and_unknown_keys() {
        assert!(ExperimentSpec::from_toml_str("schema_version = 2").is_err());
        assert!(ExperimentSpec::from_toml_str("schema_version = 1\nbogus = 3").is_err());
        assert!(ExperimentSpec::from_toml_str("kind = \"fig3\"").is_err());
    }

    #[test]
    fn validation() {
        let mut spec = ExperimentSpec {
            s_values: Some(vec![1.0, 0.5]),
            ..Default::default()
        };
        assert!(spec.validate().is_err());
        spec.s_values = Some(vec![]);
        assert!(spec.validate().is_err());
        spec.s_values = Some(vec![0.0, 2.0]);
        assert!(spec.validate().is_ok());
        spec.pairs = Some(vec![(0.3, 1.2)]);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn range_includes_endpoint() {
        let r = SRange {
            start: 0.0,
            stop: 1.0,
            step: 0.1,
        };
        let v = r.values();
        assert_eq!(v.len(), 11);
        assert!((v[10] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip() {
        let spec = ExperimentSpec {
            kind: Some(ExperimentKind::Simulate),
            capacity: Some(12),
            pairs: Some(vec![(0.3, 0.2)]),
            ..Default::default()
        };
        let back = ExperimentSpec::from_toml_str(&spec.to_toml_string()).unwrap();
        assert_eq!(back, spec);
    }
}
