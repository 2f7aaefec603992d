//! JSON run configuration and sweep specification.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use nested_adiabatic::analysis::{optimal_partition, DEFAULT_BETA_C};
use nested_adiabatic::csp::{beta_of, CspInstance, Partition, DEFAULT_ENUMERATION_CAP};
use nested_adiabatic::nested::NestedConfig;
use nested_adiabatic::schedule::DEFAULT_EPSILON;
use serde::{Deserialize, Serialize};

use crate::UsageError;

pub const OUT_DIR_ENV: &str = "NESTED_ADIABATIC_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "nested-adiabatic-out";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Multipliers {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for Multipliers {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            c: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

/// `"auto"` or an explicit primary-variable count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionChoice {
    Fixed(usize),
    Auto(Auto),
}

impl Default for PartitionChoice {
    fn default() -> Self {
        PartitionChoice::Auto(Auto::Auto)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub epsilon: f64,
    pub r_multipliers: Multipliers,
    pub partition: PartitionChoice,
    /// Critical constrainedness used by the automatic partition.
    pub beta_c: f64,
    pub grid_points: usize,
    /// Seed of the demonstration sampler.
    pub sample_seed: u64,
    /// Simulated measurement shots; 0 disables sampling.
    pub shots: usize,
    pub enumeration_cap: usize,
    pub output_dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            r_multipliers: Multipliers::default(),
            partition: PartitionChoice::default(),
            beta_c: DEFAULT_BETA_C,
            grid_points: nested_adiabatic::hilbert::DEFAULT_GRID_POINTS,
            sample_seed: 0,
            shots: 0,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            output_dir: None,
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(|e| UsageError(format!("{e:#}")))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.nested().validate().map_err(|e| UsageError(e.to_string()))?;
        if !(self.beta_c > 0.0) {
            bail!(UsageError(format!(
                "beta_c must be positive, got {}",
                self.beta_c
            )));
        }
        if self.enumeration_cap == 0 {
            bail!(UsageError("enumeration_cap must be positive".into()));
        }
        Ok(())
    }

    pub fn nested(&self) -> NestedConfig {
        NestedConfig {
            epsilon: self.epsilon,
            r_multiplier_a: self.r_multipliers.a,
            r_multiplier_b: self.r_multipliers.b,
            r_multiplier_c: self.r_multipliers.c,
            grid_points: self.grid_points,
            check_decoupling: true,
        }
    }

    /// Resolves the partition, consulting the complexity model for `"auto"`.
    pub fn resolve_partition(&self, instance: &CspInstance) -> anyhow::Result<Partition> {
        let n_a = match self.partition {
            PartitionChoice::Fixed(n_a) => n_a,
            PartitionChoice::Auto(_) => {
                let ratio = beta_of(instance) / self.beta_c;
                optimal_partition(instance.n_ab(), instance.k().max(1), ratio)
                    .map_err(|e| UsageError(e.to_string()))?
            }
        };
        Partition::for_instance(instance, n_a).map_err(|e| UsageError(e.to_string()).into())
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// Unstructured search size `N` (fixed `marked`).
    #[serde(rename = "N")]
    SearchSize,
    /// Variable count of random instances at fixed `beta`.
    #[serde(rename = "n_ab")]
    Variables,
    /// Product-formula steps for the fixed search problem.
    #[serde(rename = "r")]
    Steps,
    #[serde(rename = "epsilon")]
    Epsilon,
    /// Constrainedness of random instances at fixed `n_ab`.
    #[serde(rename = "beta")]
    Beta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::SearchSize => "N",
            Axis::Variables => "n_ab",
            Axis::Steps => "r",
            Axis::Epsilon => "epsilon",
            Axis::Beta => "beta",
        }
    }
}

/// Problem family a sweep draws from; unused fields are ignored by axes
/// that do not need them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepProblem {
    /// Search size for the `r` and `epsilon` axes.
    pub n: usize,
    pub marked: usize,
    /// Variable count for the `beta` axis.
    pub n_ab: usize,
    pub k: usize,
    /// Clause density for the `n_ab` axis.
    pub beta: f64,
    pub seed: u64,
    /// Fixed total time for the `r` axis; the local-schedule time when absent.
    pub total_time: Option<f64>,
}

impl Default for SweepProblem {
    fn default() -> Self {
        Self {
            n: 64,
            marked: 1,
            n_ab: 10,
            k: 3,
            beta: 4.25,
            seed: 0,
            total_time: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    #[serde(default = "one")]
    pub instances_per_point: usize,
    #[serde(default)]
    pub base: RunConfig,
    #[serde(default)]
    pub problem: SweepProblem,
}

fn one() -> usize {
    1
}

impl SweepSpec {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("reading sweep spec {}: {e}", path.display())))?;
        let spec: Self = serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("sweep spec {}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.values.len() < 2 {
            bail!(UsageError(format!(
                "sweep axis needs at least 2 values, got {}",
                self.values.len()
            )));
        }
        if self.instances_per_point == 0 {
            bail!(UsageError("instances_per_point must be at least 1".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            bail!(UsageError("sweep values must be finite".into()));
        }
        self.base.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_accepts_auto_or_count() {
        let c: RunConfig = serde_json::from_str(r#"{"partition": "auto"}"#).unwrap();
        assert_eq!(c.partition, PartitionChoice::Auto(Auto::Auto));
        let c: RunConfig = serde_json::from_str(r#"{"partition": 3}"#).unwrap();
        assert_eq!(c.partition, PartitionChoice::Fixed(3));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"epsilom": 0.1}"#).is_err());
    }

    #[test]
    fn single_value_axis_rejected() {
        let s: SweepSpec = serde_json::from_str(r#"{"axis": "N", "values": [16]}"#).unwrap();
        assert!(s.validate().is_err());
    }
}
