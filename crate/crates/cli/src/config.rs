//! Cluster and catalog configuration files (TOML).

use std::path::Path;

use anyhow::{Context, Result};
use llmsched_core::profiler::CalibrationProfile;
use llmsched_core::sim::ClusterConfig;
use llmsched_core::workload::{Catalog, Preset};
use serde::{Deserialize, Serialize};

/// Decoding latency per step at batch size 1, in milliseconds.
pub const DEFAULT_BASE_MS: f64 = 20.0;
/// Added latency per extra batched request, in milliseconds.
pub const DEFAULT_SLOPE_MS: f64 = 2.5;
pub const DEFAULT_MAX_BATCH: usize = 8;

/// On-disk cluster description. The latency table is either given in
/// full or generated from a linear model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterFile {
    pub num_regular_executors: usize,
    pub num_llm_executors: usize,
    pub max_batch_size: usize,
    #[serde(default)]
    pub latency_ms: Option<Vec<f64>>,
    #[serde(default)]
    pub base_ms: Option<f64>,
    #[serde(default)]
    pub slope_ms: Option<f64>,
}

impl ClusterFile {
    pub fn into_config(self) -> Result<ClusterConfig> {
        let calibration = match self.latency_ms {
            Some(t) => CalibrationProfile::new(t)?,
            None => CalibrationProfile::linear(
                self.base_ms.unwrap_or(DEFAULT_BASE_MS),
                self.slope_ms.unwrap_or(DEFAULT_SLOPE_MS),
                self.max_batch_size,
            )?,
        };
        let c = ClusterConfig {
            num_regular_executors: self.num_regular_executors,
            num_llm_executors: self.num_llm_executors,
            max_batch_size: self.max_batch_size,
            calibration,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_config(c: &ClusterConfig) -> Self {
        ClusterFile {
            num_regular_executors: c.num_regular_executors,
            num_llm_executors: c.num_llm_executors,
            max_batch_size: c.max_batch_size,
            latency_ms: Some(c.calibration.table().to_vec()),
            base_ms: None,
            slope_ms: None,
        }
    }
}

pub fn default_calibration() -> CalibrationProfile {
    CalibrationProfile::linear(DEFAULT_BASE_MS, DEFAULT_SLOPE_MS, DEFAULT_MAX_BATCH).expect("valid defaults")
}

/// Executor counts per workload preset at the default arrival rate. Each
/// preset offers its contended pool the same load relative to
/// full-batch throughput; regular executors are plentiful except for the
/// tool-heavy planning mix.
pub fn cluster_preset(preset: Preset) -> ClusterConfig {
    let (regular, llm) = match preset {
        Preset::Mixed => (8, 6),
        Preset::Predefined => (8, 12),
        Preset::Chainlike => (4, 5),
        Preset::Planning => (8, 1),
    };
    ClusterConfig {
        num_regular_executors: regular,
        num_llm_executors: llm,
        max_batch_size: DEFAULT_MAX_BATCH,
        calibration: default_calibration(),
    }
}

pub fn load_cluster(path: &Path) -> Result<ClusterConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ClusterFile = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.into_config().with_context(|| format!("invalid cluster in {}", path.display()))
}

pub fn load_catalog(path: &Path) -> Result<Catalog> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let catalog: Catalog = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    catalog.templates().with_context(|| format!("invalid application in {}", path.display()))?;
    Ok(catalog)
}
