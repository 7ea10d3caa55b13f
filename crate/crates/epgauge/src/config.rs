//! Run configuration: one JSON document, unknown keys rejected. Command-line
//! flags override individual fields.

use std::path::{Path, PathBuf};

use epgauge_core::{PercentileLevel, SynthSpec, ThresholdSchedule, ZeroPolicy};
use serde::{Deserialize, Serialize};

use crate::assess::LowNPolicy;
use crate::io::Format;
use crate::render::{Precision, RenderFormat};

/// A named cohort: a selector and an optional parent selector, both in the
/// `key:value,...` selector syntax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortConfig {
    pub name: String,
    pub selector: String,
    #[serde(default)]
    pub parent: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub input: Vec<PathBuf>,
    pub format: Option<Format>,
    pub year_window: Option<(i32, i32)>,
    pub grid: Option<Vec<PercentileLevel>>,
    pub deviation_threshold: Option<f64>,
    pub zero_policy: Option<ZeroPolicy>,
    pub lognormal: Option<bool>,
    pub min_cohort: Option<u64>,
    pub low_n_policy: Option<LowNPolicy>,
    /// `YEAR:FIELD` strata; empty means every stratum in the corpus.
    pub strata: Vec<String>,
    pub cohorts: Vec<CohortConfig>,
    pub ca_schedule: Option<ThresholdSchedule>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub report_formats: Option<Vec<RenderFormat>>,
    pub precision: Option<Precision>,
    pub synth: Option<SynthSpec>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let cfg = Self::from_json(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if let Some(grid) = &self.grid {
            if grid.is_empty() {
                return bad("grid is empty".into());
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return bad("grid levels must be strictly increasing".into());
            }
        }
        if let Some(t) = self.deviation_threshold {
            if !(t.is_finite() && t >= 1.0) {
                return bad(format!("deviation_threshold {t} must be a finite ratio >= 1"));
            }
        }
        if let Some((a, b)) = self.year_window {
            if a > b {
                return bad(format!("year_window {a}..{b} is empty"));
            }
        }
        for (i, c) in self.cohorts.iter().enumerate() {
            if c.name.trim().is_empty() {
                return bad("cohort with empty name".into());
            }
            if self.cohorts[..i].iter().any(|o| o.name == c.name) {
                return bad(format!("cohort `{}` defined twice", c.name));
            }
        }
        if let Some(spec) = &self.synth {
            spec.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }
}
