//! Pipeline configuration: one JSON file with per-module sections.
//! Parsing is strict — any unknown key fails before any work — and flags
//! override file values.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, Context};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use castkit_core::{DiffMaskConfig, MatchConfig, PerceptualConfig, PropagateConfig, SsimParams};

use crate::error::{contract, CliResult};

/// Selection threshold: a fixed value, or automatic per-dataset
/// resolution at the 60th score percentile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauSetting {
    Auto,
    Fixed(f64),
}

impl fmt::Display for TauSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauSetting::Auto => write!(f, "auto"),
            TauSetting::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for TauSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(TauSetting::Auto);
        }
        s.parse::<f64>()
            .map(TauSetting::Fixed)
            .map_err(|_| format!("expected \"auto\" or a number, got {s:?}"))
    }
}

impl Serialize for TauSetting {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            TauSetting::Auto => serializer.serialize_str("auto"),
            TauSetting::Fixed(v) => serializer.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for TauSetting {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Ok(TauSetting::Fixed(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Score weights section: λ values, threshold, and the minimum view count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsSection {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub tau: TauSetting,
    pub k_min: usize,
}

impl Default for WeightsSection {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 0.4,
            lambda3: 0.4,
            tau: TauSetting::Auto,
            k_min: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub weights: WeightsSection,
    pub ssim: SsimParams,
    pub perceptual: PerceptualConfig,
    pub diff: DiffMaskConfig,
    pub propagate: PropagateConfig,
    #[serde(rename = "match")]
    pub matching: MatchConfig,
    pub output_dir: Option<PathBuf>,
}

impl PipelineConfig {
    fn validate(&self) -> anyhow::Result<()> {
        for (name, v) in [
            ("weights.lambda1", self.weights.lambda1),
            ("weights.lambda2", self.weights.lambda2),
            ("weights.lambda3", self.weights.lambda3),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(anyhow!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.weights.lambda1 + self.weights.lambda2 + self.weights.lambda3 <= 0.0 {
            return Err(anyhow!("weights must not all be zero"));
        }
        if let TauSetting::Fixed(tau) = self.weights.tau {
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(anyhow!("weights.tau must be finite and >= 0, got {tau}"));
            }
        }
        if self.weights.k_min == 0 {
            return Err(anyhow!("weights.k_min must be >= 1"));
        }
        self.ssim.validate()?;
        self.perceptual.validate()?;
        self.diff.validate()?;
        self.propagate.validate()?;
        self.matching.validate()?;
        Ok(())
    }
}

/// Loads and validates the config file; `None` yields defaults. Strict:
/// unknown keys are rejected at parse time.
pub fn load_config(path: Option<&Path>) -> CliResult<PipelineConfig> {
    let cfg = match path {
        None => PipelineConfig::default(),
        Some(path) => {
            let raw = fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))
                .map_err(contract)?;
            serde_json::from_str(&raw)
                .with_context(|| format!("invalid config {}", path.display()))
                .map_err(contract)?
        }
    };
    cfg.validate().map_err(contract)?;
    Ok(cfg)
}

/// SHA-256 over the canonical JSON form of the requested configuration.
/// Stable across runs and platforms; independent of timing.
pub fn config_hash(cfg: &PipelineConfig) -> String {
    let canonical = serde_json::to_vec(cfg).expect("config always serializes");
    let digest = Sha256::digest(&canonical);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}
