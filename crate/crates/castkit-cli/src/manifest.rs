//! Stage manifests: the JSON hand-off records written at every external
//! boundary. Every manifest carries `schema_version`, the stage name, the
//! config hash, and a `timing` field that is excluded from determinism
//! comparisons.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use castkit_core::matching::MatchConfig;
use castkit_core::selection::SelectionRule;

use crate::error::{contract, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub const MASKDIFF_MANIFEST: &str = "maskdiff_manifest.json";
pub const PROPAGATE_MANIFEST: &str = "propagate_manifest.json";
pub const SELECT_MANIFEST: &str = "select_manifest.json";
pub const MATCH_MANIFEST: &str = "match_report.json";
pub const REPORT_FILE: &str = "report.json";

/// Stage names in pipeline order, paired with their manifest file names.
pub const STAGE_MANIFESTS: [(&str, &str); 4] = [
    ("maskdiff", MASKDIFF_MANIFEST),
    ("propagate", PROPAGATE_MANIFEST),
    ("select", SELECT_MANIFEST),
    ("match", MATCH_MANIFEST),
];

/// Wall-clock stage duration. Isolated in its own field so determinism
/// checks and hashes can drop it wholesale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskStatsJson {
    pub area_fraction: f64,
    pub component_count: usize,
    pub bbox: Option<[usize; 4]>,
}

impl From<castkit_core::MaskFrameStats> for MaskStatsJson {
    fn from(s: castkit_core::MaskFrameStats) -> Self {
        Self {
            area_fraction: s.area_fraction,
            component_count: s.component_count,
            bbox: s.bbox.map(|(x0, y0, x1, y1)| [x0, y0, x1, y1]),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskdiffManifest {
    pub schema_version: u32,
    pub stage: String,
    pub config_hash: String,
    pub original: String,
    pub edited: String,
    pub width: usize,
    pub height: usize,
    pub mask_path: String,
    pub stats: MaskStatsJson,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateFrame {
    pub frame: usize,
    pub path: String,
    /// Inclusive (x0, y0, x1, y1) of the marked region; `None` when empty.
    pub bbox: Option<[usize; 4]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateManifest {
    pub schema_version: u32,
    pub stage: String,
    pub config_hash: String,
    pub mode: String,
    pub frame_count: usize,
    pub first_mask: String,
    pub sequence_manifest: String,
    pub frames: Vec<PropagateFrame>,
    pub timing: Timing,
}

/// One score row; field names match the published selection schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRow {
    pub frame: usize,
    pub mse: f64,
    pub ssim_term: f64,
    pub perceptual: f64,
    pub score: f64,
    pub psnr_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectManifest {
    pub schema_version: u32,
    pub stage: String,
    pub config_hash: String,
    pub rendered_dir: String,
    pub edited_dir: String,
    pub rule: SelectionRule,
    pub tau: f64,
    pub selected: Vec<usize>,
    pub scores: Vec<ScoreRow>,
    pub score_table: String,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchInputs {
    pub orig_a: String,
    pub orig_b: String,
    pub edit_a: String,
    pub edit_b: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositePaths {
    pub original: String,
    pub edited: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchManifest {
    pub schema_version: u32,
    pub stage: String,
    pub config_hash: String,
    pub inputs: MatchInputs,
    pub original_matches: Option<usize>,
    pub edited_matches: Option<usize>,
    pub ratio: Option<f64>,
    pub degraded: bool,
    pub params: MatchConfig,
    pub composites: Option<CompositePaths>,
    pub timing: Timing,
}

/// Merged per-stage manifests, in fixed pipeline order.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ReportStages {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maskdiff: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagate: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub select: Option<serde_json::Value>,
    #[serde(rename = "match", skip_serializing_if = "Option::is_none")]
    pub matching: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema_version: u32,
    pub stage: String,
    pub stages: ReportStages,
    pub config_hashes: BTreeMap<String, String>,
    pub timings: BTreeMap<String, f64>,
    pub timing: Timing,
}

/// Serializes a manifest to pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(manifest: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifests always serialize");
    bytes.push(b'\n');
    bytes
}

fn check(cond: bool, msg: &str) -> anyhow::Result<()> {
    if cond {
        Ok(())
    } else {
        Err(anyhow!("{msg}"))
    }
}

fn check_envelope(schema_version: u32, stage_field: &str, stage: &str) -> anyhow::Result<()> {
    check(
        schema_version == SCHEMA_VERSION,
        &format!("schema_version {schema_version} != {SCHEMA_VERSION}"),
    )?;
    check(
        stage_field == stage,
        &format!("stage field {stage_field:?} != {stage:?}"),
    )
}

/// Parses and validates a stage manifest, returning its generic JSON
/// form. `stage` is one of maskdiff/propagate/select/match/report.
pub fn validate_manifest(stage: &str, raw: &str) -> anyhow::Result<serde_json::Value> {
    match stage {
        "maskdiff" => {
            let m: MaskdiffManifest = serde_json::from_str(raw)?;
            check_envelope(m.schema_version, &m.stage, "maskdiff")?;
            check(m.width > 0 && m.height > 0, "zero-sized frame")?;
            check(
                (0.0..=1.0).contains(&m.stats.area_fraction),
                "area_fraction outside [0, 1]",
            )?;
        }
        "propagate" => {
            let m: PropagateManifest = serde_json::from_str(raw)?;
            check_envelope(m.schema_version, &m.stage, "propagate")?;
            check(
                m.mode == "camera" || m.mode == "nearest",
                "mode must be camera or nearest",
            )?;
            check(
                m.frames.len() == m.frame_count,
                "frames length != frame_count",
            )?;
            for (i, f) in m.frames.iter().enumerate() {
                check(f.frame == i, "frame indices must be dense and ordered")?;
            }
        }
        "select" => {
            let m: SelectManifest = serde_json::from_str(raw)?;
            check_envelope(m.schema_version, &m.stage, "select")?;
            check(!m.scores.is_empty(), "empty score table")?;
            check(
                m.selected.windows(2).all(|w| w[0] < w[1]),
                "selected must be strictly increasing",
            )?;
            let frames: Vec<usize> = m.scores.iter().map(|s| s.frame).collect();
            check(
                m.selected.iter().all(|i| frames.contains(i)),
                "selected frame outside score table",
            )?;
            check(m.tau.is_finite() && m.tau >= 0.0, "tau must be >= 0")?;
        }
        "match" => {
            let m: MatchManifest = serde_json::from_str(raw)?;
            check_envelope(m.schema_version, &m.stage, "match")?;
            let has_counts = m.original_matches.is_some() && m.edited_matches.is_some();
            check(
                has_counts || m.degraded,
                "missing counts are only legal on degraded reports",
            )?;
            if let Some(r) = m.ratio {
                check(r.is_finite() && r >= 0.0, "ratio must be finite and >= 0")?;
            }
        }
        "report" => {
            let m: RunReport = serde_json::from_str(raw)?;
            check_envelope(m.schema_version, &m.stage, "report")?;
            check(
                !m.config_hashes.is_empty(),
                "report must cover at least one stage",
            )?;
        }
        other => return Err(anyhow!("unknown stage {other:?}")),
    }
    Ok(serde_json::from_str(raw)?)
}

/// Reads and validates a manifest file.
pub fn read_manifest(stage: &str, path: &Path) -> CliResult<serde_json::Value> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))
        .map_err(contract)?;
    validate_manifest(stage, &raw)
        .with_context(|| format!("corrupt {stage} manifest {}", path.display()))
        .map_err(contract)
}
