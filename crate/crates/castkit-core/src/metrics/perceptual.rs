//! Pluggable perceptual-distance slot.
//!
//! Two modes: a deterministic multi-scale gradient-structure proxy that
//! needs no learned weights, and an external-table mode that injects
//! distances computed offline by a real perceptual network.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ssim, MetricsError, SsimParams};
use crate::image::ImagePlane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerceptualMode {
    GradientProxy,
    ExternalTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerceptualConfig {
    pub mode: PerceptualMode,
    /// Number of dyadic scales evaluated by the proxy (scale 0 is full
    /// resolution; scale s is downsampled s times).
    pub scales: usize,
    pub table_path: Option<PathBuf>,
}

impl Default for PerceptualConfig {
    fn default() -> Self {
        Self {
            mode: PerceptualMode::GradientProxy,
            scales: 2,
            table_path: None,
        }
    }
}

impl PerceptualConfig {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.scales == 0 {
            return Err(MetricsError::InvalidPerceptualConfig(
                "scales must be >= 1".into(),
            ));
        }
        if self.mode == PerceptualMode::ExternalTable && self.table_path.is_none() {
            return Err(MetricsError::InvalidPerceptualConfig(
                "external_table mode requires table_path".into(),
            ));
        }
        Ok(())
    }
}

/// Central-difference gradient magnitude of the luma plane, clamped to
/// `[0, 1]`. Border neighbours are index-clamped.
pub fn gradient_magnitude(img: &ImagePlane) -> ImagePlane {
    let luma_owned;
    let luma: &ImagePlane = if img.channels() == 1 {
        img
    } else {
        luma_owned = img.to_luma();
        &luma_owned
    };
    let (w, h) = (luma.width(), luma.height());
    let src = luma.samples();
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        let row = y * w;
        let up = y.saturating_sub(1) * w;
        let down = (y + 1).min(h - 1) * w;
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            let gx = (src[row + xp] as f64 - src[row + xm] as f64) / 2.0;
            let gy = (src[down + x] as f64 - src[up + x] as f64) / 2.0;
            data.push((gx * gx + gy * gy).sqrt().min(1.0) as f32);
        }
    }
    ImagePlane::new(w, h, 1, data).expect("gradient plane is always valid")
}

/// Mean over dyadic scales of `1 − SSIM` between gradient-magnitude
/// images, computed with default SSIM window parameters. Scales whose
/// downsampled size no longer fits the window are skipped; the full-
/// resolution scale must fit.
pub fn gradient_proxy_distance(
    a: &ImagePlane,
    b: &ImagePlane,
    scales: usize,
) -> Result<f64, MetricsError> {
    a.ensure_same_shape(b)?;
    let params = SsimParams::default();
    let mut cur_a = a.to_luma();
    let mut cur_b = b.to_luma();
    let mut total = 0.0f64;
    let mut used = 0usize;
    for scale in 0..scales.max(1) {
        if scale > 0 {
            match (cur_a.downsample_2x(), cur_b.downsample_2x()) {
                (Some(na), Some(nb)) => {
                    cur_a = na;
                    cur_b = nb;
                }
                _ => break,
            }
        }
        if cur_a.width() < params.window_size || cur_a.height() < params.window_size {
            if scale == 0 {
                return Err(MetricsError::WindowTooSmall {
                    shape: cur_a.shape(),
                    window: params.window_size,
                });
            }
            break;
        }
        let ga = gradient_magnitude(&cur_a);
        let gb = gradient_magnitude(&cur_b);
        total += 1.0 - ssim(&ga, &gb, &params)?;
        used += 1;
    }
    Ok(total / used as f64)
}

/// Precomputed per-frame perceptual distances: a JSON object mapping
/// zero-based frame-index strings to numbers.
#[derive(Debug, Clone)]
pub struct PerceptualTable {
    path: PathBuf,
    entries: BTreeMap<usize, f64>,
}

impl PerceptualTable {
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, MetricsError> {
        let path = path.as_ref().to_path_buf();
        let read_err = |reason: String| MetricsError::TableRead {
            path: path.clone(),
            reason,
        };
        let raw = fs::read_to_string(&path).map_err(|e| read_err(e.to_string()))?;
        let value: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(&raw).map_err(|e| read_err(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for (key, val) in value {
            let frame: usize = key
                .parse()
                .map_err(|_| read_err(format!("key {key:?} is not a frame index")))?;
            let dist = val
                .as_f64()
                .ok_or_else(|| read_err(format!("entry {key:?} is not a number")))?;
            entries.insert(frame, dist);
        }
        Ok(Self { path, entries })
    }

    pub fn lookup(&self, frame: usize) -> Result<f64, MetricsError> {
        self.entries
            .get(&frame)
            .copied()
            .ok_or_else(|| MetricsError::TableMissingFrame {
                path: self.path.clone(),
                frame,
            })
    }
}

/// Resolved perceptual-distance backend. Build once per run so the table
/// file is parsed a single time.
#[derive(Debug, Clone)]
pub enum PerceptualEvaluator {
    Proxy { scales: usize },
    Table(PerceptualTable),
}

impl PerceptualEvaluator {
    pub fn new(cfg: &PerceptualConfig) -> Result<Self, MetricsError> {
        cfg.validate()?;
        match cfg.mode {
            PerceptualMode::GradientProxy => Ok(Self::Proxy { scales: cfg.scales }),
            PerceptualMode::ExternalTable => {
                let path = cfg.table_path.as_ref().expect("validated above");
                Ok(Self::Table(PerceptualTable::load(path)?))
            }
        }
    }

    /// Distance for one rendered/edited pair. `frame_index` keys the
    /// external table and is ignored by the proxy.
    pub fn distance(
        &self,
        a: &ImagePlane,
        b: &ImagePlane,
        frame_index: usize,
    ) -> Result<f64, MetricsError> {
        match self {
            Self::Proxy { scales } => gradient_proxy_distance(a, b, *scales),
            Self::Table(table) => {
                a.ensure_same_shape(b)?;
                table.lookup(frame_index)
            }
        }
    }
}

/// One-shot convenience wrapper; prefer [`PerceptualEvaluator`] when
/// scoring many frames against the same table.
pub fn perceptual_distance(
    a: &ImagePlane,
    b: &ImagePlane,
    cfg: &PerceptualConfig,
    frame_index: usize,
) -> Result<f64, MetricsError> {
    PerceptualEvaluator::new(cfg)?.distance(a, b, frame_index)
}
