//! First-frame difference masking and the mask-sequence data model.
//!
//! Masks are binary rasters stored as 8-bit planes (255 = marked region,
//! 0 = background). Files loaded from disk are binarized at 128, which
//! also normalizes externally tracked mask sequences.

mod components;
mod morphology;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{ImageError, ImagePlane, Shape};

pub use components::{label_components, remove_small_components, Component};
pub use morphology::{close, dilate, erode, open};

#[derive(Debug, Error)]
pub enum MaskError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("mask {mask_w}x{mask_h} does not match image {img}")]
    MaskShapeMismatch {
        img: Shape,
        mask_w: usize,
        mask_h: usize,
    },
    #[error("mask data holds {got} bytes, expected {expected}")]
    DataLength { expected: usize, got: usize },
    #[error("mask sequence is empty")]
    EmptySequence,
    #[error("mask {index} is {got_w}x{got_h}, expected uniform {want_w}x{want_h}")]
    NonUniformSequence {
        index: usize,
        want_w: usize,
        want_h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("validity sequence requires a fully valid first mask")]
    FirstMaskNotValid,
    #[error("invalid diff config: {0}")]
    InvalidConfig(String),
    #[error("sequence manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
}

/// Binary raster; in-memory samples are always exactly 0 or 255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, MaskError> {
        if data.len() != width * height {
            return Err(MaskError::DataLength {
                expected: width * height,
                got: data.len(),
            });
        }
        // Normalize any grayscale input to strict {0, 255}.
        let data = data
            .into_iter()
            .map(|v| if v >= 128 { 255 } else { 0 })
            .collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zero(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![255; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn is_marked(&self, x: usize, y: usize) -> bool {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x] == 255
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, marked: bool) {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x] = if marked { 255 } else { 0 };
    }

    pub fn marked_count(&self) -> usize {
        self.data.iter().filter(|&&v| v == 255).count()
    }

    pub fn is_full(&self) -> bool {
        self.data.iter().all(|&v| v == 255)
    }

    /// Grows the marked region by `radius` (Chebyshev). Convenience for
    /// tolerance comparisons between masks.
    pub fn dilated(&self, radius: usize) -> Mask {
        dilate(self, radius)
    }

    /// True when every marked pixel of `self` is marked in `other`.
    pub fn subset_of(&self, other: &Mask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(&a, &b)| a != 255 || b == 255)
    }

    /// Loads an 8-bit grayscale PNG, binarizing at 128.
    pub fn load_png<P: AsRef<Path>>(path: P) -> Result<Self, MaskError> {
        let img = ImagePlane::load_png(path)?;
        let luma = img.to_luma();
        let data = luma
            .samples()
            .iter()
            .map(|&v| if v >= 128.0 / 255.0 { 255 } else { 0 })
            .collect();
        Ok(Self {
            width: luma.width(),
            height: luma.height(),
            data,
        })
    }

    /// Writes an 8-bit grayscale PNG with values in {0, 255}.
    pub fn save_png<P: AsRef<Path>>(&self, path: P) -> Result<(), MaskError> {
        let plane = ImagePlane::new(
            self.width,
            self.height,
            1,
            self.data.iter().map(|&v| v as f32 / 255.0).collect(),
        )?;
        plane.save_png(path)?;
        Ok(())
    }
}

/// What the 255 level means in a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskSemantics {
    /// 255 marks the region to edit/regenerate.
    EditRegion,
    /// 255 marks trustworthy content; the first frame must be fully valid.
    Validity,
}

/// Ordered per-frame masks with uniform dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSequence {
    pub masks: Vec<Mask>,
    pub semantics: MaskSemantics,
}

impl MaskSequence {
    /// Validates non-emptiness, uniform dimensions, and — for validity
    /// semantics — the fully-valid first frame.
    pub fn new(masks: Vec<Mask>, semantics: MaskSemantics) -> Result<Self, MaskError> {
        let first = masks.first().ok_or(MaskError::EmptySequence)?;
        let (w, h) = (first.width(), first.height());
        for (index, m) in masks.iter().enumerate() {
            if m.width() != w || m.height() != h {
                return Err(MaskError::NonUniformSequence {
                    index,
                    want_w: w,
                    want_h: h,
                    got_w: m.width(),
                    got_h: m.height(),
                });
            }
        }
        if semantics == MaskSemantics::Validity && !masks[0].is_full() {
            return Err(MaskError::FirstMaskNotValid);
        }
        Ok(Self { masks, semantics })
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }
}

/// Configuration of the difference-mask pipeline: threshold → open →
/// close → small-component removal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiffMaskConfig {
    /// Per-pixel absolute luma delta above which a pixel is a candidate.
    pub threshold: f64,
    pub open_radius: usize,
    pub close_radius: usize,
    /// Components smaller than this fraction of the frame are dropped.
    pub min_area_fraction: f64,
    /// Difference on the per-channel maximum instead of luma.
    pub per_channel: bool,
}

impl Default for DiffMaskConfig {
    fn default() -> Self {
        Self {
            threshold: 0.1,
            open_radius: 2,
            close_radius: 4,
            min_area_fraction: 5e-4,
            per_channel: false,
        }
    }
}

impl DiffMaskConfig {
    pub fn validate(&self) -> Result<(), MaskError> {
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(MaskError::InvalidConfig(format!(
                "threshold must be finite and >= 0, got {}",
                self.threshold
            )));
        }
        if !(self.min_area_fraction.is_finite() && self.min_area_fraction >= 0.0) {
            return Err(MaskError::InvalidConfig(format!(
                "min_area_fraction must be finite and >= 0, got {}",
                self.min_area_fraction
            )));
        }
        Ok(())
    }
}

/// Pre-morphology candidate map: pixels whose absolute difference exceeds
/// the threshold. Exposed separately because it is monotone in the
/// threshold, which the cleaned-up mask is not.
pub fn diff_candidates(
    original: &ImagePlane,
    edited: &ImagePlane,
    threshold: f64,
    per_channel: bool,
) -> Result<Mask, MaskError> {
    original.ensure_same_shape(edited)?;
    let (w, h) = (original.width(), original.height());
    let mut mask = Mask::zero(w, h);
    if per_channel {
        for y in 0..h {
            for x in 0..w {
                let delta = (0..original.channels())
                    .map(|c| (original.get(x, y, c) as f64 - edited.get(x, y, c) as f64).abs())
                    .fold(0.0f64, f64::max);
                mask.set(x, y, delta > threshold);
            }
        }
    } else {
        let la = original.to_luma();
        let lb = edited.to_luma();
        for y in 0..h {
            for x in 0..w {
                let delta = (la.get(x, y, 0) as f64 - lb.get(x, y, 0) as f64).abs();
                mask.set(x, y, delta > threshold);
            }
        }
    }
    Ok(mask)
}

/// Derives the major-difference mask between an original and an edited
/// frame: luma threshold, morphological opening and closing, then removal
/// of components below the area floor.
pub fn diff_mask(
    original: &ImagePlane,
    edited: &ImagePlane,
    cfg: &DiffMaskConfig,
) -> Result<Mask, MaskError> {
    cfg.validate()?;
    let candidates = diff_candidates(original, edited, cfg.threshold, cfg.per_channel)?;
    let opened = open(&candidates, cfg.open_radius);
    let closed = close(&opened, cfg.close_radius);
    let min_px = cfg.min_area_fraction * (original.width() * original.height()) as f64;
    Ok(remove_small_components(&closed, min_px.ceil() as usize))
}

/// Copy of the sequence with the first mask reset to fully valid and
/// validity semantics; later frames are untouched.
pub fn reset_first_valid(seq: &MaskSequence) -> MaskSequence {
    let mut masks = seq.masks.clone();
    masks[0] = Mask::full(masks[0].width(), masks[0].height());
    MaskSequence {
        masks,
        semantics: MaskSemantics::Validity,
    }
}

/// Replaces pixels under the marked region with a constant fill level
/// (defaulting to the mid-gray used for regions to regenerate).
pub fn apply_mask(img: &ImagePlane, mask: &Mask, fill: f64) -> Result<ImagePlane, MaskError> {
    if mask.width() != img.width() || mask.height() != img.height() {
        return Err(MaskError::MaskShapeMismatch {
            img: img.shape(),
            mask_w: mask.width(),
            mask_h: mask.height(),
        });
    }
    let fill = fill.clamp(0.0, 1.0) as f32;
    Ok(ImagePlane::from_fn(
        img.width(),
        img.height(),
        img.channels(),
        |x, y, c| {
            if mask.is_marked(x, y) {
                fill
            } else {
                img.get(x, y, c)
            }
        },
    ))
}

/// Per-frame mask diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskFrameStats {
    pub area_fraction: f64,
    pub component_count: usize,
    /// Inclusive (x0, y0, x1, y1) over all marked pixels; `None` when the
    /// mask is empty.
    pub bbox: Option<(usize, usize, usize, usize)>,
}

/// Stats for a single mask: exact pixel counts and 8-connected components.
pub fn stats_for(mask: &Mask) -> MaskFrameStats {
    let (_, components) = label_components(mask);
    let marked = mask.marked_count();
    let bbox = if marked == 0 {
        None
    } else {
        let mut it = components.iter();
        let first = it.next().expect("marked pixels imply a component");
        let mut bbox = first.bbox;
        for c in it {
            bbox.0 = bbox.0.min(c.bbox.0);
            bbox.1 = bbox.1.min(c.bbox.1);
            bbox.2 = bbox.2.max(c.bbox.2);
            bbox.3 = bbox.3.max(c.bbox.3);
        }
        Some(bbox)
    };
    MaskFrameStats {
        area_fraction: marked as f64 / (mask.width() * mask.height()) as f64,
        component_count: components.len(),
        bbox,
    }
}

/// Per-frame stats for a whole sequence.
pub fn mask_stats(seq: &MaskSequence) -> Vec<MaskFrameStats> {
    seq.masks.iter().map(stats_for).collect()
}

/// One row of the on-disk sequence manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceEntry {
    pub frame: usize,
    pub path: String,
}

/// Writes the sequence manifest: a JSON list of `{"frame", "path"}`.
pub fn write_sequence_manifest<P: AsRef<Path>>(
    path: P,
    entries: &[SequenceEntry],
) -> Result<(), MaskError> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(entries).expect("entries always serialize");
    fs::write(path, json + "\n").map_err(|e| MaskError::Manifest {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn read_sequence_manifest<P: AsRef<Path>>(path: P) -> Result<Vec<SequenceEntry>, MaskError> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| MaskError::Manifest {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    serde_json::from_str(&raw).map_err(|e| MaskError::Manifest {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Loads a mask sequence through its manifest, binarizing each PNG at 128
/// and enforcing uniform dimensions. Paths are resolved relative to the
/// manifest's directory.
pub fn load_sequence<P: AsRef<Path>>(
    manifest_path: P,
    semantics: MaskSemantics,
) -> Result<MaskSequence, MaskError> {
    let manifest_path = manifest_path.as_ref();
    let mut entries = read_sequence_manifest(manifest_path)?;
    entries.sort_by_key(|e| e.frame);
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut masks = Vec::with_capacity(entries.len());
    for entry in &entries {
        masks.push(Mask::load_png(base.join(&entry.path))?);
    }
    MaskSequence::new(masks, semantics)
}
