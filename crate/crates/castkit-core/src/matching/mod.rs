//! Keypoint-matching geometric-consistency evaluation: FAST-9 detection,
//! rotation-steered binary descriptors, brute-force Hamming matching with
//! cross-check, and the original-vs-edited consistency report.

mod brief;
mod fast;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{ImageError, ImagePlane, Shape};

/// Keypoints keep this many pixels clear of every border so the rotated
/// smoothed descriptor pattern stays in bounds.
pub const PATCH_MARGIN: usize = 16;

/// Minimum image side for detection.
pub const MIN_IMAGE_SIDE: usize = 64;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("image {shape} is smaller than the {min}x{min} detection minimum")]
    ImageTooSmall { shape: Shape, min: usize },
    #[error("descriptor list for side {side:?} is empty")]
    EmptyDescriptors { side: char },
    #[error("invalid matching config: {0}")]
    InvalidConfig(String),
}

/// Detector and matcher parameters; defaults are common ORB settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchConfig {
    /// FAST intensity threshold on the unit range (20/255 by default).
    pub fast_threshold: f64,
    pub max_keypoints: usize,
    /// Chebyshev radius for non-maximum suppression.
    pub nms_radius: usize,
    /// Hamming cutoff in bits; pairs above it are discarded.
    pub max_distance: u32,
    pub cross_check: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            fast_threshold: 20.0 / 255.0,
            max_keypoints: 1000,
            nms_radius: 7,
            max_distance: 64,
            cross_check: true,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), MatchError> {
        if !(self.fast_threshold.is_finite() && self.fast_threshold > 0.0) {
            return Err(MatchError::InvalidConfig(format!(
                "fast_threshold must be finite and > 0, got {}",
                self.fast_threshold
            )));
        }
        if self.max_keypoints == 0 {
            return Err(MatchError::InvalidConfig("max_keypoints must be >= 1".into()));
        }
        Ok(())
    }
}

/// Detected corner with sub-pixel-capable coordinates, FAST response, and
/// intensity-centroid orientation in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub response: f64,
    pub orientation: f64,
}

/// 256-bit binary descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Descriptor {
    pub bits: [u8; 32],
}

impl Descriptor {
    /// Hamming distance in bits.
    pub fn hamming(&self, other: &Descriptor) -> u32 {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

/// One accepted correspondence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPair {
    pub index_a: usize,
    pub index_b: usize,
    pub distance: u32,
}

/// Accepted matches plus the parameters that produced them. With
/// cross-check on, the pairs form a partial one-to-one mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSet {
    pub pairs: Vec<MatchPair>,
    pub max_distance: u32,
    pub cross_check: bool,
}

/// FAST-9 corners with non-maximum suppression, strongest first. Images
/// are converted to luma internally; anything under 64×64 is rejected.
pub fn detect_keypoints(img: &ImagePlane, cfg: &MatchConfig) -> Result<Vec<Keypoint>, MatchError> {
    cfg.validate()?;
    if img.width() < MIN_IMAGE_SIDE || img.height() < MIN_IMAGE_SIDE {
        return Err(MatchError::ImageTooSmall {
            shape: img.shape(),
            min: MIN_IMAGE_SIDE,
        });
    }
    Ok(fast::detect(&img.to_luma(), cfg))
}

/// Descriptors for `keypoints`, with margin violators dropped and
/// reported. `keypoints` holds the described subset aligned with
/// `descriptors`; `dropped` holds the input indices that were skipped.
#[derive(Debug, Clone)]
pub struct DescriptorSet {
    pub descriptors: Vec<Descriptor>,
    pub keypoints: Vec<Keypoint>,
    pub dropped: Vec<usize>,
}

/// Computes rotation-steered binary descriptors from a 5×5-box-smoothed
/// copy of the image. Deterministic for a fixed image and keypoint list.
pub fn compute_descriptors(img: &ImagePlane, keypoints: &[Keypoint]) -> DescriptorSet {
    let luma = img.to_luma();
    let integral = brief::Integral::build(&luma);
    let mut set = DescriptorSet {
        descriptors: Vec::with_capacity(keypoints.len()),
        keypoints: Vec::with_capacity(keypoints.len()),
        dropped: Vec::new(),
    };
    for (i, kp) in keypoints.iter().enumerate() {
        if brief::respects_margin(kp, luma.width(), luma.height()) {
            set.descriptors.push(brief::describe(&integral, kp));
            set.keypoints.push(*kp);
        } else {
            set.dropped.push(i);
        }
    }
    set
}

fn nearest(query: &Descriptor, pool: &[Descriptor]) -> (usize, u32) {
    let mut best = (0usize, u32::MAX);
    for (j, d) in pool.iter().enumerate() {
        let dist = query.hamming(d);
        if dist < best.1 {
            best = (j, dist);
        }
    }
    best
}

/// Brute-force Hamming matching: nearest neighbour each way, optional
/// mutual cross-check, then the distance cutoff. Pairs are ordered by
/// ascending `index_a`; ties in distance resolve to the lowest index.
pub fn match_pair(
    a: &[Descriptor],
    b: &[Descriptor],
    cfg: &MatchConfig,
) -> Result<MatchSet, MatchError> {
    if a.is_empty() {
        return Err(MatchError::EmptyDescriptors { side: 'a' });
    }
    if b.is_empty() {
        return Err(MatchError::EmptyDescriptors { side: 'b' });
    }
    let forward: Vec<(usize, u32)> = a.iter().map(|d| nearest(d, b)).collect();
    let mut pairs = Vec::new();
    if cfg.cross_check {
        let backward: Vec<(usize, u32)> = b.iter().map(|d| nearest(d, a)).collect();
        for (i, &(j, dist)) in forward.iter().enumerate() {
            if backward[j].0 == i && dist <= cfg.max_distance {
                pairs.push(MatchPair {
                    index_a: i,
                    index_b: j,
                    distance: dist,
                });
            }
        }
    } else {
        for (i, &(j, dist)) in forward.iter().enumerate() {
            if dist <= cfg.max_distance {
                pairs.push(MatchPair {
                    index_a: i,
                    index_b: j,
                    distance: dist,
                });
            }
        }
    }
    Ok(MatchSet {
        pairs,
        max_distance: cfg.max_distance,
        cross_check: cfg.cross_check,
    })
}

/// Keypoints and matches for one image pair.
#[derive(Debug, Clone)]
pub struct PairMatches {
    pub keypoints_a: Vec<Keypoint>,
    pub keypoints_b: Vec<Keypoint>,
    pub matches: MatchSet,
}

impl PairMatches {
    pub fn count(&self) -> usize {
        self.matches.pairs.len()
    }
}

/// Matched-pair counts for the original and edited view pairs. Counts are
/// `None` when a pair could not be matched because an image produced no
/// keypoints; `ratio` is `None` whenever it is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub original_matches: Option<usize>,
    pub edited_matches: Option<usize>,
    pub ratio: Option<f64>,
    pub degraded: bool,
}

/// Full consistency evaluation output: the report plus per-pair match
/// detail for rendering composites.
#[derive(Debug, Clone)]
pub struct ConsistencyOutcome {
    pub report: ConsistencyReport,
    pub original: Option<PairMatches>,
    pub edited: Option<PairMatches>,
}

fn match_one_pair(
    a: &ImagePlane,
    b: &ImagePlane,
    cfg: &MatchConfig,
) -> Result<Option<PairMatches>, MatchError> {
    let kps_a = detect_keypoints(a, cfg)?;
    let kps_b = detect_keypoints(b, cfg)?;
    let set_a = compute_descriptors(a, &kps_a);
    let set_b = compute_descriptors(b, &kps_b);
    if set_a.descriptors.is_empty() || set_b.descriptors.is_empty() {
        return Ok(None);
    }
    let matches = match_pair(&set_a.descriptors, &set_b.descriptors, cfg)?;
    Ok(Some(PairMatches {
        keypoints_a: set_a.keypoints,
        keypoints_b: set_b.keypoints,
        matches,
    }))
}

/// Runs detect → describe → match on the original and the edited view
/// pair and reports the matched-pair counts and their ratio. A pair with
/// zero keypoints degrades the report instead of failing.
pub fn consistency_report(
    original: (&ImagePlane, &ImagePlane),
    edited: (&ImagePlane, &ImagePlane),
    cfg: &MatchConfig,
) -> Result<ConsistencyOutcome, MatchError> {
    let original = match_one_pair(original.0, original.1, cfg)?;
    let edited = match_one_pair(edited.0, edited.1, cfg)?;
    let original_matches = original.as_ref().map(PairMatches::count);
    let edited_matches = edited.as_ref().map(PairMatches::count);
    let ratio = match (original_matches, edited_matches) {
        (Some(o), Some(e)) if o > 0 => Some(e as f64 / o as f64),
        _ => None,
    };
    Ok(ConsistencyOutcome {
        report: ConsistencyReport {
            original_matches,
            edited_matches,
            ratio,
            degraded: original.is_none() || edited.is_none(),
        },
        original,
        edited,
    })
}

/// Side-by-side RGB composite with 1-px green match lines.
pub fn render_composite(a: &ImagePlane, b: &ImagePlane, pair: &PairMatches) -> ImagePlane {
    let (wa, ha) = (a.width(), a.height());
    let (wb, hb) = (b.width(), b.height());
    let (w, h) = (wa + wb, ha.max(hb));
    let la = a.to_luma();
    let lb = b.to_luma();
    let mut data = vec![0.0f32; w * h * 3];
    let mut put = |x: usize, y: usize, rgb: [f32; 3]| {
        let base = (y * w + x) * 3;
        data[base..base + 3].copy_from_slice(&rgb);
    };
    for y in 0..ha {
        for x in 0..wa {
            let v = la.get(x, y, 0);
            put(x, y, [v, v, v]);
        }
    }
    for y in 0..hb {
        for x in 0..wb {
            let v = lb.get(x, y, 0);
            put(x + wa, y, [v, v, v]);
        }
    }
    for m in &pair.matches.pairs {
        let ka = pair.keypoints_a[m.index_a];
        let kb = pair.keypoints_b[m.index_b];
        draw_line(
            &mut data,
            w,
            h,
            (ka.x.round() as i64, ka.y.round() as i64),
            (kb.x.round() as i64 + wa as i64, kb.y.round() as i64),
        );
    }
    ImagePlane::new(w, h, 3, data).expect("composite is always valid")
}

fn draw_line(data: &mut [f32], w: usize, h: usize, from: (i64, i64), to: (i64, i64)) {
    let (mut x, mut y) = from;
    let dx = (to.0 - from.0).abs();
    let dy = -(to.1 - from.1).abs();
    let sx = if from.0 < to.0 { 1 } else { -1 };
    let sy = if from.1 < to.1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
            let base = ((y as usize) * w + x as usize) * 3;
            data[base] = 0.0;
            data[base + 1] = 1.0;
            data[base + 2] = 0.0;
        }
        if x == to.0 && y == to.1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}
