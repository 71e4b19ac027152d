//! Added-object mask propagation through pixel-aligned point maps:
//! lift the first-frame masked pixels to 3D, transfer them to every other
//! view by camera projection (or a camera-free nearest-point fallback),
//! and emit bounding-box masks.

mod pointmap;

use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::masking::{Mask, MaskSemantics, MaskSequence};

pub use pointmap::{load_cameras, PointMap};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("non-finite 3D point ({0}, {1}, {2})")]
    NonFinitePoint(f64, f64, f64),
    #[error("{what} dimensions {got_w}x{got_h} do not match {want_w}x{want_h}")]
    DimensionMismatch {
        what: &'static str,
        want_w: usize,
        want_h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("{what} count {got} does not match frame count {want}")]
    CountMismatch {
        what: &'static str,
        want: usize,
        got: usize,
    },
    #[error("mask selects no valid points; nothing to propagate")]
    EmptyObject,
    #[error("invalid propagation config: {0}")]
    InvalidConfig(String),
    #[error("point map {path}: {reason}")]
    PointMapFormat { path: PathBuf, reason: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("camera file {path}: {reason}")]
    CameraFile { path: PathBuf, reason: String },
}

/// Pinhole intrinsics plus a rigid world-to-camera pose. `rotation` is
/// row-major; camera convention is +z forward, image y down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraParams {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
    pub width: usize,
    pub height: usize,
}

/// Result of projecting one world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projected {
    Point { u: f64, v: f64, depth: f64 },
    /// The point sits at or behind the camera plane (z ≤ 0) — a value,
    /// not an error.
    Behind,
}

impl CameraParams {
    /// Rejects cameras whose rotation is not orthonormal with determinant
    /// +1 (tolerance 1e-6), or with non-positive focals, or a principal
    /// point outside the frame.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let r = &self.rotation;
        for v in r.iter().chain(self.translation.iter()) {
            if !v.is_finite() {
                return Err(GeometryError::InvalidCamera("non-finite pose entry".into()));
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[i * 3 + k] * r[j * 3 + k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-6 {
                    return Err(GeometryError::InvalidCamera(format!(
                        "rotation rows {i},{j} not orthonormal (dot = {dot})"
                    )));
                }
            }
        }
        let det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6])
            + r[2] * (r[3] * r[7] - r[4] * r[6]);
        if (det - 1.0).abs() > 1e-6 {
            return Err(GeometryError::InvalidCamera(format!(
                "rotation determinant {det} != +1"
            )));
        }
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(GeometryError::InvalidCamera(format!(
                "focal lengths must be positive, got ({}, {})",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidCamera("zero image size".into()));
        }
        if !(0.0 <= self.cx && self.cx < self.width as f64)
            || !(0.0 <= self.cy && self.cy < self.height as f64)
        {
            return Err(GeometryError::InvalidCamera(format!(
                "principal point ({}, {}) outside {}x{} frame",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    /// World point into camera coordinates: `R p + t`.
    pub fn transform(&self, p: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        [
            r[0] * p[0] + r[1] * p[1] + r[2] * p[2] + self.translation[0],
            r[3] * p[0] + r[4] * p[1] + r[5] * p[2] + self.translation[1],
            r[6] * p[0] + r[7] * p[1] + r[8] * p[2] + self.translation[2],
        ]
    }

    /// Camera-frame direction into world frame (`Rᵀ d`).
    pub fn rotate_to_world(&self, d: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        [
            r[0] * d[0] + r[3] * d[1] + r[6] * d[2],
            r[1] * d[0] + r[4] * d[1] + r[7] * d[2],
            r[2] * d[0] + r[5] * d[1] + r[8] * d[2],
        ]
    }

    /// Camera center in world coordinates (`−Rᵀ t`).
    pub fn center(&self) -> [f64; 3] {
        let t = self.translation;
        let c = self.rotate_to_world(t);
        [-c[0], -c[1], -c[2]]
    }

    /// Standard pinhole projection of a world point. Points with camera
    /// depth ≤ 0 yield [`Projected::Behind`]; non-finite input is rejected.
    pub fn project_point(&self, p: [f64; 3]) -> Result<Projected, GeometryError> {
        if p.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinitePoint(p[0], p[1], p[2]));
        }
        let q = self.transform(p);
        if q[2] <= 0.0 {
            return Ok(Projected::Behind);
        }
        Ok(Projected::Point {
            u: self.fx * q[0] / q[2] + self.cx,
            v: self.fy * q[1] / q[2] + self.cy,
            depth: q[2],
        })
    }
}

/// 3D points lifted from the first-frame mask, with their source pixels.
#[derive(Debug, Clone, Default)]
pub struct ObjectPoints {
    pub coords: Vec<[f64; 3]>,
    pub source_pixels: Vec<(usize, usize)>,
}

impl ObjectPoints {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Collects the 3D point of every pixel that is both masked and valid, in
/// row-major order. An empty result is an error: there is no object to
/// propagate.
pub fn lift_mask_pixels(pm: &PointMap, mask: &Mask) -> Result<ObjectPoints, GeometryError> {
    if pm.width() != mask.width() || pm.height() != mask.height() {
        return Err(GeometryError::DimensionMismatch {
            what: "mask",
            want_w: pm.width(),
            want_h: pm.height(),
            got_w: mask.width(),
            got_h: mask.height(),
        });
    }
    let mut object = ObjectPoints::default();
    for y in 0..pm.height() {
        for x in 0..pm.width() {
            if mask.is_marked(x, y) {
                if let Some(p) = pm.point(x, y) {
                    object.coords.push(p);
                    object.source_pixels.push((x, y));
                }
            }
        }
    }
    if object.is_empty() {
        return Err(GeometryError::EmptyObject);
    }
    Ok(object)
}

/// Projects every object point into a view, keeping in-frame hits rounded
/// to the nearest pixel (half away from zero). Behind-camera and
/// out-of-frame points are discarded; an empty result is legal.
pub fn project_object_to_view(
    obj: &ObjectPoints,
    cam: &CameraParams,
) -> Result<Vec<(i64, i64)>, GeometryError> {
    if obj.is_empty() {
        return Err(GeometryError::EmptyObject);
    }
    let mut pixels = Vec::with_capacity(obj.len());
    for &p in &obj.coords {
        if let Projected::Point { u, v, .. } = cam.project_point(p)? {
            let (pu, pv) = (u.round() as i64, v.round() as i64);
            if pu >= 0 && pv >= 0 && (pu as usize) < cam.width && (pv as usize) < cam.height {
                pixels.push((pu, pv));
            }
        }
    }
    Ok(pixels)
}

/// Axis-aligned bounding box of `pixels`, expanded on every side by
/// `floor(pad_fraction × max(box_w, box_h))`, intersected with the frame.
/// An empty pixel list produces an all-zero mask.
pub fn bbox_mask(pixels: &[(i64, i64)], width: usize, height: usize, pad_fraction: f64) -> Mask {
    let mut mask = Mask::zero(width, height);
    let Some(&(first_u, first_v)) = pixels.first() else {
        return mask;
    };
    let (mut min_u, mut max_u, mut min_v, mut max_v) = (first_u, first_u, first_v, first_v);
    for &(u, v) in pixels {
        min_u = min_u.min(u);
        max_u = max_u.max(u);
        min_v = min_v.min(v);
        max_v = max_v.max(v);
    }
    let extent = (max_u - min_u).max(max_v - min_v) as f64;
    let pad = (pad_fraction * extent).floor() as i64;
    let x0 = (min_u - pad).max(0);
    let y0 = (min_v - pad).max(0);
    let x1 = (max_u + pad).min(width as i64 - 1);
    let y1 = (max_v + pad).min(height as i64 - 1);
    if x0 > x1 || y0 > y1 {
        return mask;
    }
    for y in y0..=y1 {
        for x in x0..=x1 {
            mask.set(x as usize, y as usize, true);
        }
    }
    mask
}

/// Knobs for [`propagate_added_object_masks`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagateConfig {
    /// Bounding-box padding as a fraction of the larger box extent.
    /// 0 reproduces the raw bounding-box procedure.
    pub pad_fraction: f64,
    /// Scene-unit radius for the camera-free nearest-point mode.
    pub nearest_radius: f64,
}

impl Default for PropagateConfig {
    fn default() -> Self {
        Self {
            pad_fraction: 0.05,
            nearest_radius: 0.05,
        }
    }
}

impl PropagateConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.pad_fraction.is_finite() && self.pad_fraction >= 0.0) {
            return Err(GeometryError::InvalidConfig(format!(
                "pad_fraction must be finite and >= 0, got {}",
                self.pad_fraction
            )));
        }
        if !(self.nearest_radius.is_finite() && self.nearest_radius > 0.0) {
            return Err(GeometryError::InvalidConfig(format!(
                "nearest_radius must be finite and > 0, got {}",
                self.nearest_radius
            )));
        }
        Ok(())
    }
}

/// Hash grid over the object points for radius queries. Cell edge equals
/// the query radius, so a query only inspects the 27 surrounding cells.
struct PointGrid {
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
    radius: f64,
}

impl PointGrid {
    fn build(points: &[[f64; 3]], radius: f64) -> Self {
        let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, radius)).or_default().push(i);
        }
        Self { cells, radius }
    }

    fn key(p: &[f64; 3], radius: f64) -> (i64, i64, i64) {
        (
            (p[0] / radius).floor() as i64,
            (p[1] / radius).floor() as i64,
            (p[2] / radius).floor() as i64,
        )
    }

    fn near(&self, q: [f64; 3], points: &[[f64; 3]]) -> bool {
        let (kx, ky, kz) = Self::key(&q, self.radius);
        let r2 = self.radius * self.radius;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = self.cells.get(&(kx + dx, ky + dy, kz + dz)) else {
                        continue;
                    };
                    for &i in bucket {
                        let p = points[i];
                        let d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
                        if d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= r2 {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Propagates a first-frame added-object mask to every frame.
///
/// Camera mode (cameras supplied): lift masked pixels from the first
/// point map, project the points into each later camera, and take the
/// padded bounding box. Nearest-point mode (no cameras): mark the pixels
/// of each frame whose own point lies within `nearest_radius` of any
/// lifted point, then take the padded bounding box of those pixels.
///
/// The first frame's mask is reset to fully valid and the sequence is
/// returned with validity semantics.
pub fn propagate_added_object_masks(
    first_mask: &Mask,
    pointmaps: &[PointMap],
    cams: Option<&[CameraParams]>,
    cfg: &PropagateConfig,
) -> Result<MaskSequence, GeometryError> {
    cfg.validate()?;
    let n = pointmaps.len();
    if n == 0 {
        return Err(GeometryError::CountMismatch {
            what: "point map",
            want: 1,
            got: 0,
        });
    }
    let (w, h) = (pointmaps[0].width(), pointmaps[0].height());
    for pm in pointmaps.iter() {
        if pm.width() != w || pm.height() != h {
            return Err(GeometryError::DimensionMismatch {
                what: "point map",
                want_w: w,
                want_h: h,
                got_w: pm.width(),
                got_h: pm.height(),
            });
        }
    }
    if let Some(cams) = cams {
        if cams.len() != n {
            return Err(GeometryError::CountMismatch {
                what: "camera",
                want: n,
                got: cams.len(),
            });
        }
        for cam in cams {
            cam.validate()?;
            if cam.width != w || cam.height != h {
                return Err(GeometryError::DimensionMismatch {
                    what: "camera frame",
                    want_w: w,
                    want_h: h,
                    got_w: cam.width,
                    got_h: cam.height,
                });
            }
        }
    }

    let object = lift_mask_pixels(&pointmaps[0], first_mask)?;
    let mut masks = Vec::with_capacity(n);
    masks.push(Mask::full(w, h));

    match cams {
        Some(cams) => {
            for cam in cams.iter().skip(1) {
                let pixels = project_object_to_view(&object, cam)?;
                masks.push(bbox_mask(&pixels, w, h, cfg.pad_fraction));
            }
        }
        None => {
            let grid = PointGrid::build(&object.coords, cfg.nearest_radius);
            for pm in pointmaps.iter().skip(1) {
                let mut pixels = Vec::new();
                for y in 0..h {
                    for x in 0..w {
                        if let Some(q) = pm.point(x, y) {
                            if grid.near(q, &object.coords) {
                                pixels.push((x as i64, y as i64));
                            }
                        }
                    }
                }
                masks.push(bbox_mask(&pixels, w, h, cfg.pad_fraction));
            }
        }
    }

    Ok(MaskSequence::new(masks, MaskSemantics::Validity).expect("uniform masks with valid first"))
}
