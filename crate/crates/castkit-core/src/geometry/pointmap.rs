//! Pixel-aligned point maps and their disk formats.
//!
//! Native format is PMAP: magic `"PMAP"`, version `u16 = 1`, width `u32`,
//! height `u32`, then width×height records of three little-endian `f32`
//! (x, y, z). A NaN triple marks an invalid pixel. ASCII PLY clouds with
//! x/y/z properties are also accepted when paired with a sidecar JSON
//! pixel-index map (`{"width", "height", "pixel_indices": [...]}`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{CameraParams, GeometryError};

const PMAP_MAGIC: &[u8; 4] = b"PMAP";
const PMAP_VERSION: u16 = 1;

/// Per-pixel world coordinates for one frame. Invalid pixels carry no
/// geometric meaning and are skipped by every consumer.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap {
    width: usize,
    height: usize,
    points: Vec<[f32; 3]>,
    validity: Vec<bool>,
}

impl PointMap {
    pub fn new(
        width: usize,
        height: usize,
        points: Vec<[f32; 3]>,
        validity: Vec<bool>,
    ) -> Result<Self, GeometryError> {
        if points.len() != width * height || validity.len() != width * height {
            return Err(GeometryError::PointMapFormat {
                path: PathBuf::new(),
                reason: format!(
                    "{} points / {} validity flags for {width}x{height}",
                    points.len(),
                    validity.len()
                ),
            });
        }
        Ok(Self {
            width,
            height,
            points,
            validity,
        })
    }

    /// Builds from raw points; any pixel containing a NaN coordinate is
    /// marked invalid.
    pub fn from_points(
        width: usize,
        height: usize,
        points: Vec<[f32; 3]>,
    ) -> Result<Self, GeometryError> {
        let validity = points.iter().map(|p| !p.iter().any(|v| v.is_nan())).collect();
        Self::new(width, height, points, validity)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.validity[y * self.width + x]
    }

    /// World point at a pixel, or `None` for invalid pixels.
    pub fn point(&self, x: usize, y: usize) -> Option<[f64; 3]> {
        if !self.is_valid(x, y) {
            return None;
        }
        let p = self.points[y * self.width + x];
        Some([p[0] as f64, p[1] as f64, p[2] as f64])
    }

    pub fn valid_count(&self) -> usize {
        self.validity.iter().filter(|&&v| v).count()
    }

    pub fn write_pmap<P: AsRef<Path>>(&self, path: P) -> Result<(), GeometryError> {
        let path = path.as_ref();
        let mut bytes = Vec::with_capacity(14 + self.points.len() * 12);
        bytes.extend_from_slice(PMAP_MAGIC);
        bytes.extend_from_slice(&PMAP_VERSION.to_le_bytes());
        bytes.extend_from_slice(&(self.width as u32).to_le_bytes());
        bytes.extend_from_slice(&(self.height as u32).to_le_bytes());
        for (p, &valid) in self.points.iter().zip(&self.validity) {
            let rec = if valid { *p } else { [f32::NAN; 3] };
            for v in rec {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        fs::write(path, bytes).map_err(|source| GeometryError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read_pmap<P: AsRef<Path>>(path: P) -> Result<Self, GeometryError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| GeometryError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let fail = |reason: String| GeometryError::PointMapFormat {
            path: path.to_path_buf(),
            reason,
        };
        if bytes.len() < 14 {
            return Err(fail(format!("file is only {} bytes", bytes.len())));
        }
        if &bytes[0..4] != PMAP_MAGIC {
            return Err(fail("bad magic, expected \"PMAP\"".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != PMAP_VERSION {
            return Err(fail(format!("unsupported version {version}")));
        }
        let width = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
        let expected = 14 + width * height * 12;
        if bytes.len() != expected {
            return Err(fail(format!(
                "expected {expected} bytes for {width}x{height}, found {}",
                bytes.len()
            )));
        }
        let mut points = Vec::with_capacity(width * height);
        for rec in bytes[14..].chunks_exact(12) {
            points.push([
                f32::from_le_bytes(rec[0..4].try_into().unwrap()),
                f32::from_le_bytes(rec[4..8].try_into().unwrap()),
                f32::from_le_bytes(rec[8..12].try_into().unwrap()),
            ]);
        }
        Self::from_points(width, height, points).map_err(|_| fail("size overflow".into()))
    }

    /// Reads an ASCII PLY cloud plus its sidecar pixel-index map. Vertex
    /// `k` lands on row-major pixel `pixel_indices[k]`; uncovered pixels
    /// are invalid.
    pub fn read_ply<P: AsRef<Path>>(ply_path: P, sidecar_path: P) -> Result<Self, GeometryError> {
        let ply_path = ply_path.as_ref();
        let sidecar_path = sidecar_path.as_ref();
        let fail = |path: &Path, reason: String| GeometryError::PointMapFormat {
            path: path.to_path_buf(),
            reason,
        };

        let text = fs::read_to_string(ply_path).map_err(|source| GeometryError::Io {
            path: ply_path.to_path_buf(),
            source,
        })?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("ply") {
            return Err(fail(ply_path, "missing \"ply\" magic line".into()));
        }
        let mut vertex_count: Option<usize> = None;
        let mut properties: Vec<String> = Vec::new();
        let mut in_vertex_element = false;
        for line in lines.by_ref() {
            let line = line.trim();
            if line == "end_header" {
                break;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["format", "ascii", _] | ["comment", ..] => {}
                ["format", other, ..] => {
                    return Err(fail(ply_path, format!("unsupported PLY format {other}")))
                }
                ["element", "vertex", count] => {
                    vertex_count = Some(count.parse().map_err(|_| {
                        fail(ply_path, format!("bad vertex count {count:?}"))
                    })?);
                    in_vertex_element = true;
                }
                ["element", ..] => in_vertex_element = false,
                ["property", _ty, name] if in_vertex_element => {
                    properties.push((*name).to_string());
                }
                _ => {}
            }
        }
        let vertex_count =
            vertex_count.ok_or_else(|| fail(ply_path, "no vertex element".into()))?;
        let col = |name: &str| {
            properties
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| fail(ply_path, format!("no {name} property")))
        };
        let (ix, iy, iz) = (col("x")?, col("y")?, col("z")?);

        let mut coords = Vec::with_capacity(vertex_count);
        for (row, line) in lines.take(vertex_count).enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < properties.len() {
                return Err(fail(ply_path, format!("vertex row {row} is truncated")));
            }
            let parse = |i: usize| {
                fields[i]
                    .parse::<f32>()
                    .map_err(|_| fail(ply_path, format!("bad float {:?} on row {row}", fields[i])))
            };
            coords.push([parse(ix)?, parse(iy)?, parse(iz)?]);
        }
        if coords.len() != vertex_count {
            return Err(fail(
                ply_path,
                format!("expected {vertex_count} vertices, found {}", coords.len()),
            ));
        }

        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Sidecar {
            width: usize,
            height: usize,
            pixel_indices: Vec<usize>,
        }
        let raw = fs::read_to_string(sidecar_path).map_err(|source| GeometryError::Io {
            path: sidecar_path.to_path_buf(),
            source,
        })?;
        let sidecar: Sidecar = serde_json::from_str(&raw)
            .map_err(|e| fail(sidecar_path, format!("bad sidecar JSON: {e}")))?;
        if sidecar.pixel_indices.len() != vertex_count {
            return Err(fail(
                sidecar_path,
                format!(
                    "{} pixel indices for {vertex_count} vertices",
                    sidecar.pixel_indices.len()
                ),
            ));
        }
        let size = sidecar.width * sidecar.height;
        let mut points = vec![[f32::NAN; 3]; size];
        let mut validity = vec![false; size];
        for (vertex, &idx) in sidecar.pixel_indices.iter().enumerate() {
            if idx >= size {
                return Err(fail(
                    sidecar_path,
                    format!("pixel index {idx} out of range for vertex {vertex}"),
                ));
            }
            if validity[idx] {
                return Err(fail(
                    sidecar_path,
                    format!("duplicate pixel index {idx} at vertex {vertex}"),
                ));
            }
            points[idx] = coords[vertex];
            validity[idx] = true;
        }
        Self::new(sidecar.width, sidecar.height, points, validity)
    }

    /// Loads a point map by extension: `.pmap` for the binary format, or
    /// `.ply` with a `<stem>.pixmap.json` sidecar next to it.
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, GeometryError> {
        let path = path.as_ref();
        match path.extension().and_then(|e| e.to_str()) {
            Some("pmap") => Self::read_pmap(path),
            Some("ply") => {
                let sidecar = path.with_extension("pixmap.json");
                Self::read_ply(path, &sidecar)
            }
            other => Err(GeometryError::PointMapFormat {
                path: path.to_path_buf(),
                reason: format!("unsupported extension {other:?}"),
            }),
        }
    }
}

/// Loads and validates a JSON array of camera parameters.
pub fn load_cameras<P: AsRef<Path>>(path: P) -> Result<Vec<CameraParams>, GeometryError> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|source| GeometryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cams: Vec<CameraParams> =
        serde_json::from_str(&raw).map_err(|e| GeometryError::CameraFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    for (i, cam) in cams.iter().enumerate() {
        cam.validate().map_err(|e| GeometryError::CameraFile {
            path: path.to_path_buf(),
            reason: format!("camera {i}: {e}"),
        })?;
    }
    Ok(cams)
}
