//! Floating-point raster planes and PNG ingestion.
//!
//! [`ImagePlane`] is the raster carrier used everywhere in this crate:
//! row-major `f32` samples in `[0, 1]`, one or three channels. PNG files
//! are decoded to 8-bit gray or RGB and divided by 255 on load.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// ITU BT.601 luma weights, applied when collapsing RGB to a single plane.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Raster dimensions, used in error reports and shape checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.channels)
    }
}

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image shapes differ: {a} vs {b}")]
    ShapeMismatch { a: Shape, b: Shape },
    #[error("invalid image geometry {width}x{height} with {channels} channels: {reason}")]
    InvalidGeometry {
        width: usize,
        height: usize,
        channels: usize,
        reason: &'static str,
    },
    #[error("sample buffer holds {got} values, expected {expected} for {shape}")]
    DataLength {
        shape: Shape,
        expected: usize,
        got: usize,
    },
    #[error("sample {index} is {value}, outside the finite [0, 1] range")]
    BadSample { index: usize, value: f32 },
    #[error("{path}: unsupported PNG layout {color:?}, expected 8-bit gray or RGB")]
    UnsupportedColor {
        path: PathBuf,
        color: ::image::ColorType,
    },
    #[error("failed to decode {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: ::image::ImageError,
    },
    #[error("failed to encode {path}: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: ::image::ImageError,
    },
}

/// H×W×C raster of `f32` samples in `[0, 1]`, stored row-major with
/// interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImagePlane {
    /// Builds a plane from raw samples, rejecting bad geometry, length
    /// mismatches, and samples outside the finite `[0, 1]` range.
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f32>,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidGeometry {
                width,
                height,
                channels,
                reason: "zero-sized image",
            });
        }
        if channels != 1 && channels != 3 {
            return Err(ImageError::InvalidGeometry {
                width,
                height,
                channels,
                reason: "channel count must be 1 or 3",
            });
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(ImageError::DataLength {
                shape: Shape {
                    width,
                    height,
                    channels,
                },
                expected,
                got: data.len(),
            });
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(ImageError::BadSample { index, value });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Constant-valued plane; `value` is clamped into `[0, 1]`.
    pub fn constant(width: usize, height: usize, channels: usize, value: f32) -> Self {
        let v = value.clamp(0.0, 1.0);
        Self::new(width, height, channels, vec![v; width * height * channels])
            .expect("constant plane is always valid")
    }

    /// Builds a plane by evaluating `f(x, y, c)`; results are clamped.
    pub fn from_fn<F: FnMut(usize, usize, usize) -> f32>(
        width: usize,
        height: usize,
        channels: usize,
        mut f: F,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    let v = f(x, y, c);
                    data.push(if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 });
                }
            }
        }
        Self::new(width, height, channels, data).expect("from_fn output is always valid")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> Shape {
        Shape {
            width: self.width,
            height: self.height,
            channels: self.channels,
        }
    }

    pub fn samples(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        debug_assert!(x < self.width && y < self.height && c < self.channels);
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Errors unless `self` and `other` have identical width, height, and
    /// channel count.
    pub fn ensure_same_shape(&self, other: &Self) -> Result<(), ImageError> {
        if self.shape() != other.shape() {
            return Err(ImageError::ShapeMismatch {
                a: self.shape(),
                b: other.shape(),
            });
        }
        Ok(())
    }

    /// Collapses to a single luma channel with BT.601 weights. A 1-channel
    /// plane is returned as a copy.
    pub fn to_luma(&self) -> ImagePlane {
        if self.channels == 1 {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.width * self.height);
        for px in self.data.chunks_exact(3) {
            let l = LUMA_WEIGHTS[0] * px[0] as f64
                + LUMA_WEIGHTS[1] * px[1] as f64
                + LUMA_WEIGHTS[2] * px[2] as f64;
            data.push(l.clamp(0.0, 1.0) as f32);
        }
        ImagePlane::new(self.width, self.height, 1, data).expect("luma plane is always valid")
    }

    /// Halves both dimensions with a 2×2 box average (trailing odd row and
    /// column are dropped). Returns `None` once either dimension is < 2.
    pub fn downsample_2x(&self) -> Option<ImagePlane> {
        let (w, h) = (self.width / 2, self.height / 2);
        if w == 0 || h == 0 {
            return None;
        }
        let mut data = Vec::with_capacity(w * h * self.channels);
        for y in 0..h {
            for x in 0..w {
                for c in 0..self.channels {
                    let s = self.get(2 * x, 2 * y, c) as f64
                        + self.get(2 * x + 1, 2 * y, c) as f64
                        + self.get(2 * x, 2 * y + 1, c) as f64
                        + self.get(2 * x + 1, 2 * y + 1, c) as f64;
                    data.push((s / 4.0) as f32);
                }
            }
        }
        Some(ImagePlane::new(w, h, self.channels, data).expect("downsample output is valid"))
    }

    /// Decodes an 8-bit gray or RGB PNG; samples are divided by 255.
    /// Alpha channels are dropped; 16-bit files are rejected.
    pub fn load_png<P: AsRef<Path>>(path: P) -> Result<Self, ImageError> {
        let path = path.as_ref();
        let dynamic = ::image::ImageReader::open(path)
            .map_err(|e| ImageError::Decode {
                path: path.to_path_buf(),
                source: ::image::ImageError::IoError(e),
            })?
            .decode()
            .map_err(|e| ImageError::Decode {
                path: path.to_path_buf(),
                source: e,
            })?;
        use ::image::ColorType::*;
        let (width, height) = (dynamic.width() as usize, dynamic.height() as usize);
        let (channels, bytes): (usize, Vec<u8>) = match dynamic.color() {
            L8 | La8 => (1, dynamic.into_luma8().into_raw()),
            Rgb8 | Rgba8 => (3, dynamic.into_rgb8().into_raw()),
            other => {
                return Err(ImageError::UnsupportedColor {
                    path: path.to_path_buf(),
                    color: other,
                })
            }
        };
        let data = bytes.iter().map(|&b| b as f32 / 255.0).collect();
        ImagePlane::new(width, height, channels, data)
    }

    /// Encodes as 8-bit gray or RGB PNG (samples scaled by 255, rounded).
    pub fn save_png<P: AsRef<Path>>(&self, path: P) -> Result<(), ImageError> {
        let path = path.as_ref();
        let bytes: Vec<u8> = self
            .data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        let color = if self.channels == 1 {
            ::image::ExtendedColorType::L8
        } else {
            ::image::ExtendedColorType::Rgb8
        };
        ::image::save_buffer_with_format(
            path,
            &bytes,
            self.width as u32,
            self.height as u32,
            color,
            ::image::ImageFormat::Png,
        )
        .map_err(|e| ImageError::Encode {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_wrong_length() {
        let err = ImagePlane::new(4, 4, 1, vec![0.0; 15]).unwrap_err();
        assert!(matches!(err, ImageError::DataLength { expected: 16, .. }));
    }

    #[test]
    fn new_rejects_out_of_range_samples() {
        let err = ImagePlane::new(2, 1, 1, vec![0.5, 1.5]).unwrap_err();
        assert!(matches!(err, ImageError::BadSample { index: 1, .. }));
        let err = ImagePlane::new(2, 1, 1, vec![f32::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, ImageError::BadSample { index: 0, .. }));
    }

    #[test]
    fn new_rejects_two_channels() {
        let err = ImagePlane::new(2, 2, 2, vec![0.0; 8]).unwrap_err();
        assert!(matches!(err, ImageError::InvalidGeometry { .. }));
    }

    #[test]
    fn luma_matches_weights() {
        let img = ImagePlane::constant(2, 2, 3, 0.5);
        let luma = img.to_luma();
        assert_eq!(luma.channels(), 1);
        for &v in luma.samples() {
            assert!((v - 0.5).abs() < 1e-6);
        }
        let rgb = ImagePlane::new(1, 1, 3, vec![1.0, 0.0, 0.0]).unwrap();
        assert!((rgb.to_luma().get(0, 0, 0) as f64 - 0.299).abs() < 1e-6);
    }

    #[test]
    fn downsample_box_average() {
        let img = ImagePlane::from_fn(4, 2, 1, |x, y, _| if (x + y) % 2 == 0 { 0.0 } else { 1.0 });
        let half = img.downsample_2x().unwrap();
        assert_eq!((half.width(), half.height()), (2, 1));
        for &v in half.samples() {
            assert!((v - 0.5).abs() < 1e-6);
        }
        assert!(ImagePlane::constant(1, 8, 1, 0.0).downsample_2x().is_none());
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let img = ImagePlane::from_fn(5, 3, 3, |x, y, c| (x + y + c) as f32 / 10.0);
        img.save_png(&path).unwrap();
        let back = ImagePlane::load_png(&path).unwrap();
        assert_eq!(back.shape(), img.shape());
        for (a, b) in back.samples().iter().zip(img.samples()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-6);
        }
    }
}
