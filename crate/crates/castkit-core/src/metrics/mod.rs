//! Image comparison metrics feeding the per-view difficulty score:
//! mean squared error, PSNR, windowed SSIM, and a pluggable perceptual
//! distance slot.

mod perceptual;
mod ssim;

use std::path::PathBuf;

use thiserror::Error;

use crate::image::{ImageError, ImagePlane, Shape};

pub use perceptual::{
    gradient_magnitude, gradient_proxy_distance, perceptual_distance, PerceptualConfig,
    PerceptualEvaluator, PerceptualMode, PerceptualTable,
};
pub use ssim::{ssim, SsimParams};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("image {shape} is smaller than the {window}x{window} ssim window")]
    WindowTooSmall { shape: Shape, window: usize },
    #[error("invalid ssim parameters: {0}")]
    InvalidSsimParams(String),
    #[error("invalid perceptual config: {0}")]
    InvalidPerceptualConfig(String),
    #[error("perceptual table {path} has no entry for frame {frame}")]
    TableMissingFrame { path: PathBuf, frame: usize },
    #[error("failed to read perceptual table {path}: {reason}")]
    TableRead { path: PathBuf, reason: String },
}

/// Mean squared error, averaged over every sample of every channel.
///
/// The mean-per-sample convention keeps downstream score weights
/// resolution-independent.
pub fn mse(a: &ImagePlane, b: &ImagePlane) -> Result<f64, MetricsError> {
    a.ensure_same_shape(b)?;
    let mut sum = 0.0f64;
    for (&x, &y) in a.samples().iter().zip(b.samples()) {
        let d = x as f64 - y as f64;
        sum += d * d;
    }
    Ok(sum / a.samples().len() as f64)
}

/// PSNR in decibels for a known dynamic range. A zero MSE maps to
/// `f64::INFINITY`, the distinguished marker for identical inputs.
pub fn psnr_from_mse(mse: f64, dynamic_range: f64) -> f64 {
    if mse <= 0.0 {
        return f64::INFINITY;
    }
    10.0 * ((dynamic_range * dynamic_range) / mse).log10()
}

/// PSNR of two planes over the unit dynamic range.
pub fn psnr(a: &ImagePlane, b: &ImagePlane) -> Result<f64, MetricsError> {
    Ok(psnr_from_mse(mse(a, b)?, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    /// Direct double-loop MSE, written from the formula before the
    /// implementation; the frozen oracle for seeded comparisons.
    fn mse_oracle(a: &ImagePlane, b: &ImagePlane) -> f64 {
        let mut sum = 0.0f64;
        let mut n = 0u64;
        for y in 0..a.height() {
            for x in 0..a.width() {
                for c in 0..a.channels() {
                    let d = a.get(x, y, c) as f64 - b.get(x, y, c) as f64;
                    sum += d * d;
                    n += 1;
                }
            }
        }
        sum / n as f64
    }

    #[test]
    fn mse_identity_is_zero() {
        let img = synthetic::uniform_noise_image(8, 8, 3, 7);
        assert_eq!(mse(&img, &img).unwrap(), 0.0);
    }

    #[test]
    fn mse_constant_half_gap() {
        let a = ImagePlane::constant(6, 4, 1, 0.0);
        let b = ImagePlane::constant(6, 4, 1, 0.5);
        assert!((mse(&a, &b).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn mse_matches_double_loop_oracle() {
        let a = synthetic::uniform_noise_image(8, 8, 1, 11);
        let b = synthetic::uniform_noise_image(8, 8, 1, 12);
        let got = mse(&a, &b).unwrap();
        assert!((got - mse_oracle(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn mse_rejects_shape_mismatch() {
        let a = ImagePlane::constant(4, 4, 1, 0.0);
        let b = ImagePlane::constant(4, 5, 1, 0.0);
        assert!(matches!(
            mse(&a, &b),
            Err(MetricsError::Image(ImageError::ShapeMismatch { .. }))
        ));
    }

    #[test]
    fn psnr_analytic_cases() {
        assert!((psnr_from_mse(0.01, 1.0) - 20.0).abs() < 1e-12);
        assert!((psnr_from_mse(1.0, 1.0) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn psnr_composes_with_mse_oracle() {
        let a = synthetic::uniform_noise_image(8, 8, 1, 21);
        let b = synthetic::uniform_noise_image(8, 8, 1, 22);
        let expected = 10.0 * (1.0 / mse_oracle(&a, &b)).log10();
        assert!((psnr(&a, &b).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn psnr_identical_inputs_is_infinite_marker() {
        let img = synthetic::uniform_noise_image(8, 8, 1, 3);
        assert!(psnr(&img, &img).unwrap().is_infinite());
    }
}
