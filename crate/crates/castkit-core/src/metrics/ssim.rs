//! Windowed structural similarity on luma.

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::image::ImagePlane;

/// SSIM window parameters. Defaults are the universally cited ones:
/// 11×11 gaussian window with σ = 1.5, k1 = 0.01, k2 = 0.03, unit range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SsimParams {
    pub window_size: usize,
    pub gaussian_sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window_size: 11,
            gaussian_sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.window_size < 3 || self.window_size % 2 == 0 {
            return Err(MetricsError::InvalidSsimParams(format!(
                "window_size must be odd and >= 3, got {}",
                self.window_size
            )));
        }
        for (name, v) in [
            ("gaussian_sigma", self.gaussian_sigma),
            ("k1", self.k1),
            ("k2", self.k2),
            ("dynamic_range", self.dynamic_range),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MetricsError::InvalidSsimParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - c;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Valid-mode separable convolution: horizontal then vertical pass with the
/// same 1-D kernel. Output is (w − n + 1) × (h − n + 1).
///
/// Both passes accumulate tap-by-tap over contiguous slices, which keeps
/// the inner loops vectorizable while preserving the same per-output
/// addition order as a scalar tap loop.
fn conv_valid(plane: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let n = kernel.len();
    let ow = w - n + 1;
    let mut horiz = vec![0.0f64; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        let out = &mut horiz[y * ow..(y + 1) * ow];
        for (i, &k) in kernel.iter().enumerate() {
            let src = &row[i..i + ow];
            for (acc, &s) in out.iter_mut().zip(src) {
                *acc += k * s;
            }
        }
    }
    let oh = h - n + 1;
    let mut out = vec![0.0f64; ow * oh];
    for oy in 0..oh {
        let dst = &mut out[oy * ow..(oy + 1) * ow];
        for (i, &k) in kernel.iter().enumerate() {
            let src = &horiz[(oy + i) * ow..(oy + i + 1) * ow];
            for (acc, &s) in dst.iter_mut().zip(src) {
                *acc += k * s;
            }
        }
    }
    out
}

/// Mean SSIM index over all fully-interior window positions (no padding).
/// Three-channel images are collapsed to BT.601 luma first. Returns
/// exactly 1.0 for identical inputs and is symmetric in its arguments.
pub fn ssim(a: &ImagePlane, b: &ImagePlane, params: &SsimParams) -> Result<f64, MetricsError> {
    params.validate()?;
    a.ensure_same_shape(b)?;
    let win = params.window_size;
    if a.width() < win || a.height() < win {
        return Err(MetricsError::WindowTooSmall {
            shape: a.shape(),
            window: win,
        });
    }

    // Borrow single-channel planes directly; only RGB pays for the luma
    // conversion.
    let la_owned;
    let la: &ImagePlane = if a.channels() == 1 {
        a
    } else {
        la_owned = a.to_luma();
        &la_owned
    };
    let lb_owned;
    let lb: &ImagePlane = if b.channels() == 1 {
        b
    } else {
        lb_owned = b.to_luma();
        &lb_owned
    };
    let (w, h) = (la.width(), la.height());
    let x: Vec<f64> = la.samples().iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = lb.samples().iter().map(|&v| v as f64).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u * v).collect();

    let kernel = gaussian_kernel(win, params.gaussian_sigma);
    let mu_x = conv_valid(&x, w, h, &kernel);
    let mu_y = conv_valid(&y, w, h, &kernel);
    let m_xx = conv_valid(&xx, w, h, &kernel);
    let m_yy = conv_valid(&yy, w, h, &kernel);
    let m_xy = conv_valid(&xy, w, h, &kernel);

    let c1 = (params.k1 * params.dynamic_range).powi(2);
    let c2 = (params.k2 * params.dynamic_range).powi(2);
    let mut sum = 0.0f64;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = m_xx[i] - mx * mx;
        let var_y = m_yy[i] - my * my;
        let cov = m_xy[i] - mx * my;
        let num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
        let den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
        sum += num / den;
    }
    // Guard against float overshoot past the analytic upper bound of 1.
    Ok((sum / mu_x.len() as f64).min(1.0))
}
