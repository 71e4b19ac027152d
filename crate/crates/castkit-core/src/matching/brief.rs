//! Rotation-steered binary descriptors: 256 pairwise intensity
//! comparisons on a 5×5-box-smoothed patch, sampled along a fixed
//! pseudo-random pattern rotated to the keypoint orientation.

use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Descriptor, Keypoint, PATCH_MARGIN};
use crate::image::ImagePlane;

/// Pattern points live inside this disc so any rotation plus the 5×5
/// smoothing window stays within [`PATCH_MARGIN`] of the keypoint.
const PATTERN_RADIUS: i32 = 13;
const PATTERN_SEED: u64 = 0x0b5f_17e5_cafe_f00d;
pub(crate) const DESCRIPTOR_BITS: usize = 256;

type PatternPair = ((i32, i32), (i32, i32));

/// The fixed comparison pattern, built once from the pinned seed.
pub(crate) fn pattern() -> &'static [PatternPair; DESCRIPTOR_BITS] {
    static PATTERN: OnceLock<[PatternPair; DESCRIPTOR_BITS]> = OnceLock::new();
    PATTERN.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(PATTERN_SEED);
        let sample_point = |rng: &mut ChaCha8Rng| loop {
            let x = rng.random_range(-PATTERN_RADIUS..=PATTERN_RADIUS);
            let y = rng.random_range(-PATTERN_RADIUS..=PATTERN_RADIUS);
            if x * x + y * y <= PATTERN_RADIUS * PATTERN_RADIUS {
                return (x, y);
            }
        };
        let mut pairs = [((0, 0), (0, 0)); DESCRIPTOR_BITS];
        for pair in &mut pairs {
            loop {
                let a = sample_point(&mut rng);
                let b = sample_point(&mut rng);
                if a != b {
                    *pair = (a, b);
                    break;
                }
            }
        }
        pairs
    })
}

/// Summed-area table; `box5` reads the 5×5 box mean around a pixel.
pub(crate) struct Integral {
    width: usize,
    sums: Vec<f64>,
}

impl Integral {
    pub(crate) fn build(luma: &ImagePlane) -> Self {
        let (w, h) = (luma.width(), luma.height());
        let mut sums = vec![0.0f64; (w + 1) * (h + 1)];
        for y in 0..h {
            for x in 0..w {
                sums[(y + 1) * (w + 1) + (x + 1)] = luma.get(x, y, 0) as f64
                    + sums[y * (w + 1) + (x + 1)]
                    + sums[(y + 1) * (w + 1) + x]
                    - sums[y * (w + 1) + x];
            }
        }
        Self { width: w, sums }
    }

    fn box5(&self, cx: i64, cy: i64) -> f64 {
        let (x0, y0) = ((cx - 2) as usize, (cy - 2) as usize);
        let (x1, y1) = ((cx + 3) as usize, (cy + 3) as usize);
        let w1 = self.width + 1;
        (self.sums[y1 * w1 + x1] - self.sums[y0 * w1 + x1] - self.sums[y1 * w1 + x0]
            + self.sums[y0 * w1 + x0])
            / 25.0
    }
}

/// Descriptor for one keypoint; caller guarantees the margin.
pub(crate) fn describe(integral: &Integral, kp: &Keypoint) -> Descriptor {
    let (cos_t, sin_t) = (kp.orientation.cos(), kp.orientation.sin());
    let (kx, ky) = (kp.x.round() as i64, kp.y.round() as i64);
    let mut bits = [0u8; 32];
    for (i, &((ax, ay), (bx, by))) in pattern().iter().enumerate() {
        let rotate = |(px, py): (i32, i32)| {
            let rx = (cos_t * px as f64 - sin_t * py as f64).round() as i64;
            let ry = (sin_t * px as f64 + cos_t * py as f64).round() as i64;
            (rx, ry)
        };
        let (ax, ay) = rotate((ax, ay));
        let (bx, by) = rotate((bx, by));
        if integral.box5(kx + ax, ky + ay) < integral.box5(kx + bx, ky + by) {
            bits[i / 8] |= 1 << (i % 8);
        }
    }
    Descriptor { bits }
}

/// True when the keypoint sits at least [`PATCH_MARGIN`] pixels from every
/// border, so the rotated smoothed pattern stays in bounds.
pub(crate) fn respects_margin(kp: &Keypoint, width: usize, height: usize) -> bool {
    let (x, y) = (kp.x.round() as i64, kp.y.round() as i64);
    let m = PATCH_MARGIN as i64;
    x >= m && y >= m && x < width as i64 - m && y < height as i64 - m
}
