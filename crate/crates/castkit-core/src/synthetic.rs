//! Seeded synthetic images, cameras, and ray-cast scenes.
//!
//! Everything here is deterministic given the seed, which makes these
//! generators usable both as test fixtures and as reproducible demo
//! datasets. The ray-cast helpers double as independent ground truth for
//! the projection pipeline: they rasterize geometry by ray-object
//! intersection instead of point projection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{CameraParams, PointMap};
use crate::image::ImagePlane;
use crate::masking::Mask;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform noise in `[0, 1)`, sample order fixed by row-major traversal.
pub fn uniform_noise_image(width: usize, height: usize, channels: usize, seed: u64) -> ImagePlane {
    let mut rng = seeded_rng(seed);
    let data: Vec<f32> = (0..width * height * channels)
        .map(|_| rng.random::<f32>())
        .collect();
    ImagePlane::new(width, height, channels, data).expect("noise image is valid")
}

/// Adds clamped gaussian noise with the given standard deviation.
pub fn add_gaussian_noise(img: &ImagePlane, sigma: f64, seed: u64) -> ImagePlane {
    let mut rng = seeded_rng(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
    let data: Vec<f32> = img
        .samples()
        .iter()
        .map(|&v| (v as f64 + normal.sample(&mut rng)).clamp(0.0, 1.0) as f32)
        .collect();
    ImagePlane::new(img.width(), img.height(), img.channels(), data).expect("noisy image is valid")
}

/// Separable gaussian blur with border replication. Kernel radius is
/// `ceil(3 sigma)`.
pub fn gaussian_blur(img: &ImagePlane, sigma: f64) -> ImagePlane {
    if sigma <= 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for d in -radius..=radius {
        kernel.push((-(d as f64) * (d as f64) / (2.0 * sigma * sigma)).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }

    let (w, h, c) = (img.width(), img.height(), img.channels());
    let clamp = |v: i64, hi: usize| v.clamp(0, hi as i64 - 1) as usize;
    let mut horiz = vec![0.0f64; w * h * c];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (i, &k) in kernel.iter().enumerate() {
                    let sx = clamp(x as i64 + i as i64 - radius, w);
                    acc += k * img.get(sx, y, ch) as f64;
                }
                horiz[(y * w + x) * c + ch] = acc;
            }
        }
    }
    ImagePlane::from_fn(w, h, c, |x, y, ch| {
        let mut acc = 0.0;
        for (i, &k) in kernel.iter().enumerate() {
            let sy = clamp(y as i64 + i as i64 - radius, h);
            acc += k * horiz[(sy * w + x) * c + ch];
        }
        acc as f32
    })
}

/// Shifts image content by an integer offset, replicating edge pixels into
/// the uncovered band.
pub fn translate(img: &ImagePlane, dx: i64, dy: i64) -> ImagePlane {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    ImagePlane::from_fn(w, h, c, |x, y, ch| {
        let sx = (x as i64 - dx).clamp(0, w as i64 - 1) as usize;
        let sy = (y as i64 - dy).clamp(0, h as i64 - 1) as usize;
        img.get(sx, sy, ch)
    })
}

/// Copies `img` and paints an axis-aligned block with a constant value.
pub fn block_edit(
    img: &ImagePlane,
    x0: usize,
    y0: usize,
    block_w: usize,
    block_h: usize,
    value: f32,
) -> ImagePlane {
    ImagePlane::from_fn(img.width(), img.height(), img.channels(), |x, y, c| {
        if x >= x0 && x < x0 + block_w && y >= y0 && y < y0 + block_h {
            value
        } else {
            img.get(x, y, c)
        }
    })
}

/// White square on black, the classic corner-detector fixture.
pub fn white_square(width: usize, height: usize, x0: usize, y0: usize, size: usize) -> ImagePlane {
    ImagePlane::from_fn(width, height, 1, |x, y, _| {
        if x >= x0 && x < x0 + size && y >= y0 && y < y0 + size {
            1.0
        } else {
            0.0
        }
    })
}

pub fn checkerboard(width: usize, height: usize, cell: usize) -> ImagePlane {
    ImagePlane::from_fn(width, height, 1, |x, y, _| {
        if ((x / cell) + (y / cell)) % 2 == 0 {
            0.0
        } else {
            1.0
        }
    })
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Pinhole camera at `eye` looking at `target`. Convention: +z forward,
/// image x right, image y down; `up` fixes the roll.
pub fn look_at_camera(
    eye: [f64; 3],
    target: [f64; 3],
    up: [f64; 3],
    fx: f64,
    fy: f64,
    width: usize,
    height: usize,
) -> CameraParams {
    let forward = normalize(sub(target, eye));
    let right = normalize(cross(forward, up));
    let down = cross(forward, right);
    let rotation = [
        right[0], right[1], right[2], down[0], down[1], down[2], forward[0], forward[1],
        forward[2],
    ];
    let translation = [
        -(right[0] * eye[0] + right[1] * eye[1] + right[2] * eye[2]),
        -(down[0] * eye[0] + down[1] * eye[1] + down[2] * eye[2]),
        -(forward[0] * eye[0] + forward[1] * eye[1] + forward[2] * eye[2]),
    ];
    CameraParams {
        fx,
        fy,
        cx: width as f64 / 2.0,
        cy: height as f64 / 2.0,
        rotation,
        translation,
        width,
        height,
    }
}

/// `n` cameras on a circular arc around the origin: azimuth sweeps
/// `azimuth_span_deg` starting at `azimuth_start_deg`, at a fixed
/// elevation, all looking at the origin with +z world up.
pub fn orbit_cameras(
    n: usize,
    radius: f64,
    elevation_deg: f64,
    azimuth_start_deg: f64,
    azimuth_span_deg: f64,
    fx: f64,
    width: usize,
    height: usize,
) -> Vec<CameraParams> {
    let el = elevation_deg.to_radians();
    (0..n)
        .map(|i| {
            let frac = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let az = (azimuth_start_deg + frac * azimuth_span_deg).to_radians();
            let eye = [
                radius * el.cos() * az.cos(),
                radius * el.cos() * az.sin(),
                radius * el.sin(),
            ];
            look_at_camera(eye, [0.0; 3], [0.0, 0.0, 1.0], fx, fx, width, height)
        })
        .collect()
}

/// Axis-aligned cube floating in front of a large background sphere, the
/// stock scene for mask-propagation fixtures.
#[derive(Debug, Clone, Copy)]
pub struct CubeScene {
    pub cube_center: [f64; 3],
    pub cube_half: f64,
    pub background_radius: f64,
}

impl Default for CubeScene {
    fn default() -> Self {
        Self {
            cube_center: [0.0; 3],
            cube_half: 0.5,
            background_radius: 50.0,
        }
    }
}

impl CubeScene {
    fn ray_cube(&self, origin: [f64; 3], dir: [f64; 3]) -> Option<f64> {
        let mut t_min = f64::NEG_INFINITY;
        let mut t_max = f64::INFINITY;
        for axis in 0..3 {
            let lo = self.cube_center[axis] - self.cube_half;
            let hi = self.cube_center[axis] + self.cube_half;
            if dir[axis].abs() < 1e-12 {
                if origin[axis] < lo || origin[axis] > hi {
                    return None;
                }
                continue;
            }
            let t0 = (lo - origin[axis]) / dir[axis];
            let t1 = (hi - origin[axis]) / dir[axis];
            let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            t_min = t_min.max(t0);
            t_max = t_max.min(t1);
            if t_min > t_max {
                return None;
            }
        }
        if t_max < 1e-9 {
            return None;
        }
        Some(if t_min > 1e-9 { t_min } else { t_max })
    }

    fn ray_background(&self, origin: [f64; 3], dir: [f64; 3]) -> f64 {
        // Camera sits inside the sphere, so the positive root always exists.
        let b = origin[0] * dir[0] + origin[1] * dir[1] + origin[2] * dir[2];
        let c = origin[0] * origin[0] + origin[1] * origin[1] + origin[2] * origin[2]
            - self.background_radius * self.background_radius;
        -b + (b * b - c).sqrt()
    }

    fn pixel_hit(&self, cam: &CameraParams, x: usize, y: usize) -> (bool, [f64; 3]) {
        let origin = cam.center();
        let dir_cam = [
            (x as f64 - cam.cx) / cam.fx,
            (y as f64 - cam.cy) / cam.fy,
            1.0,
        ];
        let dir = cam.rotate_to_world(dir_cam);
        let t_bg = self.ray_background(origin, dir);
        match self.ray_cube(origin, dir) {
            Some(t) if t < t_bg => (
                true,
                [
                    origin[0] + t * dir[0],
                    origin[1] + t * dir[1],
                    origin[2] + t * dir[2],
                ],
            ),
            _ => (
                false,
                [
                    origin[0] + t_bg * dir[0],
                    origin[1] + t_bg * dir[1],
                    origin[2] + t_bg * dir[2],
                ],
            ),
        }
    }

    /// Dense pixel-aligned point map for one view: the first ray hit per
    /// pixel (cube or background sphere). All pixels are valid.
    pub fn raycast_pointmap(&self, cam: &CameraParams) -> PointMap {
        let mut points = Vec::with_capacity(cam.width * cam.height);
        for y in 0..cam.height {
            for x in 0..cam.width {
                let (_, p) = self.pixel_hit(cam, x, y);
                points.push([p[0] as f32, p[1] as f32, p[2] as f32]);
            }
        }
        PointMap::from_points(cam.width, cam.height, points).expect("raycast map is valid")
    }

    /// Analytically rasterized cube pixels for one view, by per-pixel ray
    /// intersection. Independent ground truth for projection-based masks.
    pub fn cube_pixels(&self, cam: &CameraParams) -> Vec<(usize, usize)> {
        let mut pixels = Vec::new();
        for y in 0..cam.height {
            for x in 0..cam.width {
                if self.pixel_hit(cam, x, y).0 {
                    pixels.push((x, y));
                }
            }
        }
        pixels
    }

    /// Cube silhouette as a mask (255 where a cube ray hit).
    pub fn cube_mask(&self, cam: &CameraParams) -> Mask {
        let mut mask = Mask::zero(cam.width, cam.height);
        for (x, y) in self.cube_pixels(cam) {
            mask.set(x, y, true);
        }
        mask
    }
}
