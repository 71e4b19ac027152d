//! FAST-9 corner detection with non-maximum suppression and
//! intensity-centroid orientation.

use std::collections::HashMap;

use super::{Keypoint, MatchConfig, PATCH_MARGIN};
use crate::image::ImagePlane;

/// Bresenham circle of radius 3: 16 offsets, clockwise from 12 o'clock.
pub(crate) const CIRCLE: [(i64, i64); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

const ARC_LENGTH: usize = 9;
const CENTROID_RADIUS: i64 = 15;

/// FAST-9 corner test: is there a contiguous circular arc of at least 9
/// pixels all brighter than `p + t` or all darker than `p − t`?
pub(crate) fn is_fast_corner(luma: &ImagePlane, x: usize, y: usize, threshold: f64) -> bool {
    let p = luma.get(x, y, 0) as f64;
    let mut brighter = [false; 16];
    let mut darker = [false; 16];
    for (i, &(dx, dy)) in CIRCLE.iter().enumerate() {
        let v = luma.get((x as i64 + dx) as usize, (y as i64 + dy) as usize, 0) as f64;
        brighter[i] = v > p + threshold;
        darker[i] = v < p - threshold;
    }
    longest_circular_run(&brighter) >= ARC_LENGTH || longest_circular_run(&darker) >= ARC_LENGTH
}

fn longest_circular_run(flags: &[bool; 16]) -> usize {
    let mut best = 0usize;
    let mut run = 0usize;
    for i in 0..32 {
        if flags[i % 16] {
            run += 1;
            best = best.max(run.min(16));
        } else {
            run = 0;
        }
    }
    best
}

/// Corner strength: total circle excess beyond the threshold.
pub(crate) fn corner_response(luma: &ImagePlane, x: usize, y: usize, threshold: f64) -> f64 {
    let p = luma.get(x, y, 0) as f64;
    CIRCLE
        .iter()
        .map(|&(dx, dy)| {
            let v = luma.get((x as i64 + dx) as usize, (y as i64 + dy) as usize, 0) as f64;
            ((v - p).abs() - threshold).max(0.0)
        })
        .sum()
}

/// Patch orientation from the intensity centroid over a radius-15 disc:
/// `atan2(m01, m10)`.
pub(crate) fn centroid_orientation(luma: &ImagePlane, x: usize, y: usize) -> f64 {
    let mut m10 = 0.0f64;
    let mut m01 = 0.0f64;
    for dy in -CENTROID_RADIUS..=CENTROID_RADIUS {
        for dx in -CENTROID_RADIUS..=CENTROID_RADIUS {
            if dx * dx + dy * dy > CENTROID_RADIUS * CENTROID_RADIUS {
                continue;
            }
            let v = luma.get((x as i64 + dx) as usize, (y as i64 + dy) as usize, 0) as f64;
            m10 += dx as f64 * v;
            m01 += dy as f64 * v;
        }
    }
    m01.atan2(m10)
}

#[derive(Clone, Copy)]
struct Candidate {
    x: usize,
    y: usize,
    response: f64,
}

/// Detects FAST-9 corners inside the descriptor margin, suppresses
/// non-maxima within a Chebyshev radius (strongest first, ties broken by
/// lower y then x), keeps the strongest `max_keypoints`, and assigns
/// centroid orientations. Output is ordered strongest-first.
pub(crate) fn detect(luma: &ImagePlane, cfg: &MatchConfig) -> Vec<Keypoint> {
    let (w, h) = (luma.width(), luma.height());
    let mut candidates = Vec::new();
    for y in PATCH_MARGIN..h - PATCH_MARGIN {
        for x in PATCH_MARGIN..w - PATCH_MARGIN {
            if is_fast_corner(luma, x, y, cfg.fast_threshold) {
                candidates.push(Candidate {
                    x,
                    y,
                    response: corner_response(luma, x, y, cfg.fast_threshold),
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.response
            .total_cmp(&a.response)
            .then(a.y.cmp(&b.y))
            .then(a.x.cmp(&b.x))
    });

    let radius = cfg.nms_radius;
    let cell = radius.max(1);
    let mut grid: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    let mut accepted = Vec::new();
    for cand in candidates {
        let key = (cand.x / cell, cand.y / cell);
        let mut suppressed = false;
        'scan: for gx in key.0.saturating_sub(1)..=key.0 + 1 {
            for gy in key.1.saturating_sub(1)..=key.1 + 1 {
                if let Some(members) = grid.get(&(gx, gy)) {
                    for &(ax, ay) in members {
                        if ax.abs_diff(cand.x) <= radius && ay.abs_diff(cand.y) <= radius {
                            suppressed = true;
                            break 'scan;
                        }
                    }
                }
            }
        }
        if !suppressed {
            grid.entry(key).or_default().push((cand.x, cand.y));
            accepted.push(cand);
            if accepted.len() == cfg.max_keypoints {
                break;
            }
        }
    }

    accepted
        .into_iter()
        .map(|c| Keypoint {
            x: c.x as f64,
            y: c.y as f64,
            response: c.response,
            orientation: centroid_orientation(luma, c.x, c.y),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_run_wraps() {
        let mut flags = [false; 16];
        for i in [14, 15, 0, 1, 2, 3, 4, 5, 6] {
            flags[i] = true;
        }
        assert_eq!(longest_circular_run(&flags), 9);
        assert_eq!(longest_circular_run(&[true; 16]), 16);
        assert_eq!(longest_circular_run(&[false; 16]), 0);
    }
}
