//! Connected-component labelling (8-connectivity) on binary masks.

use super::Mask;

/// One labelled region: pixel count and inclusive bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub size: usize,
    pub bbox: (usize, usize, usize, usize),
}

/// Labels marked pixels with 8-connectivity. Returns the per-pixel label
/// map (0 = background, labels start at 1) and per-component stats in
/// label order.
pub fn label_components(mask: &Mask) -> (Vec<u32>, Vec<Component>) {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![0u32; w * h];
    let mut components = Vec::new();
    let mut stack = Vec::new();

    for start_y in 0..h {
        for start_x in 0..w {
            if !mask.is_marked(start_x, start_y) || labels[start_y * w + start_x] != 0 {
                continue;
            }
            let label = components.len() as u32 + 1;
            let (mut min_x, mut max_x, mut min_y, mut max_y) =
                (start_x, start_x, start_y, start_y);
            let mut size = 0usize;
            stack.push((start_x, start_y));
            labels[start_y * w + start_x] = label;
            while let Some((x, y)) = stack.pop() {
                size += 1;
                min_x = min_x.min(x);
                max_x = max_x.max(x);
                min_y = min_y.min(y);
                max_y = max_y.max(y);
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if mask.is_marked(nx, ny) && labels[ny * w + nx] == 0 {
                            labels[ny * w + nx] = label;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            components.push(Component {
                size,
                bbox: (min_x, min_y, max_x, max_y),
            });
        }
    }
    (labels, components)
}

/// Drops components whose pixel count is strictly below `min_size`.
pub fn remove_small_components(mask: &Mask, min_size: usize) -> Mask {
    let (labels, components) = label_components(mask);
    let keep: Vec<bool> = components.iter().map(|c| c.size >= min_size).collect();
    let mut out = Mask::zero(mask.width(), mask.height());
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let label = labels[y * mask.width() + x];
            if label > 0 && keep[(label - 1) as usize] {
                out.set(x, y, true);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pixels_are_one_component() {
        let mut m = Mask::zero(4, 4);
        m.set(0, 0, true);
        m.set(1, 1, true);
        m.set(2, 2, true);
        let (_, comps) = label_components(&m);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].size, 3);
        assert_eq!(comps[0].bbox, (0, 0, 2, 2));
    }

    #[test]
    fn separated_blocks_are_two_components() {
        let mut m = Mask::zero(10, 10);
        for y in 0..3 {
            for x in 0..3 {
                m.set(x, y, true);
                m.set(x + 6, y + 6, true);
            }
        }
        let (_, comps) = label_components(&m);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.size == 9));
    }

    #[test]
    fn small_components_are_removed() {
        let mut m = Mask::zero(10, 10);
        m.set(0, 0, true);
        for y in 4..7 {
            for x in 4..7 {
                m.set(x, y, true);
            }
        }
        let cleaned = remove_small_components(&m, 2);
        assert!(!cleaned.is_marked(0, 0));
        assert_eq!(cleaned.marked_count(), 9);
    }
}
