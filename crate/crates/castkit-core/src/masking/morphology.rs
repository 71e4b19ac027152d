//! Binary morphology with a square (Chebyshev) structuring element of
//! size (2r+1)². Pixels outside the frame count as background, so
//! erosion shrinks regions touching the border.

use super::Mask;

fn pass<F: Fn(bool, bool) -> bool>(
    src: &Mask,
    radius: usize,
    horizontal: bool,
    identity: bool,
    fold: F,
) -> Mask {
    let (w, h) = (src.width(), src.height());
    let r = radius as i64;
    let mut out = Mask::zero(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = identity;
            for d in -r..=r {
                let (sx, sy) = if horizontal {
                    (x as i64 + d, y as i64)
                } else {
                    (x as i64, y as i64 + d)
                };
                let v = if sx >= 0 && sy >= 0 && (sx as usize) < w && (sy as usize) < h {
                    src.is_marked(sx as usize, sy as usize)
                } else {
                    false
                };
                acc = fold(acc, v);
            }
            out.set(x, y, acc);
        }
    }
    out
}

pub fn dilate(mask: &Mask, radius: usize) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let horiz = pass(mask, radius, true, false, |a, b| a || b);
    pass(&horiz, radius, false, false, |a, b| a || b)
}

pub fn erode(mask: &Mask, radius: usize) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let horiz = pass(mask, radius, true, true, |a, b| a && b);
    pass(&horiz, radius, false, true, |a, b| a && b)
}

/// Erosion then dilation: removes specks smaller than the element.
pub fn open(mask: &Mask, radius: usize) -> Mask {
    dilate(&erode(mask, radius), radius)
}

/// Dilation then erosion: fills holes smaller than the element.
pub fn close(mask: &Mask, radius: usize) -> Mask {
    erode(&dilate(mask, radius), radius)
}
