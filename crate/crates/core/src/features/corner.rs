//! FAST corners and intensity-centroid corner orientation.
//!
//! Angles are in degrees in `(-180, 180]`, measured with `x` to the right and
//! `y` downward: a corner whose bright mass lies toward `+x, +y` has
//! orientation 45.

use serde::{Deserialize, Serialize};

use crate::image::{FloatImage, GrayImage, Polarity};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CornerConfig {
    /// Intensity margin on the `[0, 1]` scale for the FAST segment test.
    pub fast_threshold: f64,
    /// Minimum contiguous arc length on the 16-pixel circle.
    pub fast_arc: usize,
    /// Peaks must be maxima within this Chebyshev radius.
    pub min_distance: usize,
    /// Outer radius of the octagonal moment mask.
    pub mask_radius: usize,
}

impl Default for CornerConfig {
    fn default() -> Self {
        Self {
            fast_threshold: 0.05,
            fast_arc: 9,
            min_distance: 1,
            mask_radius: 7,
        }
    }
}

/// Bresenham circle of radius 3, clockwise from north.
const CIRCLE: [(isize, isize); 16] = [
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

fn longest_run(flags: &[bool; 16]) -> usize {
    let mut best = 0;
    let mut run = 0;
    // walk twice around to catch arcs that wrap
    for i in 0..32 {
        if flags[i % 16] {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best.min(16)
}

/// FAST segment-test response: the summed excess contrast of the brighter
/// or darker circle pixels, or 0 when the pixel is not a corner.
pub fn fast_response(img: &FloatImage, threshold: f64, arc: usize) -> FloatImage {
    let (w, h) = (img.width, img.height);
    let mut out = FloatImage::zeros(w, h);
    if w < 7 || h < 7 {
        return out;
    }
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let p = img.get(x, y);
            let mut brighter = [false; 16];
            let mut darker = [false; 16];
            let mut bright_sum = 0.0;
            let mut dark_sum = 0.0;
            for (i, &(dx, dy)) in CIRCLE.iter().enumerate() {
                let v = img.get((x as isize + dx) as usize, (y as isize + dy) as usize);
                if v > p + threshold {
                    brighter[i] = true;
                    bright_sum += v - p - threshold;
                } else if v < p - threshold {
                    darker[i] = true;
                    dark_sum += p - v - threshold;
                }
            }
            let mut score = 0.0;
            if longest_run(&brighter) >= arc {
                score = bright_sum;
            }
            if longest_run(&darker) >= arc {
                score = f64::max(score, dark_sum);
            }
            out.data[y * w + x] = score;
        }
    }
    out
}

/// Positive local maxima of `resp` within a `(2 * min_distance + 1)` square
/// window, in raster order. Plateau pixels are all kept.
pub fn corner_peaks(resp: &FloatImage, min_distance: usize) -> Vec<(usize, usize)> {
    let (w, h) = (resp.width, resp.height);
    let r = min_distance as isize;
    let mut peaks = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = resp.get(x, y);
            if v <= 0.0 {
                continue;
            }
            let mut is_max = true;
            'win: for dy in -r..=r {
                for dx in -r..=r {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    if resp.get(nx as usize, ny as usize) > v {
                        is_max = false;
                        break 'win;
                    }
                }
            }
            if is_max {
                peaks.push((x, y));
            }
        }
    }
    peaks
}

/// Octagon inscribed in a `(2 * radius + 1)` square whose corners are cut by
/// `ceil(2 * radius / 3)` pixels; radius 7 gives the 15x15 octagon with
/// 5-pixel edges.
pub fn octagon_mask(radius: usize) -> Vec<Vec<bool>> {
    let side = 2 * radius + 1;
    let cut = (2 * radius).div_ceil(3);
    (0..side)
        .map(|r| {
            (0..side)
                .map(|c| r.min(side - 1 - r) + c.min(side - 1 - c) >= cut)
                .collect()
        })
        .collect()
}

/// Orientation of each corner: `atan2(m01, m10)` of the first-order moments
/// of intensity about the corner over the octagonal mask, in degrees.
/// Pixels outside the image count as zero.
pub fn corner_orientations(img: &FloatImage, corners: &[(usize, usize)], radius: usize) -> Vec<f64> {
    let mask = octagon_mask(radius);
    let r = radius as isize;
    corners
        .iter()
        .map(|&(cx, cy)| {
            let mut m10 = 0.0;
            let mut m01 = 0.0;
            for (mr, row) in mask.iter().enumerate() {
                let dy = mr as isize - r;
                let y = cy as isize + dy;
                if y < 0 || y >= img.height as isize {
                    continue;
                }
                for (mc, &inside) in row.iter().enumerate() {
                    let dx = mc as isize - r;
                    let x = cx as isize + dx;
                    if !inside || x < 0 || x >= img.width as isize {
                        continue;
                    }
                    let v = img.get(x as usize, y as usize);
                    m10 += v * dx as f64;
                    m01 += v * dy as f64;
                }
            }
            let deg = m01.atan2(m10).to_degrees();
            // atan2 may return -180 for a negative-zero numerator
            if deg <= -180.0 {
                deg + 360.0
            } else {
                deg
            }
        })
        .collect()
}

/// Corner angles of an ink-bright image.
pub fn corner_angles(img: &GrayImage, cfg: &CornerConfig) -> Vec<f64> {
    debug_assert_eq!(img.polarity, Polarity::InkBright);
    let unit = img.to_unit();
    let resp = fast_response(&unit, cfg.fast_threshold, cfg.fast_arc);
    let peaks = corner_peaks(&resp, cfg.min_distance);
    corner_orientations(&unit, &peaks, cfg.mask_radius)
}
