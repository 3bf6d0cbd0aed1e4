//! Zhang-Suen thinning.
//!
//! Candidates are marked with the classic two-subiteration Zhang-Suen tests on
//! a snapshot of the image. The marked pixels are then removed one at a time
//! in raster order, and a removal is skipped if the pixel is no longer an
//! 8-simple point with at least two neighbours in the partially thinned
//! image. Plain parallel Zhang-Suen erases 2x2 blocks and some two-pixel-wide
//! diagonals completely; the guard keeps every 8-connected component alive.

use super::raster::BinaryImage;

/// Neighbour values in Zhang-Suen order: N, NE, E, SE, S, SW, W, NW.
#[inline]
fn ring(img: &BinaryImage, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as isize, y as isize);
    [
        img.get_signed(x, y - 1),
        img.get_signed(x + 1, y - 1),
        img.get_signed(x + 1, y),
        img.get_signed(x + 1, y + 1),
        img.get_signed(x, y + 1),
        img.get_signed(x - 1, y + 1),
        img.get_signed(x - 1, y),
        img.get_signed(x - 1, y - 1),
    ]
}

#[inline]
fn transitions(p: &[bool; 8]) -> usize {
    (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count()
}

/// Yokoi connectivity number for 8-connected foreground; 1 means the pixel
/// can be removed without changing topology.
#[inline]
fn yokoi8(p: &[bool; 8]) -> i32 {
    // Yokoi indexes from E counter-clockwise: E, NE, N, NW, W, SW, S, SE
    let x = [p[2], p[1], p[0], p[7], p[6], p[5], p[4], p[3]];
    let c = |i: usize| i32::from(!x[i % 8]);
    [0usize, 2, 4, 6]
        .iter()
        .map(|&k| c(k) - c(k) * c(k + 1) * c(k + 2))
        .sum()
}

fn candidate(p: &[bool; 8], first: bool) -> bool {
    let b = p.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) || transitions(p) != 1 {
        return false;
    }
    let [n, _, e, _, s, _, w, _] = *p;
    if first {
        !(n && e && s) && !(e && s && w)
    } else {
        !(n && e && w) && !(n && s && w)
    }
}

fn subiteration(img: &mut BinaryImage, first: bool) -> bool {
    let mut marked = Vec::new();
    for y in 0..img.height {
        for x in 0..img.width {
            if img.get(x, y) && candidate(&ring(img, x, y), first) {
                marked.push((x, y));
            }
        }
    }
    let mut changed = false;
    for (x, y) in marked {
        let p = ring(img, x, y);
        if p.iter().filter(|&&v| v).count() >= 2 && yokoi8(&p) == 1 {
            img.set(x, y, false);
            changed = true;
        }
    }
    changed
}

/// Thins the foreground to a one-pixel-wide skeleton, iterating to
/// convergence. The result is a subset of the input and has the same number
/// of 8-connected components.
pub fn skeletonize(bin: &BinaryImage) -> BinaryImage {
    let mut img = bin.clone();
    loop {
        let a = subiteration(&mut img, true);
        let b = subiteration(&mut img, false);
        if !a && !b {
            return img;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::label::{label_binary, Connectivity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn from_rows(rows: &[&str]) -> BinaryImage {
        let w = rows[0].len();
        let bits = rows.iter().flat_map(|r| r.chars().map(|c| c == '#')).collect();
        BinaryImage::from_bits(w, rows.len(), bits)
    }

    fn bar(len: usize, thickness: usize) -> BinaryImage {
        let (w, h) = (len + 4, thickness + 4);
        let mut b = BinaryImage::new(w, h);
        for y in 2..2 + thickness {
            for x in 2..2 + len {
                b.set(x, y, true);
            }
        }
        b
    }

    fn has_2x2(b: &BinaryImage) -> bool {
        (1..b.height).any(|y| {
            (1..b.width).any(|x| b.get(x, y) && b.get(x - 1, y) && b.get(x, y - 1) && b.get(x - 1, y - 1))
        })
    }

    fn components(b: &BinaryImage) -> u32 {
        label_binary(b, Connectivity::Eight).count
    }

    #[test]
    fn empty_stays_empty() {
        let b = BinaryImage::new(6, 4);
        assert_eq!(skeletonize(&b), b);
    }

    #[test]
    fn thick_bar_becomes_centre_line() {
        let b = bar(30, 5);
        let s = skeletonize(&b);
        assert_eq!(components(&s), 1);
        assert!(!has_2x2(&s));
        // the centre row survives across the interior of the bar
        let centre = 2 + 2;
        for x in 6..28 {
            assert!(s.get(x, centre), "gap at x={x}");
            assert!(!s.get(x, centre - 1) && !s.get(x, centre + 1));
        }
    }

    #[test]
    fn plus_sign_keeps_four_arms() {
        let mut b = BinaryImage::new(31, 31);
        for i in 3..28 {
            for t in 13..18 {
                b.set(i, t, true);
                b.set(t, i, true);
            }
        }
        let s = skeletonize(&b);
        assert_eq!(components(&s), 1);
        // each arm still reaches near its end
        assert!((3..8).any(|x| s.get(x, 15)));
        assert!((23..28).any(|x| s.get(x, 15)));
        assert!((3..8).any(|y| s.get(15, y)));
        assert!((23..28).any(|y| s.get(15, y)));
        assert!(!has_2x2(&s));
    }

    #[test]
    fn small_blocks_survive() {
        let b = from_rows(&["....", ".##.", ".##.", "...."]);
        let s = skeletonize(&b);
        assert_eq!(components(&s), 1);
        let d = from_rows(&["......", ".##...", "..##..", "...##.", "......"]);
        assert_eq!(components(&skeletonize(&d)), 1);
    }

    #[test]
    fn random_masks_keep_topology() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let (w, h) = (rng.gen_range(3..30), rng.gen_range(3..30));
            let p = rng.gen_range(0.2..0.8);
            let b = BinaryImage::from_bits(w, h, (0..w * h).map(|_| rng.gen_bool(p)).collect());
            let s = skeletonize(&b);
            assert!(s.bits.iter().zip(&b.bits).all(|(&sk, &orig)| !sk || orig));
            assert_eq!(components(&s), components(&b));
            assert_eq!(skeletonize(&s), s, "not idempotent");
        }
    }
}
