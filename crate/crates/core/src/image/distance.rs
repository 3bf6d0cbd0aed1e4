//! Exact Euclidean distance transform (Felzenszwalb & Huttenlocher).

use super::raster::{BinaryImage, DistanceMap};
use crate::error::{Error, Result};

/// Lower envelope of parabolas: squared distance along one line.
fn edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let intersect = |p: usize| {
            ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64)
        };
        // z[0] is -inf, so this stops at k = 0 at the latest
        let mut s = intersect(v[k]);
        while s <= z[k] {
            k -= 1;
            s = intersect(v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate().take(n) {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dq = q as f64 - v[k] as f64;
        *out = dq * dq + f[v[k]];
    }
}

/// Distance from every pixel to the nearest background (`false`) pixel.
/// Background pixels map to exactly 0.
pub fn distance_transform(bin: &BinaryImage) -> Result<DistanceMap> {
    let (w, h) = (bin.width, bin.height);
    if !bin.bits.iter().any(|&b| !b) {
        return Err(Error::NoBackground);
    }
    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    // Larger than any squared distance inside the image, and still exact.
    let far = ((w * w + h * h) as f64 + 1.0) * 2.0;
    let mut grid: Vec<f64> = bin
        .bits
        .iter()
        .map(|&b| if b { far } else { 0.0 })
        .collect();

    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        edt_1d(&f[..h], &mut d[..h], &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = d[y];
        }
    }
    for y in 0..h {
        f[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        edt_1d(&f[..w], &mut d[..w], &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&d[..w]);
    }
    Ok(DistanceMap {
        width: w,
        height: h,
        values: grid.into_iter().map(f64::sqrt).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(bin: &BinaryImage) -> Vec<f64> {
        let zeros: Vec<(i64, i64)> = (0..bin.height)
            .flat_map(|y| (0..bin.width).map(move |x| (x, y)))
            .filter(|&(x, y)| !bin.get(x, y))
            .map(|(x, y)| (x as i64, y as i64))
            .collect();
        let mut out = Vec::with_capacity(bin.bits.len());
        for y in 0..bin.height as i64 {
            for x in 0..bin.width as i64 {
                let best = zeros
                    .iter()
                    .map(|&(zx, zy)| (zx - x).pow(2) + (zy - y).pow(2))
                    .min()
                    .unwrap();
                out.push((best as f64).sqrt());
            }
        }
        out
    }

    #[test]
    fn single_pixel_and_diagonal() {
        let mut b = BinaryImage::new(3, 3);
        b.set(1, 1, true);
        let d = distance_transform(&b).unwrap();
        assert_eq!(d.get(1, 1), 1.0);
        assert_eq!(d.get(0, 0), 0.0);

        // only the top-left corner is background
        let mut b = BinaryImage::from_bits(2, 2, vec![true; 4]);
        b.set(0, 0, false);
        let d = distance_transform(&b).unwrap();
        assert_eq!(d.get(1, 1), 2f64.sqrt());
    }

    #[test]
    fn all_foreground_is_an_error() {
        let b = BinaryImage::from_bits(4, 4, vec![true; 16]);
        assert!(matches!(distance_transform(&b), Err(Error::NoBackground)));
    }

    #[test]
    fn random_masks_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (w, h) = (rng.gen_range(1..20), rng.gen_range(1..20));
            let p = rng.gen_range(0.3..0.97);
            let mut bits: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(p)).collect();
            bits[rng.gen_range(0..w * h)] = false;
            let b = BinaryImage::from_bits(w, h, bits);
            assert_eq!(distance_transform(&b).unwrap().values, brute(&b));
        }
    }

    #[test]
    fn squared_distances_are_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bits: Vec<bool> = (0..400).map(|_| rng.gen_bool(0.9)).collect();
        let d = distance_transform(&BinaryImage::from_bits(20, 20, bits)).unwrap();
        for v in d.values {
            let sq = v * v;
            assert!((sq - sq.round()).abs() < 1e-9);
        }
    }
}
