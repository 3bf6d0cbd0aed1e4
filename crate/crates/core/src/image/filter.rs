//! Separable Gaussian filtering and the unsharp mask.

use super::raster::{FloatImage, Raster};

/// Normalised sampled Gaussian truncated at four standard deviations.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (4.0 * sigma + 0.5) as usize;
    let denom = 2.0 * sigma * sigma;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / denom).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// 1-D correlation with edge-replicating ("nearest") boundaries.
///
/// Kernel taps that fall off either end are folded into the edge sample
/// through prefix sums, so the cost is `O(len * min(taps, len))`.
fn convolve_line(src: &[f64], dst: &mut [f64], kernel: &[f64], prefix: &[f64]) {
    let n = src.len() as isize;
    let r = (kernel.len() / 2) as isize;
    let total = prefix[kernel.len()];
    for i in 0..n {
        let k_lo = (-r).max(-i);
        let k_hi = r.min(n - 1 - i);
        let taps = &kernel[(k_lo + r) as usize..=(k_hi + r) as usize];
        let window = &src[(i + k_lo) as usize..=(i + k_hi) as usize];
        let mut acc: f64 = taps.iter().zip(window).map(|(a, b)| a * b).sum();
        if k_lo > -r {
            // taps t in [0, k_lo + r)
            acc += prefix[(k_lo + r) as usize] * src[0];
        }
        if k_hi < r {
            // taps t in (k_hi + r, 2r]
            acc += (total - prefix[(k_hi + r + 1) as usize]) * src[(n - 1) as usize];
        }
        dst[i as usize] = acc;
    }
}

/// Gaussian blur with standard deviation `sigma` and nearest-edge boundaries.
pub fn gaussian_blur(img: &FloatImage, sigma: f64) -> FloatImage {
    if sigma <= 0.0 || img.data.is_empty() {
        return img.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let mut prefix = Vec::with_capacity(kernel.len() + 1);
    prefix.push(0.0);
    let mut s = 0.0;
    for &v in &kernel {
        s += v;
        prefix.push(s);
    }

    let (w, h) = (img.width, img.height);
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        convolve_line(
            &img.data[y * w..(y + 1) * w],
            &mut tmp[y * w..(y + 1) * w],
            &kernel,
            &prefix,
        );
    }
    let mut out = vec![0.0; w * h];
    let mut col = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = tmp[y * w + x];
        }
        convolve_line(&col, &mut col_out, &kernel, &prefix);
        for y in 0..h {
            out[y * w + x] = col_out[y];
        }
    }
    FloatImage {
        width: w,
        height: h,
        data: out,
    }
}

/// `clamp(g + amount * (g - blur(g, radius)))` on each channel, computed on
/// the `[0, 1]` scale and rounded back to 8 bits.
pub fn unsharp_mask(img: &Raster, radius: f64, amount: f64) -> Raster {
    let (w, h, ch) = (img.width, img.height, img.channels);
    let mut out = img.clone();
    for c in 0..ch {
        let plane = FloatImage {
            width: w,
            height: h,
            data: (0..w * h)
                .map(|i| f64::from(img.data[i * ch + c]) / 255.0)
                .collect(),
        };
        let blurred = gaussian_blur(&plane, radius);
        for i in 0..w * h {
            let g = plane.data[i];
            let v = (g + amount * (g - blurred.data[i])).clamp(0.0, 1.0);
            out.data[i * ch + c] = (v * 255.0).round() as u8;
        }
    }
    out
}
