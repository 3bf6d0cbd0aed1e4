//! Otsu global thresholding.

use super::raster::{BinaryImage, GrayImage, Polarity};

/// Threshold index maximising the between-class variance of `hist`, with
/// class 0 holding bins `<= t`. Ties resolve to the smallest `t`.
///
/// Returns `None` when no split puts mass on both sides (a single occupied
/// bin or an empty histogram).
pub fn otsu_threshold(hist: &[u64]) -> Option<usize> {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return None;
    }
    let total_f = total as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();

    let mut w0 = 0u64;
    let mut sum0 = 0.0;
    let mut best: Option<(usize, f64)> = None;
    for (t, &c) in hist.iter().enumerate() {
        w0 += c;
        sum0 += t as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let mu0 = sum0 / w0 as f64;
        let mu1 = (sum_all - sum0) / w1 as f64;
        let var = (w0 as f64 / total_f) * (w1 as f64 / total_f) * (mu0 - mu1) * (mu0 - mu1);
        match best {
            Some((_, b)) if var <= b => {}
            _ => best = Some((t, var)),
        }
    }
    best.map(|(t, _)| t)
}

pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut h = [0u64; 256];
    for &v in &img.pixels {
        h[v as usize] += 1;
    }
    h
}

/// Binarises an ink-bright image: foreground is every pixel above the Otsu
/// threshold. A constant image yields an empty foreground and a warning.
pub fn otsu_binarize(img: &GrayImage) -> BinaryImage {
    debug_assert_eq!(img.polarity, Polarity::InkBright);
    match otsu_threshold(&histogram(img)) {
        Some(t) => BinaryImage::from_bits(
            img.width,
            img.height,
            img.pixels.iter().map(|&v| v as usize > t).collect(),
        ),
        None => {
            log::warn!("otsu: constant {}x{} image, empty foreground", img.width, img.height);
            BinaryImage::new(img.width, img.height)
        }
    }
}
