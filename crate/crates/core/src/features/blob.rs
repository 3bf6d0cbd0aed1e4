//! Scale-space blob detection with Laplacian-of-Gaussian and
//! Difference-of-Gaussian responses.
//!
//! Both detectors build a stack of scale-normalised responses, take the
//! 3x3x3 local maxima above the threshold, refine each maximum's scale with
//! a parabola through its neighbouring scales (in `ln sigma`), and then drop
//! the smaller of any two blobs that overlap too much.

use serde::{Deserialize, Serialize};

use crate::image::{gaussian_blur, FloatImage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlobConfig {
    pub min_sigma: f64,
    pub max_sigma: f64,
    /// Number of LoG scales, geometrically spaced.
    pub num_sigma: usize,
    /// Absolute threshold on the scale-normalised response.
    pub threshold: f64,
    /// Maximum allowed overlap fraction between two kept blobs.
    pub overlap: f64,
    /// Ratio between successive Gaussian scales for DoG.
    pub dog_ratio: f64,
}

impl Default for BlobConfig {
    fn default() -> Self {
        Self {
            min_sigma: 1.0,
            max_sigma: 30.0,
            num_sigma: 10,
            threshold: 0.1,
            overlap: 0.5,
            dog_ratio: 1.6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Blob {
    pub x: usize,
    pub y: usize,
    pub sigma: f64,
    pub response: f64,
}

impl Blob {
    /// Diameter of the circle of radius `sigma * sqrt(2)`.
    pub fn diameter(&self) -> f64 {
        2.0 * std::f64::consts::SQRT_2 * self.sigma
    }

    fn radius(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.sigma
    }
}

/// Stack of response layers, one per scale.
struct ScaleStack {
    width: usize,
    height: usize,
    sigmas: Vec<f64>,
    layers: Vec<Vec<f64>>,
}

/// `sigma^2`-normalised negative Laplacian (5-point stencil, nearest edges).
fn neg_laplacian(img: &FloatImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width, img.height);
    let s2 = sigma * sigma;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let up = y.saturating_sub(1);
        let down = (y + 1).min(h - 1);
        for x in 0..w {
            let left = x.saturating_sub(1);
            let right = (x + 1).min(w - 1);
            let c = img.get(x, y);
            let lap = img.get(left, y) + img.get(right, y) + img.get(x, up) + img.get(x, down) - 4.0 * c;
            out[y * w + x] = -s2 * lap;
        }
    }
    out
}

fn geometric_sigmas(min: f64, max: f64, num: usize) -> Vec<f64> {
    match num {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (a, b) = (min.ln(), max.ln());
            (0..num)
                .map(|i| (a + (b - a) * i as f64 / (num - 1) as f64).exp())
                .collect()
        }
    }
}

fn log_stack(img: &FloatImage, cfg: &BlobConfig) -> ScaleStack {
    let sigmas = geometric_sigmas(cfg.min_sigma, cfg.max_sigma, cfg.num_sigma);
    let layers = sigmas
        .iter()
        .map(|&s| neg_laplacian(&gaussian_blur(img, s), s))
        .collect();
    ScaleStack {
        width: img.width,
        height: img.height,
        sigmas,
        layers,
    }
}

fn dog_stack(img: &FloatImage, cfg: &BlobConfig) -> ScaleStack {
    let k = cfg.dog_ratio;
    let n = ((cfg.max_sigma / cfg.min_sigma).ln() / k.ln() + 1.0).floor().max(1.0) as usize;
    let blur_sigmas: Vec<f64> = (0..=n).map(|i| cfg.min_sigma * k.powi(i as i32)).collect();
    let blurred: Vec<FloatImage> = blur_sigmas.iter().map(|&s| gaussian_blur(img, s)).collect();
    // (G(s) - G(k s)) / (k - 1) approximates -s^2 lap G at the scale midway
    // between s and k s on the log axis
    let sf = 1.0 / (k - 1.0);
    let layers = blurred
        .windows(2)
        .map(|pair| {
            pair[0]
                .data
                .iter()
                .zip(&pair[1].data)
                .map(|(a, b)| (a - b) * sf)
                .collect()
        })
        .collect();
    let sigmas = blur_sigmas[..n].iter().map(|s| s * k.sqrt()).collect();
    ScaleStack {
        width: img.width,
        height: img.height,
        sigmas,
        layers,
    }
}

fn local_maxima(stack: &ScaleStack, threshold: f64) -> Vec<Blob> {
    let (w, h) = (stack.width, stack.height);
    let ns = stack.layers.len();
    let mut out = Vec::new();
    for s in 0..ns {
        let layer = &stack.layers[s];
        for y in 0..h {
            for x in 0..w {
                let v = layer[y * w + x];
                if v <= threshold {
                    continue;
                }
                let mut is_max = true;
                'nb: for ds in s.saturating_sub(1)..=(s + 1).min(ns - 1) {
                    let l = &stack.layers[ds];
                    for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                        for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                            if l[ny * w + nx] > v {
                                is_max = false;
                                break 'nb;
                            }
                        }
                    }
                }
                if is_max {
                    out.push(Blob {
                        x,
                        y,
                        sigma: refine_sigma(stack, s, y * w + x),
                        response: v,
                    });
                }
            }
        }
    }
    out
}

/// Vertex of the parabola through the responses at scales `s-1, s, s+1`,
/// on the `ln sigma` axis. Edge scales are returned unrefined.
fn refine_sigma(stack: &ScaleStack, s: usize, idx: usize) -> f64 {
    let sig = &stack.sigmas;
    if s == 0 || s + 1 >= sig.len() {
        return sig[s];
    }
    let (a, b, c) = (stack.layers[s - 1][idx], stack.layers[s][idx], stack.layers[s + 1][idx]);
    let (t0, t1, t2) = (sig[s - 1].ln(), sig[s].ln(), sig[s + 1].ln());
    let denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
    let p = (t2 * (b - a) + t1 * (a - c) + t0 * (c - b)) / denom;
    if p >= 0.0 {
        return sig[s];
    }
    let q = (t2 * t2 * (a - b) + t1 * t1 * (c - a) + t0 * t0 * (b - c)) / denom;
    let t = (-q / (2.0 * p)).clamp(t0, t2);
    t.exp()
}

/// Intersection area of two circles over the area of the smaller one.
fn overlap_fraction(a: &Blob, b: &Blob) -> f64 {
    let (r1, r2) = (a.radius(), b.radius());
    let dx = a.x as f64 - b.x as f64;
    let dy = a.y as f64 - b.y as f64;
    let d = (dx * dx + dy * dy).sqrt();
    let small = r1.min(r2);
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        return 1.0;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let tri = 0.5 * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0).sqrt();
    let area = r1 * r1 * a1 + r2 * r2 * a2 - tri;
    area / (std::f64::consts::PI * small * small)
}

/// Removes the smaller-scale blob of every pair overlapping more than
/// `max_overlap`. Equal scales drop the weaker response.
fn prune(mut blobs: Vec<Blob>, max_overlap: f64) -> Vec<Blob> {
    blobs.sort_by(|a, b| {
        b.sigma
            .total_cmp(&a.sigma)
            .then(b.response.total_cmp(&a.response))
            .then((a.y, a.x).cmp(&(b.y, b.x)))
    });
    let mut kept: Vec<Blob> = Vec::new();
    for b in blobs {
        if kept.iter().all(|k| overlap_fraction(k, &b) <= max_overlap) {
            kept.push(b);
        }
    }
    kept.sort_by(|a, b| (a.y, a.x).cmp(&(b.y, b.x)).then(a.sigma.total_cmp(&b.sigma)));
    kept
}

fn detect(stack: ScaleStack, cfg: &BlobConfig) -> Vec<Blob> {
    if stack.width == 0 || stack.height == 0 || stack.layers.is_empty() {
        return Vec::new();
    }
    prune(local_maxima(&stack, cfg.threshold), cfg.overlap)
}

/// Laplacian-of-Gaussian blobs of a bright-on-dark image in `[0, 1]`.
pub fn blob_log(img: &FloatImage, cfg: &BlobConfig) -> Vec<Blob> {
    if img.data.is_empty() {
        return Vec::new();
    }
    detect(log_stack(img, cfg), cfg)
}

/// Difference-of-Gaussian blobs of a bright-on-dark image in `[0, 1]`.
pub fn blob_dog(img: &FloatImage, cfg: &BlobConfig) -> Vec<Blob> {
    if img.data.is_empty() {
        return Vec::new();
    }
    detect(dog_stack(img, cfg), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(size: usize, cx: usize, cy: usize, r: f64) -> FloatImage {
        let mut img = FloatImage::zeros(size, size);
        for y in 0..size {
            for x in 0..size {
                let (dx, dy) = (x as f64 - cx as f64, y as f64 - cy as f64);
                if dx * dx + dy * dy <= r * r {
                    img.data[y * size + x] = 1.0;
                }
            }
        }
        img
    }

    /// Brute-force scale sweep of the normalised LoG at one pixel.
    fn best_sigma_dense(img: &FloatImage, x: usize, y: usize) -> f64 {
        let mut best = (0.0, f64::MIN);
        let mut s = 1.0;
        while s <= 30.0 {
            let v = neg_laplacian(&gaussian_blur(img, s), s)[y * img.width + x];
            if v > best.1 {
                best = (s, v);
            }
            s *= 1.01;
        }
        best.0
    }

    #[test]
    fn blank_image_has_no_blobs() {
        let img = FloatImage::zeros(40, 30);
        let cfg = BlobConfig::default();
        assert!(blob_log(&img, &cfg).is_empty());
        assert!(blob_dog(&img, &cfg).is_empty());
    }

    #[test]
    fn disks_give_one_blob_near_true_diameter() {
        let cfg = BlobConfig::default();
        for r in [5.0, 10.0, 15.0] {
            let size = (8.0 * r) as usize;
            let c = size / 2;
            let img = disk(size, c, c, r);
            for (name, blobs) in [("log", blob_log(&img, &cfg)), ("dog", blob_dog(&img, &cfg))] {
                assert_eq!(blobs.len(), 1, "{name} r={r}: {blobs:?}");
                let b = blobs[0];
                assert!(b.x.abs_diff(c) <= 1 && b.y.abs_diff(c) <= 1);
                let rel = (b.diameter() - 2.0 * r).abs() / (2.0 * r);
                assert!(rel <= 0.2, "{name} r={r}: diameter {}", b.diameter());
            }
        }
    }

    #[test]
    fn refined_log_scale_tracks_dense_sweep() {
        let cfg = BlobConfig::default();
        for r in [5.0, 10.0] {
            let size = (8.0 * r) as usize;
            let c = size / 2;
            let img = disk(size, c, c, r);
            let dense = best_sigma_dense(&img, c, c);
            let b = blob_log(&img, &cfg)[0];
            assert!((b.sigma - dense).abs() / dense < 0.05, "r={r}: {} vs {dense}", b.sigma);
        }
    }

    #[test]
    fn log_and_dog_agree() {
        let cfg = BlobConfig::default();
        for r in [5.0, 10.0, 15.0] {
            let size = (8.0 * r) as usize;
            let img = disk(size, size / 2, size / 2, r);
            let l = blob_log(&img, &cfg);
            let d = blob_dog(&img, &cfg);
            assert_eq!(l.len(), d.len());
            let (dl, dd) = (l[0].diameter(), d[0].diameter());
            assert!((dl - dd).abs() / dl <= 0.15, "r={r}: {dl} vs {dd}");
        }
    }

    #[test]
    fn translation_moves_detections() {
        let cfg = BlobConfig::default();
        let a = blob_log(&disk(120, 50, 55, 6.0), &cfg);
        let b = blob_log(&disk(120, 63, 48, 6.0), &cfg);
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!((p.x + 13, p.y), (q.x, q.y + 7));
            assert!((p.sigma - q.sigma).abs() < 1e-9);
        }
    }

    #[test]
    fn overlap_geometry() {
        let a = Blob { x: 0, y: 0, sigma: 5.0, response: 1.0 };
        let far = Blob { x: 100, y: 0, ..a };
        let inner = Blob { sigma: 1.0, ..a };
        assert_eq!(overlap_fraction(&a, &far), 0.0);
        assert_eq!(overlap_fraction(&a, &inner), 1.0);
        let half = Blob { x: 7, ..a };
        let f = overlap_fraction(&a, &half);
        assert!(f > 0.0 && f < 1.0);
        // two kept blobs far apart, nested one removed
        let kept = prune(vec![a, far, inner], 0.5);
        assert_eq!(kept.len(), 2);
        assert!(kept.iter().all(|b| b.sigma == 5.0));
    }
}
