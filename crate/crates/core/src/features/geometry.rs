//! Height, width and aspect ratio of ink regions.

use crate::image::{label_gray, Connectivity, GrayImage};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoxGeometry {
    pub heights: Vec<f64>,
    pub widths: Vec<f64>,
    pub aspects: Vec<f64>,
}

/// Tight boxes of the 8-connected ink regions of a white-background image.
///
/// Every box contributes its width and its aspect ratio (width / height);
/// heights are only taken from boxes no wider than `max_width_for_height`,
/// so that they describe single characters rather than whole words.
pub fn box_geometry(img: &GrayImage, ink_threshold: u8, max_width_for_height: usize) -> BoxGeometry {
    let labels = label_gray(img, ink_threshold, Connectivity::Eight);
    let n = labels.count as usize;
    let mut min_x = vec![usize::MAX; n];
    let mut min_y = vec![usize::MAX; n];
    let mut max_x = vec![0usize; n];
    let mut max_y = vec![0usize; n];
    for y in 0..labels.height {
        for x in 0..labels.width {
            let l = labels.get(x, y) as usize;
            if l == 0 {
                continue;
            }
            let i = l - 1;
            min_x[i] = min_x[i].min(x);
            min_y[i] = min_y[i].min(y);
            max_x[i] = max_x[i].max(x);
            max_y[i] = max_y[i].max(y);
        }
    }
    let mut out = BoxGeometry::default();
    for i in 0..n {
        let w = max_x[i] - min_x[i] + 1;
        let h = max_y[i] - min_y[i] + 1;
        out.widths.push(w as f64);
        if w <= max_width_for_height {
            out.heights.push(h as f64);
        }
        out.aspects.push(w as f64 / h as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Polarity;

    fn page_with(rects: &[(usize, usize, usize, usize)], w: usize, h: usize) -> GrayImage {
        let mut g = GrayImage::filled(w, h, 255, Polarity::InkDark);
        for &(x0, y0, rw, rh) in rects {
            for y in y0..y0 + rh {
                for x in x0..x0 + rw {
                    g.set(x, y, 20);
                }
            }
        }
        g
    }

    fn rotate_cw(g: &GrayImage) -> GrayImage {
        let mut t = GrayImage::filled(g.height, g.width, 255, g.polarity);
        for y in 0..g.height {
            for x in 0..g.width {
                t.set(g.height - 1 - y, x, g.get(x, y));
            }
        }
        t
    }

    #[test]
    fn single_blob() {
        let g = box_geometry(&page_with(&[(5, 5, 20, 30)], 60, 50), 128, 100);
        assert_eq!(g.widths, vec![20.0]);
        assert_eq!(g.heights, vec![30.0]);
        assert!((g.aspects[0] - 0.667).abs() < 1e-3);
    }

    #[test]
    fn wide_blob_has_no_height() {
        let g = box_geometry(&page_with(&[(5, 5, 150, 30)], 170, 50), 128, 100);
        assert_eq!(g.widths, vec![150.0]);
        assert!(g.heights.is_empty());
        assert_eq!(g.aspects, vec![5.0]);
    }

    #[test]
    fn two_blobs() {
        let g = box_geometry(&page_with(&[(2, 2, 10, 10), (20, 2, 40, 20)], 70, 30), 128, 100);
        assert_eq!(g.widths, vec![10.0, 40.0]);
        assert_eq!(g.heights, vec![10.0, 20.0]);
        assert_eq!(g.aspects, vec![1.0, 2.0]);
    }

    #[test]
    fn empty_page() {
        assert_eq!(box_geometry(&page_with(&[], 10, 10), 128, 100), BoxGeometry::default());
    }

    #[test]
    fn quarter_turn_swaps_widths_and_heights() {
        let img = page_with(&[(2, 2, 10, 17), (20, 4, 33, 9), (60, 1, 4, 25)], 70, 30);
        let a = box_geometry(&img, 128, 100);
        let b = box_geometry(&rotate_cw(&img), 128, 100);
        let mut aw = a.widths.clone();
        let mut bh = b.heights.clone();
        aw.sort_by(f64::total_cmp);
        bh.sort_by(f64::total_cmp);
        assert_eq!(aw, bh);
    }
}
