//! Convex area and orientation of labelled ink regions.
//!
//! Orientation follows the row/column convention: axis 0 runs down the rows,
//! axis 1 along the columns. The reported angle is the angle from axis 0 to
//! the major axis of the region's equal-moment ellipse, positive toward
//! `+column`, in `(-90, 90]` degrees. A tall upright bar is 0, a flat
//! horizontal bar is 90, and a `\` diagonal (row and column growing
//! together) is +45.

use crate::image::{label_gray, Connectivity, GrayImage};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegionShapes {
    pub convex_areas: Vec<f64>,
    pub orientations: Vec<f64>,
}

type Pt = (i64, i64);

fn cross(o: Pt, a: Pt, b: Pt) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; counter-clockwise (in `x`, `y` axes) without
/// collinear points. Input must be sorted and deduplicated.
fn convex_hull(pts: &[Pt]) -> Vec<Pt> {
    if pts.len() < 3 {
        return pts.to_vec();
    }
    let mut lower: Vec<Pt> = Vec::new();
    for &p in pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Pt> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Number of lattice points inside or on the convex hull of `pts`.
pub fn convex_pixel_count(pts: &[Pt]) -> usize {
    let mut sorted = pts.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let hull = convex_hull(&sorted);
    let (min_x, max_x) = (sorted.first().unwrap().0, sorted.last().unwrap().0);
    let min_y = sorted.iter().map(|p| p.1).min().unwrap();
    let max_y = sorted.iter().map(|p| p.1).max().unwrap();
    let inside = |p: Pt| -> bool {
        match hull.len() {
            1 => p == hull[0],
            2 => {
                let (a, b) = (hull[0], hull[1]);
                cross(a, b, p) == 0
                    && p.0 >= a.0.min(b.0)
                    && p.0 <= a.0.max(b.0)
                    && p.1 >= a.1.min(b.1)
                    && p.1 <= a.1.max(b.1)
            }
            n => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0),
        }
    };
    let mut count = 0;
    for y in min_y..=max_y {
        for x in min_x..=max_x {
            if inside((x, y)) {
                count += 1;
            }
        }
    }
    count
}

/// Angle of the major axis from the row axis, in degrees in `(-90, 90]`.
/// Regions with isotropic second moments (including single pixels) get 0.
pub fn region_orientation(pts: &[(usize, usize)]) -> f64 {
    let n = pts.len() as f64;
    let (mut sr, mut sc) = (0.0, 0.0);
    for &(x, y) in pts {
        sr += y as f64;
        sc += x as f64;
    }
    let (rbar, cbar) = (sr / n, sc / n);
    let (mut mu20, mut mu02, mut mu11) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let (dr, dc) = (y as f64 - rbar, x as f64 - cbar);
        mu20 += dr * dr;
        mu02 += dc * dc;
        mu11 += dr * dc;
    }
    let scale = mu20 + mu02;
    let eps = 1e-12 * scale.max(1.0);
    if mu11.abs() <= eps {
        mu11 = 0.0;
    }
    if mu11 == 0.0 && (mu20 - mu02).abs() <= eps {
        return 0.0;
    }
    let theta = 0.5 * (2.0 * mu11).atan2(mu20 - mu02).to_degrees();
    if theta <= -90.0 {
        theta + 180.0
    } else {
        theta
    }
}

/// Labels the dark ink (8-connectivity, `v <= ink_threshold`) of a
/// white-background image and measures each region.
pub fn convex_areas_orientations(img: &GrayImage, ink_threshold: u8) -> RegionShapes {
    let labels = label_gray(img, ink_threshold, Connectivity::Eight);
    let mut out = RegionShapes::default();
    for region in labels.regions() {
        let pts: Vec<Pt> = region.iter().map(|&(x, y)| (x as i64, y as i64)).collect();
        out.convex_areas.push(convex_pixel_count(&pts) as f64);
        out.orientations.push(region_orientation(&region));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Polarity;

    fn rect(x0: usize, y0: usize, w: usize, h: usize) -> Vec<(usize, usize)> {
        (y0..y0 + h).flat_map(|y| (x0..x0 + w).map(move |x| (x, y))).collect()
    }

    fn to_pts(v: &[(usize, usize)]) -> Vec<Pt> {
        v.iter().map(|&(x, y)| (x as i64, y as i64)).collect()
    }

    #[test]
    fn rectangle_area_and_axis() {
        // 4 wide, 10 tall: long axis along the rows
        let tall = rect(3, 2, 4, 10);
        assert_eq!(convex_pixel_count(&to_pts(&tall)), 40);
        assert_eq!(region_orientation(&tall), 0.0);
        let wide = rect(3, 2, 10, 4);
        assert_eq!(region_orientation(&wide), 90.0);
    }

    #[test]
    fn diagonal_lines() {
        let down: Vec<_> = (0..10).map(|i| (i, i)).collect();
        assert!((region_orientation(&down) - 45.0).abs() < 1e-9);
        assert_eq!(convex_pixel_count(&to_pts(&down)), 10);
        let up: Vec<_> = (0..10).map(|i| (i, 9 - i)).collect();
        assert!((region_orientation(&up) + 45.0).abs() < 1e-9);
    }

    #[test]
    fn single_pixel() {
        assert_eq!(convex_pixel_count(&[(4, 4)]), 1);
        assert_eq!(region_orientation(&[(4, 4)]), 0.0);
    }

    #[test]
    fn hull_fills_concavities() {
        // L shape: hull adds the triangle under the diagonal
        let mut l = rect(0, 0, 1, 5);
        l.extend(rect(1, 4, 4, 1));
        assert_eq!(convex_pixel_count(&to_pts(&l)), 15);
    }

    #[test]
    fn from_gray_image() {
        let mut g = GrayImage::filled(30, 30, 250, Polarity::InkDark);
        for (x, y) in rect(2, 2, 4, 10).into_iter().chain((0..10).map(|i| (15 + i, 15 + i))) {
            g.set(x, y, 10);
        }
        let s = convex_areas_orientations(&g, 128);
        assert_eq!(s.convex_areas, vec![40.0, 10.0]);
        assert_eq!(s.orientations[0], 0.0);
        assert!((s.orientations[1] - 45.0).abs() < 1e-9);
    }
}
