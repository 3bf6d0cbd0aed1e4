//! Stroke width from the skeleton and the distance map.

use crate::image::{BinaryImage, DistanceMap};

/// Twice the distance-to-background at every skeleton pixel, in raster order.
///
/// For a bar of odd thickness `t` the centre line sits `(t + 1) / 2` pixels
/// from the nearest background pixel, so the reported width is `t + 1`.
pub fn stroke_widths(skel: &BinaryImage, dmap: &DistanceMap) -> Vec<f64> {
    debug_assert_eq!((skel.width, skel.height), (dmap.width, dmap.height));
    skel.bits
        .iter()
        .zip(&dmap.values)
        .filter(|(&s, _)| s)
        .map(|(_, &d)| 2.0 * d)
        .collect()
}
