//! Connected components of the skeleton.

use crate::image::{label_binary, BinaryImage, Connectivity};

/// Pixel area of every 8-connected skeleton region, in label order.
pub fn connected_components(skel: &BinaryImage) -> Vec<f64> {
    label_binary(skel, Connectivity::Eight)
        .areas()
        .into_iter()
        .map(|a| a as f64)
        .collect()
}
