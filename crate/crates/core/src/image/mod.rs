//! Image primitives: rasters, filters, thresholding, thinning, distance
//! transform and region labelling.

pub mod distance;
pub mod filter;
pub mod label;
pub mod otsu;
pub mod prep;
pub mod raster;
pub mod skeleton;

pub use distance::distance_transform;
pub use filter::{gaussian_blur, unsharp_mask};
pub use label::{label_binary, label_gray, Connectivity};
pub use otsu::otsu_binarize;
pub use prep::{preprocess, to_grayscale, PrepConfig, PrepRecipe};
pub use raster::{BinaryImage, DistanceMap, FloatImage, GrayImage, LabelImage, Polarity, Raster};
pub use skeleton::skeletonize;
