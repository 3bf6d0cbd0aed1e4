//! Per-feature preprocessing recipes.

use serde::{Deserialize, Serialize};

use super::filter::unsharp_mask;
use super::raster::{GrayImage, Polarity, Raster};
use crate::error::{Error, Result};

/// Knobs shared by all preprocessing recipes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    /// Standard deviation of the unsharp-mask blur, in pixels.
    pub unsharp_radius: f64,
    pub unsharp_amount: f64,
    /// Gray pixels at or below this value are ink on a white page when
    /// labelling non-binarised images.
    pub gray_ink_threshold: u8,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self {
            unsharp_radius: 2.0,
            unsharp_amount: 1.0,
            gray_ink_threshold: 128,
        }
    }
}

/// Preprocessing chain applied before a group of extractors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrepRecipe {
    /// unsharp mask, grayscale, invert: corner angle and stroke width.
    CornerStroke,
    /// grayscale on white: height, width, aspect ratio.
    GeometryBoxes,
    /// unsharp mask, grayscale on white: convex area and orientation.
    ConvexOrient,
    /// grayscale, invert: connected components and both blob detectors.
    BlobsAndCC,
}

impl PrepRecipe {
    pub fn polarity(self) -> Polarity {
        match self {
            PrepRecipe::CornerStroke | PrepRecipe::BlobsAndCC => Polarity::InkBright,
            PrepRecipe::GeometryBoxes | PrepRecipe::ConvexOrient => Polarity::InkDark,
        }
    }

    fn sharpen(self) -> bool {
        matches!(self, PrepRecipe::CornerStroke | PrepRecipe::ConvexOrient)
    }
}

/// Rec. 709 luminance, rounded. Gray rasters pass through unchanged.
pub fn to_grayscale(img: &Raster) -> GrayImage {
    let pixels = match img.channels {
        1 => img.data.clone(),
        3 => img
            .data
            .chunks_exact(3)
            .map(|p| {
                let l = 0.2126 * f64::from(p[0]) + 0.7152 * f64::from(p[1]) + 0.0722 * f64::from(p[2]);
                l.round().clamp(0.0, 255.0) as u8
            })
            .collect(),
        n => panic!("unsupported channel count {n}"),
    };
    GrayImage::new(img.width, img.height, pixels, Polarity::InkDark)
}

/// Runs `recipe` on a scan-polarity raster (dark ink on a light page).
pub fn preprocess(img: &Raster, recipe: PrepRecipe, cfg: &PrepConfig) -> Result<GrayImage> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    let gray = if recipe.sharpen() {
        to_grayscale(&unsharp_mask(img, cfg.unsharp_radius, cfg.unsharp_amount))
    } else {
        to_grayscale(img)
    };
    Ok(match recipe.polarity() {
        Polarity::InkDark => gray,
        Polarity::InkBright => gray.inverted(),
    })
}
