//! The ten handwriting features extracted from each line or word box.
//!
//! Every extractor returns a flat list of raw sample values; rows are built
//! from those lists later by [`crate::rows`].

pub mod blob;
pub mod components;
pub mod corner;
pub mod geometry;
pub mod region;
pub mod stroke;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{
    distance_transform, otsu_binarize, preprocess, skeletonize, PrepConfig, PrepRecipe, Raster,
};

pub use blob::{blob_dog, blob_log, Blob, BlobConfig};
pub use components::connected_components;
pub use corner::{corner_angles, CornerConfig};
pub use geometry::{box_geometry, BoxGeometry};
pub use region::{convex_areas_orientations, RegionShapes};
pub use stroke::stroke_widths;

/// Feature identifiers in canonical dataset order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureId {
    ConnectedComponent,
    Orientation,
    Height,
    BlobLog,
    Width,
    ConvexArea,
    CornerAngle,
    StrokeWidth,
    AspectRatio,
    BlobDog,
}

impl FeatureId {
    pub const ALL: [FeatureId; 10] = [
        FeatureId::ConnectedComponent,
        FeatureId::Orientation,
        FeatureId::Height,
        FeatureId::BlobLog,
        FeatureId::Width,
        FeatureId::ConvexArea,
        FeatureId::CornerAngle,
        FeatureId::StrokeWidth,
        FeatureId::AspectRatio,
        FeatureId::BlobDog,
    ];

    /// Grapheme-oriented subset, in the order its blocks are concatenated.
    pub const SELECTED_SIX: [FeatureId; 6] = [
        FeatureId::Orientation,
        FeatureId::Height,
        FeatureId::Width,
        FeatureId::CornerAngle,
        FeatureId::AspectRatio,
        FeatureId::BlobDog,
    ];

    /// Zero-based position in [`FeatureId::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// One-based canonical number, used in CSV column names.
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_number(n: usize) -> Option<Self> {
        n.checked_sub(1).and_then(|i| Self::ALL.get(i).copied())
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureId::ConnectedComponent => "connected_component",
            FeatureId::Orientation => "orientation",
            FeatureId::Height => "height",
            FeatureId::BlobLog => "blob_log",
            FeatureId::Width => "width",
            FeatureId::ConvexArea => "convex_area",
            FeatureId::CornerAngle => "corner_angle",
            FeatureId::StrokeWidth => "stroke_width",
            FeatureId::AspectRatio => "aspect_ratio",
            FeatureId::BlobDog => "blob_dog",
        }
    }

    /// Parses a comma separated list of feature names.
    pub fn parse_list(s: &str) -> Result<Vec<FeatureId>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        let alias = match norm.as_str() {
            "bloblog" => "blob_log",
            "blobdog" => "blob_dog",
            "cc" => "connected_component",
            other => other,
        };
        FeatureId::ALL
            .into_iter()
            .find(|f| f.name() == alias)
            .ok_or_else(|| Error::UnknownFeature(s.to_string()))
    }
}

/// Whether samples came from a line box or a word box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Line,
    Word,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::Line => "line",
            SourceKind::Word => "word",
        })
    }
}

/// All extraction parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub prep: PrepConfig,
    pub corner: CornerConfig,
    pub blob: BlobConfig,
    /// Heights are only sampled from boxes at most this wide.
    pub height_max_width: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            prep: PrepConfig::default(),
            corner: CornerConfig::default(),
            blob: BlobConfig::default(),
            height_max_width: 100,
        }
    }
}

/// Raw per-feature sample lists for one box.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureSamples {
    /// Indexed by [`FeatureId::index`].
    pub values: [Vec<f64>; 10],
    pub bbox_id: usize,
    pub kind: Option<SourceKind>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl FeatureSamples {
    pub fn get(&self, id: FeatureId) -> &[f64] {
        &self.values[id.index()]
    }

    fn set(&mut self, id: FeatureId, v: Vec<f64>) {
        self.values[id.index()] = v;
    }

    /// Debug dump of all ten lists keyed by feature name.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("bbox_id".into(), self.bbox_id.into());
        if let Some(k) = self.kind {
            map.insert("kind".into(), k.to_string().into());
        }
        for id in FeatureId::ALL {
            map.insert(id.name().into(), serde_json::json!(self.get(id)));
        }
        serde_json::Value::Object(map)
    }
}

/// Runs every preprocessing recipe and extractor on a box image (scan
/// polarity). A failing extractor leaves its list empty and records a
/// warning; it never aborts the box.
pub fn extract_all(img: &Raster, cfg: &FeatureConfig) -> FeatureSamples {
    let mut out = FeatureSamples::default();
    if img.is_empty() {
        out.warnings.push("empty box image".into());
        return out;
    }
    let prep = |r| preprocess(img, r, &cfg.prep);

    match prep(PrepRecipe::CornerStroke) {
        Ok(g) => {
            out.set(FeatureId::CornerAngle, corner_angles(&g, &cfg.corner));
            let bin = otsu_binarize(&g);
            match distance_transform(&bin) {
                Ok(d) => {
                    let skel = skeletonize(&bin);
                    out.set(FeatureId::StrokeWidth, stroke_widths(&skel, &d));
                }
                Err(e) => out.warnings.push(format!("stroke_width: {e}")),
            }
        }
        Err(e) => out.warnings.push(format!("corner/stroke prep: {e}")),
    }

    match prep(PrepRecipe::GeometryBoxes) {
        Ok(g) => {
            let geo = box_geometry(&g, cfg.prep.gray_ink_threshold, cfg.height_max_width);
            out.set(FeatureId::Height, geo.heights);
            out.set(FeatureId::Width, geo.widths);
            out.set(FeatureId::AspectRatio, geo.aspects);
        }
        Err(e) => out.warnings.push(format!("geometry prep: {e}")),
    }

    match prep(PrepRecipe::ConvexOrient) {
        Ok(g) => {
            let shapes = convex_areas_orientations(&g, cfg.prep.gray_ink_threshold);
            out.set(FeatureId::ConvexArea, shapes.convex_areas);
            out.set(FeatureId::Orientation, shapes.orientations);
        }
        Err(e) => out.warnings.push(format!("convex prep: {e}")),
    }

    match prep(PrepRecipe::BlobsAndCC) {
        Ok(g) => {
            let skel = skeletonize(&otsu_binarize(&g));
            out.set(FeatureId::ConnectedComponent, connected_components(&skel));
            let unit = g.to_unit();
            out.set(
                FeatureId::BlobLog,
                blob_log(&unit, &cfg.blob).iter().map(Blob::diameter).collect(),
            );
            out.set(
                FeatureId::BlobDog,
                blob_dog(&unit, &cfg.blob).iter().map(Blob::diameter).collect(),
            );
        }
        Err(e) => out.warnings.push(format!("blob prep: {e}")),
    }

    for w in &out.warnings {
        log::warn!("{w}");
    }
    out
}
