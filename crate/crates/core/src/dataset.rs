//! Row datasets: assembly from pages, feature selection, and CSV storage
//! with a JSON metadata sidecar.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{extract_all, FeatureConfig, FeatureId, SourceKind};
use crate::hocr::{extract_bbox_image, BBox, PageRecord};
use crate::rows::{bbox_rng, build_line_rows, build_word_row, BoxContext, FeatureRow, RowProvenance, BLOCK};
use crate::scalar::Scalar;

/// Everything that determines the rows extracted from a set of pages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractConfig {
    pub features: FeatureConfig,
    /// Fraction of each page dimension removed from every side.
    pub margin_fraction: f64,
    /// Features whose blocks make up each row, in order.
    pub selected: Vec<FeatureId>,
    pub seed: u64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            margin_fraction: 0.05,
            selected: FeatureId::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl ExtractConfig {
    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}

/// Per-page extraction counts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PageSummary {
    pub page: usize,
    pub hand: Option<String>,
    pub lines: usize,
    pub words: usize,
    pub rows: usize,
    pub rejected_boxes: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    pub fingerprint: String,
    /// Extraction parameters, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ExtractConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pages: Vec<PageSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Feature of each 10-column block.
    pub features: Vec<FeatureId>,
    pub rows: Vec<FeatureRow>,
    pub meta: DatasetMeta,
}

struct BoxJob {
    page: usize,
    bbox_id: usize,
    kind: SourceKind,
    bbox: BBox,
}

/// Extracts rows from every line and word box of the pages: for each line,
/// its rows followed by one row per word, in document order. Boxes are
/// processed in parallel; each draws from its own seeded substream, so the
/// result does not depend on scheduling.
pub fn assemble_dataset(pages: &[PageRecord], cfg: &ExtractConfig) -> Result<Dataset> {
    if cfg.selected.is_empty() {
        return Err(Error::Dataset("no features selected".into()));
    }
    let cropped: Vec<PageRecord> = pages
        .par_iter()
        .map(|p| p.crop_margins(cfg.margin_fraction))
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    let mut summaries = Vec::new();
    for (slot, page) in cropped.iter().enumerate() {
        let mut id = 0;
        for line in &page.lines {
            jobs.push(BoxJob { page: slot, bbox_id: id, kind: SourceKind::Line, bbox: line.bbox });
            id += 1;
            for w in &line.words {
                jobs.push(BoxJob { page: slot, bbox_id: id, kind: SourceKind::Word, bbox: *w });
                id += 1;
            }
        }
        summaries.push(PageSummary {
            page: page.page_index,
            hand: page.hand_tag.clone(),
            lines: page.lines.len(),
            words: page.lines.iter().map(|l| l.words.len()).sum(),
            ..PageSummary::default()
        });
    }

    let results: Vec<Result<Vec<FeatureRow>>> = jobs
        .par_iter()
        .map(|job| {
            let page = &cropped[job.page];
            let crop = extract_bbox_image(page, &job.bbox)?;
            if let Some(w) = &crop.warning {
                log::warn!("page {} box {}: {w}", page.page_index, job.bbox_id);
            }
            let mut samples = extract_all(&crop.image, &cfg.features);
            samples.bbox_id = job.bbox_id;
            samples.kind = Some(job.kind);
            let ctx = BoxContext {
                page: page.page_index,
                bbox: job.bbox_id,
                kind: job.kind,
                hand: page.hand_tag.as_deref(),
            };
            let mut rng = bbox_rng(cfg.seed, page.page_index, job.bbox_id);
            match job.kind {
                SourceKind::Line => build_line_rows(&samples, &cfg.selected, &ctx, &mut rng),
                SourceKind::Word => build_word_row(&samples, &cfg.selected, &ctx, &mut rng).map(|r| vec![r]),
            }
        })
        .collect();

    let mut rows = Vec::new();
    for (job, res) in jobs.iter().zip(results) {
        match res {
            Ok(r) => {
                summaries[job.page].rows += r.len();
                rows.extend(r);
            }
            Err(e) => {
                summaries[job.page].rejected_boxes += 1;
                log::debug!("page {} box {} rejected: {e}", cropped[job.page].page_index, job.bbox_id);
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::NoRows);
    }
    Ok(Dataset {
        features: cfg.selected.clone(),
        rows,
        meta: DatasetMeta {
            seed: cfg.seed,
            fingerprint: cfg.fingerprint(),
            config: Some(cfg.clone()),
            pages: summaries,
        },
    })
}

impl Dataset {
    pub fn width(&self) -> usize {
        self.features.len() * BLOCK
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row values as a dense matrix.
    pub fn to_matrix<T: Scalar>(&self) -> Array2<T> {
        let w = self.width();
        Array2::from_shape_fn((self.rows.len(), w), |(i, j)| T::lit(self.rows[i].values[j]))
    }

    /// Hand tags in order of first appearance.
    pub fn hands(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if let Some(h) = &r.provenance.hand {
                if !out.contains(h) {
                    out.push(h.clone());
                }
            }
        }
        out
    }

    /// Per-row hand tags, with untagged rows as `"?"`.
    pub fn hand_tags(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| r.provenance.hand.clone().unwrap_or_else(|| "?".into()))
            .collect()
    }

    /// Rows with the given hand tag.
    pub fn filter_hand(&self, hand: &str) -> Dataset {
        Dataset {
            features: self.features.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| r.provenance.hand.as_deref() == Some(hand))
                .cloned()
                .collect(),
            meta: self.meta.clone(),
        }
    }

    /// Vertical concatenation of datasets with identical feature blocks.
    pub fn concat(parts: &[Dataset]) -> Result<Dataset> {
        let first = parts.first().ok_or(Error::NoRows)?;
        if let Some(bad) = parts.iter().find(|d| d.features != first.features) {
            return Err(Error::Dataset(format!(
                "feature blocks differ: {:?} vs {:?}",
                first.features, bad.features
            )));
        }
        let mut meta = first.meta.clone();
        if parts.iter().any(|d| d.meta.fingerprint != meta.fingerprint) {
            let joined: Vec<&str> = parts.iter().map(|d| d.meta.fingerprint.as_str()).collect();
            meta.fingerprint = format!("{:x}", Sha256::digest(joined.join("+").as_bytes()));
        }
        meta.pages = parts.iter().flat_map(|d| d.meta.pages.clone()).collect();
        Ok(Dataset {
            features: first.features.clone(),
            rows: parts.iter().flat_map(|d| d.rows.clone()).collect(),
            meta,
        })
    }

    /// CSV header: value columns `f<number>_<j>` then provenance.
    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = self
            .features
            .iter()
            .flat_map(|f| (0..BLOCK).map(move |j| format!("f{}_{j}", f.number())))
            .collect();
        h.extend(["page", "bbox", "kind", "hand", "row_index"].map(String::from));
        h
    }

    /// Path of the metadata sidecar for a CSV path.
    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("meta.json")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.header())?;
        for row in &self.rows {
            let p = &row.provenance;
            let mut rec: Vec<String> = row.values.iter().map(|v| v.to_string()).collect();
            rec.push(p.page.to_string());
            rec.push(p.bbox.to_string());
            rec.push(p.kind.to_string());
            rec.push(p.hand.clone().unwrap_or_default());
            rec.push(p.row_index.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        let meta = serde_json::to_string_pretty(&SidecarOut {
            features: &self.features,
            rows: self.rows.len(),
            meta: &self.meta,
        })?;
        std::fs::write(Self::sidecar_path(path), meta + "\n")?;
        Ok(())
    }

    /// Reads a CSV written by [`Dataset::write_csv`]; the sidecar is used
    /// when present.
    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let mut r = csv::Reader::from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
        let features = parse_header(&header)?;
        let width = features.len() * BLOCK;
        let mut rows = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Dataset(format!("{}: row {}: bad {what}", path.display(), line + 1));
            if rec.len() != width + 5 {
                return Err(bad("field count"));
            }
            let values = (0..width)
                .map(|j| rec[j].parse::<f64>().map_err(|_| bad("value")))
                .collect::<Result<Vec<_>>>()?;
            let kind = match &rec[width + 2] {
                "line" => SourceKind::Line,
                "word" => SourceKind::Word,
                _ => return Err(bad("kind")),
            };
            let hand = &rec[width + 3];
            rows.push(FeatureRow {
                values,
                provenance: RowProvenance {
                    page: rec[width].parse().map_err(|_| bad("page"))?,
                    bbox: rec[width + 1].parse().map_err(|_| bad("bbox"))?,
                    kind,
                    hand: (!hand.is_empty()).then(|| hand.to_string()),
                    row_index: rec[width + 4].parse().map_err(|_| bad("row_index"))?,
                },
            });
        }
        let sidecar = Self::sidecar_path(path);
        let meta = if sidecar.exists() {
            let s: SidecarIn = serde_json::from_str(&std::fs::read_to_string(sidecar)?)?;
            if s.features != features {
                return Err(Error::Dataset("sidecar features disagree with CSV header".into()));
            }
            s.meta
        } else {
            DatasetMeta::default()
        };
        Ok(Dataset { features, rows, meta })
    }

    /// Rows per page, in page order.
    pub fn rows_per_page(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for r in &self.rows {
            *m.entry(r.provenance.page).or_insert(0) += 1;
        }
        m
    }
}

#[derive(Serialize)]
struct SidecarOut<'a> {
    features: &'a [FeatureId],
    rows: usize,
    #[serde(flatten)]
    meta: &'a DatasetMeta,
}

#[derive(Deserialize)]
struct SidecarIn {
    features: Vec<FeatureId>,
    #[serde(flatten)]
    meta: DatasetMeta,
}

fn parse_header(header: &[String]) -> Result<Vec<FeatureId>> {
    let bad = || Error::Dataset(format!("unrecognised CSV header: {}", header.join(",")));
    let value_cols = header.len().checked_sub(5).ok_or_else(bad)?;
    if value_cols == 0 || value_cols % BLOCK != 0 {
        return Err(bad());
    }
    let mut features = Vec::new();
    for (b, chunk) in header[..value_cols].chunks(BLOCK).enumerate() {
        let num: usize = chunk[0]
            .strip_prefix('f')
            .and_then(|s| s.strip_suffix("_0"))
            .and_then(|s| s.parse().ok())
            .ok_or_else(bad)?;
        let id = FeatureId::from_number(num).ok_or_else(bad)?;
        for (j, col) in chunk.iter().enumerate() {
            if *col != format!("f{num}_{j}") {
                return Err(bad());
            }
        }
        if features.contains(&id) {
            return Err(Error::Dataset(format!("feature block {b} repeats {id}")));
        }
        features.push(id);
    }
    if header[value_cols..] != ["page", "bbox", "kind", "hand", "row_index"] {
        return Err(bad());
    }
    Ok(features)
}

/// Keeps the blocks of `ids`, in that order.
pub fn select_features(ds: &Dataset, ids: &[FeatureId]) -> Result<Dataset> {
    if ids.is_empty() {
        return Err(Error::Dataset("empty feature selection".into()));
    }
    let pos = ids
        .iter()
        .map(|id| {
            ds.features
                .iter()
                .position(|f| f == id)
                .ok_or_else(|| Error::UnknownFeature(format!("{id} not in dataset")))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = ds
        .rows
        .iter()
        .map(|r| FeatureRow {
            values: pos
                .iter()
                .flat_map(|&b| r.values[b * BLOCK..(b + 1) * BLOCK].iter().copied())
                .collect(),
            provenance: r.provenance.clone(),
        })
        .collect();
    Ok(Dataset {
        features: ids.to_vec(),
        rows,
        meta: ds.meta.clone(),
    })
}
