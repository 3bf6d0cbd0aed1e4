//! Fixed-width rows from raw feature samples.
//!
//! Each feature's samples are outlier-filtered to `mean ± 2 std`, padded with
//! normal draws up to a multiple of ten, and cut into blocks of ten. Row `r`
//! of a box concatenates block `r` of every feature in order.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureId, FeatureSamples, SourceKind};

/// Values per feature block.
pub const BLOCK: usize = 10;
/// Fewest filtered samples a feature may have before its box is rejected.
pub const MIN_SAMPLES: usize = 5;
const MAX_RESAMPLE: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct Filtered {
    pub kept: Vec<f64>,
    /// Mean of the unfiltered values.
    pub mean: f64,
    /// Population standard deviation of the unfiltered values.
    pub std: f64,
}

/// Keeps the values inside the inclusive band `mean ± 2 std`, in order.
pub fn filter_outliers(values: &[f64]) -> Filtered {
    if values.is_empty() {
        return Filtered {
            kept: Vec::new(),
            mean: 0.0,
            std: 0.0,
        };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let (lo, hi) = (mean - 2.0 * std, mean + 2.0 * std);
    Filtered {
        kept: values.iter().copied().filter(|v| (lo..=hi).contains(v)).collect(),
        mean,
        std,
    }
}

/// Padding arithmetic for one feature of one box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowBuildPlan {
    /// Accepted sample count after filtering.
    pub accepted: usize,
    /// `accepted / 10`.
    pub quotient: usize,
    /// `accepted - 10 * quotient`.
    pub remainder: usize,
    /// Synthetic values needed to reach a multiple of ten.
    pub padding: usize,
    /// `(accepted + padding) / 10`.
    pub rows: usize,
}

impl RowBuildPlan {
    pub fn new(accepted: usize) -> Option<Self> {
        if accepted < MIN_SAMPLES {
            return None;
        }
        let quotient = accepted / BLOCK;
        let remainder = accepted - quotient * BLOCK;
        let padding = (BLOCK - remainder) % BLOCK;
        Some(Self {
            accepted,
            quotient,
            remainder,
            padding,
            rows: (accepted + padding) / BLOCK,
        })
    }
}

/// Appends normal draws clamped to `mean ± 2 std` until the length is a
/// multiple of ten.
pub fn pad_samples<R: Rng + ?Sized>(
    feature: FeatureId,
    kept: &[f64],
    mean: f64,
    std: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let plan = RowBuildPlan::new(kept.len()).ok_or(Error::TooFewValues {
        feature: feature.name(),
        count: kept.len(),
    })?;
    let mut out = Vec::with_capacity(kept.len() + plan.padding);
    out.extend_from_slice(kept);
    let (lo, hi) = (mean - 2.0 * std, mean + 2.0 * std);
    let normal = (std > 0.0 && std.is_finite()).then(|| Normal::new(mean, std).unwrap());
    for _ in 0..plan.padding {
        let v = match &normal {
            None => mean,
            Some(dist) => {
                let mut draw = dist.sample(rng);
                let mut tries = 1;
                while !(lo..=hi).contains(&draw) && tries < MAX_RESAMPLE {
                    draw = dist.sample(rng);
                    tries += 1;
                }
                draw.clamp(lo, hi)
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// Where a row came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowProvenance {
    pub page: usize,
    pub bbox: usize,
    pub kind: SourceKind,
    pub hand: Option<String>,
    pub row_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub values: Vec<f64>,
    pub provenance: RowProvenance,
}

/// Identity of the box being turned into rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxContext<'a> {
    pub page: usize,
    pub bbox: usize,
    pub kind: SourceKind,
    pub hand: Option<&'a str>,
}

/// Filters and pads every listed feature; the first feature with too few
/// values rejects the box.
fn padded_blocks<R: Rng + ?Sized>(
    samples: &FeatureSamples,
    ids: &[FeatureId],
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    ids.iter()
        .map(|&id| {
            let f = filter_outliers(samples.get(id));
            pad_samples(id, &f.kept, f.mean, f.std, rng)
        })
        .collect()
}

fn emit_rows(blocks: &[Vec<f64>], count: usize, ctx: &BoxContext<'_>) -> Vec<FeatureRow> {
    (0..count)
        .map(|r| FeatureRow {
            values: blocks
                .iter()
                .flat_map(|b| b[r * BLOCK..(r + 1) * BLOCK].iter().copied())
                .collect(),
            provenance: RowProvenance {
                page: ctx.page,
                bbox: ctx.bbox,
                kind: ctx.kind,
                hand: ctx.hand.map(str::to_owned),
                row_index: r,
            },
        })
        .collect()
}

/// All rows a line box can produce: as many as the shortest padded feature
/// allows.
pub fn build_line_rows<R: Rng + ?Sized>(
    samples: &FeatureSamples,
    ids: &[FeatureId],
    ctx: &BoxContext<'_>,
    rng: &mut R,
) -> Result<Vec<FeatureRow>> {
    let blocks = padded_blocks(samples, ids, rng)?;
    let rows = blocks.iter().map(|b| b.len() / BLOCK).min().unwrap_or(0);
    Ok(emit_rows(&blocks, rows, ctx))
}

/// The single row of a word box, from the first ten padded values of each
/// feature.
pub fn build_word_row<R: Rng + ?Sized>(
    samples: &FeatureSamples,
    ids: &[FeatureId],
    ctx: &BoxContext<'_>,
    rng: &mut R,
) -> Result<FeatureRow> {
    let blocks = padded_blocks(samples, ids, rng)?;
    Ok(emit_rows(&blocks, 1, ctx).remove(0))
}

/// Independent generator for one box, derived from the master seed and the
/// box's page and document-order index.
pub fn bbox_rng(seed: u64, page: usize, bbox: usize) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((page as u64) << 32) ^ bbox as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn samples_with(lens: [usize; 10]) -> FeatureSamples {
        let mut s = FeatureSamples::default();
        for (i, n) in lens.iter().enumerate() {
            // gentle ramp: nothing is an outlier
            s.values[i] = (0..*n).map(|k| 100.0 * i as f64 + (k % 7) as f64).collect();
        }
        s
    }

    fn ctx(kind: SourceKind) -> BoxContext<'static> {
        BoxContext {
            page: 3,
            bbox: 7,
            kind,
            hand: Some("A"),
        }
    }

    #[test]
    fn constant_values_are_all_kept() {
        let f = filter_outliers(&[1.0; 5]);
        assert_eq!(f.kept, vec![1.0; 5]);
        assert_eq!((f.mean, f.std), (1.0, 0.0));
    }

    #[test]
    fn boundary_value_is_kept() {
        let f = filter_outliers(&[0.0, 0.0, 0.0, 0.0, 100.0]);
        assert_eq!((f.mean, f.std), (20.0, 40.0));
        assert_eq!(f.kept.len(), 5);
    }

    #[test]
    fn normal_draws_keep_about_95_percent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dist = Normal::new(0.0, 1.0).unwrap();
        let v: Vec<f64> = (0..1000).map(|_| dist.sample(&mut rng)).collect();
        let frac = filter_outliers(&v).kept.len() as f64 / 1000.0;
        assert!((frac - 0.95).abs() <= 0.03, "{frac}");
    }

    #[test]
    fn plan_arithmetic() {
        let p = RowBuildPlan::new(23).unwrap();
        assert_eq!((p.quotient, p.remainder, p.padding, p.rows), (2, 3, 7, 3));
        let p = RowBuildPlan::new(7).unwrap();
        assert_eq!((p.quotient, p.remainder, p.padding, p.rows), (0, 7, 3, 1));
        let p = RowBuildPlan::new(20).unwrap();
        assert_eq!((p.remainder, p.padding, p.rows), (0, 0, 2));
        assert!(RowBuildPlan::new(4).is_none());
    }

    #[test]
    fn padding_stays_in_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let kept: Vec<f64> = (0..23).map(f64::from).collect();
        let out = pad_samples(FeatureId::Height, &kept, 11.0, 6.6, &mut rng).unwrap();
        assert_eq!(out.len(), 30);
        assert_eq!(&out[..23], &kept[..]);
        assert!(out[23..].iter().all(|v| (11.0 - 13.2..=11.0 + 13.2).contains(v)));
        let flat = pad_samples(FeatureId::Height, &[4.0; 6], 4.0, 0.0, &mut rng).unwrap();
        assert_eq!(flat, vec![4.0; 10]);
        assert!(pad_samples(FeatureId::Height, &[1.0; 4], 1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn line_rows_follow_the_shortest_feature() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = samples_with([30, 20, 20, 20, 20, 20, 20, 20, 20, 20]);
        let rows = build_line_rows(&s, &FeatureId::ALL, &ctx(SourceKind::Line), &mut rng).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.values.len() == 100));
        assert_eq!(rows[1].provenance.row_index, 1);
        // block 0 of row 1 is values 10..20 of feature 0
        assert_eq!(&rows[1].values[..10], &s.values[0][10..20]);
        assert_eq!(&rows[0].values[90..100], &s.values[9][..10]);
    }

    #[test]
    fn exactly_ten_gives_one_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = samples_with([10; 10]);
        let rows = build_line_rows(&s, &FeatureId::ALL, &ctx(SourceKind::Line), &mut rng).unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn short_feature_rejects_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut lens = [12; 10];
        lens[4] = 4;
        let s = samples_with(lens);
        let err = build_line_rows(&s, &FeatureId::ALL, &ctx(SourceKind::Line), &mut rng).unwrap_err();
        assert!(matches!(err, Error::TooFewValues { feature: "width", count: 4 }));
        lens[4] = 3;
        assert!(build_word_row(&samples_with(lens), &FeatureId::ALL, &ctx(SourceKind::Word), &mut rng).is_err());
        // a rejected feature outside the selection does not matter
        let six = FeatureId::SELECTED_SIX;
        lens = [12; 10];
        lens[FeatureId::BlobLog.index()] = 0;
        assert!(build_line_rows(&samples_with(lens), &six, &ctx(SourceKind::Line), &mut rng).is_ok());
    }

    #[test]
    fn word_row_mixes_real_and_synthetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lens = [5, 6, 7, 8, 9, 5, 6, 7, 8, 9];
        let s = samples_with(lens);
        let row = build_word_row(&s, &FeatureId::ALL, &ctx(SourceKind::Word), &mut rng).unwrap();
        for (i, &n) in lens.iter().enumerate() {
            let block = &row.values[i * 10..(i + 1) * 10];
            assert_eq!(&block[..n], &s.values[i][..]);
        }
        let big = samples_with([25; 10]);
        let row = build_word_row(&big, &FeatureId::ALL, &ctx(SourceKind::Word), &mut rng).unwrap();
        assert_eq!(&row.values[..10], &big.values[0][..10]);
        assert_eq!(row.provenance.kind, SourceKind::Word);
    }

    #[test]
    fn substreams_are_independent_and_reproducible() {
        let a: u64 = bbox_rng(5, 1, 2).gen();
        let b: u64 = bbox_rng(5, 1, 2).gen();
        let c: u64 = bbox_rng(5, 1, 3).gen();
        let d: u64 = bbox_rng(5, 2, 2).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
