//! Hand-shift detection: dummy shifts built from 50-row pages, the
//! side-membership comparison with a percentage tolerance, batch statistics,
//! and a sliding scan over one document.

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fuzzy::{cmeans, hand_memberships, CmeansConfig};
use crate::reduce::{scale_and_reduce, ReducerKind};
use crate::scalar::Scalar;

pub const LEFT: &str = "L";
pub const RIGHT: &str = "R";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShiftProtocolConfig {
    /// Rows per page.
    pub page_rows: usize,
    pub pages_per_side: usize,
    /// Sides differ when their cluster-0 percentages differ by more than this.
    pub tolerance_pct: f64,
    pub batch_size: usize,
    pub batches: usize,
    /// Centre counts for the partition-coefficient sweep.
    pub centers: Vec<usize>,
    /// Components kept by the reducer.
    pub k: usize,
    pub cmeans: CmeansConfig,
    /// Seeds evaluated per scan boundary.
    pub scan_seeds: usize,
    /// Votes needed to flag a scan boundary.
    pub scan_votes: usize,
    pub seed: u64,
}

impl Default for ShiftProtocolConfig {
    fn default() -> Self {
        Self {
            page_rows: 50,
            pages_per_side: 2,
            tolerance_pct: 5.0,
            batch_size: 5,
            batches: 5,
            centers: vec![2, 3, 4, 5],
            k: 2,
            cmeans: CmeansConfig::default(),
            scan_seeds: 5,
            scan_votes: 4,
            seed: 0,
        }
    }
}

impl ShiftProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.page_rows > 0
            && self.pages_per_side > 0
            && self.batch_size > 0
            && self.batches > 0
            && self.k > 0
            && self.tolerance_pct > 0.0
            && self.tolerance_pct < 100.0
            && self.scan_votes <= self.scan_seeds;
        if ok {
            Ok(())
        } else {
            Err(Error::ClusterParams(format!("invalid shift protocol settings: {self:?}")))
        }
    }

    fn side_rows(&self) -> usize {
        self.page_rows * self.pages_per_side
    }
}

/// Left rows followed by right rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftDataset {
    pub rows: Array2<f64>,
    /// Row index where the right side starts.
    pub shift_index: usize,
    /// First source row of each left page.
    pub left_pages: Vec<usize>,
    pub right_pages: Vec<usize>,
}

impl ShiftDataset {
    pub fn side_tags(&self) -> Vec<String> {
        (0..self.rows.nrows())
            .map(|i| if i < self.shift_index { LEFT } else { RIGHT }.to_string())
            .collect()
    }
}

/// Start rows of `pages` non-overlapping runs of `len` rows within `n` rows,
/// in increasing order.
pub fn pick_pages<R: Rng + ?Sized>(n: usize, pages: usize, len: usize, rng: &mut R) -> Result<Vec<usize>> {
    let need = pages * len;
    if n < need {
        return Err(Error::InsufficientRows {
            needed: need,
            available: n,
            context: format!("{pages} pages of {len} rows"),
        });
    }
    // spread the unused rows as gaps before, between and after the pages
    let slack = n - need;
    let mut cuts: Vec<usize> = (0..pages).map(|_| rng.gen_range(0..=slack)).collect();
    cuts.sort_unstable();
    Ok(cuts.iter().enumerate().map(|(i, c)| c + i * len).collect())
}

fn page_rows(starts: &[usize], len: usize) -> Vec<usize> {
    starts.iter().flat_map(|&s| s..s + len).collect()
}

/// Random pages from each source, left then right.
pub fn make_dummy_shift<R: Rng + ?Sized>(
    left: &Array2<f64>,
    right: &Array2<f64>,
    cfg: &ShiftProtocolConfig,
    rng: &mut R,
) -> Result<ShiftDataset> {
    if left.ncols() != right.ncols() {
        return Err(Error::Shape(format!("left has {} columns, right {}", left.ncols(), right.ncols())));
    }
    let lp = pick_pages(left.nrows(), cfg.pages_per_side, cfg.page_rows, rng)?;
    let rp = pick_pages(right.nrows(), cfg.pages_per_side, cfg.page_rows, rng)?;
    let li = page_rows(&lp, cfg.page_rows);
    let ri = page_rows(&rp, cfg.page_rows);
    let rows = ndarray::concatenate(Axis(0), &[left.select(Axis(0), &li).view(), right.select(Axis(0), &ri).view()])
        .expect("same width");
    Ok(ShiftDataset {
        rows,
        shift_index: li.len(),
        left_pages: lp,
        right_pages: rp,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftVerdict {
    pub fpc: f64,
    /// Percentage of left rows in canonical cluster 0.
    pub left_pct: f64,
    pub right_pct: f64,
    pub delta: f64,
    pub different: bool,
    pub reducer: Option<ReducerKind>,
    pub seed: u64,
}

/// Two-centre clustering of already reduced rows and the side comparison.
pub fn evaluate_reduced<T: Scalar>(
    scores: &Array2<T>,
    shift_index: usize,
    cfg: &ShiftProtocolConfig,
    seed: u64,
) -> Result<ShiftVerdict> {
    let n = scores.nrows();
    if shift_index == 0 || shift_index >= n {
        return Err(Error::Shape(format!("shift index {shift_index} outside 1..{n}")));
    }
    let model = cmeans(scores, 2, &cfg.cmeans, seed)?.canonicalize();
    let tags: Vec<String> = (0..n)
        .map(|i| if i < shift_index { LEFT } else { RIGHT }.to_string())
        .collect();
    let expected = [LEFT.to_string(), RIGHT.to_string()];
    let (shares, _) = hand_memberships(&model.labels(), &tags, 2, Some(&expected))?;
    let (l, r) = (shares[0].pct[0], shares[1].pct[0]);
    let delta = (l - r).abs();
    Ok(ShiftVerdict {
        fpc: model.fpc.as_f64(),
        left_pct: l,
        right_pct: r,
        delta,
        different: delta > cfg.tolerance_pct,
        reducer: None,
        seed,
    })
}

/// Scale, reduce, cluster and compare the two sides.
pub fn evaluate_shift<T: Scalar>(
    sd: &ShiftDataset,
    reducer: ReducerKind,
    cfg: &ShiftProtocolConfig,
    seed: u64,
) -> Result<ShiftVerdict> {
    let x: Array2<T> = sd.rows.mapv(T::lit);
    let (_, red) = scale_and_reduce(&x, reducer, cfg.k, seed)?;
    let mut v = evaluate_reduced(&red.scores, sd.shift_index, cfg, seed)?;
    v.reducer = Some(reducer);
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub batch: usize,
    pub index: usize,
    pub left_pages: Vec<usize>,
    pub right_pages: Vec<usize>,
    pub verdict: ShiftVerdict,
    /// Partition coefficient for each swept centre count.
    pub fpc_by_centers: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpcStat {
    pub centers: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftExperiment {
    pub reducer: ReducerKind,
    pub seed: u64,
    pub iterations: Vec<IterationRecord>,
    /// Percent of "different" verdicts in each batch.
    pub batch_pct_different: Vec<f64>,
    pub mean_pct_different: f64,
    /// Population standard deviation over batches.
    pub std_pct_different: f64,
    pub fpc_sweep: Vec<FpcStat>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

fn iteration_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `batches x batch_size` dummy shifts between two sources. Each
/// iteration draws from its own stream, so the results do not depend on
/// execution order.
pub fn shift_experiment<T: Scalar>(
    left: &Array2<f64>,
    right: &Array2<f64>,
    reducer: ReducerKind,
    cfg: &ShiftProtocolConfig,
) -> Result<ShiftExperiment> {
    cfg.validate()?;
    let total = cfg.batches * cfg.batch_size;
    let records: Vec<IterationRecord> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rng = iteration_rng(cfg.seed, i as u64);
            let sd = make_dummy_shift(left, right, cfg, &mut rng)?;
            let eval_seed: u64 = rng.gen();
            let x: Array2<T> = sd.rows.mapv(T::lit);
            let (_, red) = scale_and_reduce(&x, reducer, cfg.k, eval_seed)?;
            let mut verdict = evaluate_reduced(&red.scores, sd.shift_index, cfg, eval_seed)?;
            verdict.reducer = Some(reducer);
            let fpc_by_centers = cfg
                .centers
                .iter()
                .map(|&c| Ok((c, cmeans(&red.scores, c, &cfg.cmeans, eval_seed)?.fpc.as_f64())))
                .collect::<Result<Vec<_>>>()?;
            Ok(IterationRecord {
                batch: i / cfg.batch_size,
                index: i,
                left_pages: sd.left_pages,
                right_pages: sd.right_pages,
                verdict,
                fpc_by_centers,
            })
        })
        .collect::<Result<_>>()?;

    let batch_pct: Vec<f64> = records
        .chunks(cfg.batch_size)
        .map(|b| 100.0 * b.iter().filter(|r| r.verdict.different).count() as f64 / cfg.batch_size as f64)
        .collect();
    let (mean, std) = mean_std(&batch_pct);
    let fpc_sweep = cfg
        .centers
        .iter()
        .enumerate()
        .map(|(ci, &c)| {
            let vals: Vec<f64> = records.iter().map(|r| r.fpc_by_centers[ci].1).collect();
            let (m, s) = mean_std(&vals);
            FpcStat { centers: c, mean: m, std: s }
        })
        .collect();
    Ok(ShiftExperiment {
        reducer,
        seed: cfg.seed,
        iterations: records,
        batch_pct_different: batch_pct,
        mean_pct_different: mean,
        std_pct_different: std,
        fpc_sweep,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// First row of the right half of the window.
    pub boundary_row: usize,
    pub flagged: bool,
    pub votes: usize,
    pub deltas: Vec<f64>,
    pub mean_delta: f64,
    pub mean_fpc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTrace {
    pub reducer: ReducerKind,
    pub seed: u64,
    pub page_rows: usize,
    pub points: Vec<ScanPoint>,
}

impl ScanTrace {
    pub fn flagged_rows(&self) -> Vec<usize> {
        self.points.iter().filter(|p| p.flagged).map(|p| p.boundary_row).collect()
    }

    /// Longest run of consecutive flagged boundaries.
    pub fn longest_flag_run(&self) -> usize {
        let mut best = 0;
        let mut run = 0;
        for p in &self.points {
            run = if p.flagged { run + 1 } else { 0 };
            best = best.max(run);
        }
        best
    }
}

/// Slides a window of `pages_per_side` pages on each side along the
/// document, one page at a time, and votes over several seeds at every
/// boundary.
pub fn scan_document<T: Scalar>(
    rows: &Array2<f64>,
    reducer: ReducerKind,
    cfg: &ShiftProtocolConfig,
) -> Result<ScanTrace> {
    cfg.validate()?;
    let pages = rows.nrows() / cfg.page_rows;
    let side = cfg.pages_per_side;
    if pages < 2 * side {
        return Err(Error::InsufficientRows {
            needed: 2 * cfg.side_rows(),
            available: rows.nrows(),
            context: "document scan".into(),
        });
    }
    let boundaries: Vec<usize> = (side..=pages - side).collect();
    let points = boundaries
        .par_iter()
        .map(|&b| {
            let lo = (b - side) * cfg.page_rows;
            let hi = (b + side) * cfg.page_rows;
            let window = rows.slice(ndarray::s![lo..hi, ..]).mapv(T::lit);
            let mut deltas = Vec::with_capacity(cfg.scan_seeds);
            let mut fpcs = Vec::with_capacity(cfg.scan_seeds);
            let mut votes = 0;
            for s in 0..cfg.scan_seeds {
                let seed: u64 = iteration_rng(cfg.seed, ((b as u64) << 16) | s as u64).gen();
                let (_, red) = scale_and_reduce(&window, reducer, cfg.k, seed)?;
                let v = evaluate_reduced(&red.scores, cfg.side_rows(), cfg, seed)?;
                votes += usize::from(v.different);
                deltas.push(v.delta);
                fpcs.push(v.fpc);
            }
            Ok(ScanPoint {
                boundary_row: b * cfg.page_rows,
                flagged: votes >= cfg.scan_votes,
                votes,
                mean_delta: mean_std(&deltas).0,
                mean_fpc: mean_std(&fpcs).0,
                deltas,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTrace {
        reducer,
        seed: cfg.seed,
        page_rows: cfg.page_rows,
        points,
    })
}

/// Rows of a dataset as an `f64` matrix, for the protocol functions.
pub fn dataset_rows(ds: &Dataset) -> Array2<f64> {
    ds.to_matrix::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn cloud(n: usize, centre: f64, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, 1.0).unwrap();
        Array2::from_shape_fn((n, cols), |(_, j)| d.sample(&mut rng) + if j == 0 { centre } else { 0.0 })
    }

    #[test]
    fn page_picks_do_not_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = pick_pages(137, 2, 50, &mut rng).unwrap();
            assert!(p[0] + 50 <= p[1] && p[1] + 50 <= 137);
        }
        assert_eq!(pick_pages(100, 2, 50, &mut rng).unwrap(), vec![0, 50]);
        assert!(matches!(
            pick_pages(99, 2, 50, &mut rng),
            Err(Error::InsufficientRows { needed: 100, available: 99, .. })
        ));
    }

    #[test]
    fn dummy_shift_shape_and_determinism() {
        let a = cloud(500, 0.0, 4, 1);
        let b = cloud(500, 3.0, 4, 2);
        let cfg = ShiftProtocolConfig::default();
        let sd = make_dummy_shift(&a, &b, &cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(sd.rows.dim(), (200, 4));
        assert_eq!(sd.shift_index, 100);
        let again = make_dummy_shift(&a, &b, &cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(sd, again);
        assert_eq!(sd.rows.row(0), a.row(sd.left_pages[0]));
        assert_eq!(sd.rows.row(150), b.row(sd.right_pages[1]));
        // self shift: same source on both sides
        let own = make_dummy_shift(&a, &a, &cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let tags = own.side_tags();
        assert_eq!(tags.iter().filter(|t| *t == LEFT).count(), 100);
    }

    #[test]
    fn duplicated_sides_are_the_same() {
        let a = cloud(100, 0.0, 3, 5);
        let rows = ndarray::concatenate(Axis(0), &[a.view(), a.view()]).unwrap();
        let sd = ShiftDataset { rows, shift_index: 100, left_pages: vec![0], right_pages: vec![0] };
        let v = evaluate_shift::<f64>(&sd, ReducerKind::Pca, &ShiftProtocolConfig::default(), 3).unwrap();
        assert_eq!(v.delta, 0.0);
        assert!(!v.different);
    }

    #[test]
    fn separated_sides_in_reduced_space() {
        let l = cloud(100, -10.0, 2, 1);
        let r = cloud(100, 10.0, 2, 2);
        let scores = ndarray::concatenate(Axis(0), &[l.view(), r.view()]).unwrap();
        let v = evaluate_reduced(&scores, 100, &ShiftProtocolConfig::default(), 0).unwrap();
        assert!(v.delta > 99.0);
        assert!(v.different);
        // swapping sides keeps the verdict
        let swapped = ndarray::concatenate(Axis(0), &[r.view(), l.view()]).unwrap();
        let w = evaluate_reduced(&swapped, 100, &ShiftProtocolConfig::default(), 0).unwrap();
        assert_eq!(v.delta, w.delta);
    }

    #[test]
    fn experiment_statistics() {
        let a = cloud(300, 0.0, 6, 3);
        let b = cloud(300, 6.0, 6, 4);
        let cfg = ShiftProtocolConfig { seed: 11, ..ShiftProtocolConfig::default() };
        let other = shift_experiment::<f64>(&a, &b, ReducerKind::Pca, &cfg).unwrap();
        assert_eq!(other.iterations.len(), 25);
        assert_eq!(other.batch_pct_different.len(), 5);
        assert_eq!(other.mean_pct_different, 100.0);
        assert_eq!(other.std_pct_different, 0.0);
        let again = shift_experiment::<f64>(&a, &b, ReducerKind::Pca, &cfg).unwrap();
        assert_eq!(other, again);
        let fpc2 = other.fpc_sweep[0].mean;
        let fpc3 = other.fpc_sweep[1].mean;
        assert!(fpc2 >= fpc3);
    }

    #[test]
    fn scan_finds_a_style_change() {
        let doc = ndarray::concatenate(Axis(0), &[cloud(400, 0.0, 5, 1).view(), cloud(400, 5.0, 5, 2).view()]).unwrap();
        let trace = scan_document::<f64>(&doc, ReducerKind::Pca, &ShiftProtocolConfig::default()).unwrap();
        assert_eq!(trace.points.len(), 16 - 4 + 1);
        let at = trace.points.iter().find(|p| p.boundary_row == 400).unwrap();
        assert!(at.flagged);
        let again = scan_document::<f64>(&doc, ReducerKind::Pca, &ShiftProtocolConfig::default()).unwrap();
        assert_eq!(trace, again);
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = ShiftProtocolConfig { tolerance_pct: 0.0, ..ShiftProtocolConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
