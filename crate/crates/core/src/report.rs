//! Cluster, shift and scan reports with their CSV and SVG artifacts.
//!
//! Every artifact carries the report fingerprint and seed: JSON as fields,
//! CSV as a leading `#` comment line, SVG in its `<desc>` element. Nothing
//! time-dependent is written, so equal inputs give byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::features::FeatureId;
use crate::fuzzy::{cmeans, fpc_threshold, fpc_verdict, membership_report, CmeansConfig, FpcVerdict, FuzzyModel, HandMembershipReport};
use crate::plot::{self, Series};
use crate::reduce::{scale_and_reduce, Fitted, ReducedData, ReducerKind};
use crate::scalar::Scalar;
use crate::shift::{scan_document, shift_experiment, ScanPoint, ShiftExperiment, ShiftProtocolConfig};

/// A named output file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: impl Into<String>, contents: String) -> Self {
        Self { name: name.into(), contents }
    }
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            let p = dir.join(&a.name);
            std::fs::write(&p, &a.contents)?;
            Ok(p)
        })
        .collect()
}

/// SHA-256 over input fingerprints and the analysis settings.
pub fn report_fingerprint<S: Serialize>(inputs: &[&str], settings: &S) -> String {
    let mut h = Sha256::new();
    for i in inputs {
        h.update(i.as_bytes());
        h.update(b"\n");
    }
    h.update(serde_json::to_string(settings).expect("settings serialise").as_bytes());
    format!("{:x}", h.finalize())
}

fn stamp(fingerprint: &str, seed: u64) -> String {
    format!("fingerprint {fingerprint} seed {seed}")
}

fn to_json<S: Serialize>(v: &S) -> String {
    serde_json::to_string_pretty(v).expect("report serialises") + "\n"
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSettings {
    pub reducer: ReducerKind,
    /// Components kept.
    pub k: usize,
    pub centers: usize,
    pub cmeans: CmeansConfig,
    pub seed: u64,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        Self {
            reducer: ReducerKind::Pca,
            k: 2,
            centers: 2,
            cmeans: CmeansConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub fingerprint: String,
    pub seed: u64,
    pub dataset_fingerprint: String,
    pub settings: ClusterSettings,
    pub rows: usize,
    pub features: Vec<FeatureId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explained_variance_ratio: Option<Vec<f64>>,
    pub fpc: f64,
    pub fpc_threshold: Option<f64>,
    pub verdict: FpcVerdict,
    pub iterations: usize,
    pub converged: bool,
    pub memberships: HandMembershipReport,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ClusterOutcome<T> {
    pub report: ClusterReport,
    pub model: FuzzyModel<T>,
    pub reduced: ReducedData<T>,
    pub tags: Vec<String>,
}

/// Scale, reduce, cluster and summarise per hand.
pub fn cluster_dataset<T: Scalar>(ds: &Dataset, s: &ClusterSettings) -> Result<ClusterOutcome<T>> {
    let x: Array2<T> = ds.to_matrix();
    let (_, reduced) = scale_and_reduce(&x, s.reducer, s.k, s.seed)?;
    let model = cmeans(&reduced.scores, s.centers, &s.cmeans, s.seed)?.canonicalize();
    let tags = ds.hand_tags();
    let memberships = membership_report(&model, &tags, None)?;
    let mut warnings = Vec::new();
    let explained_variance_ratio = match &reduced.model {
        Fitted::Pca(p) => Some(p.explained_variance_ratio.iter().map(|v| v.as_f64()).collect()),
        Fitted::Ica(m) => {
            if !m.converged {
                warnings.push(format!("ICA stopped after {} iterations without converging", m.iterations));
            }
            None
        }
        Fitted::Kpca(_) => None,
    };
    if !model.converged {
        warnings.push(format!("c-means stopped after {} iterations without converging", model.iterations));
    }
    let fpc = model.fpc.as_f64();
    let report = ClusterReport {
        fingerprint: report_fingerprint(&[&ds.meta.fingerprint], s),
        seed: s.seed,
        dataset_fingerprint: ds.meta.fingerprint.clone(),
        settings: s.clone(),
        rows: ds.len(),
        features: ds.features.clone(),
        explained_variance_ratio,
        fpc,
        fpc_threshold: fpc_threshold(s.centers),
        verdict: fpc_verdict(s.centers, fpc),
        iterations: model.iterations,
        converged: model.converged,
        memberships,
        warnings,
    };
    Ok(ClusterOutcome { report, model, reduced, tags })
}

impl<T: Scalar> ClusterOutcome<T> {
    fn stem(&self) -> String {
        format!("cluster_{}_c{}", self.report.settings.reducer.name(), self.report.settings.centers)
    }

    /// Component scores with hand tags, one row per data row.
    pub fn scores_csv(&self) -> String {
        let r = &self.report;
        let mut out = format!(
            "# reducer {} k {} {}\n",
            r.settings.reducer.name(),
            r.settings.k,
            stamp(&r.fingerprint, r.seed)
        );
        let cols: Vec<String> = (1..=r.settings.k).map(|j| format!("comp{j}")).collect();
        let _ = writeln!(out, "{},hand,cluster", cols.join(","));
        let labels = self.model.labels();
        for (i, row) in self.reduced.scores.rows().into_iter().enumerate() {
            let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{},{},{}", vals.join(","), self.tags[i], labels[i]);
        }
        out
    }

    fn series_by_hand(&self, f: impl Fn(usize) -> (f64, f64)) -> Vec<Series> {
        let mut hands: Vec<String> = Vec::new();
        for t in &self.tags {
            if !hands.contains(t) {
                hands.push(t.clone());
            }
        }
        hands
            .into_iter()
            .map(|h| Series {
                points: (0..self.tags.len()).filter(|&i| self.tags[i] == h).map(&f).collect(),
                label: h,
            })
            .collect()
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        let r = &self.report;
        let stem = self.stem();
        let desc = stamp(&r.fingerprint, r.seed);
        let s = &self.reduced.scores;
        let col = |i: usize, j: usize| if j < s.ncols() { s[[i, j]].as_f64() } else { 0.0 };
        let mut out = vec![
            Artifact::new(format!("{stem}.json"), to_json(r)),
            Artifact::new(
                format!("{stem}_memberships.csv"),
                format!("# {desc}\n{}", self.model.memberships_csv()),
            ),
            Artifact::new(format!("{stem}_scores.csv"), self.scores_csv()),
            Artifact::new(
                format!("{stem}_comp1_index.svg"),
                plot::scatter(
                    &format!("{} component 1 by row", r.settings.reducer.name()),
                    &desc,
                    "row index",
                    "component 1",
                    &self.series_by_hand(|i| (i as f64, col(i, 0))),
                    &[],
                ),
            ),
        ];
        if s.ncols() >= 2 {
            let centres: Vec<(f64, f64)> = self
                .model
                .centers
                .rows()
                .into_iter()
                .map(|c| (c[0].as_f64(), c[1].as_f64()))
                .collect();
            out.push(Artifact::new(
                format!("{stem}_comp1_comp2.svg"),
                plot::scatter(
                    &format!("{} components, c = {}, FPC {:.3}", r.settings.reducer.name(), r.settings.centers, r.fpc),
                    &desc,
                    "component 1",
                    "component 2",
                    &self.series_by_hand(|i| (col(i, 0), col(i, 1))),
                    &centres,
                ),
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub fingerprint: String,
    pub seed: u64,
    pub left_fingerprint: String,
    pub right_fingerprint: String,
    pub left_rows: usize,
    pub right_rows: usize,
    pub features: Vec<FeatureId>,
    pub protocol: ShiftProtocolConfig,
    /// Verdict of the mean two-centre FPC against its threshold.
    pub fpc2_verdict: Option<FpcVerdict>,
    pub experiment: ShiftExperiment,
}

/// Dummy-shift experiment between two datasets.
pub fn shift_report<T: Scalar>(
    left: &Dataset,
    right: &Dataset,
    reducer: ReducerKind,
    cfg: &ShiftProtocolConfig,
) -> Result<ShiftReport> {
    let experiment = shift_experiment::<T>(&left.to_matrix(), &right.to_matrix(), reducer, cfg)?;
    let fpc2_verdict = experiment
        .fpc_sweep
        .iter()
        .find(|f| f.centers == 2)
        .map(|f| fpc_verdict(2, f.mean));
    Ok(ShiftReport {
        fingerprint: report_fingerprint(&[&left.meta.fingerprint, &right.meta.fingerprint], &(reducer, cfg)),
        seed: cfg.seed,
        left_fingerprint: left.meta.fingerprint.clone(),
        right_fingerprint: right.meta.fingerprint.clone(),
        left_rows: left.len(),
        right_rows: right.len(),
        features: left.features.clone(),
        protocol: cfg.clone(),
        fpc2_verdict,
        experiment,
    })
}

impl ShiftReport {
    pub fn iterations_csv(&self) -> String {
        let mut out = format!("# {}\n", stamp(&self.fingerprint, self.seed));
        let sweep: Vec<String> = self.protocol.centers.iter().map(|c| format!("fpc_c{c}")).collect();
        let _ = writeln!(
            out,
            "batch,index,left_pages,right_pages,left_pct,right_pct,delta,different,fpc,{}",
            sweep.join(",")
        );
        for it in &self.experiment.iterations {
            let pages = |p: &[usize]| p.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            let fpcs: Vec<String> = it.fpc_by_centers.iter().map(|(_, f)| f.to_string()).collect();
            let v = &it.verdict;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                it.batch,
                it.index,
                pages(&it.left_pages),
                pages(&it.right_pages),
                v.left_pct,
                v.right_pct,
                v.delta,
                v.different,
                v.fpc,
                fpcs.join(",")
            );
        }
        out
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        let stem = format!("shift_{}", self.experiment.reducer.name());
        let desc = stamp(&self.fingerprint, self.seed);
        let fpc_bars: Vec<(String, f64, f64)> = self
            .experiment
            .fpc_sweep
            .iter()
            .map(|f| (format!("c = {}", f.centers), f.mean, f.std))
            .collect();
        let half = 50.0 / self.protocol.batch_size as f64;
        vec![
            Artifact::new(format!("{stem}.json"), to_json(self)),
            Artifact::new(format!("{stem}_iterations.csv"), self.iterations_csv()),
            Artifact::new(
                format!("{stem}_fpc.svg"),
                plot::bars("FPC by number of centres", &desc, "centres", "mean FPC", &fpc_bars, Some(1.0)),
            ),
            Artifact::new(
                format!("{stem}_pct_different.svg"),
                plot::histogram(
                    &format!(
                        "percent different per batch: mean {:.1}, std {:.1}",
                        self.experiment.mean_pct_different, self.experiment.std_pct_different
                    ),
                    &desc,
                    "percent of shifts called different",
                    &self.experiment.batch_pct_different,
                    -half,
                    100.0 + half,
                    self.protocol.batch_size + 1,
                ),
            ),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub fingerprint: String,
    pub seed: u64,
    pub dataset_fingerprint: String,
    pub rows: usize,
    pub reducer: ReducerKind,
    pub protocol: ShiftProtocolConfig,
    pub flagged_rows: Vec<usize>,
    pub longest_flag_run: usize,
    pub points: Vec<ScanPoint>,
}

pub fn scan_report<T: Scalar>(ds: &Dataset, reducer: ReducerKind, cfg: &ShiftProtocolConfig) -> Result<ScanReport> {
    let trace = scan_document::<T>(&ds.to_matrix(), reducer, cfg)?;
    Ok(ScanReport {
        fingerprint: report_fingerprint(&[&ds.meta.fingerprint], &(reducer, cfg)),
        seed: cfg.seed,
        dataset_fingerprint: ds.meta.fingerprint.clone(),
        rows: ds.len(),
        reducer,
        protocol: cfg.clone(),
        flagged_rows: trace.flagged_rows(),
        longest_flag_run: trace.longest_flag_run(),
        points: trace.points,
    })
}

impl ScanReport {
    pub fn trace_csv(&self) -> String {
        let mut out = format!("# {}\n", stamp(&self.fingerprint, self.seed));
        out.push_str("boundary_row,flagged,votes,mean_delta,mean_fpc,deltas\n");
        for p in &self.points {
            let d: Vec<String> = p.deltas.iter().map(f64::to_string).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                p.boundary_row,
                p.flagged,
                p.votes,
                p.mean_delta,
                p.mean_fpc,
                d.join(" ")
            );
        }
        out
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        let stem = format!("scan_{}", self.reducer.name());
        let desc = stamp(&self.fingerprint, self.seed);
        let pts: Vec<(f64, f64)> = self.points.iter().map(|p| (p.boundary_row as f64, p.mean_delta)).collect();
        let marks: Vec<bool> = self.points.iter().map(|p| p.flagged).collect();
        vec![
            Artifact::new(format!("{stem}.json"), to_json(self)),
            Artifact::new(format!("{stem}_trace.csv"), self.trace_csv()),
            Artifact::new(
                format!("{stem}_trace.svg"),
                plot::line(
                    "side membership difference along the document",
                    &desc,
                    "boundary row",
                    "mean |L% - R%|",
                    &pts,
                    &marks,
                    Some(self.protocol.tolerance_pct),
                ),
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::SourceKind;
    use crate::rows::{FeatureRow, RowProvenance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn toy(n_per: usize, gap: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = Normal::new(0.0, 1.0).unwrap();
        let mut rows = Vec::new();
        for (h, off) in [("A", 0.0), ("B", gap)] {
            for i in 0..n_per {
                rows.push(FeatureRow {
                    values: (0..10).map(|j| d.sample(&mut rng) + if j < 3 { off } else { 0.0 }).collect(),
                    provenance: RowProvenance {
                        page: i / 50,
                        bbox: i,
                        kind: SourceKind::Word,
                        hand: Some(h.into()),
                        row_index: 0,
                    },
                });
            }
        }
        Dataset {
            features: vec![FeatureId::Height],
            rows,
            meta: Default::default(),
        }
    }

    #[test]
    fn cluster_report_separates_hands() {
        let ds = toy(150, 6.0);
        let out = cluster_dataset::<f64>(&ds, &ClusterSettings::default()).unwrap();
        let r = &out.report;
        assert_eq!(r.verdict, FpcVerdict::Pass);
        let a = r.memberships.share("A").unwrap().pct[0];
        let b = r.memberships.share("B").unwrap().pct[0];
        assert!((a - b).abs() > 95.0);
        let arts = out.artifacts();
        assert_eq!(arts.len(), 5);
        for a in &arts {
            assert!(a.contents.contains(&r.fingerprint), "{}", a.name);
        }
        let again = cluster_dataset::<f64>(&ds, &ClusterSettings::default()).unwrap().artifacts();
        assert_eq!(arts, again);
        let scores = &arts.iter().find(|a| a.name.ends_with("_scores.csv")).unwrap().contents;
        assert_eq!(scores.lines().count(), 2 + 300);
    }

    #[test]
    fn three_centres_use_their_threshold() {
        let ds = toy(100, 6.0);
        let s = ClusterSettings { centers: 3, ..Default::default() };
        let r = cluster_dataset::<f64>(&ds, &s).unwrap().report;
        assert_eq!(r.fpc_threshold, Some(0.6));
        assert_eq!(r.memberships.centers.len(), 3);
        let s = ClusterSettings { centers: 4, ..Default::default() };
        assert_eq!(cluster_dataset::<f64>(&ds, &s).unwrap().report.verdict, FpcVerdict::NoThreshold);
    }

    #[test]
    fn shift_and_scan_artifacts() {
        let ds = toy(250, 5.0);
        let (a, b) = (ds.filter_hand("A"), ds.filter_hand("B"));
        let cfg = ShiftProtocolConfig { seed: 3, ..Default::default() };
        let r = shift_report::<f64>(&a, &b, ReducerKind::Pca, &cfg).unwrap();
        assert_eq!(r.experiment.mean_pct_different, 100.0);
        let arts = r.artifacts();
        assert_eq!(arts.len(), 4);
        let csv = &arts[1].contents;
        assert_eq!(csv.lines().count(), 2 + 25);
        let scan = scan_report::<f64>(&ds, ReducerKind::Pca, &cfg).unwrap();
        assert!(scan.flagged_rows.contains(&250) || scan.flagged_rows.contains(&300) || scan.flagged_rows.contains(&200));
        assert_eq!(scan.artifacts().len(), 3);
    }

    #[test]
    fn writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_artifacts(dir.path(), &[Artifact::new("x.txt", "hi".into())]).unwrap();
        assert_eq!(std::fs::read_to_string(&paths[0]).unwrap(), "hi");
    }
}
