//! Fuzzy c-means, the partition coefficient, and per-hand membership
//! percentages.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CmeansConfig {
    /// Fuzzifier, `> 1`.
    pub m: f64,
    /// Stop once the largest membership change falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CmeansConfig {
    fn default() -> Self {
        Self {
            m: 2.0,
            tol: 1e-5,
            max_iter: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FuzzyModel<T> {
    /// `c x k`.
    pub centers: Array2<T>,
    /// `c x n`; every column sums to 1.
    pub u: Array2<T>,
    pub fpc: T,
    pub m: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    /// Objective `sum u^m d^2` after each iteration.
    pub objective: Vec<T>,
}

/// Memberships of every point given the centres. A point that coincides
/// with one or more centres is split evenly among them and gets 0
/// elsewhere.
pub fn memberships<T: Scalar>(x: &Array2<T>, centers: &Array2<T>, m: f64) -> Array2<T> {
    let (n, c) = (x.nrows(), centers.nrows());
    let d2 = sq_distances(x, centers);
    let expo = T::lit(1.0 / (m - 1.0));
    let mut u = Array2::zeros((c, n));
    for j in 0..n {
        let zeros = (0..c).filter(|&i| d2[[i, j]] == T::zero()).count();
        if zeros > 0 {
            let share = T::one() / T::count(zeros);
            for i in 0..c {
                if d2[[i, j]] == T::zero() {
                    u[[i, j]] = share;
                }
            }
            continue;
        }
        // u_ij = d_ij^{-2/(m-1)} / sum_l d_lj^{-2/(m-1)}, scaled by the
        // smallest distance to stay finite
        let dmin = (0..c).map(|i| d2[[i, j]]).fold(T::infinity(), T::min);
        let mut total = T::zero();
        for i in 0..c {
            let w = (dmin / d2[[i, j]]).powf(expo);
            u[[i, j]] = w;
            total += w;
        }
        for i in 0..c {
            u[[i, j]] /= total;
        }
    }
    u
}

/// Squared Euclidean distances, `c x n`.
fn sq_distances<T: Scalar>(x: &Array2<T>, centers: &Array2<T>) -> Array2<T> {
    Array2::from_shape_fn((centers.nrows(), x.nrows()), |(i, j)| {
        x.row(j)
            .iter()
            .zip(centers.row(i))
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum()
    })
}

fn update_centers<T: Scalar>(x: &Array2<T>, u: &Array2<T>, m: f64) -> Array2<T> {
    let um = u.mapv(|v| v.powf(T::lit(m)));
    let num = um.dot(x);
    let den = um.sum_axis(Axis(1));
    let mut centers = num;
    for (mut row, &d) in centers.rows_mut().into_iter().zip(den.iter()) {
        if d > T::zero() {
            row.mapv_inplace(|v| v / d);
        }
    }
    centers
}

fn objective<T: Scalar>(x: &Array2<T>, centers: &Array2<T>, u: &Array2<T>, m: f64) -> T {
    let d2 = sq_distances(x, centers);
    u.iter().zip(d2.iter()).map(|(&w, &d)| w.powf(T::lit(m)) * d).sum()
}

/// Fuzzy c-means on the rows of `x`, initialised from a seeded random
/// column-normalised membership matrix.
pub fn cmeans<T: Scalar>(x: &Array2<T>, c: usize, cfg: &CmeansConfig, seed: u64) -> Result<FuzzyModel<T>> {
    let n = x.nrows();
    if c < 2 {
        return Err(Error::ClusterParams(format!("need at least 2 centres, got {c}")));
    }
    if n <= c {
        return Err(Error::InsufficientRows {
            needed: c + 1,
            available: n,
            context: format!("c-means with {c} centres"),
        });
    }
    if cfg.m.is_nan() || cfg.m <= 1.0 {
        return Err(Error::ClusterParams(format!("fuzzifier must exceed 1, got {}", cfg.m)));
    }
    if x.rows().into_iter().all(|r| r == x.row(0)) {
        log::warn!("c-means: all points identical; every centre sits on them");
        let centers = Array2::from_shape_fn((c, x.ncols()), |(_, j)| x[[0, j]]);
        let u = Array2::from_elem((c, n), T::one() / T::count(c));
        return Ok(FuzzyModel {
            fpc: fpc(&u),
            centers,
            u,
            m: cfg.m,
            iterations: 0,
            converged: true,
            seed,
            objective: vec![T::zero()],
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Array2::from_shape_fn((c, n), |_| T::lit(rng.gen::<f64>()));
    let sums = u.sum_axis(Axis(0));
    u /= &sums;

    let tol = T::lit(cfg.tol);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut centers = Array2::zeros((c, x.ncols()));
    for it in 1..=cfg.max_iter {
        iterations = it;
        centers = update_centers(x, &u, cfg.m);
        let next = memberships(x, &centers, cfg.m);
        let delta = (&next - &u).iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        u = next;
        history.push(objective(x, &centers, &u, cfg.m));
        if delta < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("c-means stopped after {} iterations without converging", cfg.max_iter);
    }
    Ok(FuzzyModel {
        fpc: fpc(&u),
        centers,
        u,
        m: cfg.m,
        iterations,
        converged,
        seed,
        objective: history,
    })
}

/// Fuzzy partition coefficient `sum u^2 / n`.
pub fn fpc<T: Scalar>(u: &Array2<T>) -> T {
    let n = u.ncols();
    if n == 0 {
        return T::zero();
    }
    u.iter().map(|&v| v * v).sum::<T>() / T::count(n)
}

/// Cluster with the largest membership per point; ties go to the lower index.
pub fn hard_assign<T: Scalar>(u: &Array2<T>) -> Vec<usize> {
    u.columns()
        .into_iter()
        .map(|col| {
            let mut best = 0;
            for (i, &v) in col.iter().enumerate() {
                if v > col[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Permutation that sorts the centres lexicographically (stable).
pub fn canonical_order<T: Scalar>(centers: &Array2<T>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..centers.nrows()).collect();
    idx.sort_by(|&a, &b| {
        for (x, y) in centers.row(a).iter().zip(centers.row(b)) {
            match x.partial_cmp(y) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
    idx
}

impl<T: Scalar> FuzzyModel<T> {
    /// Reorders clusters so the centres are in lexicographic order.
    pub fn canonicalize(mut self) -> Self {
        let order = canonical_order(&self.centers);
        self.centers = self.centers.select(Axis(0), &order);
        self.u = self.u.select(Axis(0), &order);
        self
    }

    pub fn n_clusters(&self) -> usize {
        self.centers.nrows()
    }

    pub fn labels(&self) -> Vec<usize> {
        hard_assign(&self.u)
    }

    /// Membership-matrix CSV: one row per point, one column per cluster.
    pub fn memberships_csv(&self) -> String {
        let c = self.n_clusters();
        let mut out: String = (0..c).map(|i| format!("u{i}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for col in self.u.columns() {
            let line: Vec<String> = col.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Minimum acceptable partition coefficient for a centre count, where one
/// is defined.
pub fn fpc_threshold(c: usize) -> Option<f64> {
    match c {
        2 => Some(0.7),
        3 => Some(0.6),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpcVerdict {
    Pass,
    Fail,
    NoThreshold,
}

pub fn fpc_verdict(c: usize, fpc: f64) -> FpcVerdict {
    match fpc_threshold(c) {
        Some(t) if fpc >= t => FpcVerdict::Pass,
        Some(_) => FpcVerdict::Fail,
        None => FpcVerdict::NoThreshold,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandShare {
    pub hand: String,
    pub rows: usize,
    /// Percentage of the hand's rows hard-assigned to each cluster.
    pub pct: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HandMembershipReport {
    pub hands: Vec<HandShare>,
    /// Expected hands that had no rows.
    pub excluded: Vec<String>,
    pub fpc: f64,
    /// Cluster centres in reporting order (the ordering key).
    pub centers: Vec<Vec<f64>>,
}

impl HandMembershipReport {
    pub fn share(&self, hand: &str) -> Option<&HandShare> {
        self.hands.iter().find(|h| h.hand == hand)
    }
}

/// Per-hand cluster percentages. Hands are reported in `expected` order
/// when given (absent ones are excluded with a warning), otherwise in order
/// of first appearance.
pub fn hand_memberships(
    labels: &[usize],
    tags: &[String],
    c: usize,
    expected: Option<&[String]>,
) -> Result<(Vec<HandShare>, Vec<String>)> {
    if labels.len() != tags.len() {
        return Err(Error::Shape(format!("{} labels but {} hand tags", labels.len(), tags.len())));
    }
    let mut order: Vec<String> = expected.map(<[String]>::to_vec).unwrap_or_default();
    for t in tags {
        if !order.contains(t) && expected.is_none() {
            order.push(t.clone());
        }
    }
    let mut shares = Vec::new();
    let mut excluded = Vec::new();
    for hand in order {
        let mut counts = vec![0usize; c];
        let mut rows = 0;
        for (l, t) in labels.iter().zip(tags) {
            if *t == hand {
                counts[*l] += 1;
                rows += 1;
            }
        }
        if rows == 0 {
            log::warn!("hand {hand} has no rows; excluded from membership report");
            excluded.push(hand);
            continue;
        }
        shares.push(HandShare {
            pct: counts.iter().map(|&k| 100.0 * k as f64 / rows as f64).collect(),
            hand,
            rows,
        });
    }
    Ok((shares, excluded))
}

/// Membership report of a (canonicalised) model.
pub fn membership_report<T: Scalar>(
    model: &FuzzyModel<T>,
    tags: &[String],
    expected: Option<&[String]>,
) -> Result<HandMembershipReport> {
    let (hands, excluded) = hand_memberships(&model.labels(), tags, model.n_clusters(), expected)?;
    Ok(HandMembershipReport {
        hands,
        excluded,
        fpc: model.fpc.as_f64(),
        centers: model
            .centers
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.as_f64()).collect())
            .collect(),
    })
}

/// Column sums of a membership matrix.
pub fn column_sums<T: Scalar>(u: &Array2<T>) -> Array1<T> {
    u.sum_axis(Axis(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand_distr::{Distribution, Normal};

    fn two_clouds(n: usize, sep: f64, seed: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = Array2::zeros((n, 2));
        let mut truth = Vec::new();
        for i in 0..n {
            let side = i % 2;
            x[[i, 0]] = noise.sample(&mut rng) + if side == 0 { -sep / 2.0 } else { sep / 2.0 };
            x[[i, 1]] = noise.sample(&mut rng);
            truth.push(side);
        }
        (x, truth)
    }

    #[test]
    fn fpc_anchors() {
        let crisp: Array2<f64> = array![[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]];
        assert_eq!(fpc(&crisp), 1.0);
        let uniform = Array2::from_elem((4, 7), 0.25f64);
        assert!((fpc(&uniform) - 0.25).abs() < 1e-15);
        let hand: Array2<f64> = array![[0.8, 0.3], [0.2, 0.7]];
        assert!((fpc(&hand) - 0.63).abs() < 1e-12);
    }

    #[test]
    fn separated_clouds() {
        let (x, truth) = two_clouds(500, 10.0, 1);
        let model = cmeans(&x, 2, &CmeansConfig::default(), 3).unwrap().canonicalize();
        let labels = model.labels();
        let agree = labels.iter().zip(&truth).filter(|(a, b)| a == b).count();
        let acc = agree.max(500 - agree) as f64 / 500.0;
        assert!(acc >= 0.99, "{acc}");
        assert!(model.fpc >= 0.95, "{}", model.fpc);
        assert!(model.converged);
        for w in model.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
        }
        for s in column_sums(&model.u) {
            assert!((s - 1.0).abs() < 1e-9);
        }
        // canonical order puts the left cloud first
        assert!(model.centers[[0, 0]] < model.centers[[1, 0]]);
    }

    #[test]
    fn columns_sum_to_one_at_every_iteration() {
        let (x, _) = two_clouds(60, 2.0, 4);
        for iters in 1..6 {
            let cfg = CmeansConfig { max_iter: iters, ..CmeansConfig::default() };
            let m = cmeans(&x, 3, &cfg, 8).unwrap();
            assert!(column_sums(&m.u).iter().all(|s| (s - 1.0).abs() < 1e-9));
            let f = m.fpc;
            assert!((1.0 / 3.0 - 1e-12..=1.0 + 1e-12).contains(&f));
        }
    }

    #[test]
    fn point_on_centre_is_crisp() {
        let x: Array2<f64> = array![[0.0, 0.0], [1.0, 1.0], [5.0, 5.0]];
        let centers = array![[1.0, 1.0], [5.0, 5.0]];
        let u = memberships(&x, &centers, 2.0);
        assert_eq!(u.column(1).to_vec(), vec![1.0, 0.0]);
        assert_eq!(u.column(2).to_vec(), vec![0.0, 1.0]);
        // ratio rule with m = 2: u ∝ 1/d^2
        let (d0, d1) = (2.0, 50.0);
        assert!((u[[0, 0]] - (1.0 / d0) / (1.0 / d0 + 1.0 / d1)).abs() < 1e-12);
    }

    #[test]
    fn identical_points_do_not_blow_up() {
        let x = Array2::from_elem((10, 2), 3.0f64);
        let m = cmeans(&x, 2, &CmeansConfig::default(), 0).unwrap();
        assert!(m.u.iter().all(|v| v.is_finite()));
        assert!((m.fpc - 0.5).abs() < 1e-12);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let (x, _) = two_clouds(80, 3.0, 2);
        let a = cmeans(&x, 2, &CmeansConfig::default(), 5).unwrap();
        let b = cmeans(&x, 2, &CmeansConfig::default(), 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_precision_clusters() {
        let (x, truth) = two_clouds(200, 10.0, 7);
        let m = cmeans(&x.mapv(|v| v as f32), 2, &CmeansConfig::default(), 1).unwrap();
        let agree = m.labels().iter().zip(&truth).filter(|(a, b)| a == b).count();
        assert!(agree.max(200 - agree) >= 198);
    }

    #[test]
    fn bad_parameters() {
        let x = Array2::<f64>::zeros((3, 2));
        assert!(cmeans(&x, 1, &CmeansConfig::default(), 0).is_err());
        assert!(cmeans(&x, 3, &CmeansConfig::default(), 0).is_err());
        let cfg = CmeansConfig { m: 1.0, ..CmeansConfig::default() };
        assert!(cmeans(&Array2::<f64>::zeros((6, 2)), 2, &cfg, 0).is_err());
    }

    #[test]
    fn hard_assignment_rules() {
        assert_eq!(hard_assign(&array![[1.0, 0.0], [0.0, 1.0]]), vec![0, 1]);
        assert_eq!(hard_assign(&Array2::from_elem((3, 4), 1.0f64 / 3.0)), vec![0; 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = Array2::from_shape_fn((4, 30), |_| rng.gen::<f64>());
        let oracle: Vec<usize> = (0..30)
            .map(|j| {
                let col: Vec<f64> = u.column(j).to_vec();
                let max = col.iter().cloned().fold(f64::MIN, f64::max);
                col.iter().position(|&v| v == max).unwrap()
            })
            .collect();
        assert_eq!(hard_assign(&u), oracle);
    }

    #[test]
    fn canonical_ordering() {
        assert_eq!(canonical_order(&array![[5.0, 0.0], [-3.0, 1.0]]), vec![1, 0]);
        assert_eq!(canonical_order(&array![[-3.0, 1.0], [5.0, 0.0]]), vec![0, 1]);
        assert_eq!(canonical_order(&array![[2.0, 2.0], [2.0, 2.0]]), vec![0, 1]);
        assert_eq!(canonical_order(&array![[2.0, 3.0], [2.0, 1.0]]), vec![1, 0]);
    }

    #[test]
    fn hand_percentages() {
        let tags: Vec<String> = ["A", "A", "A"].map(String::from).to_vec();
        let (s, _) = hand_memberships(&[0, 0, 0], &tags, 2, None).unwrap();
        assert_eq!(s[0].pct, vec![100.0, 0.0]);
        let (s, _) = hand_memberships(&[0, 0, 1], &tags, 2, None).unwrap();
        assert!((s[0].pct[0] - 66.6667).abs() < 1e-3);
        assert!((s[0].pct[1] - 33.3333).abs() < 1e-3);
        let expected: Vec<String> = ["B", "A"].map(String::from).to_vec();
        let (s, excluded) = hand_memberships(&[0, 1, 1], &tags, 2, Some(&expected)).unwrap();
        assert_eq!(excluded, vec!["B".to_string()]);
        assert_eq!(s.len(), 1);
        assert!((s[0].pct.iter().sum::<f64>() - 100.0).abs() < 0.01);
    }

    #[test]
    fn verdict_thresholds() {
        assert_eq!(fpc_verdict(2, 0.7), FpcVerdict::Pass);
        assert_eq!(fpc_verdict(2, 0.69), FpcVerdict::Fail);
        assert_eq!(fpc_verdict(3, 0.6), FpcVerdict::Pass);
        assert_eq!(fpc_verdict(4, 0.1), FpcVerdict::NoThreshold);
    }
}
