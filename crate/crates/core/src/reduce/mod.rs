//! Standard scaling and dimensionality reduction.

pub mod ica;
pub mod kpca;
pub mod linalg;
pub mod pca;
pub mod scaler;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use ica::{ica_fit_transform, Ica};
pub use kpca::{kpca_fit_transform, Kernel, KernelPca};
pub use pca::{pca_fit_transform, Pca};
pub use scaler::{scaler_fit_transform, ScalerParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducerKind {
    Pca,
    Ica,
    KpcaCosine,
    KpcaRbf,
}

impl ReducerKind {
    pub const ALL: [ReducerKind; 4] = [
        ReducerKind::Pca,
        ReducerKind::Ica,
        ReducerKind::KpcaCosine,
        ReducerKind::KpcaRbf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReducerKind::Pca => "pca",
            ReducerKind::Ica => "ica",
            ReducerKind::KpcaCosine => "kpca_cosine",
            ReducerKind::KpcaRbf => "kpca_rbf",
        }
    }
}

impl fmt::Display for ReducerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReducerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        ReducerKind::ALL
            .into_iter()
            .find(|r| r.name() == norm)
            .ok_or_else(|| Error::Shape(format!("unknown reducer `{s}` (pca, ica, kpca-cosine, kpca-rbf)")))
    }
}

/// Fitted reducer parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", rename_all = "snake_case", tag = "model")]
pub enum Fitted<T> {
    Pca(Pca<T>),
    Ica(Ica<T>),
    Kpca(KernelPca<T>),
}

impl<T: Scalar> Fitted<T> {
    pub fn transform(&self, x: &Array2<T>) -> Array2<T> {
        match self {
            Fitted::Pca(m) => m.transform(x),
            Fitted::Ica(m) => m.transform(x),
            Fitted::Kpca(m) => m.transform(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ReducedData<T> {
    /// `rows x k` component scores.
    pub scores: Array2<T>,
    pub reducer: ReducerKind,
    pub k: usize,
    pub model: Fitted<T>,
    pub seed: u64,
}

/// Reduces already-scaled data to `k` components.
pub fn reduce<T: Scalar>(z: &Array2<T>, kind: ReducerKind, k: usize, seed: u64) -> Result<ReducedData<T>> {
    let (model, scores) = match kind {
        ReducerKind::Pca => {
            let (m, s) = pca_fit_transform(z, k)?;
            (Fitted::Pca(m), s)
        }
        ReducerKind::Ica => {
            let (m, s) = ica_fit_transform(z, k, seed)?;
            (Fitted::Ica(m), s)
        }
        ReducerKind::KpcaCosine => {
            let (m, s) = kpca_fit_transform(z, k, Kernel::Cosine)?;
            (Fitted::Kpca(m), s)
        }
        ReducerKind::KpcaRbf => {
            let (m, s) = kpca_fit_transform(z, k, Kernel::Rbf { gamma: None })?;
            (Fitted::Kpca(m), s)
        }
    };
    Ok(ReducedData {
        scores,
        reducer: kind,
        k,
        model,
        seed,
    })
}

/// Scales then reduces.
pub fn scale_and_reduce<T: Scalar>(
    x: &Array2<T>,
    kind: ReducerKind,
    k: usize,
    seed: u64,
) -> Result<(ScalerParams<T>, ReducedData<T>)> {
    let (params, z) = scaler_fit_transform(x)?;
    let reduced = reduce(&z, kind, k, seed)?;
    Ok((params, reduced))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn names_round_trip() {
        for r in ReducerKind::ALL {
            assert_eq!(r.name().parse::<ReducerKind>().unwrap(), r);
        }
        assert_eq!("kpca-rbf".parse::<ReducerKind>().unwrap(), ReducerKind::KpcaRbf);
        assert!("lda".parse::<ReducerKind>().is_err());
    }

    #[test]
    fn every_reducer_keeps_rows_and_refits_consistently() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array2::from_shape_fn((60, 10), |_| rng.gen_range(-3.0f64..3.0));
        for kind in ReducerKind::ALL {
            let (params, r) = scale_and_reduce(&x, kind, 2, 1).unwrap();
            assert_eq!(r.scores.dim(), (60, 2));
            let z = params.transform(&x).unwrap();
            let again = r.model.transform(&z);
            assert!((&again - &r.scores).iter().all(|v| v.abs() < 1e-8), "{kind}");
        }
    }
}
