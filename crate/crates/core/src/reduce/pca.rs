//! Principal component analysis through the SVD of the centred data.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::linalg::{fix_column_signs, jacobi_svd};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Pca<T> {
    pub mean: Array1<T>,
    /// `cols x k`; column `i` is the `i`-th loading vector.
    pub components: Array2<T>,
    pub singular_values: Array1<T>,
    /// Score variances (divisor `n - 1`), non-increasing.
    pub explained_variance: Array1<T>,
    pub explained_variance_ratio: Array1<T>,
}

impl<T: Scalar> Pca<T> {
    pub fn fit_transform(z: &Array2<T>, k: usize) -> Result<(Self, Array2<T>)> {
        let (n, p) = z.dim();
        let max_k = n.saturating_sub(1).min(p);
        if k == 0 || k > max_k {
            return Err(Error::TooManyComponents { requested: k, max: max_k });
        }
        let mean = z.mean_axis(Axis(0)).expect("non-empty");
        let centred = z - &mean;
        let svd = jacobi_svd(&centred);
        let mut v = svd.v;
        let signs = fix_column_signs(&mut v);
        let components = v.slice(ndarray::s![.., ..k]).to_owned();
        let mut scores = svd.u.slice(ndarray::s![.., ..k]).to_owned();
        for (j, mut col) in scores.columns_mut().into_iter().enumerate() {
            let f = svd.s[j] * signs[j];
            col.mapv_inplace(|x| x * f);
        }
        let denom = T::count(n - 1);
        let all_var = svd.s.mapv(|s| s * s / denom);
        let total = all_var.sum();
        let explained_variance = all_var.slice(ndarray::s![..k]).to_owned();
        let explained_variance_ratio = if total > T::zero() {
            explained_variance.mapv(|v| v / total)
        } else {
            Array1::zeros(k)
        };
        Ok((
            Self {
                mean,
                components,
                singular_values: svd.s.slice(ndarray::s![..k]).to_owned(),
                explained_variance,
                explained_variance_ratio,
            },
            scores,
        ))
    }

    pub fn transform(&self, x: &Array2<T>) -> Array2<T> {
        (x - &self.mean).dot(&self.components)
    }
}

pub fn pca_fit_transform<T: Scalar>(z: &Array2<T>, k: usize) -> Result<(Pca<T>, Array2<T>)> {
    Pca::fit_transform(z, k)
}
