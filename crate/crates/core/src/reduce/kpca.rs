//! Kernel PCA on a double-centred kernel matrix.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::linalg::{fix_column_signs, symmetric_eigen};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenvalues at or below this fraction of the largest are treated as zero.
pub const EIGEN_REL_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Kernel {
    Cosine,
    /// `exp(-gamma |a - b|^2)`; `None` means `1 / columns`.
    Rbf { gamma: Option<f64> },
    /// Plain inner product; kept for equivalence checks against PCA.
    Linear,
}

impl Kernel {
    fn matrix<T: Scalar>(&self, a: &Array2<T>, b: &Array2<T>, gamma: T) -> Array2<T> {
        let dots = a.dot(&b.t());
        match self {
            Kernel::Linear => dots,
            Kernel::Cosine => {
                let na = row_norms(a);
                let nb = row_norms(b);
                Array2::from_shape_fn(dots.dim(), |(i, j)| {
                    let d = na[i] * nb[j];
                    if d > T::zero() {
                        dots[[i, j]] / d
                    } else {
                        T::zero()
                    }
                })
            }
            Kernel::Rbf { .. } => {
                let sa = a.map_axis(Axis(1), |r| r.dot(&r));
                let sb = b.map_axis(Axis(1), |r| r.dot(&r));
                Array2::from_shape_fn(dots.dim(), |(i, j)| {
                    let d2 = (sa[i] + sb[j] - dots[[i, j]] - dots[[i, j]]).max(T::zero());
                    (-gamma * d2).exp()
                })
            }
        }
    }
}

fn row_norms<T: Scalar>(a: &Array2<T>) -> Array1<T> {
    a.map_axis(Axis(1), |r| r.dot(&r).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct KernelPca<T> {
    pub kernel: Kernel,
    pub gamma: T,
    pub training: Array2<T>,
    /// Column means of the uncentred training kernel.
    pub kernel_col_means: Array1<T>,
    pub kernel_mean: T,
    /// Leading `k` eigenvalues of the centred kernel.
    pub eigenvalues: Array1<T>,
    /// Unit eigenvectors, `rows x k`.
    pub eigenvectors: Array2<T>,
}

impl<T: Scalar> KernelPca<T> {
    pub fn fit_transform(z: &Array2<T>, k: usize, kernel: Kernel) -> Result<(Self, Array2<T>)> {
        let (n, p) = z.dim();
        if k == 0 || n < k + 1 {
            return Err(Error::InsufficientRows {
                needed: k + 1,
                available: n,
                context: format!("kernel PCA with {k} components"),
            });
        }
        let gamma = match kernel {
            Kernel::Rbf { gamma: Some(g) } => T::lit(g),
            _ => T::one() / T::count(p.max(1)),
        };
        let kmat = kernel.matrix(z, z, gamma);
        let col_means = kmat.mean_axis(Axis(0)).expect("rows");
        let mean = col_means.mean().expect("rows");
        let centred = center(&kmat, &col_means, &col_means, mean);
        let (vals, mut vecs) = symmetric_eigen(&centred);
        let floor = vals[0].max(T::zero()) * T::lit(EIGEN_REL_FLOOR);
        let positive = vals.iter().filter(|&&v| v > floor).count();
        if positive < k {
            return Err(Error::KernelRankDeficient { positive, requested: k });
        }
        let mut lead = vecs.slice_mut(ndarray::s![.., ..k]).to_owned();
        fix_column_signs(&mut lead);
        vecs = lead;
        let eigenvalues = vals.slice(ndarray::s![..k]).to_owned();
        let scores = &vecs * &eigenvalues.mapv(|v| v.sqrt());
        Ok((
            Self {
                kernel,
                gamma,
                training: z.clone(),
                kernel_col_means: col_means,
                kernel_mean: mean,
                eigenvalues,
                eigenvectors: vecs,
            },
            scores,
        ))
    }

    /// Projects new rows using the training kernel statistics.
    pub fn transform(&self, x: &Array2<T>) -> Array2<T> {
        let kx = self.kernel.matrix(x, &self.training, self.gamma);
        let row_means = kx.mean_axis(Axis(1)).expect("training rows");
        let centred = center(&kx, &row_means, &self.kernel_col_means, self.kernel_mean);
        centred.dot(&self.eigenvectors) / &self.eigenvalues.mapv(|v| v.sqrt())
    }
}

/// `K_ij - r_i - c_j + m`.
fn center<T: Scalar>(k: &Array2<T>, row_means: &Array1<T>, col_means: &Array1<T>, mean: T) -> Array2<T> {
    Array2::from_shape_fn(k.dim(), |(i, j)| k[[i, j]] - row_means[i] - col_means[j] + mean)
}

pub fn kpca_fit_transform<T: Scalar>(z: &Array2<T>, k: usize, kernel: Kernel) -> Result<(KernelPca<T>, Array2<T>)> {
    KernelPca::fit_transform(z, k, kernel)
}
