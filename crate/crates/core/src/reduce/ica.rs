//! FastICA with the symmetric fixed-point update and the log-cosh contrast.

use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::linalg::{jacobi_svd, symmetric_eigen};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const ICA_TOL: f64 = 1e-4;
pub const ICA_MAX_ITER: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Ica<T> {
    pub mean: Array1<T>,
    /// `cols x k` whitening projection; whitened data has unit covariance.
    pub whitening: Array2<T>,
    /// `k x k` orthogonal unmixing matrix acting on whitened data.
    pub unmixing: Array2<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// `(W W^T)^{-1/2} W`.
fn sym_decorrelate<T: Scalar>(w: &Array2<T>) -> Array2<T> {
    let (vals, vecs) = symmetric_eigen(&w.dot(&w.t()));
    let floor = T::epsilon();
    let inv_sqrt = vals.mapv(|v| T::one() / v.max(floor).sqrt());
    (&vecs * &inv_sqrt).dot(&vecs.t()).dot(w)
}

impl<T: Scalar> Ica<T> {
    pub fn fit_transform(z: &Array2<T>, k: usize, seed: u64) -> Result<(Self, Array2<T>)> {
        let (n, p) = z.dim();
        let max_k = n.saturating_sub(1).min(p);
        if k == 0 || k > max_k {
            return Err(Error::TooManyComponents { requested: k, max: max_k });
        }
        let mean = z.mean_axis(Axis(0)).expect("non-empty");
        let centred = z - &mean;
        let svd = jacobi_svd(&centred);
        let tiny = svd.s[0] * T::epsilon() * T::count(n.max(p));
        let rank = svd.s.iter().filter(|&&s| s > tiny).count();
        if rank < k {
            return Err(Error::RankDeficient { rank, requested: k });
        }
        let root_n = T::count(n).sqrt();
        let mut whitening = svd.v.slice(ndarray::s![.., ..k]).to_owned();
        for (j, mut col) in whitening.columns_mut().into_iter().enumerate() {
            let f = root_n / svd.s[j];
            col.mapv_inplace(|x| x * f);
        }
        let x1 = centred.dot(&whitening);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = Array2::from_shape_fn((k, k), |_| {
            let v: f64 = StandardNormal.sample(&mut rng);
            T::lit(v)
        });
        let mut w = sym_decorrelate(&init);
        let tol = T::lit(ICA_TOL);
        let inv_n = T::one() / T::count(n);
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=ICA_MAX_ITER {
            iterations = it;
            // projections are n x k; column i is w_i . x
            let wx = x1.dot(&w.t());
            let g = wx.mapv(|v| v.tanh());
            let g_prime_mean = g.mapv(|t| T::one() - t * t).mean_axis(Axis(0)).expect("rows");
            let mut w1 = g.t().dot(&x1).mapv(|v| v * inv_n);
            for i in 0..k {
                for j in 0..k {
                    let upd = g_prime_mean[i] * w[[i, j]];
                    w1[[i, j]] -= upd;
                }
            }
            let w1 = sym_decorrelate(&w1);
            let lim = (0..k)
                .map(|i| {
                    let d: T = (0..k).map(|j| w1[[i, j]] * w[[i, j]]).sum();
                    (d.abs() - T::one()).abs()
                })
                .fold(T::zero(), T::max);
            w = w1;
            if lim < tol {
                converged = true;
                break;
            }
        }
        if !converged {
            log::warn!("FastICA did not converge in {ICA_MAX_ITER} iterations; using last estimate");
        }
        let sources = x1.dot(&w.t());
        Ok((
            Self {
                mean,
                whitening,
                unmixing: w,
                iterations,
                converged,
            },
            sources,
        ))
    }

    pub fn transform(&self, x: &Array2<T>) -> Array2<T> {
        (x - &self.mean).dot(&self.whitening).dot(&self.unmixing.t())
    }
}

pub fn ica_fit_transform<T: Scalar>(z: &Array2<T>, k: usize, seed: u64) -> Result<(Ica<T>, Array2<T>)> {
    Ica::fit_transform(z, k, seed)
}
