//! Column standardisation `z = (x - mean) / std` with population std.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScalerParams<T> {
    pub means: Array1<T>,
    /// Population standard deviations; constant columns record 1.
    pub stds: Array1<T>,
}

impl<T: Scalar> ScalerParams<T> {
    pub fn fit(x: &Array2<T>) -> Result<Self> {
        let n = x.nrows();
        if n < 2 {
            return Err(Error::InsufficientRows {
                needed: 2,
                available: n,
                context: "scaler".into(),
            });
        }
        let mut means = Array1::zeros(x.ncols());
        let mut stds = Array1::zeros(x.ncols());
        for (j, col) in x.axis_iter(Axis(1)).enumerate() {
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                means[j] = first;
                stds[j] = T::one();
                continue;
            }
            let mean = col.sum() / T::count(n);
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / T::count(n);
            means[j] = mean;
            stds[j] = if var > T::zero() { var.sqrt() } else { T::one() };
        }
        Ok(Self { means, stds })
    }

    pub fn transform(&self, x: &Array2<T>) -> Result<Array2<T>> {
        if x.ncols() != self.means.len() {
            return Err(Error::Shape(format!(
                "scaler fitted on {} columns, got {}",
                self.means.len(),
                x.ncols()
            )));
        }
        Ok((x - &self.means) / &self.stds)
    }
}

pub fn scaler_fit_transform<T: Scalar>(x: &Array2<T>) -> Result<(ScalerParams<T>, Array2<T>)> {
    let p = ScalerParams::fit(x)?;
    let z = p.transform(x)?;
    Ok((p, z))
}
