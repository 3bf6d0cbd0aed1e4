pub mod dataset;
pub mod error;
pub mod features;
pub mod fuzzy;
pub mod hocr;
pub mod image;
pub mod pipeline;
pub mod plot;
pub mod reduce;
pub mod report;
pub mod rows;
pub mod scalar;
pub mod shift;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type FuzzyModelF64 = fuzzy::FuzzyModel<f64>;
pub type FuzzyModelF32 = fuzzy::FuzzyModel<f32>;
pub type PcaF64 = reduce::Pca<f64>;
pub type IcaF64 = reduce::Ica<f64>;
pub type KernelPcaF64 = reduce::KernelPca<f64>;
pub type ScalerParamsF64 = reduce::ScalerParams<f64>;
pub type ReducedDataF64 = reduce::ReducedData<f64>;
pub type ReducedDataF32 = reduce::ReducedData<f32>;
pub type ClusterOutcomeF64 = report::ClusterOutcome<f64>;
