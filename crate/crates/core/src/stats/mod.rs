//! Statistical support for the score analysis: normality testing, kernel
//! density estimation, Pearson correlation and k-NN mutual information.

mod correlation;
mod kde;
mod mi;
mod shapiro;

use thiserror::Error;

pub use correlation::pearson;
pub use kde::{kde, silverman_bandwidth, DensityCurve};
pub use mi::{mutual_information, DEFAULT_NEIGHBORS};
pub use shapiro::{shapiro_wilk, NormalityResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample size {n} outside the supported range {min}..={max}")]
    SampleSize { n: usize, min: usize, max: usize },
    #[error("sample is degenerate: {0}")]
    DegenerateSample(&'static str),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
}

pub(crate) fn check_finite(sample: &[f64]) -> Result<(), StatsError> {
    match sample.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(StatsError::NonFinite(i)),
        None => Ok(()),
    }
}

pub(crate) fn mean(sample: &[f64]) -> f64 {
    sample.iter().sum::<f64>() / sample.len() as f64
}
