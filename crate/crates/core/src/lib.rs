//! Social bias measures for masked language models computed from
//! pseudo-log-likelihood (PLL) scores of stereotype / anti-stereotype
//! sentence pairs.
//!
//! Besides the indicator-function score used by earlier benchmarks, the
//! crate models each side's PLL scores as a Gaussian and scores bias with
//! KL divergence (KLS) and Jensen-Shannon divergence (JSS), weighted by
//! bias type. Supporting statistics and a subsampling robustness protocol
//! are included, along with report emitters for the command line tool.

pub mod dataset;
pub mod measures;
pub mod num;
pub mod report;
pub mod robustness;
pub mod scores;
pub mod stats;

pub use dataset::{BiasDataset, DatasetSource, SentencePair};
pub use measures::{BiasScore, MeasureKind};
pub use scores::{ScoreMeasure, ScoreSet, ScoredPair};

/// Gaussian summary of a PLL score set.
pub type GaussianSummary = measures::Gaussian<f64>;
/// Single-precision Gaussian summary.
pub type GaussianSummaryF32 = measures::Gaussian<f32>;
/// Exact rational scalar for group-delta computations.
pub type Rational = num_rational::Ratio<i64>;
/// Group deltas over floating-point scores.
pub type GroupDeltas = robustness::GroupDeltas<f64>;
/// Group deltas computed exactly over rational scores.
pub type ExactGroupDeltas = robustness::GroupDeltas<Rational>;
