//! Bias measures: the indicator-function score and the Gaussian
//! divergence scores KLS and JSS, overall and weighted by bias type.

mod divergence;
mod gaussian;
mod score;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use divergence::{js_gaussian, jss, kl_gaussian, kls, JS_PANEL_INTERVALS};
pub use gaussian::{fit_gaussian, Gaussian};
pub use score::{
    divergence_scores, indicator_bias_score, indicator_from_pairs, weighted_divergence_scores,
    weighted_measure, DivergenceScores,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("score set is empty")]
    EmptySet,
    #[error("need at least 2 scores, got {0}")]
    TooFewSamples(usize),
    #[error("scores are degenerate (standard deviation {0:e} below 1e-9)")]
    DegenerateDistribution(f64),
    #[error("non-finite score at index {0}")]
    NonFinite(usize),
    #[error("invalid Gaussian parameters (mu {mu}, sigma {sigma})")]
    InvalidParameters { mu: f64, sigma: f64 },
    #[error("per-type scores and counts disagree on bias type {0:?}")]
    KeyMismatch(String),
    #[error("bias type {0:?} has a zero count")]
    ZeroCount(String),
    #[error("cannot aggregate {0} scores with {1} scores")]
    KindMismatch(MeasureKind, MeasureKind),
    #[error("bias type {bias_type:?}: {source}")]
    InType {
        bias_type: String,
        #[source]
        source: Box<MeasureError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Indicator,
    Kls,
    Jss,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] = [MeasureKind::Indicator, MeasureKind::Kls, MeasureKind::Jss];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Indicator => "indicator",
            MeasureKind::Kls => "kls",
            MeasureKind::Jss => "jss",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MeasureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "indicator" => Ok(MeasureKind::Indicator),
            "kls" => Ok(MeasureKind::Kls),
            "jss" => Ok(MeasureKind::Jss),
            other => Err(format!("unknown measure kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Overall,
    BiasType(String),
}

/// A bias score for one model. Indicator lies in [0, 100], KLS in [50, 100], JSS in [0, 100].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasScore<T = f64> {
    pub value: T,
    pub kind: MeasureKind,
    pub model_id: String,
    pub scope: Scope,
}
