//! Run orchestration and report emitters behind the command line tool.

mod evaluate;
mod format;
mod normality;
mod robust;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::dataset::{parse_crowspairs, parse_stereoset, BiasDataset, DatasetError};
use crate::measures::MeasureError;
use crate::robustness::{RobustnessError, SamplingPlan};
use crate::scores::{join_with_dataset, load_scores, ScoreError, ScoreMeasure, ScoreSet};
use crate::stats::StatsError;

pub use evaluate::{evaluate_scores, run_evaluate, DatasetSummary, MeasureMatrix, MeasureReport, ModelReport, SideNormality, TypeRow};
pub use format::{canonical_json, round_sig};
pub use normality::{run_normality, NormalityReport, SideCurve};
pub use robust::{robustness_csv, run_robustness};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Dataset {
        path: PathBuf,
        #[source]
        source: DatasetError,
    },
    #[error("{}: {source}", path.display())]
    Scores {
        path: PathBuf,
        #[source]
        source: ScoreError,
    },
    #[error("{context}: {source}")]
    Measure {
        context: String,
        #[source]
        source: MeasureError,
    },
    #[error("{context}: {source}")]
    Stats {
        context: String,
        #[source]
        source: StatsError,
    },
    #[error("robustness: {0}")]
    Robustness(#[from] RobustnessError),
}

impl ReportError {
    /// 1 configuration, 2 data or schema, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Config(_) => 1,
            ReportError::Io { .. } | ReportError::Dataset { .. } | ReportError::Scores { .. } => 2,
            ReportError::Robustness(
                RobustnessError::TooFewModels(_)
                | RobustnessError::InvalidRate(_)
                | RobustnessError::UnorderedRates
                | RobustnessError::NoRates
                | RobustnessError::NoRepeats,
            ) => 1,
            ReportError::Robustness(RobustnessError::UniverseMismatch(_) | RobustnessError::MeasureMismatch { .. }) => 2,
            ReportError::Measure { .. } | ReportError::Stats { .. } | ReportError::Robustness(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    StereoSet,
    CrowsPairs,
    /// JSON Lines written by `validate --out`.
    Canonical,
}

impl std::str::FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "stereoset" | "ss" => Ok(DatasetKind::StereoSet),
            "crowspairs" | "cp" => Ok(DatasetKind::CrowsPairs),
            "canonical" | "jsonl" => Ok(DatasetKind::Canonical),
            other => Err(format!("unknown dataset kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset_path: PathBuf,
    pub dataset_kind: DatasetKind,
    pub score_paths: Vec<PathBuf>,
    /// Score function whose scores feed KLS, JSS and the normality analysis.
    pub divergence_source: ScoreMeasure,
    pub plan: SamplingPlan,
    pub output_dir: PathBuf,
    pub formats: BTreeSet<ReportFormat>,
    pub kde_grid_size: usize,
}

impl RunConfig {
    pub fn new(dataset_path: impl Into<PathBuf>, dataset_kind: DatasetKind, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            dataset_path: dataset_path.into(),
            dataset_kind,
            score_paths: Vec::new(),
            divergence_source: ScoreMeasure::Aul,
            plan: SamplingPlan::default(),
            output_dir: output_dir.into(),
            formats: [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown].into(),
            kde_grid_size: 512,
        }
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.score_paths.is_empty() {
            return Err(ReportError::Config("at least one score file is required".into()));
        }
        if self.kde_grid_size < 16 {
            return Err(ReportError::Config("KDE grid size must be at least 16".into()));
        }
        self.plan
            .validate()
            .map_err(|e| ReportError::Config(e.to_string()))
    }
}

fn read(path: &Path) -> Result<String, ReportError> {
    fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn load_dataset(path: &Path, kind: DatasetKind) -> Result<BiasDataset, ReportError> {
    let text = read(path)?;
    let parsed = match kind {
        DatasetKind::StereoSet => parse_stereoset(&text),
        DatasetKind::CrowsPairs => parse_crowspairs(&text),
        DatasetKind::Canonical => BiasDataset::from_jsonl(&text),
    };
    parsed.map_err(|source| ReportError::Dataset {
        path: path.to_path_buf(),
        source,
    })
}

/// Score sets joined with the dataset, keyed by model then score measure.
pub type ModelScores = BTreeMap<String, BTreeMap<ScoreMeasure, ScoreSet>>;

pub fn load_joined_scores(paths: &[PathBuf], dataset: &BiasDataset) -> Result<ModelScores, ReportError> {
    let mut out: ModelScores = BTreeMap::new();
    for path in paths {
        let wrap = |source| ReportError::Scores {
            path: path.clone(),
            source,
        };
        let set = load_scores(&read(path)?).map_err(wrap)?;
        let joined = join_with_dataset(&set, dataset).map_err(wrap)?;
        let slot = out.entry(joined.model_id().to_string()).or_default();
        if slot.contains_key(&joined.measure()) {
            return Err(ReportError::Config(format!(
                "{}: a second {} score file for model {}",
                path.display(),
                joined.measure(),
                joined.model_id()
            )));
        }
        slot.insert(joined.measure(), joined);
    }
    Ok(out)
}

/// Summary of a `validate` run.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub source: String,
    pub pairs: usize,
    pub type_counts: BTreeMap<String, usize>,
    pub score_files: Vec<ScoreFileSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreFileSummary {
    pub path: String,
    pub model_id: String,
    pub measure: ScoreMeasure,
    pub matched: usize,
    pub dropped: usize,
}

/// Schema-checks the dataset and every score file. When `canonical_out` is
/// given the parsed dataset is written there as `dataset.jsonl`.
pub fn validate(
    dataset_path: &Path,
    kind: DatasetKind,
    score_paths: &[PathBuf],
    canonical_out: Option<&Path>,
) -> Result<ValidationSummary, ReportError> {
    let dataset = load_dataset(dataset_path, kind)?;
    let mut score_files = Vec::new();
    for path in score_paths {
        let wrap = |source| ReportError::Scores {
            path: path.clone(),
            source,
        };
        let set = load_scores(&read(path)?).map_err(wrap)?;
        let joined = join_with_dataset(&set, &dataset).map_err(wrap)?;
        score_files.push(ScoreFileSummary {
            path: path.display().to_string(),
            model_id: joined.model_id().to_string(),
            measure: joined.measure(),
            matched: joined.len(),
            dropped: joined.dropped(),
        });
    }
    if let Some(dir) = canonical_out {
        write(dir, "dataset.jsonl", &dataset.to_jsonl())?;
    }
    Ok(ValidationSummary {
        source: dataset.source().to_string(),
        pairs: dataset.len(),
        type_counts: dataset.type_counts().clone(),
        score_files,
    })
}

/// File-name-safe form of a model id.
pub(crate) fn file_stem(model_id: &str) -> String {
    model_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}
