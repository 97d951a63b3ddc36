//! PLL score files: JSON Lines records produced by an external scorer.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::BiasDataset;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("schema error on line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: {field} is {found:?}, expected {expected:?} like the rest of the file")]
    MixedSet {
        line: usize,
        field: &'static str,
        expected: String,
        found: String,
    },
    #[error("line {line}: duplicate pair_id {pair_id}")]
    DuplicatePair { line: usize, pair_id: String },
    #[error("no score entry matches a dataset pair ({dropped} dropped)")]
    EmptyJoin { dropped: usize },
    #[error("score file contains no records")]
    Empty,
}

/// PLL score function that produced a score file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMeasure {
    Sss,
    Cps,
    Aul,
}

impl ScoreMeasure {
    pub const ALL: [ScoreMeasure; 3] = [ScoreMeasure::Sss, ScoreMeasure::Cps, ScoreMeasure::Aul];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreMeasure::Sss => "sss",
            ScoreMeasure::Cps => "cps",
            ScoreMeasure::Aul => "aul",
        }
    }
}

impl fmt::Display for ScoreMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreMeasure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sss" => Ok(ScoreMeasure::Sss),
            "cps" => Ok(ScoreMeasure::Cps),
            "aul" => Ok(ScoreMeasure::Aul),
            other => Err(format!("unknown score measure {other:?} (expected sss, cps or aul)")),
        }
    }
}

/// Scores of one sentence pair under one score function and one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoredPair {
    pub pair_id: String,
    pub bias_type: String,
    pub model_id: String,
    pub measure: ScoreMeasure,
    pub score_stereo: f64,
    pub score_anti: f64,
}

/// Homogeneous set of scored pairs: one model, one measure, unique pair ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    model_id: String,
    measure: ScoreMeasure,
    entries: Vec<ScoredPair>,
    dropped: usize,
}

impl ScoreSet {
    /// Builds a set from entries that are already known to be homogeneous and unique.
    pub(crate) fn from_parts(model_id: String, measure: ScoreMeasure, entries: Vec<ScoredPair>) -> Self {
        Self {
            model_id,
            measure,
            entries,
            dropped: 0,
        }
    }

    /// Validates homogeneity, uniqueness and finiteness.
    pub fn new(entries: Vec<ScoredPair>) -> Result<Self, ScoreError> {
        let first = entries.first().ok_or(ScoreError::Empty)?;
        let (model_id, measure) = (first.model_id.clone(), first.measure);
        let mut seen = HashSet::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            check_entry(e, &model_id, measure, i + 1)?;
            if !seen.insert(e.pair_id.as_str()) {
                return Err(ScoreError::DuplicatePair {
                    line: i + 1,
                    pair_id: e.pair_id.clone(),
                });
            }
        }
        Ok(Self::from_parts(model_id, measure, entries))
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn measure(&self) -> ScoreMeasure {
        self.measure
    }

    pub fn entries(&self) -> &[ScoredPair] {
        &self.entries
    }

    /// N, the number of scored pairs.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries discarded by the last dataset join.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn stereo_scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score_stereo).collect()
    }

    pub fn anti_scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score_anti).collect()
    }

    pub fn pair_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.pair_id.as_str())
    }

    /// Keeps entries whose pair id satisfies `keep`, preserving order.
    pub fn filter<F: FnMut(&ScoredPair) -> bool>(&self, mut keep: F) -> ScoreSet {
        let entries = self.entries.iter().filter(|e| keep(e)).cloned().collect();
        Self::from_parts(self.model_id.clone(), self.measure, entries)
    }

    /// Serializes to the score-file format.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("scored pair serializes"));
            out.push('\n');
        }
        out
    }
}

fn check_entry(e: &ScoredPair, model_id: &str, measure: ScoreMeasure, line: usize) -> Result<(), ScoreError> {
    if !e.score_stereo.is_finite() || !e.score_anti.is_finite() {
        return Err(ScoreError::Schema {
            line,
            message: "scores must be finite".into(),
        });
    }
    if e.model_id != model_id {
        return Err(ScoreError::MixedSet {
            line,
            field: "model_id",
            expected: model_id.to_string(),
            found: e.model_id.clone(),
        });
    }
    if e.measure != measure {
        return Err(ScoreError::MixedSet {
            line,
            field: "measure",
            expected: measure.to_string(),
            found: e.measure.to_string(),
        });
    }
    Ok(())
}

/// Parses and validates a score file. Blank lines are ignored; line numbers
/// in errors are 1-based positions in `document`.
pub fn load_scores(document: &str) -> Result<ScoreSet, ScoreError> {
    let mut entries: Vec<ScoredPair> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in document.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let entry: ScoredPair = serde_json::from_str(raw).map_err(|e| ScoreError::Schema {
            line,
            message: e.to_string(),
        })?;
        match entries.first() {
            Some(first) => check_entry(&entry, &first.model_id, first.measure, line)?,
            None => check_entry(&entry, &entry.model_id, entry.measure, line)?,
        }
        if !seen.insert(entry.pair_id.clone()) {
            return Err(ScoreError::DuplicatePair {
                line,
                pair_id: entry.pair_id,
            });
        }
        entries.push(entry);
    }
    let first = entries.first().ok_or(ScoreError::Empty)?;
    Ok(ScoreSet::from_parts(first.model_id.clone(), first.measure, entries))
}

/// Overwrites each entry's bias type from the dataset and drops entries
/// with no matching pair id.
pub fn join_with_dataset(scores: &ScoreSet, dataset: &BiasDataset) -> Result<ScoreSet, ScoreError> {
    let types: std::collections::HashMap<&str, &str> = dataset
        .pairs()
        .iter()
        .map(|p| (p.pair_id.as_str(), p.bias_type.as_str()))
        .collect();
    let mut kept = Vec::with_capacity(scores.len());
    let mut dropped = 0;
    for e in &scores.entries {
        match types.get(e.pair_id.as_str()) {
            Some(bias_type) => {
                let mut e = e.clone();
                e.bias_type = (*bias_type).to_string();
                kept.push(e);
            }
            None => dropped += 1,
        }
    }
    if kept.is_empty() {
        return Err(ScoreError::EmptyJoin { dropped });
    }
    let mut out = ScoreSet::from_parts(scores.model_id.clone(), scores.measure, kept);
    out.dropped = dropped;
    Ok(out)
}

/// Partitions a set by bias type.
pub fn split_by_type(scores: &ScoreSet) -> BTreeMap<String, ScoreSet> {
    let mut groups: BTreeMap<String, Vec<ScoredPair>> = BTreeMap::new();
    for e in &scores.entries {
        groups.entry(e.bias_type.clone()).or_default().push(e.clone());
    }
    groups
        .into_iter()
        .map(|(t, entries)| (t, ScoreSet::from_parts(scores.model_id.clone(), scores.measure, entries)))
        .collect()
}
