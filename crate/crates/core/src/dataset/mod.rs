//! Benchmark ingestion: StereoSet intrasentence and CrowS-Pairs into one
//! canonical sentence-pair representation.

mod crowspairs;
mod diff;
mod stereoset;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crowspairs::parse_crowspairs;
pub use diff::{diff_tokens, tokenize, PositionedToken, Side, TokenSplit};
pub use stereoset::parse_stereoset;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("malformed dataset: {0}")]
    Malformed(String),
    #[error("degenerate pair {0}: sentences are token-identical")]
    DegeneratePair(String),
    #[error("pair {0} has an empty sentence")]
    EmptySentence(String),
}

impl DatasetError {
    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        DatasetError::Malformed(msg.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    StereoSet,
    CrowsPairs,
}

impl std::fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatasetSource::StereoSet => f.write_str("stereoset"),
            DatasetSource::CrowsPairs => f.write_str("crowspairs"),
        }
    }
}

/// One stereotype/anti-stereotype sentence pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentencePair {
    pub pair_id: String,
    pub bias_type: String,
    pub stereo_sentence: String,
    pub anti_sentence: String,
    pub source: DatasetSource,
}

impl SentencePair {
    fn validate(&self) -> Result<(), DatasetError> {
        if self.bias_type.trim().is_empty() {
            return Err(DatasetError::malformed(format!(
                "pair {} has an empty bias_type",
                self.pair_id
            )));
        }
        if self.stereo_sentence.trim().is_empty() || self.anti_sentence.trim().is_empty() {
            return Err(DatasetError::EmptySentence(self.pair_id.clone()));
        }
        if self.stereo_sentence == self.anti_sentence {
            return Err(DatasetError::malformed(format!(
                "pair {} has identical stereotype and anti-stereotype sentences",
                self.pair_id
            )));
        }
        Ok(())
    }
}

/// A parsed benchmark. `type_counts` always sums to `pairs.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasDataset {
    source: DatasetSource,
    pairs: Vec<SentencePair>,
    type_counts: BTreeMap<String, usize>,
}

impl BiasDataset {
    /// Validates every pair and the uniqueness of pair ids.
    pub fn new(source: DatasetSource, pairs: Vec<SentencePair>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::with_capacity(pairs.len());
        let mut type_counts = BTreeMap::new();
        for pair in &pairs {
            pair.validate()?;
            if pair.source != source {
                return Err(DatasetError::malformed(format!(
                    "pair {} has source {} in a {} dataset",
                    pair.pair_id, pair.source, source
                )));
            }
            if !seen.insert(pair.pair_id.as_str()) {
                return Err(DatasetError::malformed(format!(
                    "duplicate pair_id {}",
                    pair.pair_id
                )));
            }
            *type_counts.entry(pair.bias_type.clone()).or_insert(0) += 1;
        }
        Ok(Self {
            source,
            pairs,
            type_counts,
        })
    }

    pub fn source(&self) -> DatasetSource {
        self.source
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn type_counts(&self) -> &BTreeMap<String, usize> {
        &self.type_counts
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, pair_id: &str) -> Option<&SentencePair> {
        self.pairs.iter().find(|p| p.pair_id == pair_id)
    }

    /// Serializes to the canonical JSON Lines format, one pair per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for pair in &self.pairs {
            out.push_str(&serde_json::to_string(pair).expect("sentence pair serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses the canonical JSON Lines format written by [`BiasDataset::to_jsonl`].
    pub fn from_jsonl(text: &str) -> Result<Self, DatasetError> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let pair: SentencePair = serde_json::from_str(line).map_err(|e| {
                DatasetError::malformed(format!("line {}: {}", lineno + 1, e))
            })?;
            pairs.push(pair);
        }
        let source = pairs
            .first()
            .map(|p| p.source)
            .ok_or_else(|| DatasetError::malformed("canonical dataset has no pairs"))?;
        Self::new(source, pairs)
    }
}
