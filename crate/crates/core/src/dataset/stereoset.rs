use serde::Deserialize;

use super::{BiasDataset, DatasetError, DatasetSource, SentencePair};

#[derive(Deserialize)]
struct Document {
    data: Data,
}

#[derive(Deserialize)]
struct Data {
    intrasentence: Vec<Entry>,
}

#[derive(Deserialize)]
struct Entry {
    id: String,
    bias_type: Option<String>,
    sentences: Vec<Candidate>,
}

#[derive(Deserialize)]
struct Candidate {
    sentence: String,
    gold_label: Option<String>,
}

/// Parses the StereoSet development set, keeping only the intrasentence
/// stereotype / anti-stereotype candidates of each entry.
pub fn parse_stereoset(document: &str) -> Result<BiasDataset, DatasetError> {
    let doc: Document = serde_json::from_str(document)
        .map_err(|e| DatasetError::malformed(format!("StereoSet JSON: {e}")))?;

    let mut pairs = Vec::with_capacity(doc.data.intrasentence.len());
    for (idx, entry) in doc.data.intrasentence.into_iter().enumerate() {
        let mut stereo = None;
        let mut anti = None;
        for cand in entry.sentences {
            let label = cand.gold_label.ok_or_else(|| {
                DatasetError::malformed(format!("entry {} ({}): sentence without gold_label", idx, entry.id))
            })?;
            let slot = match label.as_str() {
                "stereotype" => &mut stereo,
                "anti-stereotype" => &mut anti,
                "unrelated" => continue,
                other => {
                    return Err(DatasetError::malformed(format!(
                        "entry {} ({}): unknown label {other:?}",
                        idx, entry.id
                    )))
                }
            };
            if slot.replace(cand.sentence).is_some() {
                return Err(DatasetError::malformed(format!(
                    "entry {} ({}): label {label:?} appears twice",
                    idx, entry.id
                )));
            }
        }
        let (Some(stereo_sentence), Some(anti_sentence)) = (stereo, anti) else {
            return Err(DatasetError::malformed(format!(
                "entry {} ({}): needs both a stereotype and an anti-stereotype sentence",
                idx, entry.id
            )));
        };
        let bias_type = entry.bias_type.unwrap_or_default();
        pairs.push(SentencePair {
            pair_id: entry.id,
            bias_type,
            stereo_sentence,
            anti_sentence,
            source: DatasetSource::StereoSet,
        });
    }
    BiasDataset::new(DatasetSource::StereoSet, pairs)
}
