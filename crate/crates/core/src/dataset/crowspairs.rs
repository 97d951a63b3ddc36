use super::{BiasDataset, DatasetError, DatasetSource, SentencePair};

const REQUIRED: [&str; 4] = ["sent_more", "sent_less", "stereo_antistereo", "bias_type"];

/// Parses the CrowS-Pairs CSV. Rows flagged `antistereo` are swapped so that
/// `stereo_sentence` always holds the stereotypical member.
pub fn parse_crowspairs(document: &str) -> Result<BiasDataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(document.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| DatasetError::malformed(format!("CrowS-Pairs header: {e}")))?
        .clone();
    let mut cols = [0usize; 4];
    for (slot, name) in cols.iter_mut().zip(REQUIRED) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DatasetError::malformed(format!("CrowS-Pairs: missing column {name:?}")))?;
    }
    let [more_col, less_col, dir_col, type_col] = cols;

    let mut pairs = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DatasetError::malformed(format!("CrowS-Pairs row {row_idx}: {e}")))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let (more, less) = (field(more_col), field(less_col));
        let bias_type = field(type_col).trim();
        if more.trim().is_empty() || less.trim().is_empty() {
            return Err(DatasetError::malformed(format!("CrowS-Pairs row {row_idx}: empty sentence")));
        }
        if bias_type.is_empty() {
            return Err(DatasetError::malformed(format!("CrowS-Pairs row {row_idx}: empty bias_type")));
        }
        let (stereo, anti) = match field(dir_col).trim() {
            "stereo" => (more, less),
            "antistereo" => (less, more),
            other => {
                return Err(DatasetError::malformed(format!(
                    "CrowS-Pairs row {row_idx}: unknown direction flag {other:?}"
                )))
            }
        };
        pairs.push(SentencePair {
            pair_id: row_idx.to_string(),
            bias_type: bias_type.to_string(),
            stereo_sentence: stereo.to_string(),
            anti_sentence: anti.to_string(),
            source: DatasetSource::CrowsPairs,
        });
    }
    BiasDataset::new(DatasetSource::CrowsPairs, pairs)
}
