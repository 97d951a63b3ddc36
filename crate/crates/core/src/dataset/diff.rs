use super::{DatasetError, SentencePair};

/// Splits on whitespace and detaches leading/trailing punctuation as
/// single-character tokens. Inner punctuation (`don't`) stays attached.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in sentence.split_whitespace() {
        let chars: Vec<char> = word.chars().collect();
        let start = chars.iter().position(|c| c.is_alphanumeric());
        let Some(start) = start else {
            tokens.extend(chars.iter().map(|c| c.to_string()));
            continue;
        };
        let end = chars.iter().rposition(|c| c.is_alphanumeric()).unwrap() + 1;
        tokens.extend(chars[..start].iter().map(|c| c.to_string()));
        tokens.push(chars[start..end].iter().collect());
        tokens.extend(chars[end..].iter().map(|c| c.to_string()));
    }
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Stereo,
    Anti,
}

/// A token and its index in the tokenized sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionedToken {
    pub position: usize,
    pub text: String,
}

/// Modified (M) and unmodified (U) tokens of a sentence pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSplit {
    pub stereo_modified: Vec<PositionedToken>,
    pub anti_modified: Vec<PositionedToken>,
    /// Shared subsequence, identical for both sentences.
    pub unmodified: Vec<String>,
    pub stereo_unmodified_positions: Vec<usize>,
    pub anti_unmodified_positions: Vec<usize>,
}

impl TokenSplit {
    pub fn modified(&self, side: Side) -> &[PositionedToken] {
        match side {
            Side::Stereo => &self.stereo_modified,
            Side::Anti => &self.anti_modified,
        }
    }

    /// Interleaves modified and unmodified tokens back into the sentence's token sequence.
    pub fn reconstruct(&self, side: Side) -> Vec<String> {
        let (modified, positions) = match side {
            Side::Stereo => (&self.stereo_modified, &self.stereo_unmodified_positions),
            Side::Anti => (&self.anti_modified, &self.anti_unmodified_positions),
        };
        let len = modified.len() + positions.len();
        let mut out = vec![None; len];
        for tok in modified {
            out[tok.position] = Some(tok.text.clone());
        }
        for (text, &pos) in self.unmodified.iter().zip(positions) {
            out[pos] = Some(text.clone());
        }
        out.into_iter().map(|t| t.expect("every position filled")).collect()
    }
}

/// Longest common subsequence as index pairs into `a` and `b`.
fn lcs_alignment(a: &[String], b: &[String]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    // table[i][j] = LCS length of a[i..], b[j..]
    let mut table = vec![0u32; (n + 1) * (m + 1)];
    let idx = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[idx(i, j)] = if a[i] == b[j] {
                table[idx(i + 1, j + 1)] + 1
            } else {
                table[idx(i + 1, j)].max(table[idx(i, j + 1)])
            };
        }
    }
    let mut pairs = Vec::with_capacity(table[0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if table[idx(i + 1, j)] >= table[idx(i, j + 1)] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

fn complement(tokens: &[String], kept: &[usize]) -> Vec<PositionedToken> {
    let mut kept = kept.iter().peekable();
    let mut out = Vec::new();
    for (position, text) in tokens.iter().enumerate() {
        if kept.peek() == Some(&&position) {
            kept.next();
        } else {
            out.push(PositionedToken {
                position,
                text: text.clone(),
            });
        }
    }
    out
}

/// Identifies modified and unmodified tokens with an LCS over word tokens.
pub fn diff_tokens(pair: &SentencePair) -> Result<TokenSplit, DatasetError> {
    let stereo = tokenize(&pair.stereo_sentence);
    let anti = tokenize(&pair.anti_sentence);
    if stereo.is_empty() || anti.is_empty() {
        return Err(DatasetError::EmptySentence(pair.pair_id.clone()));
    }
    let alignment = lcs_alignment(&stereo, &anti);
    let (stereo_pos, anti_pos): (Vec<usize>, Vec<usize>) = alignment.iter().copied().unzip();
    let split = TokenSplit {
        stereo_modified: complement(&stereo, &stereo_pos),
        anti_modified: complement(&anti, &anti_pos),
        unmodified: stereo_pos.iter().map(|&i| stereo[i].clone()).collect(),
        stereo_unmodified_positions: stereo_pos,
        anti_unmodified_positions: anti_pos,
    };
    if split.stereo_modified.is_empty() && split.anti_modified.is_empty() {
        return Err(DatasetError::DegeneratePair(pair.pair_id.clone()));
    }
    Ok(split)
}
