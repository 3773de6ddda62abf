use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps each score-bearing sub-token position to the word it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtokenMap {
    pub word_of: Vec<usize>,
    pub n_words: usize,
}

impl SubtokenMap {
    /// One sub-token per word.
    pub fn identity(n_words: usize) -> Self {
        SubtokenMap {
            word_of: (0..n_words).collect(),
            n_words,
        }
    }

    pub fn len(&self) -> usize {
        self.word_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_of.is_empty()
    }
}

/// Max-pools sub-token scores into word scores.
///
/// Words without any sub-token get `f64::NEG_INFINITY`; binarization never
/// selects them.
pub fn maxpool_subtokens(scores: &[f64], map: &SubtokenMap) -> Result<Vec<f64>> {
    if scores.len() != map.len() {
        return Err(Error::LengthMismatch(scores.len(), map.len()));
    }
    let mut out = vec![f64::NEG_INFINITY; map.n_words];
    for (&s, &w) in scores.iter().zip(&map.word_of) {
        let slot = out.get_mut(w).ok_or(Error::IndexOutOfBounds {
            index: w,
            len: map.n_words,
        })?;
        if s > *slot {
            *slot = s;
        }
    }
    Ok(out)
}
