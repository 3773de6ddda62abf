//! Binary relevance markups over case words and their span-based file form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a markup came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkupSource {
    Expert,
    Hard,
    Model,
    Random,
}

impl fmt::Display for MarkupSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarkupSource::Expert => "expert",
            MarkupSource::Hard => "hard",
            MarkupSource::Model => "model",
            MarkupSource::Random => "random",
        })
    }
}

impl FromStr for MarkupSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "expert" => MarkupSource::Expert,
            "hard" => MarkupSource::Hard,
            "model" => MarkupSource::Model,
            "random" => MarkupSource::Random,
            other => return Err(Error::format("markup source", other.to_string())),
        })
    }
}

/// A 0/1 vector over the words of one case, for one article.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceMarkup {
    pub case_id: String,
    pub article: String,
    pub source: MarkupSource,
    pub annotator: Option<String>,
    pub bits: Vec<u8>,
}

impl RelevanceMarkup {
    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn to_record(&self) -> MarkupRecord {
        MarkupRecord {
            case_id: self.case_id.clone(),
            article: self.article.clone(),
            source: self.source,
            annotator: self.annotator.clone(),
            n_words: self.bits.len(),
            spans: bits_to_spans(&self.bits),
        }
    }
}

/// Serialized markup: half-open word spans `[start, end)` plus the word
/// count, which makes the bits/spans conversion lossless.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkupRecord {
    pub case_id: String,
    pub article: String,
    pub source: MarkupSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotator: Option<String>,
    pub n_words: usize,
    pub spans: Vec<(usize, usize)>,
}

impl MarkupRecord {
    pub fn to_markup(&self) -> Result<RelevanceMarkup> {
        Ok(RelevanceMarkup {
            case_id: self.case_id.clone(),
            article: self.article.clone(),
            source: self.source,
            annotator: self.annotator.clone(),
            bits: spans_to_bits(&self.spans, self.n_words)?,
        })
    }
}

/// Maximal runs of ones as half-open spans.
pub fn bits_to_spans(bits: &[u8]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, &b) in bits.iter().enumerate() {
        match (b != 0, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, bits.len()));
    }
    spans
}

pub fn spans_to_bits(spans: &[(usize, usize)], n_words: usize) -> Result<Vec<u8>> {
    let mut bits = vec![0u8; n_words];
    for &(s, e) in spans {
        if s > e || e > n_words {
            return Err(Error::format(
                "markup span",
                format!("[{s}, {e}) outside {n_words} words"),
            ));
        }
        bits[s..e].fill(1);
    }
    Ok(bits)
}

/// Contents of a `*.markup.json` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MarkupFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<serde_json::Value>,
    pub markups: Vec<MarkupRecord>,
}

impl MarkupFile {
    /// Accepts the `{header?, markups}` form, a bare array of records, or a
    /// single record object.
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value {
            serde_json::Value::Array(_) => Ok(MarkupFile {
                header: None,
                markups: serde_json::from_value(value)?,
            }),
            serde_json::Value::Object(ref m) if m.contains_key("markups") => {
                Ok(serde_json::from_value(value)?)
            }
            _ => Ok(MarkupFile {
                header: None,
                markups: vec![serde_json::from_value(value)?],
            }),
        }
    }

    pub fn to_markups(&self) -> Result<Vec<RelevanceMarkup>> {
        self.markups.iter().map(MarkupRecord::to_markup).collect()
    }

    pub fn from_markups(header: Option<serde_json::Value>, markups: &[RelevanceMarkup]) -> Self {
        MarkupFile {
            header,
            markups: markups.iter().map(RelevanceMarkup::to_record).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn bits_spans_lossless(bits in proptest::collection::vec(0u8..2, 0..200)) {
            let spans = bits_to_spans(&bits);
            prop_assert_eq!(spans_to_bits(&spans, bits.len()).unwrap(), bits);
        }
    }

    #[test]
    fn span_out_of_range() {
        assert!(spans_to_bits(&[(2, 5)], 4).is_err());
    }

    #[test]
    fn file_forms() {
        let rec = r#"{"case_id":"c","article":"3","source":"expert","annotator":"a1","n_words":4,"spans":[[1,3]]}"#;
        let single = MarkupFile::parse(rec).unwrap();
        let array = MarkupFile::parse(&format!("[{rec}]")).unwrap();
        let wrapped = MarkupFile::parse(&format!(r#"{{"markups":[{rec}]}}"#)).unwrap();
        assert_eq!(single, array);
        assert_eq!(array, wrapped);
        assert_eq!(single.to_markups().unwrap()[0].bits, [0, 1, 1, 0]);
    }
}
