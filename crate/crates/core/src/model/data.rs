use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Arch, HeadKind};
use crate::corpus::{CaseDocument, CaseSummary, LabelSet};
use crate::error::{Error, Result};
use crate::text::{greedy_pack, tokenize_paragraphs, HashVocab, Packet, StopWords, Token, PARAGRAPH_SEPARATOR};

/// A text as the encoder sees it: packets of vocabulary ids, one id per word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedText {
    pub packets: Vec<Packet>,
    pub n_words: usize,
    pub stop_mask: Vec<bool>,
}

impl EncodedText {
    /// Vocabulary ids of every token, packet after packet.
    pub fn token_ids(&self) -> Vec<usize> {
        self.packets
            .iter()
            .flat_map(|p| p.tokens.iter().map(|&t| t as usize))
            .collect()
    }

    /// Case word index of every token, in the same order as [`Self::token_ids`].
    pub fn word_index(&self) -> Vec<usize> {
        self.packets.iter().flat_map(|p| p.word_index.iter().copied()).collect()
    }

    pub fn packet_lens(&self) -> Vec<usize> {
        self.packets.iter().map(Packet::len).collect()
    }

    pub fn total_tokens(&self) -> usize {
        self.packets.iter().map(Packet::len).sum()
    }
}

/// Turns paragraphs into packets: every word becomes one token hashed into
/// the vocabulary, then tokens are packed greedily at `cap`.
#[derive(Debug, Clone)]
pub struct TextEncoder {
    pub vocab: HashVocab,
    pub cap: usize,
}

impl TextEncoder {
    pub fn new(buckets: u32, cap: usize) -> Self {
        TextEncoder {
            vocab: HashVocab::new(buckets),
            cap,
        }
    }

    pub fn encode(&self, paragraphs: &[String], what: &'static str) -> Result<EncodedText> {
        let (case, ranges) = tokenize_paragraphs(paragraphs, StopWords::bundled());
        if case.is_empty() {
            return Err(Error::EmptyText(what));
        }
        let tokens: Vec<Vec<Token>> = ranges
            .into_iter()
            .map(|r| {
                r.map(|w| Token {
                    id: self.vocab.id(&case.words[w]),
                    word: w,
                })
                .collect()
            })
            .collect();
        Ok(EncodedText {
            packets: greedy_pack(&tokens, self.cap),
            n_words: case.len(),
            stop_mask: case.stop_mask,
        })
    }

    pub fn encode_text(&self, text: &str, what: &'static str) -> Result<EncodedText> {
        let paragraphs: Vec<String> = text.split(PARAGRAPH_SEPARATOR).map(str::to_string).collect();
        self.encode(&paragraphs, what)
    }
}

/// One training or evaluation instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub case_id: String,
    /// The article this instance is about (binary head) or `None` (multilabel).
    pub label_index: Option<usize>,
    pub facts: EncodedText,
    pub second: Option<EncodedText>,
    /// Allegation flag (binary head) or allegation multi-hot.
    pub cond: Vec<f64>,
    pub target: Vec<f64>,
}

/// Second texts available to paired models.
#[derive(Debug, Clone, Copy, Default)]
pub struct SecondTexts<'a> {
    /// Article label ↦ article text, for binary-head paired models.
    pub articles: Option<&'a BTreeMap<String, String>>,
    /// Case id ↦ summary, for multilabel paired models.
    pub summaries: Option<&'a BTreeMap<String, CaseSummary>>,
}

/// Builds instances for one architecture.
///
/// Fact-only and multilabel paired models get one instance per case; the
/// binary paired model gets one instance per (case, label) with the article
/// text as the second input.
pub fn build_examples(
    arch: Arch,
    head: HeadKind,
    docs: &[CaseDocument],
    labels: &LabelSet,
    second: SecondTexts<'_>,
    encoder: &TextEncoder,
) -> Result<Vec<Example>> {
    let mut encoded_articles = BTreeMap::new();
    if arch == Arch::Paired && head == HeadKind::Binary {
        let articles = second
            .articles
            .ok_or_else(|| Error::Config("the article-aware model needs article texts".into()))?;
        for label in labels.labels() {
            let text = articles
                .get(label)
                .ok_or_else(|| Error::Config(format!("no text for article {label}")))?;
            encoded_articles.insert(label.clone(), encoder.encode_text(text, "article text")?);
        }
    }
    let mut out = Vec::new();
    for doc in docs {
        let facts = encoder.encode(&doc.paragraphs, "facts")?;
        let alleged: Vec<f64> = labels.multi_hot(&doc.alleged).into_iter().map(f64::from).collect();
        let violated: Vec<f64> = labels.multi_hot(&doc.violated).into_iter().map(f64::from).collect();
        match (arch, head) {
            (Arch::FactOnly, _) => out.push(Example {
                case_id: doc.case_id.clone(),
                label_index: None,
                facts,
                second: None,
                cond: alleged,
                target: violated,
            }),
            (Arch::Paired, HeadKind::Multilabel) => {
                let summary = second
                    .summaries
                    .ok_or_else(|| Error::Config("the summary-aware model needs summaries".into()))?
                    .get(&doc.case_id)
                    .ok_or_else(|| Error::Config(format!("no summary for case {}", doc.case_id)))?;
                out.push(Example {
                    case_id: doc.case_id.clone(),
                    label_index: None,
                    facts,
                    second: Some(encoder.encode_text(&summary.full_text(), "summary")?),
                    cond: alleged,
                    target: violated,
                });
            }
            (Arch::Paired, HeadKind::Binary) => {
                for (j, label) in labels.labels().iter().enumerate() {
                    out.push(Example {
                        case_id: doc.case_id.clone(),
                        label_index: Some(j),
                        facts: facts.clone(),
                        second: Some(encoded_articles[label].clone()),
                        cond: vec![alleged[j]],
                        target: vec![violated[j]],
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_one_token_per_word() {
        let enc = TextEncoder::new(64, 3);
        let e = enc
            .encode(&["The police came.".into(), "He left".into()], "facts")
            .unwrap();
        assert_eq!(e.n_words, 5);
        assert_eq!(e.packet_lens(), [3, 2]);
        assert_eq!(e.word_index(), [0, 1, 2, 3, 4]);
        assert_eq!(e.token_ids()[0], enc.vocab.id("the") as usize);
        assert_eq!(e.stop_mask, [true, false, false, true, false]);
        assert!(matches!(enc.encode(&["...".into()], "facts"), Err(Error::EmptyText("facts"))));
    }
}
