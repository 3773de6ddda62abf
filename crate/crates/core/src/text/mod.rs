//! Tokenization, stemming, stop words, packet packing and sub-token pooling.

mod pack;
mod pool;
mod stem;
mod tokenize;
mod vocab;

pub use pack::{greedy_pack, token_count, Packet, Token};
pub use pool::{maxpool_subtokens, SubtokenMap};
pub use stem::{stem, Porter2, Stemmer};
pub use tokenize::{
    tokenize, tokenize_paragraphs, tokenize_with, word_spans, StopWords, TokenizedCase,
    PARAGRAPH_SEPARATOR,
};
pub use vocab::HashVocab;

/// Bundled Snowball reference pairs (`word<TAB>stem`, one per line).
pub const SNOWBALL_REFERENCE: &str = include_str!("../../data/snowball_ref.tsv");
