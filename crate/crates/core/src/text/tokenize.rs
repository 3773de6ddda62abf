use std::collections::HashSet;
use std::ops::Range;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// A case text split into words, with byte offsets and a stop-word mask.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedCase {
    pub words: Vec<String>,
    pub char_offsets: Vec<(usize, usize)>,
    pub stop_mask: Vec<bool>,
}

impl TokenizedCase {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn non_stop_count(&self) -> usize {
        self.stop_mask.iter().filter(|s| !**s).count()
    }
}

/// A case-insensitive stop-word list.
#[derive(Debug, Clone)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    /// Parses one word per line; blank lines and `#` comments are ignored.
    pub fn parse(list: &str) -> Self {
        let words = list
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(normalize)
            .collect();
        StopWords { words }
    }

    /// The bundled 179-entry English list.
    pub fn bundled() -> &'static StopWords {
        static LIST: OnceLock<StopWords> = OnceLock::new();
        LIST.get_or_init(|| StopWords::parse(BUNDLED_STOPWORDS))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&normalize(word))
    }
}

fn normalize(word: &str) -> String {
    word.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'")
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_apostrophe(c)
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{2018}')
}

/// Byte ranges of the words in `text`.
///
/// A word is a maximal run of alphanumerics and apostrophes, with apostrophes
/// at either edge trimmed off (so quoted words and plural possessives yield
/// the bare word). Runs made only of apostrophes are dropped.
pub fn word_spans(text: &str) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                push_trimmed(text, s..i, &mut spans);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        push_trimmed(text, s..text.len(), &mut spans);
    }
    spans
}

fn push_trimmed(text: &str, span: Range<usize>, out: &mut Vec<Range<usize>>) {
    let run = &text[span.clone()];
    let lead = run.len() - run.trim_start_matches(is_apostrophe).len();
    let trail = run.len() - run.trim_end_matches(is_apostrophe).len();
    if lead + trail < run.len() {
        out.push(span.start + lead..span.end - trail);
    }
}

/// Tokenizes with the bundled stop-word list.
pub fn tokenize(text: &str) -> TokenizedCase {
    tokenize_with(text, StopWords::bundled())
}

pub fn tokenize_with(text: &str, stopwords: &StopWords) -> TokenizedCase {
    let mut out = TokenizedCase::default();
    for span in word_spans(text) {
        let word = &text[span.clone()];
        out.stop_mask.push(stopwords.contains(word));
        out.words.push(word.to_string());
        out.char_offsets.push((span.start, span.end));
    }
    out
}

/// Separator placed between paragraphs when a case is viewed as one text.
pub const PARAGRAPH_SEPARATOR: &str = "\n\n";

/// Tokenizes a list of paragraphs as one text joined by [`PARAGRAPH_SEPARATOR`].
///
/// Returns the case-level tokenization and, per paragraph, the range of word
/// indices it contributes.
pub fn tokenize_paragraphs(
    paragraphs: &[String],
    stopwords: &StopWords,
) -> (TokenizedCase, Vec<Range<usize>>) {
    let mut case = TokenizedCase::default();
    let mut ranges = Vec::with_capacity(paragraphs.len());
    let mut base = 0;
    for (i, p) in paragraphs.iter().enumerate() {
        if i > 0 {
            base += PARAGRAPH_SEPARATOR.len();
        }
        let t = tokenize_with(p, stopwords);
        let start = case.words.len();
        case.words.extend(t.words);
        case.stop_mask.extend(t.stop_mask);
        case.char_offsets
            .extend(t.char_offsets.into_iter().map(|(s, e)| (s + base, e + base)));
        ranges.push(start..case.words.len());
        base += p.len();
    }
    (case, ranges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_sentence() {
        let t = tokenize("The police detained him.");
        assert_eq!(t.words, ["The", "police", "detained", "him"]);
        assert_eq!(t.stop_mask, [true, false, false, true]);
        assert_eq!(t.char_offsets, [(0, 3), (4, 10), (11, 19), (20, 23)]);
    }

    #[test]
    fn empty_text() {
        let t = tokenize("");
        assert!(t.words.is_empty() && t.char_offsets.is_empty() && t.stop_mask.is_empty());
    }

    #[test]
    fn utf8_offsets() {
        let text = "état d'urgence";
        let t = tokenize(text);
        assert_eq!(t.words, ["état", "d'urgence"]);
        // 'é' is two bytes.
        assert_eq!(t.char_offsets, [(0, 5), (6, 15)]);
        for (w, (s, e)) in t.words.iter().zip(&t.char_offsets) {
            assert_eq!(&text[*s..*e], w);
        }
    }

    #[test]
    fn edge_apostrophes_trimmed() {
        let t = tokenize("'quoted' applicants' ' x");
        assert_eq!(t.words, ["quoted", "applicants", "x"]);
    }

    #[test]
    fn bundled_list_size() {
        assert_eq!(StopWords::bundled().len(), 179);
        assert!(StopWords::bundled().contains("Don't"));
        assert!(StopWords::bundled().contains("don\u{2019}t"));
    }

    #[test]
    fn paragraphs_share_offsets_with_joined_text() {
        let paras = vec!["A was arrested.".to_string(), "He was held.".to_string()];
        let (case, ranges) = tokenize_paragraphs(&paras, StopWords::bundled());
        let joined = paras.join(PARAGRAPH_SEPARATOR);
        assert_eq!(case, tokenize(&joined));
        assert_eq!(ranges, vec![0..3, 3..6]);
    }
}
