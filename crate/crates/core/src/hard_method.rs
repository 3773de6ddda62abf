//! Relevance markups from stemmed-word overlap between case facts and a
//! human summary.

use std::collections::HashSet;

use crate::corpus::CaseSummary;
use crate::markup::{MarkupSource, RelevanceMarkup};
use crate::text::{tokenize, Porter2, Stemmer, TokenizedCase};

/// The summary text compared against one article: the facts section, plus
/// that article's law sub-section when the summary has one.
pub fn select_summary_section(summary: &CaseSummary, article: &str) -> String {
    match summary.law_sections.get(article) {
        Some(law) if summary.facts_text.is_empty() => law.clone(),
        Some(law) => format!("{}\n\n{}", summary.facts_text, law),
        None => summary.facts_text.clone(),
    }
}

/// Marks word `i` iff it is not a stop word and its stem occurs among the
/// stems of the summary words.
pub fn derive_hard_bits(case: &TokenizedCase, summary_text: &str, stemmer: &dyn Stemmer) -> Vec<u8> {
    let summary_stems: HashSet<String> = tokenize(summary_text)
        .words
        .iter()
        .map(|w| stemmer.stem(w))
        .collect();
    case.words
        .iter()
        .zip(&case.stop_mask)
        .map(|(w, &stop)| u8::from(!stop && summary_stems.contains(&stemmer.stem(w))))
        .collect()
}

/// [`derive_hard_bits`] with the Porter2 stemmer, wrapped as a markup.
pub fn derive_hard_markup(
    case_id: &str,
    article: &str,
    case: &TokenizedCase,
    summary_text: &str,
) -> RelevanceMarkup {
    RelevanceMarkup {
        case_id: case_id.to_string(),
        article: article.to_string(),
        source: MarkupSource::Hard,
        annotator: None,
        bits: derive_hard_bits(case, summary_text, &Porter2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::StopWords;
    use std::collections::BTreeMap;

    fn case(words: &[&str]) -> TokenizedCase {
        crate::text::tokenize_with(&words.join(" "), StopWords::bundled())
    }

    #[test]
    fn overlap_example() {
        let c = case(&["police", "detained", "applicant", "lengthy"]);
        let m = derive_hard_markup("c", "5", &c, "He was detained for a lengthy period");
        assert_eq!(m.bits, [0, 1, 0, 1]);
        assert_eq!(m.source, MarkupSource::Hard);
    }

    #[test]
    fn verbatim_summary_marks_all_non_stop_words() {
        let text = "The police detained him in a cell for the night";
        let c = crate::text::tokenize(text);
        let bits = derive_hard_bits(&c, text, &Porter2);
        for (b, stop) in bits.iter().zip(&c.stop_mask) {
            assert_eq!(*b, u8::from(!stop));
        }
    }

    #[test]
    fn empty_summary() {
        let c = case(&["police", "detained"]);
        assert_eq!(derive_hard_bits(&c, "", &Porter2), [0, 0]);
    }

    fn summary(law: &[(&str, &str)]) -> CaseSummary {
        CaseSummary {
            case_id: "c".into(),
            facts_text: "F".into(),
            law_sections: law.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<BTreeMap<_, _>>(),
            had_conclusion_removed: false,
        }
    }

    #[test]
    fn section_selection() {
        assert_eq!(select_summary_section(&summary(&[("3", "L3")]), "3"), "F\n\nL3");
        assert_eq!(select_summary_section(&summary(&[]), "3"), "F");
        assert_eq!(select_summary_section(&summary(&[("6", "L6")]), "3"), "F");
    }
}
