//! Case records, judgment/summary parsing, allegation curation and
//! chronological splits.

mod io;
mod labels;
mod parse;
mod split;

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use io::{
    read_allegations_csv, read_jsonl, write_allegations_csv, write_jsonl, JSONL_HEADER_KEY,
};
pub use labels::LabelSet;
pub use parse::{CorpusParser, CorpusPatterns};
pub use split::{chronological_split, DatasetSplit};

/// One case: facts paragraphs plus allegation and violation labels.
///
/// `alleged` and `violated` are label sets kept in file order; `violated`
/// must be a subset of `alleged`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDocument {
    pub case_id: String,
    pub judgment_date: Option<NaiveDate>,
    pub paragraphs: Vec<String>,
    pub alleged: Vec<String>,
    pub violated: Vec<String>,
    pub proxies: Option<ProxyFlags>,
}

impl CaseDocument {
    /// Checks the record invariants: non-empty paragraphs, no duplicate
    /// labels, violated ⊆ alleged.
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |detail: String| crate::Error::format("case document", detail);
        if self.paragraphs.is_empty() {
            return Err(bad(format!("{}: no paragraphs", self.case_id)));
        }
        for set in [&self.alleged, &self.violated] {
            let mut seen = std::collections::HashSet::new();
            if let Some(dup) = set.iter().find(|l| !seen.insert(*l)) {
                return Err(bad(format!("{}: duplicate label {dup}", self.case_id)));
            }
        }
        if let Some(v) = self.violated.iter().find(|v| !self.alleged.contains(v)) {
            return Err(bad(format!("{}: violated {v} not alleged", self.case_id)));
        }
        if let Some(p) = &self.proxies {
            if p.num_para as usize != self.paragraphs.len() {
                return Err(bad(format!("{}: num_para disagrees with paragraphs", self.case_id)));
            }
        }
        Ok(())
    }

    /// The facts paragraphs as a single text.
    pub fn facts_text(&self) -> String {
        self.paragraphs.join(crate::text::PARAGRAPH_SEPARATOR)
    }
}

/// Binary proxy variables for annotator disagreement, plus paragraph count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProxyFlags {
    pub judge_split: u8,
    pub key_case: u8,
    pub omit_alleg: u8,
    pub article6: u8,
    pub diff_pred: u8,
    pub diff_fam: u8,
    pub num_para: u32,
}

impl ProxyFlags {
    pub const BINARY_NAMES: [&'static str; 6] = [
        "judge_split",
        "key_case",
        "omit_alleg",
        "article6",
        "diff_pred",
        "diff_fam",
    ];

    pub fn binary(&self) -> [u8; 6] {
        [
            self.judge_split,
            self.key_case,
            self.omit_alleg,
            self.article6,
            self.diff_pred,
            self.diff_fam,
        ]
    }
}

/// A parsed human summary with the conclusion sub-sections stripped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub case_id: String,
    pub facts_text: String,
    pub law_sections: BTreeMap<String, String>,
    pub had_conclusion_removed: bool,
}

impl CaseSummary {
    /// Facts followed by every law sub-section, the input used by the
    /// summary-conditioned model.
    pub fn full_text(&self) -> String {
        let mut out = self.facts_text.clone();
        for section in self.law_sections.values() {
            if !out.is_empty() {
                out.push_str("\n\n");
            }
            out.push_str(section);
        }
        out
    }
}

/// Allegations from metadata, the conclusions section and law-section headers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllegationRecord {
    pub case_id: String,
    pub metadata_articles: Vec<String>,
    pub conclusion_articles: Vec<String>,
    pub law_header_articles: Vec<String>,
    pub curated: Vec<String>,
}
