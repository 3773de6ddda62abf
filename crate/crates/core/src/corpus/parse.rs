use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{AllegationRecord, CaseSummary, LabelSet};
use crate::error::{Error, Result};

/// Heading and article patterns used by the parsers.
///
/// All patterns are matched line by line. The defaults are case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusPatterns {
    pub facts: String,
    pub law: String,
    pub conclusion: String,
    /// Start of the operative part of a judgment.
    pub reasons: String,
    /// Article mention; group 1 is the article number or `P<n>-<m>` label,
    /// groups 2/3 capture "Article <m> of Protocol No. <n>".
    pub article: String,
    /// Numbered-paragraph marker at line start.
    pub paragraph_marker: String,
}

impl Default for CorpusPatterns {
    fn default() -> Self {
        CorpusPatterns {
            facts: r"(?i)^\s*(THE )?FACTS\b".into(),
            law: r"(?i)^\s*(THE )?LAW\b".into(),
            conclusion: r"(?i)^\s*Conclusion\b".into(),
            reasons: r"(?i)^\s*FOR THESE REASONS\b".into(),
            article: r"(?i)\bArt(?:icle|\.)\s*(?:(\d+)\s+of\s+Protocol\s+No\.?\s*(\d+)|(\d+|P\d+-\d+))".into(),
            paragraph_marker: r"^\s*\d+\.\s+".into(),
        }
    }
}

/// Compiled parser. Construct once and reuse; it is `Sync`.
#[derive(Debug, Clone)]
pub struct CorpusParser {
    facts: Regex,
    law: Regex,
    conclusion: Regex,
    reasons: Regex,
    article: Regex,
    paragraph_marker: Regex,
    labels: LabelSet,
}

impl Default for CorpusParser {
    fn default() -> Self {
        CorpusParser::new(&CorpusPatterns::default(), LabelSet::bundled().clone())
            .expect("default patterns compile")
    }
}

fn compile(name: &str, pattern: &str) -> Result<Regex> {
    Regex::new(pattern).map_err(|e| Error::Config(format!("pattern `{name}`: {e}")))
}

// Separators allowed between a heading keyword and same-line content.
const HEADING_PUNCT: &[char] = &['-', '–', '—', ':', '.', ' ', '\t'];

impl CorpusParser {
    pub fn new(patterns: &CorpusPatterns, labels: LabelSet) -> Result<Self> {
        Ok(CorpusParser {
            facts: compile("facts", &patterns.facts)?,
            law: compile("law", &patterns.law)?,
            conclusion: compile("conclusion", &patterns.conclusion)?,
            reasons: compile("reasons", &patterns.reasons)?,
            article: compile("article", &patterns.article)?,
            paragraph_marker: compile("paragraph_marker", &patterns.paragraph_marker)?,
            labels,
        })
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    /// Extracts the facts paragraphs of a judgment.
    ///
    /// The facts run from the first facts heading to the next law or
    /// operative-part heading (or end of text). Paragraphs are separated by
    /// blank lines or by numbered markers ("1.", "2.") at line start; the
    /// markers are stripped and wrapped lines joined with a space.
    pub fn parse_facts(&self, raw_judgment: &str) -> Result<Vec<String>> {
        let lines: Vec<&str> = raw_judgment.lines().collect();
        let start = lines
            .iter()
            .position(|l| self.facts.is_match(l))
            .ok_or(Error::MissingFactsSection)?;
        let end = lines[start + 1..]
            .iter()
            .position(|l| self.law.is_match(l) || self.reasons.is_match(l))
            .map_or(lines.len(), |i| start + 1 + i);

        let mut paragraphs = Vec::new();
        let mut current: Vec<&str> = Vec::new();
        let flush = |current: &mut Vec<&str>, out: &mut Vec<String>| {
            if !current.is_empty() {
                out.push(current.join(" "));
                current.clear();
            }
        };
        for line in &lines[start + 1..end] {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                flush(&mut current, &mut paragraphs);
                continue;
            }
            if let Some(m) = self.paragraph_marker.find(line) {
                flush(&mut current, &mut paragraphs);
                let rest = line[m.end()..].trim();
                if !rest.is_empty() {
                    current.push(rest);
                }
                continue;
            }
            current.push(trimmed);
        }
        flush(&mut current, &mut paragraphs);
        if paragraphs.is_empty() {
            return Err(Error::EmptyFacts);
        }
        Ok(paragraphs)
    }

    /// Article labels mentioned in `text`, in order of first mention.
    pub fn article_mentions(&self, text: &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for caps in self.article.captures_iter(text) {
            let label = match (caps.get(1), caps.get(2), caps.get(3)) {
                (Some(art), Some(protocol), _) => {
                    format!("P{}-{}", protocol.as_str(), art.as_str())
                }
                (_, _, Some(l)) => l.as_str().to_uppercase(),
                _ => continue,
            };
            if !out.contains(&label) {
                out.push(label);
            }
        }
        out
    }

    /// Parses a summary into its facts text and per-article law sub-sections,
    /// dropping every conclusion sub-section.
    ///
    /// A law sub-section starts at a law heading or at a line beginning with
    /// an article mention, and is keyed by the first article on that line.
    /// A conclusion heading opens a sub-section that is discarded up to the
    /// next sub-section heading.
    pub fn parse_summary(&self, case_id: &str, raw_summary: &str) -> Result<CaseSummary> {
        let lines: Vec<&str> = raw_summary.lines().collect();
        let facts_at = lines
            .iter()
            .position(|l| self.facts.is_match(l))
            .ok_or(Error::MissingFactsSection)?;

        let mut summary = CaseSummary {
            case_id: case_id.to_string(),
            ..Default::default()
        };

        enum Section {
            Facts,
            Law,
            Conclusion,
        }
        let mut section = Section::Facts;
        let mut facts: Vec<&str> = vec![self.after_heading(&self.facts, lines[facts_at])];
        let mut law: Vec<(Option<String>, Vec<&str>)> = Vec::new();

        for line in &lines[facts_at + 1..] {
            let law_heading = self.law.is_match(line);
            let article_heading = self
                .article
                .find(line)
                .is_some_and(|m| line[..m.start()].trim().is_empty());
            if self.conclusion.is_match(line) {
                section = Section::Conclusion;
                summary.had_conclusion_removed = true;
            } else if law_heading || (article_heading && !matches!(section, Section::Facts)) {
                let body = if law_heading {
                    self.after_heading(&self.law, line)
                } else {
                    line.trim()
                };
                let key = self.article_mentions(body).into_iter().next();
                law.push((key, vec![body]));
                section = Section::Law;
            } else {
                match &section {
                    Section::Facts => facts.push(line),
                    Section::Law => law.last_mut().expect("open law section").1.push(line),
                    Section::Conclusion => {}
                }
            }
        }

        summary.facts_text = join_trimmed(&facts);
        for (key, body) in law {
            let Some(key) = key else { continue };
            let text = join_trimmed(&body);
            if text.is_empty() {
                continue;
            }
            summary
                .law_sections
                .entry(key)
                .and_modify(|s| {
                    s.push('\n');
                    s.push_str(&text);
                })
                .or_insert(text);
        }
        Ok(summary)
    }

    fn after_heading<'a>(&self, heading: &Regex, line: &'a str) -> &'a str {
        match heading.find(line) {
            Some(m) => line[m.end()..].trim_start_matches(HEADING_PUNCT).trim_end(),
            None => line.trim(),
        }
    }

    /// Curates the allegation set of a judgment.
    ///
    /// Conclusion articles are the in-list articles mentioned in the
    /// operative part ("FOR THESE REASONS" to end). Law-header articles are
    /// the in-list articles mentioned on heading lines of the law section,
    /// where a heading line is one whose letters are at least 80% uppercase.
    /// Metadata articles are always kept.
    pub fn curate_allegations(
        &self,
        case_id: &str,
        raw_judgment: &str,
        metadata_articles: &[String],
    ) -> AllegationRecord {
        let lines: Vec<&str> = raw_judgment.lines().collect();
        let reasons_at = lines.iter().position(|l| self.reasons.is_match(l));
        let law_at = lines
            .iter()
            .position(|l| self.law.is_match(l))
            .filter(|&i| reasons_at.is_none_or(|r| i < r));

        let in_list = |v: Vec<String>| -> Vec<String> {
            v.into_iter().filter(|l| self.labels.contains(l)).collect()
        };
        let conclusion_articles = match reasons_at {
            Some(r) => in_list(self.article_mentions(&lines[r..].join("\n"))),
            None => Vec::new(),
        };
        let law_header_articles = match law_at {
            Some(l) => {
                let end = reasons_at.unwrap_or(lines.len());
                let headers: Vec<&str> = lines[l + 1..end]
                    .iter()
                    .copied()
                    .filter(|line| is_heading_line(line))
                    .collect();
                in_list(self.article_mentions(&headers.join("\n")))
            }
            None => Vec::new(),
        };

        let mut curated: Vec<String> = metadata_articles.to_vec();
        for a in conclusion_articles.iter().chain(&law_header_articles) {
            if !curated.contains(a) {
                curated.push(a.clone());
            }
        }
        let mut metadata_articles = metadata_articles.to_vec();
        let mut conclusion_articles = conclusion_articles;
        let mut law_header_articles = law_header_articles;
        for v in [
            &mut metadata_articles,
            &mut conclusion_articles,
            &mut law_header_articles,
            &mut curated,
        ] {
            self.labels.sort(v);
            v.dedup();
        }
        AllegationRecord {
            case_id: case_id.to_string(),
            metadata_articles,
            conclusion_articles,
            law_header_articles,
            curated,
        }
    }
}

fn join_trimmed(lines: &[&str]) -> String {
    lines
        .iter()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

fn is_heading_line(line: &str) -> bool {
    let letters: Vec<char> = line.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() < 3 || line.len() > 200 {
        return false;
    }
    let upper = letters.iter().filter(|c| c.is_uppercase()).count();
    upper * 5 >= letters.len() * 4
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parser() -> CorpusParser {
        CorpusParser::default()
    }

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn facts_numbered_paragraphs() {
        let doc = "PROCEDURE\n1. Lodged.\nTHE FACTS\n1. A was arrested.\n2. A was held.\nTHE LAW\n3. Complaint.";
        assert_eq!(
            parser().parse_facts(doc).unwrap(),
            ["A was arrested.", "A was held."]
        );
    }

    #[test]
    fn facts_missing_heading() {
        assert!(matches!(
            parser().parse_facts("PROCEDURE\n1. Something.\n"),
            Err(Error::MissingFactsSection)
        ));
    }

    #[test]
    fn facts_empty() {
        assert!(matches!(
            parser().parse_facts("THE FACTS\n\n   \nTHE LAW\n1. x"),
            Err(Error::EmptyFacts)
        ));
    }

    #[test]
    fn facts_run_to_end_of_file() {
        let doc = "THE FACTS\n\nFirst paragraph\nwraps here.\n\nSecond one.\n3. Third.";
        assert_eq!(
            parser().parse_facts(doc).unwrap(),
            ["First paragraph wraps here.", "Second one.", "Third."]
        );
    }

    #[test]
    fn summary_with_two_articles_and_conclusion() {
        let raw = "Facts – The applicant was detained for a lengthy period.\n\
                   He complained.\n\
                   Law – Article 3: The conditions were degrading.\n\
                   Conclusion: violation (unanimously).\n\
                   Law – Article 6 § 1: The proceedings were unfair.\n\
                   Conclusion: violation (six votes to one).";
        let s = parser().parse_summary("c1", raw).unwrap();
        assert_eq!(
            s.facts_text,
            "The applicant was detained for a lengthy period.\nHe complained."
        );
        assert_eq!(s.law_sections.keys().collect::<Vec<_>>(), ["3", "6"]);
        assert_eq!(s.law_sections["3"], "Article 3: The conditions were degrading.");
        assert!(s.had_conclusion_removed);
        for text in s.law_sections.values() {
            assert!(!text.to_lowercase().contains("conclusion"));
        }
    }

    #[test]
    fn summary_facts_only() {
        let s = parser().parse_summary("c", "Facts\nThe applicant sued.").unwrap();
        assert_eq!(s.facts_text, "The applicant sued.");
        assert!(s.law_sections.is_empty());
        assert!(!s.had_conclusion_removed);
    }

    #[test]
    fn conclusion_mid_section_only_removes_its_subsection() {
        let raw = "Facts: F.\nLaw – Article 5: Reasoning one.\nMore reasoning.\nConclusion: violation.\nArticle 8: Private life.\nStill article 8.";
        let s = parser().parse_summary("c", raw).unwrap();
        assert_eq!(s.law_sections["5"], "Article 5: Reasoning one.\nMore reasoning.");
        assert_eq!(s.law_sections["8"], "Article 8: Private life.\nStill article 8.");
        assert!(s.had_conclusion_removed);
    }

    #[test]
    fn summary_without_facts_fails() {
        assert!(matches!(
            parser().parse_summary("c", "Law – Article 3: x"),
            Err(Error::MissingFactsSection)
        ));
    }

    #[test]
    fn curate_adds_conclusion_articles() {
        let doc = "THE FACTS\n1. x\nTHE LAW\n2. y\nFOR THESE REASONS, THE COURT\n1. Holds that there has been a violation of Art. 3;\n2. Holds that there has been no violation of Art. 6;\n3. Holds under Article 41 ...";
        let rec = parser().curate_allegations("c", doc, &labels(&["3"]));
        assert_eq!(rec.conclusion_articles, ["3", "6"]);
        assert_eq!(rec.curated, ["3", "6"]);
    }

    #[test]
    fn curate_empty() {
        let rec = parser().curate_allegations("c", "THE FACTS\n1. x", &[]);
        assert!(rec.curated.is_empty());
    }

    #[test]
    fn curate_from_law_header() {
        let doc = "THE FACTS\n1. x\nTHE LAW\nI. ALLEGED VIOLATION OF ARTICLE 8 OF THE CONVENTION\n2. The applicant relied on Article 13.\nII. ALLEGED VIOLATION OF ARTICLE 14\n3. z";
        let rec = parser().curate_allegations("c", doc, &labels(&["8"]));
        assert_eq!(rec.law_header_articles, ["8", "14"]);
        assert_eq!(rec.curated, ["8", "14"]);
    }

    #[test]
    fn protocol_articles() {
        let m = parser().article_mentions("ARTICLE 1 OF PROTOCOL No. 1 and Article P1-3");
        assert_eq!(m, ["P1-1", "P1-3"]);
    }
}
