//! Seeded toy corpus with planted trigger words.
//!
//! Article `j` is violated in a case iff it is alleged and the case facts
//! contain the article's trigger word. The planted rationale of an alleged
//! pair marks the trigger occurrences. Summaries never contain triggers;
//! article texts always contain their own.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{chronological_split, CaseDocument, ProxyFlags, CaseSummary, DatasetSplit, LabelSet};
use crate::error::{Error, Result};
use crate::markup::{MarkupSource, RelevanceMarkup};
use crate::text::{stem, tokenize_paragraphs, HashVocab, StopWords};

/// Annotator name carried by planted rationales.
pub const PLANTED_ANNOTATOR: &str = "planted";

const PROXY_STREAM: u64 = 0x5052_4f58;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_cases: usize,
    /// Number of articles; the first `k` bundled labels are used.
    pub k: usize,
    pub n_valid: usize,
    pub n_test: usize,
    pub min_paragraphs: usize,
    pub max_paragraphs: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub filler_vocab: usize,
    pub p_alleged: f64,
    pub p_trigger: f64,
    /// A present trigger is inserted this many times, drawn uniformly.
    pub min_trigger_repeats: usize,
    pub max_trigger_repeats: usize,
    /// Share of each paragraph's slots given to stop words.
    pub p_stopword: f64,
    /// Vocabulary size whose hash buckets triggers must not share with fillers.
    pub vocab_buckets: u32,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 7,
            n_cases: 200,
            k: 4,
            n_valid: 20,
            n_test: 50,
            min_paragraphs: 3,
            max_paragraphs: 5,
            min_words: 8,
            max_words: 14,
            filler_vocab: 20,
            p_alleged: 0.5,
            p_trigger: 0.5,
            min_trigger_repeats: 3,
            max_trigger_repeats: 5,
            p_stopword: 0.2,
            vocab_buckets: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub labels: Vec<String>,
    /// Trigger word per label, in label order.
    pub triggers: Vec<String>,
    pub docs: Vec<CaseDocument>,
    pub summaries: Vec<CaseSummary>,
    /// Label ↦ article text.
    pub articles: BTreeMap<String, String>,
    /// One planted markup per (case, alleged article).
    pub rationales: Vec<RelevanceMarkup>,
    pub split: DatasetSplit,
}

impl SyntheticCorpus {
    pub fn label_set(&self) -> Result<LabelSet> {
        LabelSet::new(self.labels.clone())
    }

    /// Documents of one split, in corpus order.
    pub fn docs_in(&self, ids: &[String]) -> Vec<CaseDocument> {
        let ids: BTreeSet<&String> = ids.iter().collect();
        self.docs.iter().filter(|d| ids.contains(&d.case_id)).cloned().collect()
    }

    pub fn summary_map(&self) -> BTreeMap<String, CaseSummary> {
        self.summaries.iter().map(|s| (s.case_id.clone(), s.clone())).collect()
    }
}

const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];

fn pseudo_word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).expect("onsets"));
        w.push_str(VOWELS.choose(rng).expect("vowels"));
    }
    w.push_str(["n", "r", "l", "x"].choose(rng).expect("codas"));
    w
}

fn sentence(words: &[String]) -> String {
    let mut s = words.join(" ");
    if let Some(first) = s.get(..1) {
        let upper = first.to_uppercase();
        s.replace_range(..1, &upper);
    }
    s.push('.');
    s
}

/// Builds the corpus; identical configs give identical corpora.
pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCorpus> {
    let bundled = LabelSet::bundled();
    if cfg.k == 0 || cfg.k > bundled.len() {
        return Err(Error::Config(format!("k must be in 1..={}", bundled.len())));
    }
    if cfg.n_valid + cfg.n_test >= cfg.n_cases {
        return Err(Error::Config("validation and test splits leave no training cases".into()));
    }
    if cfg.min_paragraphs == 0 || cfg.min_paragraphs > cfg.max_paragraphs || cfg.min_words == 0 || cfg.min_words > cfg.max_words {
        return Err(Error::Config("paragraph and word ranges must be non-empty".into()));
    }
    if cfg.min_trigger_repeats == 0 || cfg.min_trigger_repeats > cfg.max_trigger_repeats {
        return Err(Error::Config("trigger repeat range must be non-empty and start at 1 or more".into()));
    }
    if cfg.filler_vocab < 10 {
        return Err(Error::Config("filler_vocab must be at least 10".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let stop = StopWords::bundled();
    let vocab = HashVocab::new(cfg.vocab_buckets);
    let labels: Vec<String> = bundled.labels()[..cfg.k].to_vec();

    let mut triggers: Vec<String> = Vec::new();
    let mut trigger_stems = BTreeSet::new();
    let mut trigger_buckets = BTreeSet::new();
    while triggers.len() < cfg.k {
        let w = pseudo_word(&mut rng, 3);
        if stop.contains(&w) || !trigger_stems.insert(stem(&w)) || !trigger_buckets.insert(vocab.id(&w)) {
            continue;
        }
        triggers.push(w);
    }
    let mut fillers: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut attempts = 0;
    while fillers.len() < cfg.filler_vocab {
        attempts += 1;
        if attempts > 1000 * cfg.filler_vocab {
            return Err(Error::Config("could not draw enough distinct filler words".into()));
        }
        let w = pseudo_word(&mut rng, 2);
        if stop.contains(&w)
            || trigger_stems.contains(&stem(&w))
            || trigger_buckets.contains(&vocab.id(&w))
            || !seen.insert(w.clone())
        {
            continue;
        }
        fillers.push(w);
    }
    let stop_fillers = ["the", "and", "of", "to", "in", "was", "he", "by"];

    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    let mut docs = Vec::with_capacity(cfg.n_cases);
    let mut summaries = Vec::with_capacity(cfg.n_cases);
    let mut rationales = Vec::new();
    // A separate stream, so adding proxies leaves the texts unchanged.
    let mut proxy_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ PROXY_STREAM);
    for i in 0..cfg.n_cases {
        let case_id = format!("syn-{i:04}");
        let mut alleged: Vec<bool> = (0..cfg.k).map(|_| rng.gen_bool(cfg.p_alleged)).collect();
        if !alleged.contains(&true) {
            alleged[rng.gen_range(0..cfg.k)] = true;
        }
        let present: Vec<bool> = (0..cfg.k).map(|_| rng.gen_bool(cfg.p_trigger)).collect();

        let n_para = rng.gen_range(cfg.min_paragraphs..=cfg.max_paragraphs);
        let mut paras: Vec<Vec<String>> = (0..n_para)
            .map(|_| {
                let n = rng.gen_range(cfg.min_words..=cfg.max_words);
                (0..n)
                    .map(|_| {
                        if rng.gen_bool(cfg.p_stopword) {
                            stop_fillers.choose(&mut rng).expect("stop fillers").to_string()
                        } else {
                            fillers.choose(&mut rng).expect("fillers").clone()
                        }
                    })
                    .collect()
            })
            .collect();
        for (j, _) in present.iter().enumerate().filter(|(_, &p)| p) {
            for _ in 0..rng.gen_range(cfg.min_trigger_repeats..=cfg.max_trigger_repeats) {
                let p = rng.gen_range(0..paras.len());
                let pos = rng.gen_range(0..=paras[p].len());
                paras[p].insert(pos, triggers[j].clone());
            }
        }
        let paragraphs: Vec<String> = paras.iter().map(|p| sentence(p)).collect();

        let alleged_labels: Vec<String> = (0..cfg.k).filter(|&j| alleged[j]).map(|j| labels[j].clone()).collect();
        let violated_labels: Vec<String> = (0..cfg.k)
            .filter(|&j| alleged[j] && present[j])
            .map(|j| labels[j].clone())
            .collect();

        let (tok, _) = tokenize_paragraphs(&paragraphs, stop);
        for j in (0..cfg.k).filter(|&j| alleged[j]) {
            let bits = tok.words.iter().map(|w| u8::from(w.to_lowercase() == triggers[j])).collect();
            rationales.push(RelevanceMarkup {
                case_id: case_id.clone(),
                article: labels[j].clone(),
                source: MarkupSource::Expert,
                annotator: Some(PLANTED_ANNOTATOR.to_string()),
                bits,
            });
        }

        // Summaries restate part of the facts without any trigger.
        let mut content: Vec<String> = paras
            .iter()
            .flatten()
            .filter(|w| !triggers.contains(w) && !stop.contains(w))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        content.shuffle(&mut rng);
        content.truncate((content.len() * 2 / 5).max(1));
        let mut law_sections = BTreeMap::new();
        for j in (0..cfg.k).filter(|&j| alleged[j]) {
            let words: Vec<String> = (0..8).map(|_| fillers.choose(&mut rng).expect("fillers").clone()).collect();
            law_sections.insert(labels[j].clone(), sentence(&words));
        }
        summaries.push(CaseSummary {
            case_id: case_id.clone(),
            facts_text: sentence(&content),
            law_sections,
            had_conclusion_removed: false,
        });

        let date = start
            .checked_add_days(Days::new(7 * i as u64))
            .ok_or_else(|| Error::Config("date overflow".into()))?;
        let proxies = ProxyFlags {
            judge_split: u8::from(proxy_rng.gen_bool(0.3)),
            key_case: u8::from(proxy_rng.gen_bool(0.3)),
            omit_alleg: u8::from(proxy_rng.gen_bool(0.3)),
            article6: u8::from(alleged_labels.iter().any(|l| l == "6")),
            diff_pred: u8::from(proxy_rng.gen_bool(0.3)),
            diff_fam: u8::from(proxy_rng.gen_bool(0.3)),
            num_para: paragraphs.len() as u32,
        };
        let doc = CaseDocument {
            case_id,
            judgment_date: Some(date),
            paragraphs,
            alleged: alleged_labels,
            violated: violated_labels,
            proxies: Some(proxies),
        };
        doc.validate()?;
        docs.push(doc);
    }

    let mut articles = BTreeMap::new();
    for (j, label) in labels.iter().enumerate() {
        let mut words: Vec<String> = (0..12).map(|_| fillers.choose(&mut rng).expect("fillers").clone()).collect();
        let pos = rng.gen_range(0..=words.len());
        words.insert(pos, triggers[j].clone());
        articles.insert(label.clone(), sentence(&words));
    }

    let n_train = cfg.n_cases - cfg.n_valid - cfg.n_test;
    let date_of = |i: usize| docs[i].judgment_date.expect("dated");
    let split = chronological_split(&docs, date_of(n_train - 1), date_of(n_train + cfg.n_valid - 1))?;

    Ok(SyntheticCorpus {
        labels,
        triggers,
        docs,
        summaries,
        articles,
        rationales,
        split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_structure() {
        let c = generate(&SyntheticConfig::default()).unwrap();
        assert_eq!(c.docs.len(), 200);
        assert_eq!((c.split.train.len(), c.split.valid.len(), c.split.test.len()), (130, 20, 50));
        let labels = c.label_set().unwrap();
        for d in &c.docs {
            let text = d.facts_text().to_lowercase();
            for (j, l) in c.labels.iter().enumerate() {
                let present = text.split(|ch: char| !ch.is_alphanumeric()).any(|w| w == c.triggers[j]);
                let violated = d.violated.contains(l);
                assert_eq!(violated, present && d.alleged.contains(l), "{} {l}", d.case_id);
            }
            assert!(labels.multi_hot(&d.alleged).contains(&1));
        }
        for s in &c.summaries {
            let text = s.full_text().to_lowercase();
            assert!(c.triggers.iter().all(|t| !text.contains(t.as_str())));
        }
        for (j, l) in c.labels.iter().enumerate() {
            assert!(c.articles[l].to_lowercase().contains(&c.triggers[j]));
        }
        let pairs: usize = c.docs.iter().map(|d| d.alleged.len()).sum();
        assert_eq!(c.rationales.len(), pairs);
    }

    #[test]
    fn seeded() {
        let a = generate(&SyntheticConfig::default()).unwrap();
        assert_eq!(a, generate(&SyntheticConfig::default()).unwrap());
        let b = generate(&SyntheticConfig { seed: 8, ..Default::default() }).unwrap();
        assert_ne!(a.docs, b.docs);
    }
}
