use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markup::RelevanceMarkup;

/// Cohen's kappa between two binary vectors.
///
/// When both vectors are constant and identical the chance agreement is 1
/// and the ratio is undefined; that case returns 1.0.
pub fn cohens_kappa(u: &[u8], v: &[u8]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    if u.is_empty() {
        return Err(Error::EmptyText("kappa input"));
    }
    let mut cells = [[0usize; 2]; 2];
    for (&a, &b) in u.iter().zip(v) {
        cells[usize::from(a != 0)][usize::from(b != 0)] += 1;
    }
    let n = u.len() as f64;
    let p_o = (cells[0][0] + cells[1][1]) as f64 / n;
    let u1 = (cells[1][0] + cells[1][1]) as f64 / n;
    let v1 = (cells[0][1] + cells[1][1]) as f64 / n;
    let p_e = u1 * v1 + (1.0 - u1) * (1.0 - v1);
    if p_e == 1.0 {
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Mean and standard error of a set of kappas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation over √n; 0 when n < 2.
    pub se: f64,
}

impl KappaSummary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return KappaSummary { n, mean: 0.0, se: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = if n < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        KappaSummary { n, mean, se }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairKappa {
    pub case_id: String,
    pub article: String,
    pub annotator: String,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub case_id: String,
    pub article: String,
    pub annotator: String,
    pub reason: String,
}

/// Kappa between model and expert markups, per pair and per annotator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub pairs: Vec<PairKappa>,
    pub per_annotator: BTreeMap<String, KappaSummary>,
    /// Over every scored pair regardless of annotator.
    pub overall: KappaSummary,
    pub skipped: Vec<SkippedPair>,
}

/// Annotator name used for expert markups that carry none.
pub const DEFAULT_ANNOTATOR: &str = "expert";

fn annotator_of(m: &RelevanceMarkup) -> &str {
    m.annotator.as_deref().unwrap_or(DEFAULT_ANNOTATOR)
}

/// Scores model markups against expert markups on non-stop-word positions.
///
/// A model markup tagged with the expert's annotator is preferred (it was
/// binarized at that annotator's density); otherwise an untagged model
/// markup for the same pair is used. Expert markups with no marked word are
/// skipped and listed.
pub fn alignment_report(
    model: &[RelevanceMarkup],
    expert: &[RelevanceMarkup],
    stop_masks: &BTreeMap<String, Vec<bool>>,
) -> Result<AlignmentReport> {
    let mut by_key: BTreeMap<(&str, &str, Option<&str>), &RelevanceMarkup> = BTreeMap::new();
    for m in model {
        by_key.insert((&m.case_id, &m.article, m.annotator.as_deref()), m);
    }
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for e in expert {
        let annotator = annotator_of(e);
        let skip = |reason: &str| SkippedPair {
            case_id: e.case_id.clone(),
            article: e.article.clone(),
            annotator: annotator.to_string(),
            reason: reason.to_string(),
        };
        if e.ones() == 0 {
            skipped.push(skip("empty expert markup"));
            continue;
        }
        let m = by_key
            .get(&(e.case_id.as_str(), e.article.as_str(), Some(annotator)))
            .or_else(|| by_key.get(&(e.case_id.as_str(), e.article.as_str(), None)))
            .ok_or_else(|| Error::MissingPair {
                case_id: e.case_id.clone(),
                article: e.article.clone(),
            })?;
        let mask = stop_masks
            .get(&e.case_id)
            .ok_or_else(|| Error::format("stop masks", format!("no stop mask for case {}", e.case_id)))?;
        if m.bits.len() != e.bits.len() {
            return Err(Error::LengthMismatch(m.bits.len(), e.bits.len()));
        }
        if mask.len() != e.bits.len() {
            return Err(Error::LengthMismatch(mask.len(), e.bits.len()));
        }
        let keep = |bits: &[u8]| -> Vec<u8> {
            bits.iter().zip(mask).filter(|(_, &stop)| !stop).map(|(&b, _)| b).collect()
        };
        let (a, b) = (keep(&m.bits), keep(&e.bits));
        if a.is_empty() {
            skipped.push(skip("no content words"));
            continue;
        }
        pairs.push(PairKappa {
            case_id: e.case_id.clone(),
            article: e.article.clone(),
            annotator: annotator.to_string(),
            kappa: cohens_kappa(&a, &b)?,
        });
    }
    let mut grouped: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for p in &pairs {
        grouped.entry(p.annotator.clone()).or_default().push(p.kappa);
    }
    let all: Vec<f64> = pairs.iter().map(|p| p.kappa).collect();
    Ok(AlignmentReport {
        per_annotator: grouped.iter().map(|(k, v)| (k.clone(), KappaSummary::of(v))).collect(),
        overall: KappaSummary::of(&all),
        pairs,
        skipped,
    })
}
