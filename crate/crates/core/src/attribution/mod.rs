//! Integrated-gradients attribution and density-based binarization into
//! model relevance markups.

mod binarize;
mod ig;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use binarize::{annotation_density, binarize_by_density};
pub use ig::{completeness_gap, integrated_gradients, IgResult, Quadrature};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::markup::{MarkupSource, RelevanceMarkup};
use crate::model::{Example, HeadKind, Model};
use crate::text::{maxpool_subtokens, SubtokenMap};

/// Default number of quadrature intervals.
pub const DEFAULT_STEPS: usize = 50;

/// Token and word importance for one (case, article) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionMap {
    pub case_id: String,
    pub article: String,
    /// One score per token, in packet order.
    pub scores: Vec<f64>,
    /// Word each token belongs to.
    pub word_index: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub word_scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completeness_gap: Option<f64>,
}

impl AttributionMap {
    /// Word scores for a case of `n_words` words, max-pooled from the token
    /// scores unless already present.
    pub fn pooled(&self, n_words: usize) -> Result<Vec<f64>> {
        if self.word_scores.len() == n_words {
            return Ok(self.word_scores.clone());
        }
        let map = SubtokenMap {
            word_of: self.word_index.clone(),
            n_words,
        };
        maxpool_subtokens(&self.scores, &map)
    }
}

/// Contents of a `*.attr.json` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttrFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<serde_json::Value>,
    pub attributions: Vec<AttributionMap>,
}

impl AttrFile {
    /// Accepts the `{header?, attributions}` form, a bare array, or a single
    /// record.
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value {
            serde_json::Value::Array(_) => Ok(AttrFile {
                header: None,
                attributions: serde_json::from_value(value)?,
            }),
            serde_json::Value::Object(ref m) if m.contains_key("attributions") => Ok(serde_json::from_value(value)?),
            _ => Ok(AttrFile {
                header: None,
                attributions: vec![serde_json::from_value(value)?],
            }),
        }
    }
}

/// Output columns to explain for `ex`: `(label index, logit column)` for
/// every alleged article.
pub fn alleged_targets(ex: &Example, head: HeadKind) -> Vec<(usize, usize)> {
    match (head, ex.label_index) {
        (HeadKind::Binary, Some(label)) => {
            if ex.cond.first() == Some(&1.0) {
                vec![(label, 0)]
            } else {
                Vec::new()
            }
        }
        _ => ex
            .cond
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1.0)
            .map(|(j, _)| (j, j))
            .collect(),
    }
}

/// Integrated gradients of one pre-sigmoid logit with respect to the facts
/// embeddings, against the all-zero embedding baseline.
pub fn attribute(model: &Model, ex: &Example, article: &str, column: usize, steps: usize, rule: Quadrature) -> Result<AttributionMap> {
    let n_out = model.spec.n_out();
    if column >= n_out {
        return Err(Error::IndexOutOfBounds { index: column, len: n_out });
    }
    let input = embedding_rows(model, ex)?;
    let baseline = Tensor::zeros(input.shape());
    let r = integrated_gradients(
        |t, x| {
            let b = model.bind(t, false);
            let f = model.forward_embedded(t, &b, x, &ex.facts, ex.second.as_ref(), &ex.cond)?;
            t.slice(f.logits, 1, column, 1)
        },
        &input,
        &baseline,
        steps,
        rule,
    )?;
    let word_index = ex.facts.word_index();
    let map = SubtokenMap {
        word_of: word_index.clone(),
        n_words: ex.facts.n_words,
    };
    let word_scores = maxpool_subtokens(&r.token_scores, &map)?;
    Ok(AttributionMap {
        case_id: ex.case_id.clone(),
        article: article.to_string(),
        completeness_gap: Some(r.completeness_gap()),
        scores: r.token_scores,
        word_index,
        word_scores,
        steps: Some(steps),
    })
}

fn embedding_rows(model: &Model, ex: &Example) -> Result<Tensor> {
    let table = model
        .params
        .get("facts.embed")
        .ok_or_else(|| Error::format("model", "no facts embedding table"))?;
    let ids = ex.facts.token_ids();
    let d = table.cols();
    let mut data = Vec::with_capacity(ids.len() * d);
    for &id in &ids {
        if id >= table.rows() {
            return Err(Error::IndexOutOfBounds { index: id, len: table.rows() });
        }
        data.extend_from_slice(table.row_slice(id));
    }
    Tensor::matrix(ids.len(), d, data)
}

fn index_attrs(attrs: &[AttributionMap]) -> BTreeMap<(&str, &str), &AttributionMap> {
    attrs.iter().map(|a| ((a.case_id.as_str(), a.article.as_str()), a)).collect()
}

fn stop_mask_for<'a>(stop_masks: &'a BTreeMap<String, Vec<bool>>, case_id: &str) -> Result<&'a [bool]> {
    stop_masks
        .get(case_id)
        .map(Vec::as_slice)
        .ok_or_else(|| Error::format("corpus", format!("no words for case {case_id}")))
}

/// One model markup per expert markup, binarized at that annotator's own
/// density for the pair and tagged with the same annotator.
pub fn binarize_like(
    attrs: &[AttributionMap],
    experts: &[RelevanceMarkup],
    stop_masks: &BTreeMap<String, Vec<bool>>,
) -> Result<Vec<RelevanceMarkup>> {
    let by_pair = index_attrs(attrs);
    experts
        .iter()
        .map(|e| {
            let a = by_pair
                .get(&(e.case_id.as_str(), e.article.as_str()))
                .ok_or_else(|| Error::MissingPair {
                    case_id: e.case_id.clone(),
                    article: e.article.clone(),
                })?;
            let stop = stop_mask_for(stop_masks, &e.case_id)?;
            if e.bits.len() != stop.len() {
                return Err(Error::LengthMismatch(e.bits.len(), stop.len()));
            }
            let scores = a.pooled(stop.len())?;
            Ok(RelevanceMarkup {
                case_id: e.case_id.clone(),
                article: e.article.clone(),
                source: MarkupSource::Model,
                annotator: e.annotator.clone(),
                bits: binarize_by_density(&scores, stop, annotation_density(&e.bits, stop)),
            })
        })
        .collect()
}

/// Model markups at one fixed density.
pub fn binarize_fixed(attrs: &[AttributionMap], density: f64, stop_masks: &BTreeMap<String, Vec<bool>>) -> Result<Vec<RelevanceMarkup>> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Config(format!("density {density} outside [0, 1]")));
    }
    attrs
        .iter()
        .map(|a| {
            let stop = stop_mask_for(stop_masks, &a.case_id)?;
            let scores = a.pooled(stop.len())?;
            Ok(RelevanceMarkup {
                case_id: a.case_id.clone(),
                article: a.article.clone(),
                source: MarkupSource::Model,
                annotator: None,
                bits: binarize_by_density(&scores, stop, density),
            })
        })
        .collect()
}

/// Baseline markups: uniform random word scores binarized at each expert
/// markup's density.
pub fn random_like(experts: &[RelevanceMarkup], stop_masks: &BTreeMap<String, Vec<bool>>, seed: u64) -> Result<Vec<RelevanceMarkup>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    experts
        .iter()
        .map(|e| {
            let stop = stop_mask_for(stop_masks, &e.case_id)?;
            if e.bits.len() != stop.len() {
                return Err(Error::LengthMismatch(e.bits.len(), stop.len()));
            }
            let scores: Vec<f64> = (0..stop.len()).map(|_| rng.gen::<f64>()).collect();
            Ok(RelevanceMarkup {
                case_id: e.case_id.clone(),
                article: e.article.clone(),
                source: MarkupSource::Random,
                annotator: e.annotator.clone(),
                bits: binarize_by_density(&scores, stop, annotation_density(&e.bits, stop)),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attr(case: &str, scores: Vec<f64>) -> AttributionMap {
        AttributionMap {
            case_id: case.into(),
            article: "3".into(),
            word_index: (0..scores.len()).collect(),
            scores,
            word_scores: Vec::new(),
            steps: None,
            completeness_gap: None,
        }
    }

    fn expert(bits: Vec<u8>, who: &str) -> RelevanceMarkup {
        RelevanceMarkup {
            case_id: "c".into(),
            article: "3".into(),
            source: MarkupSource::Expert,
            annotator: Some(who.into()),
            bits,
        }
    }

    #[test]
    fn per_annotator_density() {
        let attrs = [attr("c", vec![0.9, 0.1, 0.5, 0.3])];
        let masks: BTreeMap<String, Vec<bool>> = [("c".to_string(), vec![false; 4])].into();
        let experts = [expert(vec![1, 0, 0, 0], "a"), expert(vec![1, 1, 1, 0], "b")];
        let m = binarize_like(&attrs, &experts, &masks).unwrap();
        assert_eq!(m[0].bits, [1, 0, 0, 0]);
        assert_eq!(m[1].bits, [1, 0, 1, 1]);
        assert_eq!(m[1].annotator.as_deref(), Some("b"));
        assert_eq!(m[1].source, MarkupSource::Model);
    }

    #[test]
    fn missing_attribution() {
        let masks: BTreeMap<String, Vec<bool>> = [("c".to_string(), vec![false; 2])].into();
        let err = binarize_like(&[], &[expert(vec![1, 0], "a")], &masks);
        assert!(matches!(err, Err(Error::MissingPair { .. })));
    }

    #[test]
    fn subtokens_pooled() {
        let mut a = attr("c", vec![0.2, 0.7, 0.1]);
        a.word_index = vec![0, 0, 1];
        assert_eq!(a.pooled(2).unwrap(), [0.7, 0.1]);
    }

    #[test]
    fn ingestion_forms() {
        let rec = r#"{"case_id":"c","article":"3","scores":[0.5,0.25],"word_index":[0,1]}"#;
        let one = AttrFile::parse(rec).unwrap();
        assert_eq!(one, AttrFile::parse(&format!("[{rec}]")).unwrap());
        assert_eq!(one, AttrFile::parse(&format!(r#"{{"attributions":[{rec}]}}"#)).unwrap());
        assert_eq!(one.attributions[0].pooled(2).unwrap(), [0.5, 0.25]);
    }

    #[test]
    fn random_keeps_density() {
        let masks: BTreeMap<String, Vec<bool>> = [("c".to_string(), vec![false; 10])].into();
        let e = expert(vec![1, 1, 1, 0, 0, 0, 0, 0, 0, 0], "a");
        let r = random_like(std::slice::from_ref(&e), &masks, 5).unwrap();
        assert_eq!(r[0].ones(), 3);
        assert_eq!(r, random_like(&[e], &masks, 5).unwrap());
    }
}
