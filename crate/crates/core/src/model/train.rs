use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{Example, TextEncoder};
use super::net::{aux_relevance_loss, bce_loss, Model};
use super::optim::Adam;
use super::params::{Arch, HeadKind, ModelSpec};
use crate::autodiff::{NamedTensors, Tape, Tensor};
use crate::error::{Error, Result};
use crate::metrics::{binary_f1, f1_10plus1, hard_macro_f1};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub seed: u64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub d: usize,
    pub h: usize,
    pub packet_cap: usize,
    pub vocab_buckets: u32,
    pub arch: Arch,
    pub head: HeadKind,
    pub aux: bool,
    pub aux_negatives: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 1,
            lr: 1e-3,
            epochs: 30,
            batch_size: 8,
            d: 32,
            h: 32,
            packet_cap: 64,
            vocab_buckets: 4096,
            arch: Arch::FactOnly,
            head: HeadKind::Multilabel,
            aux: false,
            aux_negatives: 2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.epochs, self.batch_size, self.d, self.h, self.packet_cap, self.vocab_buckets as usize];
        if positive.contains(&0) || self.lr.is_nan() || self.lr <= 0.0 {
            return Err(Error::Config(
                "lr, epochs, batch_size, d, h, packet_cap and vocab_buckets must be positive".into(),
            ));
        }
        self.model_spec(1).validate()
    }

    pub fn model_spec(&self, k: usize) -> ModelSpec {
        ModelSpec {
            arch: self.arch,
            head: self.head,
            vocab: self.vocab_buckets as usize,
            d: self.d,
            h: self.h,
            k,
            aux: self.aux,
        }
    }

    pub fn encoder(&self) -> TextEncoder {
        TextEncoder::new(self.vocab_buckets, self.packet_cap)
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub split: String,
    pub loss: f64,
    #[serde(rename = "micF1")]
    pub micro_f1: f64,
    #[serde(rename = "macF1")]
    pub macro_f1: f64,
    #[serde(rename = "hmF1")]
    pub hard_macro_f1: f64,
}

/// Scores of a model over a set of examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub loss: f64,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub hard_macro_f1: f64,
    /// Positive-class F1 over (case, article) instances, binary head only.
    pub pair_f1: Option<f64>,
}

/// Per-case prediction, gold and allegation rows assembled from examples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CaseRows {
    pub case_ids: Vec<String>,
    pub pred: Vec<Vec<u8>>,
    pub gold: Vec<Vec<u8>>,
    pub alleged: Vec<Vec<u8>>,
}

/// Groups example-level probabilities into per-case label rows, thresholding
/// at 0.5. Binary-head examples fill one label of their case's row.
pub fn case_rows(k: usize, examples: &[Example], probs: &[Vec<f64>]) -> CaseRows {
    let bit = |x: f64| u8::from(x > 0.5);
    let mut rows = CaseRows::default();
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (ex, p) in examples.iter().zip(probs) {
        let r = *index.entry(&ex.case_id).or_insert_with(|| {
            rows.case_ids.push(ex.case_id.clone());
            rows.pred.push(vec![0; k]);
            rows.gold.push(vec![0; k]);
            rows.alleged.push(vec![0; k]);
            rows.case_ids.len() - 1
        });
        let labels: Vec<usize> = match ex.label_index {
            Some(j) => vec![j],
            None => (0..k).collect(),
        };
        for (slot, j) in labels.into_iter().enumerate() {
            rows.pred[r][j] = bit(p[slot]);
            rows.gold[r][j] = bit(ex.target[slot]);
            rows.alleged[r][j] = bit(ex.cond[slot]);
        }
    }
    rows
}

fn summarize(k: usize, examples: &[Example], probs: &[Vec<f64>], loss: f64) -> Result<EvalSummary> {
    let mut rows = case_rows(k, examples, probs);
    // Hard-macro-F1 treats violated articles as alleged even when the
    // allegation list omits them.
    for (a, g) in rows.alleged.iter_mut().zip(&rows.gold) {
        for (a, &g) in a.iter_mut().zip(g) {
            *a |= g;
        }
    }
    let (micro_f1, macro_f1) = f1_10plus1(&rows.pred, &rows.gold)?;
    let hard = hard_macro_f1(&rows.pred, &rows.gold, &rows.alleged)?;
    let pair_f1 = if examples.iter().all(|e| e.label_index.is_some()) && !examples.is_empty() {
        let p: Vec<u8> = probs.iter().map(|p| u8::from(p[0] > 0.5)).collect();
        let g: Vec<u8> = examples.iter().map(|e| u8::from(e.target[0] > 0.5)).collect();
        Some(binary_f1(&p, &g)?)
    } else {
        None
    };
    Ok(EvalSummary {
        loss,
        micro_f1,
        macro_f1,
        hard_macro_f1: hard,
        pair_f1,
    })
}

/// Probabilities for every example, in order.
pub fn predict_all(model: &Model, examples: &[Example]) -> Result<Vec<Vec<f64>>> {
    examples.iter().map(|e| model.predict(e)).collect()
}

/// Main-task loss and scores over `examples`.
pub fn evaluate(model: &Model, examples: &[Example]) -> Result<EvalSummary> {
    let probs = predict_all(model, examples)?;
    let mut loss = 0.0;
    for (ex, p) in examples.iter().zip(&probs) {
        let mut t = Tape::new();
        let pv = t.constant(Tensor::row(p.clone()));
        let l = bce_loss(&mut t, pv, &ex.target)?;
        loss += t.value(l).item();
    }
    let n = examples.len().max(1) as f64;
    summarize(model.spec.k, examples, &probs, loss / n)
}

/// For each example, up to `n` indices of examples from other cases, drawn
/// without replacement from a generator seeded with `seed`.
pub fn sample_negatives(case_ids: &[String], n: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..case_ids.len())
        .map(|i| {
            let candidates: Vec<usize> = (0..case_ids.len()).filter(|&j| case_ids[j] != case_ids[i]).collect();
            let take = n.min(candidates.len());
            let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, candidates.len(), take)
                .into_iter()
                .map(|c| candidates[c])
                .collect();
            picked.sort_unstable();
            picked
        })
        .collect()
}

/// Loss of one example with its gradients added into `acc`; returns the
/// loss and the main-task probabilities.
fn example_step(
    model: &Model,
    ex: &Example,
    negatives: &[&Example],
    acc: &mut BTreeMap<String, Vec<f64>>,
) -> Result<(f64, Vec<f64>)> {
    let mut t = Tape::new();
    let b = model.bind(&mut t, true);
    let x = model.embed(&mut t, &b, "facts", &ex.facts)?;
    let fwd = model.forward_embedded(&mut t, &b, x, &ex.facts, ex.second.as_ref(), &ex.cond)?;
    let mut total = bce_loss(&mut t, fwd.probs, &ex.target)?;
    if model.spec.aux {
        let s = fwd.second_rep.ok_or(Error::AuxDisabled)?;
        let mut aux = aux_relevance_loss(&mut t, &b, &model.spec, fwd.fact_rep, s, 1.0)?;
        for neg in negatives {
            let f = model.forward_embedded(&mut t, &b, x, &ex.facts, neg.second.as_ref(), &ex.cond)?;
            let s = f.second_rep.ok_or(Error::AuxDisabled)?;
            let l = aux_relevance_loss(&mut t, &b, &model.spec, f.fact_rep, s, 0.0)?;
            aux = t.add(aux, l)?;
        }
        let aux = t.scalar_mul(aux, 1.0 / (1 + negatives.len()) as f64);
        total = t.add(total, aux)?;
    }
    let grads = t.backward(total)?;
    for (name, &v) in b.iter() {
        let g = grads.get(v);
        let slot = acc.entry(name.clone()).or_insert_with(|| vec![0.0; g.numel()]);
        for (s, x) in slot.iter_mut().zip(g.data()) {
            *s += x;
        }
    }
    Ok((t.value(total).item(), t.value(fwd.probs).data().to_vec()))
}

/// Applies one optimizer step on `batch` and returns the mean batch loss
/// before the step.
pub fn train_step(model: &mut Model, adam: &mut Adam, batch: &[&Example], negatives: &[Vec<&Example>]) -> Result<(f64, Vec<Vec<f64>>)> {
    let mut acc = BTreeMap::new();
    let mut loss = 0.0;
    let mut probs = Vec::with_capacity(batch.len());
    for (i, ex) in batch.iter().enumerate() {
        let negs = negatives.get(i).map_or(&[][..], Vec::as_slice);
        let (l, p) = example_step(model, ex, negs, &mut acc)?;
        loss += l;
        probs.push(p);
    }
    let scale = 1.0 / batch.len() as f64;
    let grads: NamedTensors = acc
        .into_iter()
        .map(|(k, v)| {
            let shape = model.params[&k].shape().to_vec();
            let t = Tensor::new(shape, v.into_iter().map(|x| x * scale).collect())?;
            Ok((k, t))
        })
        .collect::<Result<_>>()?;
    adam.step(&mut model.params, &grads)?;
    Ok((loss * scale, probs))
}

/// A trained model with its log.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub log: Vec<EpochLog>,
    /// Epoch whose parameters were kept (best validation micro-F1, earliest
    /// on ties; the last epoch when there is no validation set).
    pub best_epoch: usize,
}

/// Mini-batch Adam training; the parameters of the epoch with the best
/// validation micro-F1 are returned.
pub fn train(cfg: &TrainConfig, k: usize, train_set: &[Example], valid_set: &[Example]) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut model = Model::init(cfg.model_spec(k), cfg.seed)?;
    let mut adam = Adam::new(&model.params, cfg.lr);
    let negatives = if cfg.aux {
        let ids: Vec<String> = train_set.iter().map(|e| e.case_id.clone()).collect();
        sample_negatives(&ids, cfg.aux_negatives, cfg.seed.wrapping_add(2))
    } else {
        Vec::new()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut log = Vec::new();
    let mut best: Option<(usize, f64, NamedTensors)> = None;

    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut rng);
        let mut probs = vec![Vec::new(); train_set.len()];
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &train_set[i]).collect();
            let negs: Vec<Vec<&Example>> = chunk
                .iter()
                .map(|&i| negatives.get(i).map_or_else(Vec::new, |n| n.iter().map(|&j| &train_set[j]).collect()))
                .collect();
            let (l, p) = train_step(&mut model, &mut adam, &batch, &negs)?;
            loss_sum += l * chunk.len() as f64;
            for (&i, p) in chunk.iter().zip(p) {
                probs[i] = p;
            }
        }
        let s = summarize(k, train_set, &probs, loss_sum / train_set.len() as f64)?;
        log.push(epoch_log(epoch, "train", &s));
        if !valid_set.is_empty() {
            let s = evaluate(&model, valid_set)?;
            log.push(epoch_log(epoch, "valid", &s));
            if best.as_ref().is_none_or(|b| s.micro_f1 > b.1) {
                best = Some((epoch, s.micro_f1, model.params.clone()));
            }
        }
    }
    let best_epoch = match best {
        Some((epoch, _, params)) => {
            model.params = params;
            epoch
        }
        None => cfg.epochs,
    };
    Ok(TrainOutcome { model, log, best_epoch })
}

fn epoch_log(epoch: usize, split: &str, s: &EvalSummary) -> EpochLog {
    EpochLog {
        epoch,
        split: split.to_string(),
        loss: s.loss,
        micro_f1: s.micro_f1,
        macro_f1: s.macro_f1,
        hard_macro_f1: s.hard_macro_f1,
    }
}
