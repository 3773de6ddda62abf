use std::path::Path;

use super::data::{EncodedText, Example};
use super::layers::{attention_pool, bigru_encode, interaction, linear, merge_quadruple, zero_state};
use super::params::{Arch, Bound, ModelSpec};
use crate::autodiff::{load_checkpoint, save_checkpoint, NamedTensors, Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Values of one forward pass.
#[derive(Debug, Clone, Copy)]
pub struct Forward {
    /// Pre-sigmoid outputs, 1×n_out.
    pub logits: Var,
    pub probs: Var,
    /// Final facts representation (`c` or `C`), 1×2h.
    pub fact_rep: Var,
    /// Final second-text representation `S`, 1×2h (paired models only).
    pub second_rep: Option<Var>,
}

/// Token attention inside each packet, giving one d-dim row per packet.
fn packet_vectors(t: &mut Tape, b: &Bound, prefix: &str, x: Var, lens: &[usize]) -> Result<Var> {
    let att = b.attention(&format!("{prefix}.tok_att"));
    let mut rows = Vec::with_capacity(lens.len());
    let mut start = 0;
    for &len in lens {
        let seg = t.slice(x, 0, start, len)?;
        rows.push(attention_pool(t, seg, att)?.1);
        start += len;
    }
    t.concat(&rows, 0)
}

/// Packet vectors through the branch's bi-GRU (zero initial state).
fn encode_branch(t: &mut Tape, b: &Bound, spec: &ModelSpec, prefix: &str, x: Var, lens: &[usize]) -> Result<Var> {
    let f = packet_vectors(t, b, prefix, x, lens)?;
    let h0 = zero_state(t, spec.h);
    let fwd = b.gru(&format!("{prefix}.gru.fwd"));
    let bwd = b.gru(&format!("{prefix}.gru.bwd"));
    Ok(bigru_encode(t, f, fwd, bwd, h0, h0)?.0)
}

fn head(t: &mut Tape, b: &Bound, rep: Var, cond: &[f64]) -> Result<Var> {
    let c = t.constant(Tensor::row(cond.to_vec()));
    let z = t.concat(&[rep, c], 1)?;
    let (w1, b1) = b.linear("head.fc1");
    let hid = linear(t, z, w1, b1)?;
    let hid = t.tanh(hid);
    let (w2, b2) = b.linear("head.fc2");
    linear(t, hid, w2, b2)
}

fn check_lens(t: &Tape, x: Var, lens: &[usize], what: &'static str) -> Result<()> {
    if lens.is_empty() || lens.contains(&0) {
        return Err(Error::EmptyText(what));
    }
    let total: usize = lens.iter().sum();
    if t.value(x).rows() != total {
        return Err(Error::shape(
            "forward",
            format!("{what}: {} embedding rows for {total} tokens", t.value(x).rows()),
        ));
    }
    Ok(())
}

/// Fact-only classifier: token attention per packet, bi-GRU over packets,
/// packet attention, then the two-layer head on `[c ; cond]`.
///
/// `x` holds one embedding row per token, packet after packet.
pub fn fact_only_forward(
    t: &mut Tape,
    b: &Bound,
    spec: &ModelSpec,
    x: Var,
    lens: &[usize],
    cond: &[f64],
) -> Result<Forward> {
    check_lens(t, x, lens, "facts")?;
    let g = encode_branch(t, b, spec, "facts", x, lens)?;
    let (_, c) = attention_pool(t, g, b.attention("facts.pkt_att"))?;
    let logits = head(t, b, c, cond)?;
    Ok(Forward {
        logits,
        probs: t.sigmoid(logits),
        fact_rep: c,
        second_rep: None,
    })
}

/// Paired-text model. Both texts are encoded, interact through dot-product
/// attention and are merged; the second text yields `S`, which initializes
/// the facts bi-GRU that yields `C`; the head reads `[C ; cond]`.
#[allow(clippy::too_many_arguments)]
pub fn paired_forward(
    t: &mut Tape,
    b: &Bound,
    spec: &ModelSpec,
    xf: Var,
    lens_f: &[usize],
    xs: Var,
    lens_s: &[usize],
    cond: &[f64],
) -> Result<Forward> {
    check_lens(t, xf, lens_f, "facts")?;
    check_lens(t, xs, lens_s, "second text")?;
    let h = encode_branch(t, b, spec, "facts", xf, lens_f)?;
    let g = encode_branch(t, b, spec, "second", xs, lens_s)?;
    let (h2, g2) = interaction(t, h, g)?;
    let ph = merge_quadruple(t, h, h2)?;
    let pg = merge_quadruple(t, g, g2)?;

    let (w, bias) = b.linear("post.second.proj");
    let ps = linear(t, pg, w, bias)?;
    let ps = t.tanh(ps);
    let zero = zero_state(t, spec.h);
    let (gs, _) = bigru_encode(
        t,
        ps,
        b.gru("post.second.gru.fwd"),
        b.gru("post.second.gru.bwd"),
        zero,
        zero,
    )?;
    let (_, s) = attention_pool(t, gs, b.attention("post.second.att"))?;

    let (w, bias) = b.linear("cond.fwd");
    let h0f = linear(t, s, w, bias)?;
    let (w, bias) = b.linear("cond.bwd");
    let h0b = linear(t, s, w, bias)?;
    let (w, bias) = b.linear("post.facts.proj");
    let pf = linear(t, ph, w, bias)?;
    let pf = t.tanh(pf);
    let (hc, _) = bigru_encode(
        t,
        pf,
        b.gru("post.facts.gru.fwd"),
        b.gru("post.facts.gru.bwd"),
        h0f,
        h0b,
    )?;
    let (_, c) = attention_pool(t, hc, b.attention("post.facts.att"))?;
    let logits = head(t, b, c, cond)?;
    Ok(Forward {
        logits,
        probs: t.sigmoid(logits),
        fact_rep: c,
        second_rep: Some(s),
    })
}

/// Mean binary cross-entropy; probabilities are clamped at 1e-12 inside
/// the logarithms.
pub fn bce_loss(t: &mut Tape, probs: Var, targets: &[f64]) -> Result<Var> {
    let shape = t.value(probs).shape().to_vec();
    let tgt = t.constant(Tensor::new(shape.clone(), targets.to_vec())?);
    let inv = t.constant(Tensor::new(shape, targets.iter().map(|y| 1.0 - y).collect())?);
    let lp = t.ln_clamped(probs, 1e-12);
    let q = t.scalar_mul(probs, -1.0);
    let q = t.add_scalar(q, 1.0);
    let lq = t.ln_clamped(q, 1e-12);
    let a = t.mul(tgt, lp)?;
    let c = t.mul(inv, lq)?;
    let s = t.add(a, c)?;
    let m = t.mean(s);
    Ok(t.scalar_mul(m, -1.0))
}

/// BCE of the auxiliary relevance head on `[C ; S]`.
pub fn aux_relevance_loss(t: &mut Tape, b: &Bound, spec: &ModelSpec, fact_rep: Var, second_rep: Var, label: f64) -> Result<Var> {
    if !spec.aux {
        return Err(Error::AuxDisabled);
    }
    let z = t.concat(&[fact_rep, second_rep], 1)?;
    let (w, bias) = b.linear("aux");
    let logit = linear(t, z, w, bias)?;
    let p = t.sigmoid(logit);
    bce_loss(t, p, &[label])
}

/// A model architecture with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: ModelSpec,
    pub params: NamedTensors,
}

impl Model {
    pub fn init(spec: ModelSpec, seed: u64) -> Result<Self> {
        let params = spec.init_params(seed)?;
        Ok(Model { spec, params })
    }

    pub fn from_params(spec: ModelSpec, params: NamedTensors) -> Result<Self> {
        spec.validate()?;
        spec.check_params(&params)?;
        Ok(Model { spec, params })
    }

    pub fn bind(&self, t: &mut Tape, requires_grad: bool) -> Bound {
        Bound::new(t, &self.params, requires_grad)
    }

    /// Embedding rows for every token of `text` from the `branch` table
    /// (`"facts"` or `"second"`).
    pub fn embed(&self, t: &mut Tape, b: &Bound, branch: &str, text: &EncodedText) -> Result<Var> {
        let table = b.get(&format!("{branch}.embed"));
        t.gather_rows(table, &text.token_ids())
    }

    /// Forward pass with the facts embeddings supplied by the caller, which
    /// lets attribution substitute interpolated inputs.
    pub fn forward_embedded(
        &self,
        t: &mut Tape,
        b: &Bound,
        facts_x: Var,
        facts: &EncodedText,
        second: Option<&EncodedText>,
        cond: &[f64],
    ) -> Result<Forward> {
        if cond.len() != self.spec.cond_dim() {
            return Err(Error::shape(
                "forward",
                format!("conditioning has {} values, expected {}", cond.len(), self.spec.cond_dim()),
            ));
        }
        let lens = facts.packet_lens();
        match self.spec.arch {
            Arch::FactOnly => fact_only_forward(t, b, &self.spec, facts_x, &lens, cond),
            Arch::Paired => {
                let second = second.ok_or(Error::EmptyText("second text"))?;
                let xs = self.embed(t, b, "second", second)?;
                paired_forward(t, b, &self.spec, facts_x, &lens, xs, &second.packet_lens(), cond)
            }
        }
    }

    pub fn forward(&self, t: &mut Tape, b: &Bound, ex: &Example) -> Result<Forward> {
        let x = self.embed(t, b, "facts", &ex.facts)?;
        self.forward_embedded(t, b, x, &ex.facts, ex.second.as_ref(), &ex.cond)
    }

    /// Output probabilities for one example.
    pub fn predict(&self, ex: &Example) -> Result<Vec<f64>> {
        let mut t = Tape::new();
        let b = self.bind(&mut t, false);
        let f = self.forward(&mut t, &b, ex)?;
        Ok(t.value(f.probs).data().to_vec())
    }

    pub fn save(&self, path: &Path, extra: serde_json::Value) -> Result<()> {
        let meta = serde_json::json!({ "spec": self.spec, "extra": extra });
        save_checkpoint(path, &self.params, &meta)
    }

    pub fn load(path: &Path) -> Result<(Self, serde_json::Value)> {
        let (params, meta) = load_checkpoint(path)?;
        let spec: ModelSpec = serde_json::from_value(meta["spec"].clone())
            .map_err(|e| Error::format("checkpoint", format!("model spec: {e}")))?;
        Ok((Model::from_params(spec, params)?, meta["extra"].clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HeadKind;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const LN2: f64 = std::f64::consts::LN_2;
    const FACTS: [usize; 5] = [3, 7, 1, 7, 4];
    const FACT_LENS: [usize; 2] = [3, 2];
    const SECOND: [usize; 3] = [2, 5, 0];
    const SECOND_LENS: [usize; 2] = [1, 2];

    fn spec(arch: Arch, head: HeadKind, aux: bool) -> ModelSpec {
        ModelSpec { arch, head, vocab: 8, d: 4, h: 3, k: 3, aux }
    }

    fn cond(s: &ModelSpec) -> Vec<f64> {
        match s.head {
            HeadKind::Binary => vec![1.0],
            HeadKind::Multilabel => vec![1.0, 0.0, 1.0],
        }
    }

    fn run(model: &Model, facts: &[usize]) -> Vec<f64> {
        let mut t = Tape::new();
        let b = model.bind(&mut t, false);
        let s = &model.spec;
        let x = t.gather_rows(b.get("facts.embed"), facts).unwrap();
        let f = match s.arch {
            Arch::FactOnly => fact_only_forward(&mut t, &b, s, x, &FACT_LENS, &cond(s)).unwrap(),
            Arch::Paired => {
                let xs = t.gather_rows(b.get("second.embed"), &SECOND).unwrap();
                paired_forward(&mut t, &b, s, x, &FACT_LENS, xs, &SECOND_LENS, &cond(s)).unwrap()
            }
        };
        t.value(f.probs).data().to_vec()
    }

    fn bce(p: &[f64], y: &[f64]) -> f64 {
        let mut t = Tape::new();
        let pv = t.constant(Tensor::row(p.to_vec()));
        let l = bce_loss(&mut t, pv, y).unwrap();
        t.value(l).item()
    }

    #[test]
    fn bce_examples() {
        assert!(bce(&[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]).abs() < 1e-12);
        assert!((bce(&[0.5, 0.5], &[1.0, 0.0]) - LN2).abs() < 1e-15);
        // Clamping keeps a confident miss finite.
        assert!((bce(&[0.0], &[1.0]) + 1e-12f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn bce_gradient_closed_form() {
        let (p, y) = ([0.2, 0.7, 0.9], [1.0, 0.0, 1.0]);
        let mut t = Tape::new();
        let pv = t.leaf(Tensor::row(p.to_vec()), true);
        let l = bce_loss(&mut t, pv, &y).unwrap();
        let g = t.backward(l).unwrap().get(pv);
        for i in 0..3 {
            let expect = (p[i] - y[i]) / (p[i] * (1.0 - p[i])) / 3.0;
            assert!((g.data()[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_output_layer_gives_one_half() {
        for s in [
            spec(Arch::FactOnly, HeadKind::Multilabel, false),
            spec(Arch::Paired, HeadKind::Binary, false),
            spec(Arch::Paired, HeadKind::Multilabel, false),
        ] {
            let mut m = Model::init(s.clone(), 3).unwrap();
            for name in ["head.fc2.w", "head.fc2.b"] {
                let p = m.params.get_mut(name).unwrap();
                *p = Tensor::zeros(p.shape());
            }
            let probs = run(&m, &FACTS);
            assert_eq!(probs.len(), s.n_out());
            assert!(probs.iter().all(|&p| p == 0.5), "{probs:?}");
        }
    }

    #[test]
    fn zero_aux_head_gives_ln2() {
        let s = spec(Arch::Paired, HeadKind::Multilabel, true);
        let mut m = Model::init(s.clone(), 3).unwrap();
        for name in ["aux.w", "aux.b"] {
            let p = m.params.get_mut(name).unwrap();
            *p = Tensor::zeros(p.shape());
        }
        let mut t = Tape::new();
        let b = m.bind(&mut t, false);
        let x = t.gather_rows(b.get("facts.embed"), &FACTS).unwrap();
        let xs = t.gather_rows(b.get("second.embed"), &SECOND).unwrap();
        let f = paired_forward(&mut t, &b, &s, x, &FACT_LENS, xs, &SECOND_LENS, &cond(&s)).unwrap();
        for label in [0.0, 1.0] {
            let l = aux_relevance_loss(&mut t, &b, &s, f.fact_rep, f.second_rep.unwrap(), label).unwrap();
            assert!((t.value(l).item() - LN2).abs() < 1e-15);
        }
    }

    #[test]
    fn aux_loss_needs_aux_head() {
        let s = spec(Arch::Paired, HeadKind::Multilabel, false);
        let m = Model::init(s.clone(), 3).unwrap();
        let mut t = Tape::new();
        let b = m.bind(&mut t, false);
        let r = t.constant(Tensor::zeros(&[1, 2 * s.h]));
        assert!(matches!(aux_relevance_loss(&mut t, &b, &s, r, r, 1.0), Err(Error::AuxDisabled)));
    }

    #[test]
    fn empty_packet_is_rejected() {
        let s = spec(Arch::FactOnly, HeadKind::Multilabel, false);
        let m = Model::init(s.clone(), 3).unwrap();
        let mut t = Tape::new();
        let b = m.bind(&mut t, false);
        let x = t.gather_rows(b.get("facts.embed"), &FACTS).unwrap();
        assert!(fact_only_forward(&mut t, &b, &s, x, &[5, 0], &cond(&s)).is_err());
        assert!(fact_only_forward(&mut t, &b, &s, x, &[4], &cond(&s)).is_err());
    }

    proptest! {
        #[test]
        fn vocabulary_permutation_leaves_outputs_unchanged(seed in 0u64..1000, paired in any::<bool>()) {
            let arch = if paired { Arch::Paired } else { Arch::FactOnly };
            let m = Model::init(spec(arch, HeadKind::Multilabel, false), seed).unwrap();
            let mut perm: Vec<usize> = (0..8).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut permuted = m.clone();
            let table = &m.params["facts.embed"];
            let rows: Vec<f64> = (0..8)
                .flat_map(|new| {
                    let old = perm.iter().position(|&p| p == new).unwrap();
                    table.row_slice(old).to_vec()
                })
                .collect();
            permuted.params.insert("facts.embed".into(), Tensor::matrix(8, 4, rows).unwrap());
            let ids: Vec<usize> = FACTS.iter().map(|&i| perm[i]).collect();
            prop_assert_eq!(run(&m, &FACTS), run(&permuted, &ids));
        }
    }
}
