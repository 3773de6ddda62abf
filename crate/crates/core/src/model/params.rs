use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{NamedTensors, Tape, Tensor, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    /// Hierarchical attention classifier over the facts alone.
    FactOnly,
    /// Facts interacting with a second text (an article or a summary).
    Paired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    /// One output for one (case, article) pair, conditioned on an allegation flag.
    Binary,
    /// One output per label, conditioned on the allegation multi-hot.
    Multilabel,
}

/// Architecture hyperparameters; fixes every parameter shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub arch: Arch,
    pub head: HeadKind,
    pub vocab: usize,
    pub d: usize,
    pub h: usize,
    /// Number of labels.
    pub k: usize,
    pub aux: bool,
}

enum Init {
    Embedding,
    Xavier,
    Zero,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.vocab == 0 || self.d == 0 || self.h == 0 || self.k == 0 {
            return Err(Error::Config("vocab, d, h and k must be positive".into()));
        }
        if self.arch == Arch::FactOnly && self.head == HeadKind::Binary {
            return Err(Error::Config("the fact-only model has a multilabel head".into()));
        }
        if self.arch == Arch::FactOnly && self.aux {
            return Err(Error::Config("the auxiliary task needs a paired model".into()));
        }
        Ok(())
    }

    /// Width of the conditioning input appended to the final representation.
    pub fn cond_dim(&self) -> usize {
        match self.head {
            HeadKind::Binary => 1,
            HeadKind::Multilabel => self.k,
        }
    }

    pub fn n_out(&self) -> usize {
        self.cond_dim()
    }

    fn shapes(&self) -> Vec<(String, Vec<usize>, Init)> {
        let (d, h) = (self.d, self.h);
        let mut out = Vec::new();
        let mut add = |name: String, shape: Vec<usize>, init: Init| out.push((name, shape, init));

        let encoders: &[&str] = match self.arch {
            Arch::FactOnly => &["facts"],
            Arch::Paired => &["facts", "second"],
        };
        for p in encoders {
            add(format!("{p}.embed"), vec![self.vocab, d], Init::Embedding);
            attention_shapes(&mut add, &format!("{p}.tok_att"), d);
            bigru_shapes(&mut add, &format!("{p}.gru"), d, h);
        }
        match self.arch {
            Arch::FactOnly => attention_shapes(&mut add, "facts.pkt_att", 2 * h),
            Arch::Paired => {
                for p in ["post.facts", "post.second"] {
                    add(format!("{p}.proj.w"), vec![8 * h, h], Init::Xavier);
                    add(format!("{p}.proj.b"), vec![1, h], Init::Zero);
                    bigru_shapes(&mut add, &format!("{p}.gru"), h, h);
                    attention_shapes(&mut add, &format!("{p}.att"), 2 * h);
                }
                for dir in ["fwd", "bwd"] {
                    add(format!("cond.{dir}.w"), vec![2 * h, h], Init::Xavier);
                    add(format!("cond.{dir}.b"), vec![1, h], Init::Zero);
                }
                if self.aux {
                    add("aux.w".into(), vec![4 * h, 1], Init::Xavier);
                    add("aux.b".into(), vec![1, 1], Init::Zero);
                }
            }
        }
        add("head.fc1.w".into(), vec![2 * h + self.cond_dim(), h], Init::Xavier);
        add("head.fc1.b".into(), vec![1, h], Init::Zero);
        add("head.fc2.w".into(), vec![h, self.n_out()], Init::Xavier);
        add("head.fc2.b".into(), vec![1, self.n_out()], Init::Zero);
        out
    }

    /// Every parameter name with its shape.
    pub fn param_shapes(&self) -> BTreeMap<String, Vec<usize>> {
        self.shapes().into_iter().map(|(n, s, _)| (n, s)).collect()
    }

    /// Seeded initialization: Xavier-uniform matrices, zero biases and
    /// uniform(−0.5, 0.5) embeddings.
    pub fn init_params(&self, seed: u64) -> Result<NamedTensors> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shapes = self.shapes();
        shapes.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = NamedTensors::new();
        for (name, shape, init) in shapes {
            let n: usize = shape.iter().product();
            let limit = match init {
                Init::Zero => 0.0,
                Init::Embedding => 0.5,
                Init::Xavier => (6.0 / (shape[0] + shape[1]) as f64).sqrt(),
            };
            let data = if limit == 0.0 {
                vec![0.0; n]
            } else {
                (0..n).map(|_| rng.gen_range(-limit..limit)).collect()
            };
            out.insert(name, Tensor::new(shape, data)?);
        }
        Ok(out)
    }

    /// Checks that `params` has exactly this spec's names and shapes.
    pub fn check_params(&self, params: &NamedTensors) -> Result<()> {
        let expected = self.param_shapes();
        for (name, shape) in &expected {
            match params.get(name) {
                Some(t) if t.shape() == shape.as_slice() => {}
                Some(t) => {
                    return Err(Error::shape(
                        "parameters",
                        format!("{name}: expected {shape:?}, got {:?}", t.shape()),
                    ))
                }
                None => return Err(Error::shape("parameters", format!("missing {name}"))),
            }
        }
        if let Some(extra) = params.keys().find(|k| !expected.contains_key(*k)) {
            return Err(Error::shape("parameters", format!("unexpected {extra}")));
        }
        Ok(())
    }
}

fn attention_shapes(add: &mut impl FnMut(String, Vec<usize>, Init), p: &str, width: usize) {
    add(format!("{p}.w"), vec![width, width], Init::Xavier);
    add(format!("{p}.b"), vec![1, width], Init::Zero);
    add(format!("{p}.u"), vec![width, 1], Init::Xavier);
}

fn bigru_shapes(add: &mut impl FnMut(String, Vec<usize>, Init), p: &str, input: usize, h: usize) {
    for dir in ["fwd", "bwd"] {
        for gate in ["z", "r", "n"] {
            add(format!("{p}.{dir}.w{gate}"), vec![input, h], Init::Xavier);
            add(format!("{p}.{dir}.u{gate}"), vec![h, h], Init::Xavier);
            add(format!("{p}.{dir}.b{gate}"), vec![1, h], Init::Zero);
        }
    }
}

/// Parameters recorded on a tape, looked up by name.
pub struct Bound {
    vars: BTreeMap<String, Var>,
}

impl Bound {
    pub fn new(tape: &mut Tape, params: &NamedTensors, requires_grad: bool) -> Self {
        Bound {
            vars: params
                .iter()
                .map(|(k, t)| (k.clone(), tape.leaf(t.clone(), requires_grad)))
                .collect(),
        }
    }

    /// # Panics
    ///
    /// If `name` is not a parameter; shapes are checked when a model is built.
    pub fn get(&self, name: &str) -> Var {
        match self.vars.get(name) {
            Some(v) => *v,
            None => panic!("unknown parameter {name}"),
        }
    }

    /// Binds to variables recorded elsewhere, e.g. by a gradient checker.
    pub fn from_vars(vars: BTreeMap<String, Var>) -> Self {
        Bound { vars }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Var)> {
        self.vars.iter()
    }

    pub fn attention(&self, prefix: &str) -> super::AttentionVars {
        super::AttentionVars {
            w: self.get(&format!("{prefix}.w")),
            b: self.get(&format!("{prefix}.b")),
            u: self.get(&format!("{prefix}.u")),
        }
    }

    pub fn gru(&self, prefix: &str) -> super::GruVars {
        let g = |n: &str| self.get(&format!("{prefix}.{n}"));
        super::GruVars {
            wz: g("wz"),
            wr: g("wr"),
            wn: g("wn"),
            uz: g("uz"),
            ur: g("ur"),
            un: g("un"),
            bz: g("bz"),
            br: g("br"),
            bn: g("bn"),
        }
    }

    pub fn linear(&self, prefix: &str) -> (Var, Var) {
        (self.get(&format!("{prefix}.w")), self.get(&format!("{prefix}.b")))
    }
}
