use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rationale_core::attribution::{alleged_targets, attribute as attribute_one, AttrFile, AttributionMap};
use rationale_core::corpus::{CaseDocument, CaseSummary, LabelSet};
use rationale_core::model::{
    build_examples, evaluate, train as train_model, Arch, EvalSummary, Example, HeadKind, Model, SecondTexts,
    TrainConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{label_set, select_docs, ArticlesFile};
use super::{AttributeArgs, EvalArgs, SecondArgs, TrainArgs};
use crate::artifact::{
    load_corpus, load_summaries, part_ids, read_json, write_json, write_jsonl_with_header, Header, Part, SplitFile,
};
use crate::{usage, Ctx};

/// What a checkpoint carries besides its tensors.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelMeta {
    header: Header,
    labels: Vec<String>,
    train: TrainConfig,
    best_epoch: usize,
}

fn load_model(path: &Path) -> Result<(Model, ModelMeta)> {
    let (model, extra) = Model::load(path).with_context(|| path.display().to_string())?;
    let meta: ModelMeta =
        serde_json::from_value(extra).with_context(|| format!("{}: checkpoint metadata", path.display()))?;
    Ok((model, meta))
}

/// Loaded second texts, owned.
#[derive(Default)]
struct Seconds {
    articles: Option<BTreeMap<String, String>>,
    summaries: Option<BTreeMap<String, CaseSummary>>,
}

impl Seconds {
    fn load(args: &SecondArgs, arch: Arch, head: HeadKind) -> Result<Self> {
        let mut s = Seconds::default();
        if arch == Arch::FactOnly {
            return Ok(s);
        }
        match head {
            HeadKind::Binary => {
                let path = args
                    .articles
                    .as_ref()
                    .ok_or_else(|| usage("the article-conditioned model needs --articles"))?;
                let f: ArticlesFile = read_json(path)?;
                s.articles = Some(f.articles);
            }
            HeadKind::Multilabel => {
                let path = args
                    .summaries
                    .as_ref()
                    .ok_or_else(|| usage("the summary-conditioned model needs --summaries"))?;
                s.summaries = Some(load_summaries(path)?.into_iter().map(|x| (x.case_id.clone(), x)).collect());
            }
        }
        Ok(s)
    }

    fn texts(&self) -> SecondTexts<'_> {
        SecondTexts {
            articles: self.articles.as_ref(),
            summaries: self.summaries.as_ref(),
        }
    }

    fn inputs(args: &SecondArgs, arch: Arch, head: HeadKind) -> Vec<&Path> {
        match (arch, head) {
            (Arch::FactOnly, _) => Vec::new(),
            (Arch::Paired, HeadKind::Binary) => args.articles.as_deref().into_iter().collect(),
            (Arch::Paired, HeadKind::Multilabel) => args.summaries.as_deref().into_iter().collect(),
        }
    }
}

fn examples(cfg: &TrainConfig, docs: &[CaseDocument], labels: &LabelSet, second: &Seconds) -> Result<Vec<Example>> {
    Ok(build_examples(cfg.arch, cfg.head, docs, labels, second.texts(), &cfg.encoder())?)
}

pub fn train(a: TrainArgs, ctx: &mut Ctx) -> Result<()> {
    let cfg = &mut ctx.config.train;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(lr) = a.lr {
        cfg.lr = lr;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let cfg = cfg.clone();
    let labels = label_set(ctx, a.labels.as_deref())?;
    let docs = load_corpus(&a.corpus)?;
    let split: SplitFile = read_json(&a.split)?;
    let second = Seconds::load(&a.second, cfg.arch, cfg.head)?;
    let train_docs = select_docs(docs.clone(), Some(split.split.train))?;
    let valid_docs = select_docs(docs, Some(split.split.valid))?;
    let train_set = examples(&cfg, &train_docs, &labels, &second)?;
    let valid_set = examples(&cfg, &valid_docs, &labels, &second)?;
    let outcome = train_model(&cfg, labels.len(), &train_set, &valid_set)?;

    let mut inputs = vec![a.corpus.as_path(), a.split.as_path()];
    inputs.extend(a.labels.as_deref());
    inputs.extend(Seconds::inputs(&a.second, cfg.arch, cfg.head));
    let header = Header::new("train", &ctx.config, &inputs)?;
    let meta = ModelMeta {
        header: header.clone(),
        labels: labels.labels().to_vec(),
        train: cfg,
        best_epoch: outcome.best_epoch,
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("{}: cannot create directory", dir.display()))?;
    }
    outcome
        .model
        .save(&a.out, serde_json::to_value(&meta)?)
        .with_context(|| a.out.display().to_string())?;
    if let Some(log) = &a.log {
        write_jsonl_with_header(log, &header, &outcome.log)?;
    }
    let best = outcome
        .log
        .iter()
        .find(|l| l.epoch == outcome.best_epoch && l.split == "valid")
        .or(outcome.log.last());
    if let Some(l) = best {
        println!(
            "best epoch {} ({} micro-F1 {:.4}, hard-macro-F1 {:.4}) -> {}",
            outcome.best_epoch,
            l.split,
            l.micro_f1,
            l.hard_macro_f1,
            a.out.display()
        );
    }
    Ok(())
}

fn part_name(p: Part) -> &'static str {
    match p {
        Part::Train => "train",
        Part::Valid => "valid",
        Part::Test => "test",
        Part::All => "all",
    }
}

fn model_inputs<'a>(model: &'a Path, corpus: &'a Path, split: Option<&'a PathBuf>) -> Vec<&'a Path> {
    let mut v = vec![model, corpus];
    v.extend(split.map(PathBuf::as_path));
    v
}

pub fn attribute(a: AttributeArgs, ctx: &mut Ctx) -> Result<()> {
    if let Some(s) = a.steps {
        ctx.config.attribute.steps = s;
    }
    if let Some(r) = a.rule {
        ctx.config.attribute.rule = r;
    }
    if ctx.config.attribute.steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    let (model, meta) = load_model(&a.model)?;
    let labels = LabelSet::new(meta.labels.clone())?;
    let docs = select_docs(load_corpus(&a.corpus)?, part_ids(a.part.split.as_ref(), a.part.part)?)?;
    let second = Seconds::load(&a.second, meta.train.arch, meta.train.head)?;
    let exs = examples(&meta.train, &docs, &labels, &second)?;
    let targets: Vec<(usize, usize, usize)> = exs
        .iter()
        .enumerate()
        .flat_map(|(i, ex)| alleged_targets(ex, meta.train.head).into_iter().map(move |(j, col)| (i, j, col)))
        .collect();
    let (steps, rule) = (ctx.config.attribute.steps, ctx.config.attribute.rule.into());
    let attributions: Vec<AttributionMap> = ctx.install(|| {
        targets
            .par_iter()
            .map(|&(i, j, col)| {
                attribute_one(&model, &exs[i], &labels.labels()[j], col, steps, rule)
                    .with_context(|| format!("case {}, article {}", exs[i].case_id, labels.labels()[j]))
            })
            .collect::<Result<_>>()
    })?;
    let mut inputs = model_inputs(&a.model, &a.corpus, a.part.split.as_ref());
    inputs.extend(Seconds::inputs(&a.second, meta.train.arch, meta.train.head));
    let header = Header::new("attribute", &ctx.config, &inputs)?;
    let worst = attributions
        .iter()
        .filter_map(|m| m.completeness_gap)
        .fold(0.0f64, f64::max);
    println!(
        "{} attributions ({} steps), max completeness gap {worst:.3e} -> {}",
        attributions.len(),
        steps,
        a.out.display()
    );
    write_json(
        &a.out,
        &AttrFile {
            header: Some(header.to_value()),
            attributions,
        },
    )
}

/// Contents of an eval output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalFile {
    pub header: Header,
    pub name: String,
    pub part: String,
    pub n_cases: usize,
    pub summary: EvalSummary,
}

pub fn eval(a: EvalArgs, ctx: &mut Ctx) -> Result<()> {
    let (model, meta) = load_model(&a.model)?;
    let labels = LabelSet::new(meta.labels.clone())?;
    let docs = select_docs(load_corpus(&a.corpus)?, part_ids(a.part.split.as_ref(), a.part.part)?)?;
    let second = Seconds::load(&a.second, meta.train.arch, meta.train.head)?;
    let exs = examples(&meta.train, &docs, &labels, &second)?;
    let summary = evaluate(&model, &exs)?;
    let mut inputs = model_inputs(&a.model, &a.corpus, a.part.split.as_ref());
    inputs.extend(Seconds::inputs(&a.second, meta.train.arch, meta.train.head));
    let header = Header::new("eval", &ctx.config, &inputs)?;
    println!(
        "{}: micro-F1 {:.4}, macro-F1 {:.4}, hard-macro-F1 {:.4}{}",
        a.name,
        summary.micro_f1,
        summary.macro_f1,
        summary.hard_macro_f1,
        summary.pair_f1.map_or_else(String::new, |f| format!(", pair F1 {f:.4}"))
    );
    write_json(
        &a.out,
        &EvalFile {
            header,
            name: a.name,
            part: part_name(a.part.part).to_string(),
            n_cases: docs.len(),
            summary,
        },
    )
}
