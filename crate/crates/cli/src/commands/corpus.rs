use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use chrono::NaiveDate;
use rationale_core::corpus::{
    chronological_split, read_allegations_csv, write_allegations_csv, CaseDocument, CorpusParser, LabelSet, ProxyFlags,
};
use rationale_core::hard_method::{derive_hard_markup, select_summary_section};
use rationale_core::markup::RelevanceMarkup;
use rationale_core::synthetic::generate;
use rationale_core::text::{tokenize_paragraphs, Packet, StopWords};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CurateArgs, GenSyntheticArgs, HardDeriveArgs, PackArgs, ParseJudgmentArgs, ParseSummaryArgs, SplitArgs};
use crate::artifact::{
    load_corpus, load_summaries, part_ids, read_jsonl_numbered, read_text, strip_csv_comments, with_csv_header,
    write_bytes, write_json, write_jsonl_with_header, write_markups, Header, SplitFile,
};
use crate::{usage, Ctx};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJudgment {
    case_id: String,
    #[serde(default)]
    judgment_date: Option<NaiveDate>,
    text: String,
    #[serde(default)]
    alleged: Option<Vec<String>>,
    #[serde(default)]
    violated: Vec<String>,
    #[serde(default)]
    metadata_articles: Vec<String>,
    #[serde(default)]
    proxies: Option<RawProxies>,
}

/// Proxy flags as supplied; the paragraph count is derived from the facts.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProxies {
    judge_split: u8,
    key_case: u8,
    omit_alleg: u8,
    article6: u8,
    diff_pred: u8,
    diff_fam: u8,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSummary {
    case_id: String,
    text: String,
}

/// Contents of `articles.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArticlesFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<Header>,
    /// Label ↦ article text.
    pub articles: BTreeMap<String, String>,
    /// Planted trigger per label, for synthetic corpora.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub triggers: BTreeMap<String, String>,
}

pub fn label_set(ctx: &Ctx, file: Option<&Path>) -> Result<LabelSet> {
    if let Some(path) = file {
        return LabelSet::parse(&read_text(path)?).map_err(|e| usage(format!("{}: {e}", path.display())));
    }
    match &ctx.config.labels {
        Some(l) => LabelSet::new(l.clone()).map_err(|e| usage(format!("config labels: {e}"))),
        None => Ok(LabelSet::bundled().clone()),
    }
}

fn parser(ctx: &Ctx) -> Result<CorpusParser> {
    CorpusParser::new(&ctx.config.patterns, label_set(ctx, None)?).map_err(|e| usage(e.to_string()))
}

/// Documents of one split part, in corpus order.
pub fn select_docs(docs: Vec<CaseDocument>, ids: Option<Vec<String>>) -> Result<Vec<CaseDocument>> {
    let Some(ids) = ids else {
        return Ok(docs);
    };
    let wanted: BTreeSet<String> = ids.into_iter().collect();
    let kept: Vec<CaseDocument> = docs.into_iter().filter(|d| wanted.contains(&d.case_id)).collect();
    if kept.len() != wanted.len() {
        let have: BTreeSet<&str> = kept.iter().map(|d| d.case_id.as_str()).collect();
        let missing = wanted.iter().find(|id| !have.contains(id.as_str())).expect("a missing id");
        bail!("split names case {missing}, which is not in the corpus");
    }
    Ok(kept)
}

/// Stop-word masks of every case, keyed by case id.
pub fn stop_masks(docs: &[CaseDocument]) -> BTreeMap<String, Vec<bool>> {
    docs.iter()
        .map(|d| {
            let (tok, _) = tokenize_paragraphs(&d.paragraphs, StopWords::bundled());
            (d.case_id.clone(), tok.stop_mask)
        })
        .collect()
}

fn sorted(labels: &LabelSet, mut v: Vec<String>) -> Vec<String> {
    labels.sort(&mut v);
    v.dedup();
    v
}

pub fn parse_judgment(a: ParseJudgmentArgs, ctx: &mut Ctx) -> Result<()> {
    let parser = parser(ctx)?;
    let raw: Vec<(usize, RawJudgment)> = read_jsonl_numbered(&a.input)?;
    let curated: BTreeMap<String, Vec<String>> = match &a.allegations {
        Some(path) => {
            let (body, _) = strip_csv_comments(&read_text(path)?);
            read_allegations_csv(body.as_bytes())
                .with_context(|| path.display().to_string())?
                .into_iter()
                .map(|r| (r.case_id, r.curated))
                .collect()
        }
        None => BTreeMap::new(),
    };
    let docs = ctx.install(|| {
        raw.par_iter()
            .map(|(line, r)| {
                let at = || format!("{} line {line} (case {})", a.input.display(), r.case_id);
                let paragraphs = parser.parse_facts(&r.text).with_context(at)?;
                let alleged = curated
                    .get(&r.case_id)
                    .cloned()
                    .or_else(|| r.alleged.clone())
                    .unwrap_or_else(|| r.metadata_articles.clone());
                let doc = CaseDocument {
                    case_id: r.case_id.clone(),
                    judgment_date: r.judgment_date,
                    alleged: sorted(parser.labels(), alleged),
                    violated: sorted(parser.labels(), r.violated.clone()),
                    proxies: r.proxies.map(|p| ProxyFlags {
                        judge_split: p.judge_split,
                        key_case: p.key_case,
                        omit_alleg: p.omit_alleg,
                        article6: p.article6,
                        diff_pred: p.diff_pred,
                        diff_fam: p.diff_fam,
                        num_para: paragraphs.len() as u32,
                    }),
                    paragraphs,
                };
                doc.validate().with_context(at)?;
                Ok(doc)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut inputs = vec![a.input.as_path()];
    inputs.extend(a.allegations.as_deref());
    let header = Header::new("parse-judgment", &ctx.config, &inputs)?;
    write_jsonl_with_header(&a.out, &header, &docs)?;
    println!("{} cases -> {}", docs.len(), a.out.display());
    Ok(())
}

pub fn parse_summary(a: ParseSummaryArgs, ctx: &mut Ctx) -> Result<()> {
    let parser = parser(ctx)?;
    let raw: Vec<(usize, RawSummary)> = read_jsonl_numbered(&a.input)?;
    let summaries = ctx.install(|| {
        raw.par_iter()
            .map(|(line, r)| {
                parser
                    .parse_summary(&r.case_id, &r.text)
                    .with_context(|| format!("{} line {line} (case {})", a.input.display(), r.case_id))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let header = Header::new("parse-summary", &ctx.config, &[&a.input])?;
    write_jsonl_with_header(&a.out, &header, &summaries)?;
    println!("{} summaries -> {}", summaries.len(), a.out.display());
    Ok(())
}

pub fn curate(a: CurateArgs, ctx: &mut Ctx) -> Result<()> {
    let parser = parser(ctx)?;
    let raw: Vec<(usize, RawJudgment)> = read_jsonl_numbered(&a.input)?;
    let records: Vec<_> = ctx.install(|| {
        raw.par_iter()
            .map(|(_, r)| parser.curate_allegations(&r.case_id, &r.text, &r.metadata_articles))
            .collect()
    });
    let mut body = Vec::new();
    write_allegations_csv(&mut body, &records)?;
    let header = Header::new("curate-allegations", &ctx.config, &[&a.input])?;
    write_bytes(&a.out, &with_csv_header(&header, &body))?;
    println!("{} allegation records -> {}", records.len(), a.out.display());
    Ok(())
}

pub fn split(a: SplitArgs, ctx: &mut Ctx) -> Result<()> {
    if let Some(c) = a.cut1 {
        ctx.config.split.cut1 = Some(c);
    }
    if let Some(c) = a.cut2 {
        ctx.config.split.cut2 = Some(c);
    }
    let (Some(cut1), Some(cut2)) = (ctx.config.split.cut1, ctx.config.split.cut2) else {
        return Err(usage("split needs --cut1 and --cut2 (or [split] cut1/cut2 in the config)"));
    };
    if cut2 < cut1 {
        return Err(usage(format!("cut2 {cut2} precedes cut1 {cut1}")));
    }
    let docs = load_corpus(&a.corpus)?;
    let split = chronological_split(&docs, cut1, cut2).with_context(|| a.corpus.display().to_string())?;
    let header = Header::new("split", &ctx.config, &[&a.corpus])?;
    println!(
        "train {} / valid {} / test {} -> {}",
        split.train.len(),
        split.valid.len(),
        split.test.len(),
        a.out.display()
    );
    write_json(&a.out, &SplitFile { header: Some(header), split })
}

#[derive(Debug, Serialize)]
struct PackedCase {
    case_id: String,
    n_words: usize,
    packets: Vec<Packet>,
}

pub fn pack(a: PackArgs, ctx: &mut Ctx) -> Result<()> {
    if let Some(cap) = a.cap {
        ctx.config.train.packet_cap = cap;
    }
    if ctx.config.train.packet_cap == 0 {
        return Err(usage("packet cap must be at least 1"));
    }
    let docs = load_corpus(&a.corpus)?;
    let encoder = ctx.config.train.encoder();
    let packed = ctx.install(|| {
        docs.par_iter()
            .map(|d| {
                let e = encoder
                    .encode(&d.paragraphs, "facts")
                    .with_context(|| format!("{}: case {}", a.corpus.display(), d.case_id))?;
                Ok(PackedCase {
                    case_id: d.case_id.clone(),
                    n_words: e.n_words,
                    packets: e.packets,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let header = Header::new("pack", &ctx.config, &[&a.corpus])?;
    write_jsonl_with_header(&a.out, &header, &packed)?;
    println!("{} cases packed at cap {} -> {}", packed.len(), ctx.config.train.packet_cap, a.out.display());
    Ok(())
}

pub fn hard_derive(a: HardDeriveArgs, ctx: &mut Ctx) -> Result<()> {
    let docs = select_docs(load_corpus(&a.corpus)?, part_ids(a.part.split.as_ref(), a.part.part)?)?;
    let summaries: BTreeMap<String, _> =
        load_summaries(&a.summaries)?.into_iter().map(|s| (s.case_id.clone(), s)).collect();
    let per_case = ctx.install(|| {
        docs.par_iter()
            .map(|d| {
                let summary = summaries
                    .get(&d.case_id)
                    .ok_or_else(|| anyhow!("{}: no summary for case {}", a.summaries.display(), d.case_id))?;
                let (tok, _) = tokenize_paragraphs(&d.paragraphs, StopWords::bundled());
                Ok(d.alleged
                    .iter()
                    .map(|art| derive_hard_markup(&d.case_id, art, &tok, &select_summary_section(summary, art)))
                    .collect::<Vec<RelevanceMarkup>>())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let markups: Vec<RelevanceMarkup> = per_case.into_iter().flatten().collect();
    let mut inputs = vec![a.corpus.as_path(), a.summaries.as_path()];
    inputs.extend(a.part.split.as_deref());
    let header = Header::new("hard-derive", &ctx.config, &inputs)?;
    write_markups(&a.out, &header, &markups)?;
    println!("{} hard markups -> {}", markups.len(), a.out.display());
    Ok(())
}

pub fn gen_synthetic(a: GenSyntheticArgs, ctx: &mut Ctx) -> Result<()> {
    if let Some(seed) = a.seed {
        ctx.config.synthetic.seed = seed;
    }
    let corpus = generate(&ctx.config.synthetic).map_err(|e| usage(e.to_string()))?;
    let header = Header::new("gen-synthetic", &ctx.config, &[])?;
    let dir = &a.out_dir;
    write_jsonl_with_header(&dir.join("corpus.jsonl"), &header, &corpus.docs)?;
    write_jsonl_with_header(&dir.join("summary.jsonl"), &header, &corpus.summaries)?;
    write_json(
        &dir.join("articles.json"),
        &ArticlesFile {
            header: Some(header.clone()),
            articles: corpus.articles.clone(),
            triggers: corpus.labels.iter().cloned().zip(corpus.triggers.iter().cloned()).collect(),
        },
    )?;
    let mut labels = format!("# {}\n", header.line());
    for l in &corpus.labels {
        labels.push_str(l);
        labels.push('\n');
    }
    write_bytes(&dir.join("labels.txt"), labels.as_bytes())?;
    write_markups(&dir.join("planted.markup.json"), &header, &corpus.rationales)?;
    write_json(
        &dir.join("split.json"),
        &SplitFile {
            header: Some(header),
            split: corpus.split.clone(),
        },
    )?;
    println!(
        "{} cases, {} labels, {} planted markups -> {}",
        corpus.docs.len(),
        corpus.labels.len(),
        corpus.rationales.len(),
        dir.display()
    );
    Ok(())
}
