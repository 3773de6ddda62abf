use std::collections::{BTreeMap, BTreeSet};

use anyhow::{anyhow, bail, Context, Result};
use rationale_core::attribution::{binarize_fixed, binarize_like, random_like, AttrFile};
use rationale_core::markup::RelevanceMarkup;
use rationale_core::metrics::{alignment_report, cohens_kappa, AlignmentReport, KappaSummary};
use rationale_core::stats::{iaa_histogram, IaaHistogram};
use serde::{Deserialize, Serialize};

use super::corpus::stop_masks;
use super::{AlignArgs, BinarizeArgs, IaaArgs, PartArgs};
use crate::artifact::{load_corpus, load_markups, part_ids, read_text, write_json, write_markups, Header};
use crate::{usage, Ctx};

fn in_part(markups: Vec<RelevanceMarkup>, part: &PartArgs) -> Result<Vec<RelevanceMarkup>> {
    Ok(match part_ids(part.split.as_ref(), part.part)? {
        Some(ids) => {
            let ids: BTreeSet<String> = ids.into_iter().collect();
            markups.into_iter().filter(|m| ids.contains(&m.case_id)).collect()
        }
        None => markups,
    })
}

pub fn binarize(a: BinarizeArgs, ctx: &mut Ctx) -> Result<()> {
    if let Some(d) = a.density {
        ctx.config.binarize.density = Some(d);
    }
    if let Some(s) = a.seed {
        ctx.config.binarize.seed = s;
    }
    if let Some(d) = ctx.config.binarize.density.filter(|d| !(0.0..=1.0).contains(d)) {
        return Err(usage(format!("density {d} outside [0, 1]")));
    }
    let masks = stop_masks(&load_corpus(&a.corpus)?);
    let experts = match &a.like {
        Some(path) => Some(in_part(load_markups(path)?, &a.part)?),
        None => None,
    };
    let attrs = match &a.attrs {
        Some(path) => Some(
            AttrFile::parse(&read_text(path)?)
                .with_context(|| path.display().to_string())?
                .attributions,
        ),
        None => None,
    };
    let markups = match (a.random, ctx.config.binarize.density, &attrs, &experts) {
        (true, _, _, Some(e)) => random_like(e, &masks, ctx.config.binarize.seed)?,
        (true, _, _, None) => return Err(usage("--random needs --like")),
        (false, Some(d), Some(at), _) => binarize_fixed(at, d, &masks)?,
        (false, None, Some(at), Some(e)) => binarize_like(at, e, &masks)?,
        (false, _, None, _) => return Err(usage("binarize needs --attrs unless --random is given")),
        (false, None, Some(_), None) => return Err(usage("binarize needs --like or --density")),
    };
    let mut inputs = vec![a.corpus.as_path()];
    inputs.extend(a.attrs.as_deref());
    inputs.extend(a.like.as_deref());
    inputs.extend(a.part.split.as_deref());
    let header = Header::new("binarize", &ctx.config, &inputs)?;
    write_markups(&a.out, &header, &markups)?;
    println!("{} markups -> {}", markups.len(), a.out.display());
    Ok(())
}

/// Contents of an align output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignFile {
    pub header: Header,
    pub name: String,
    #[serde(flatten)]
    pub report: AlignmentReport,
}

pub fn align(a: AlignArgs, ctx: &mut Ctx) -> Result<()> {
    let model = load_markups(&a.model)?;
    let expert = in_part(load_markups(&a.expert)?, &a.part)?;
    let masks = stop_masks(&load_corpus(&a.corpus)?);
    let report = alignment_report(&model, &expert, &masks)
        .with_context(|| format!("aligning {} with {}", a.model.display(), a.expert.display()))?;
    let name = a
        .name
        .unwrap_or_else(|| model.first().map_or_else(|| "model".to_string(), |m| m.source.to_string()));
    let mut inputs = vec![a.model.as_path(), a.expert.as_path(), a.corpus.as_path()];
    inputs.extend(a.part.split.as_deref());
    let header = Header::new("align", &ctx.config, &inputs)?;
    println!(
        "{name}: kappa {:.4} (SE {:.4}) over {} pairs, {} skipped",
        report.overall.mean,
        report.overall.se,
        report.overall.n,
        report.skipped.len()
    );
    write_json(&a.out, &AlignFile { header, name, report })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IaaPair {
    pub case_id: String,
    pub article: String,
    pub kappa: f64,
}

/// Contents of an iaa output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IaaFile {
    pub header: Header,
    pub pairs: Vec<IaaPair>,
    pub summary: KappaSummary,
    pub histogram: Option<IaaHistogram>,
    /// Pairs marked up in only one of the two files.
    pub unmatched: usize,
}

fn keyed(markups: Vec<RelevanceMarkup>, file: &std::path::Path) -> Result<BTreeMap<(String, String), RelevanceMarkup>> {
    let mut out = BTreeMap::new();
    for m in markups {
        let key = (m.case_id.clone(), m.article.clone());
        if out.contains_key(&key) {
            bail!("{}: more than one markup for case {}, article {}", file.display(), key.0, key.1);
        }
        out.insert(key, m);
    }
    Ok(out)
}

pub fn iaa(a: IaaArgs, ctx: &mut Ctx) -> Result<()> {
    let left = keyed(load_markups(&a.a)?, &a.a)?;
    let right = keyed(load_markups(&a.b)?, &a.b)?;
    let masks = match &a.corpus {
        Some(p) => Some(stop_masks(&load_corpus(p)?)),
        None => None,
    };
    let mut pairs = Vec::new();
    for ((case_id, article), u) in &left {
        let Some(v) = right.get(&(case_id.clone(), article.clone())) else {
            continue;
        };
        let at = || format!("case {case_id}, article {article}");
        if u.bits.len() != v.bits.len() {
            bail!("{}: {} words in one file, {} in the other", at(), u.bits.len(), v.bits.len());
        }
        let (x, y): (Vec<u8>, Vec<u8>) = match &masks {
            Some(m) => {
                let mask = m.get(case_id).ok_or_else(|| anyhow!("{}: case not in the corpus", at()))?;
                if mask.len() != u.bits.len() {
                    bail!("{}: markup has {} words, corpus has {}", at(), u.bits.len(), mask.len());
                }
                u.bits.iter().zip(&v.bits).zip(mask).filter(|(_, s)| !**s).map(|((p, q), _)| (*p, *q)).unzip()
            }
            None => (u.bits.clone(), v.bits.clone()),
        };
        if x.is_empty() {
            continue;
        }
        pairs.push(IaaPair {
            case_id: case_id.clone(),
            article: article.clone(),
            kappa: cohens_kappa(&x, &y).with_context(at)?,
        });
    }
    let matched = pairs.len();
    let unmatched = left.len() + right.len() - 2 * left.keys().filter(|k| right.contains_key(*k)).count();
    let kappas: Vec<f64> = pairs.iter().map(|p| p.kappa).collect();
    let summary = KappaSummary::of(&kappas);
    let histogram = iaa_histogram(&kappas);
    println!("mean kappa {:.4} (SE {:.4}) over {matched} pairs", summary.mean, summary.se);
    if let Some(h) = &histogram {
        print!("{}", h.render());
    }
    if let Some(out) = &a.out {
        let mut inputs = vec![a.a.as_path(), a.b.as_path()];
        inputs.extend(a.corpus.as_deref());
        let header = Header::new("iaa", &ctx.config, &inputs)?;
        write_json(
            out,
            &IaaFile {
                header,
                pairs,
                summary,
                histogram,
                unmatched,
            },
        )?;
    }
    Ok(())
}
