use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use rationale_core::stats::{
    proxy_analysis, read_proxies_csv, render_proxy_table, write_proxy_table_csv, ProxyRecord, ProxyRow, TTestKind,
};
use serde::{Deserialize, Serialize};

use super::ProxyStatsArgs;
use crate::artifact::{load_corpus, read_json, read_text, strip_csv_comments, with_csv_header, write_bytes, write_json, Header};
use crate::{usage, Ctx};

/// Contents of a proxy-stats output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyFile {
    pub header: Header,
    pub test: TTestKind,
    pub n_pairs: usize,
    pub rows: Vec<ProxyRow>,
}

#[derive(Debug, Deserialize)]
struct KappaPair {
    case_id: String,
    article: String,
    #[serde(default)]
    annotator: Option<String>,
    kappa: f64,
}

#[derive(Debug, Deserialize)]
struct KappaFile {
    pairs: Vec<KappaPair>,
}

/// Joins per-pair kappas (from align or iaa) with the proxies of their cases.
fn records_from_kappas(kappas: &Path, corpus: &Path) -> Result<Vec<ProxyRecord>> {
    let file: KappaFile = read_json(kappas)?;
    let proxies: BTreeMap<String, _> = load_corpus(corpus)?
        .into_iter()
        .map(|d| (d.case_id, d.proxies))
        .collect();
    file.pairs
        .into_iter()
        .map(|p| {
            let flags = proxies
                .get(&p.case_id)
                .ok_or_else(|| anyhow!("{}: case {} not in {}", kappas.display(), p.case_id, corpus.display()))?
                .ok_or_else(|| anyhow!("{}: case {} has no proxy flags", corpus.display(), p.case_id))?;
            let mut pair_id = format!("{}/{}", p.case_id, p.article);
            if let Some(a) = p.annotator {
                pair_id = format!("{pair_id}/{a}");
            }
            Ok(ProxyRecord {
                pair_id,
                kappa: p.kappa,
                proxies: flags,
            })
        })
        .collect()
}

pub fn proxy_stats(a: ProxyStatsArgs, ctx: &mut Ctx) -> Result<()> {
    if a.welch {
        ctx.config.stats.welch = true;
    }
    let kind = if ctx.config.stats.welch { TTestKind::Welch } else { TTestKind::Student };
    let (records, inputs): (Vec<ProxyRecord>, Vec<&Path>) = match (&a.proxies, &a.kappas, &a.corpus) {
        (Some(p), None, _) => {
            let (body, _) = strip_csv_comments(&read_text(p)?);
            (read_proxies_csv(body.as_bytes()).with_context(|| p.display().to_string())?, vec![p.as_path()])
        }
        (None, Some(k), Some(c)) => (records_from_kappas(k, c)?, vec![k.as_path(), c.as_path()]),
        _ => return Err(usage("proxy-stats needs --proxies, or --kappas with --corpus")),
    };
    let rows = proxy_analysis(&records, kind).context("proxy analysis")?;
    print!("{}", render_proxy_table(&rows));
    let header = Header::new("proxy-stats", &ctx.config, &inputs)?;
    if let Some(path) = &a.csv {
        let mut body = Vec::new();
        write_proxy_table_csv(&mut body, &rows)?;
        write_bytes(path, &with_csv_header(&header, &body))?;
    }
    if let Some(path) = &a.out {
        write_json(
            path,
            &ProxyFile {
                header,
                test: kind,
                n_pairs: records.len(),
                rows,
            },
        )?;
    }
    Ok(())
}
