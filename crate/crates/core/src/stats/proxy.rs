use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::corr::{pearson, Correlation};
use super::ttest::{mean, ttest, TTest, TTestKind};
use crate::corpus::ProxyFlags;
use crate::error::{Error, Result};
use crate::metrics::render_grid;

/// Significance level for the star marker.
pub const ALPHA: f64 = 0.05;

/// One annotated pair: its agreement score and the disagreement proxies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyRecord {
    pub pair_id: String,
    pub kappa: f64,
    pub proxies: ProxyFlags,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    pair_id: String,
    kappa: f64,
    judge_split: u8,
    key_case: u8,
    omit_alleg: u8,
    article6: u8,
    diff_pred: u8,
    diff_fam: u8,
    num_para: u32,
}

impl ProxyRecord {
    fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.kappa) {
            return Err(Error::format("proxies", format!("{}: kappa {} outside [-1, 1]", self.pair_id, self.kappa)));
        }
        if self.proxies.binary().iter().any(|&b| b > 1) {
            return Err(Error::format("proxies", format!("{}: binary proxy not 0/1", self.pair_id)));
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::format("proxies csv", e.to_string())
}

/// Reads `pair_id,kappa,judge_split,key_case,omit_alleg,article6,diff_pred,diff_fam,num_para`.
pub fn read_proxies_csv<R: Read>(reader: R) -> Result<Vec<ProxyRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<CsvRow>() {
        let r = row.map_err(csv_err)?;
        let rec = ProxyRecord {
            pair_id: r.pair_id,
            kappa: r.kappa,
            proxies: ProxyFlags {
                judge_split: r.judge_split,
                key_case: r.key_case,
                omit_alleg: r.omit_alleg,
                article6: r.article6,
                diff_pred: r.diff_pred,
                diff_fam: r.diff_fam,
                num_para: r.num_para,
            },
        };
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_proxies_csv<W: Write>(writer: W, records: &[ProxyRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        let p = r.proxies;
        w.serialize(CsvRow {
            pair_id: r.pair_id.clone(),
            kappa: r.kappa,
            judge_split: p.judge_split,
            key_case: p.key_case,
            omit_alleg: p.omit_alleg,
            article6: p.article6,
            diff_pred: p.diff_pred,
            diff_fam: p.diff_fam,
            num_para: p.num_para,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "lowercase")]
pub enum Association {
    /// Agreement of pairs with the proxy at 0 against those at 1.
    TTest {
        n0: usize,
        n1: usize,
        mean0: f64,
        mean1: f64,
        #[serde(flatten)]
        result: TTest,
    },
    Pearson(Correlation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyRow {
    pub proxy: String,
    #[serde(flatten)]
    pub association: Association,
}

impl ProxyRow {
    pub fn p(&self) -> f64 {
        match &self.association {
            Association::TTest { result, .. } => result.p,
            Association::Pearson(c) => c.p,
        }
    }

    pub fn significant(&self) -> bool {
        self.p() < ALPHA
    }
}

/// Display name of a proxy column.
pub fn proxy_label(name: &str) -> &str {
    match name {
        "judge_split" => "JudgeSplit",
        "key_case" => "KeyCase",
        "omit_alleg" => "OmitAlleg",
        "article6" => "Article6",
        "diff_pred" => "DiffPred",
        "diff_fam" => "DiffFam",
        "num_para" => "NumPara",
        other => other,
    }
}

/// A t-test per binary proxy (`t = (mean1 − mean0)/se`) and a Pearson
/// correlation between paragraph count and agreement.
pub fn proxy_analysis(records: &[ProxyRecord], kind: TTestKind) -> Result<Vec<ProxyRow>> {
    let mut rows = Vec::new();
    for (i, name) in ProxyFlags::BINARY_NAMES.iter().enumerate() {
        let (mut g0, mut g1) = (Vec::new(), Vec::new());
        for r in records {
            if r.proxies.binary()[i] == 1 {
                g1.push(r.kappa);
            } else {
                g0.push(r.kappa);
            }
        }
        let result = ttest(&g0, &g1, kind).map_err(|e| match e {
            Error::DegenerateGroup(msg) => Error::DegenerateGroup(format!("{name}: {msg}")),
            other => other,
        })?;
        rows.push(ProxyRow {
            proxy: name.to_string(),
            association: Association::TTest {
                n0: g0.len(),
                n1: g1.len(),
                mean0: mean(&g0),
                mean1: mean(&g1),
                result,
            },
        });
    }
    let paras: Vec<f64> = records.iter().map(|r| f64::from(r.proxies.num_para)).collect();
    let kappas: Vec<f64> = records.iter().map(|r| r.kappa).collect();
    let corr = match pearson(&paras, &kappas) {
        // Constant agreement carries no association.
        Err(Error::ConstantInput) => Correlation {
            r: 0.0,
            p: 1.0,
            n: records.len(),
        },
        other => other?,
    };
    rows.push(ProxyRow {
        proxy: "num_para".to_string(),
        association: Association::Pearson(corr),
    });
    Ok(rows)
}

pub fn format_p(p: f64, star: bool) -> String {
    let s = if p != 0.0 && p < 1e-3 { format!("{p:.0e}") } else { format!("{p:.3}") };
    if star {
        format!("{s}*")
    } else {
        s
    }
}

/// Text table laid out as `Proxy | mean IAA 0 | mean IAA 1 | t-value | p-value`.
pub fn render_proxy_table(rows: &[ProxyRow]) -> String {
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|row| {
            let p = format_p(row.p(), row.significant());
            let label = proxy_label(&row.proxy).to_string();
            match &row.association {
                Association::TTest { mean0, mean1, result, .. } => {
                    [label, format!("{mean0:.3}"), format!("{mean1:.3}"), format!("{:.3}", result.t), p]
                }
                Association::Pearson(c) => [label, String::new(), String::new(), format!("r = {:.3}", c.r), p],
            }
        })
        .collect();
    let header = ["Proxy", "mean IAA 0", "mean IAA 1", "t-value", "p-value"].map(String::from);
    let mut out = render_grid(&header, &cells);
    out.push_str("(*: p < 0.05)\n");
    out
}

/// CSV form of the association table.
pub fn write_proxy_table_csv<W: Write>(writer: W, rows: &[ProxyRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["proxy", "test", "n0", "n1", "mean0", "mean1", "statistic", "df", "p", "significant"])
        .map_err(csv_err)?;
    for row in rows {
        let rec: Vec<String> = match &row.association {
            Association::TTest { n0, n1, mean0, mean1, result } => vec![
                row.proxy.clone(),
                "t".into(),
                n0.to_string(),
                n1.to_string(),
                mean0.to_string(),
                mean1.to_string(),
                result.t.to_string(),
                result.df.to_string(),
                result.p.to_string(),
                row.significant().to_string(),
            ],
            Association::Pearson(c) => vec![
                row.proxy.clone(),
                "r".into(),
                c.n.to_string(),
                String::new(),
                String::new(),
                String::new(),
                c.r.to_string(),
                (c.n as f64 - 2.0).to_string(),
                c.p.to_string(),
                row.significant().to_string(),
            ],
        };
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
