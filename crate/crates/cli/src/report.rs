//! Markdown report over eval, align, iaa and proxy-stats outputs.

use anyhow::{bail, Context, Result};
use rationale_core::metrics::KappaSummary;
use rationale_core::stats::{format_p, proxy_label, Association, TTestKind, ALPHA, BIN_LABELS};

use crate::artifact::{read_text, write_bytes, Header};
use crate::commands::markup::{AlignFile, IaaFile};
use crate::commands::model::EvalFile;
use crate::commands::stats::ProxyFile;
use crate::commands::ReportArgs;
use crate::Ctx;

#[derive(Default)]
struct Row {
    name: String,
    kappa: Option<KappaSummary>,
    eval: Option<rationale_core::model::EvalSummary>,
}

enum Input {
    Eval(EvalFile),
    Align(AlignFile),
    Iaa(IaaFile),
    Proxy(ProxyFile),
}

fn load(path: &std::path::Path) -> Result<Input> {
    let text = read_text(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{}: malformed JSON", path.display()))?;
    let command = value["header"]["command"].as_str().unwrap_or_default().to_string();
    let bad = |e: serde_json::Error| anyhow::anyhow!("{}: {e}", path.display());
    Ok(match command.as_str() {
        "eval" => Input::Eval(serde_json::from_value(value).map_err(bad)?),
        "align" => Input::Align(serde_json::from_value(value).map_err(bad)?),
        "iaa" => Input::Iaa(serde_json::from_value(value).map_err(bad)?),
        "proxy-stats" => Input::Proxy(serde_json::from_value(value).map_err(bad)?),
        other => bail!("{}: not an eval, align, iaa or proxy-stats output (command {other:?})", path.display()),
    })
}

fn md_table(header: &[&str], align_right: &[bool], rows: &[Vec<String>]) -> String {
    let mut out = format!("| {} |\n|", header.join(" | "));
    for &right in align_right {
        out.push_str(if right { " --: |" } else { " :-- |" });
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    out
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

fn render(inputs: &[Input]) -> String {
    let mut rows: Vec<Row> = Vec::new();
    let row_of = |name: &str, rows: &mut Vec<Row>| -> usize {
        if let Some(i) = rows.iter().position(|r| r.name == name) {
            return i;
        }
        rows.push(Row {
            name: name.to_string(),
            ..Row::default()
        });
        rows.len() - 1
    };
    for input in inputs {
        match input {
            Input::Eval(e) => {
                let i = row_of(&e.name, &mut rows);
                rows[i].eval = Some(e.summary.clone());
            }
            Input::Align(a) => {
                let i = row_of(&a.name, &mut rows);
                rows[i].kappa = Some(a.report.overall.clone());
            }
            _ => {}
        }
    }

    let mut out = String::from("# Rationale alignment report\n");
    if !rows.is_empty() {
        out.push_str("\n## Alignment and classification\n\n");
        out.push_str("Kappa against expert markups on content words; F1 on the evaluated split. All values ×100.\n\n");
        let cells: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                let dash = || "-".to_string();
                vec![
                    r.name.clone(),
                    r.kappa.as_ref().map_or_else(dash, |k| format!("{} ({})", pct(k.mean), pct(k.se))),
                    r.kappa.as_ref().map_or_else(dash, |k| k.n.to_string()),
                    r.eval.as_ref().map_or_else(dash, |e| pct(e.micro_f1)),
                    r.eval.as_ref().map_or_else(dash, |e| pct(e.macro_f1)),
                    r.eval.as_ref().map_or_else(dash, |e| pct(e.hard_macro_f1)),
                ]
            })
            .collect();
        out.push_str(&md_table(
            &["Model", "kappa (SE)", "pairs", "micro-F1", "macro-F1", "hard-macro-F1"],
            &[false, true, true, true, true, true],
            &cells,
        ));
    }

    for input in inputs {
        if let Input::Iaa(f) = input {
            out.push_str("\n## Inter-annotator agreement\n\n");
            out.push_str(&format!(
                "Mean kappa {:.2} (SE {:.2}) over {} pairs.\n",
                f.summary.mean, f.summary.se, f.summary.n
            ));
            if let Some(h) = &f.histogram {
                out.push('\n');
                let cells: Vec<Vec<String>> = BIN_LABELS
                    .iter()
                    .zip(h.counts)
                    .map(|(l, c)| vec![(*l).to_string(), c.to_string()])
                    .collect();
                out.push_str(&md_table(&["kappa", "pairs"], &[false, true], &cells));
            }
        }
    }

    for input in inputs {
        if let Input::Proxy(f) = input {
            out.push_str("\n## Disagreement proxies\n\n");
            let test = match f.test {
                TTestKind::Student => "Student's",
                TTestKind::Welch => "Welch's",
            };
            out.push_str(&format!("{} pairs, {test} t-test, t = (mean1 − mean0)/se.\n\n", f.n_pairs));
            let cells: Vec<Vec<String>> = f
                .rows
                .iter()
                .map(|row| {
                    let p = format_p(row.p(), row.significant());
                    let label = proxy_label(&row.proxy).to_string();
                    match &row.association {
                        Association::TTest { mean0, mean1, result, .. } => {
                            vec![label, format!("{mean0:.3}"), format!("{mean1:.3}"), format!("{:.3}", result.t), p]
                        }
                        Association::Pearson(c) => vec![label, String::new(), String::new(), format!("r = {:.3}", c.r), p],
                    }
                })
                .collect();
            out.push_str(&md_table(
                &["Proxy", "mean IAA 0", "mean IAA 1", "t-value", "p-value"],
                &[false, true, true, true, true],
                &cells,
            ));
            out.push_str(&format!("\n\\*: p < {ALPHA}\n"));
        }
    }
    out
}

pub fn report(a: ReportArgs, ctx: &mut Ctx) -> Result<()> {
    let inputs: Vec<Input> = a.inputs.iter().map(|p| load(p)).collect::<Result<_>>()?;
    let paths: Vec<&std::path::Path> = a.inputs.iter().map(|p| p.as_path()).collect();
    let header = Header::new("report", &ctx.config, &paths)?;
    let mut text = format!("<!-- {} -->\n\n", header.line());
    text.push_str(&render(&inputs));
    write_bytes(&a.out, text.as_bytes())?;
    println!("report -> {}", a.out.display());
    Ok(())
}
