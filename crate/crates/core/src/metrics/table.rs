use serde::{Deserialize, Serialize};

use super::KappaSummary;

/// One model's line in the alignment-and-accuracy table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub model: String,
    pub kappa: Option<KappaSummary>,
    pub micro_f1: Option<f64>,
    pub macro_f1: Option<f64>,
    pub hard_macro_f1: Option<f64>,
}

/// Plain-text table with columns `model | kappa mean (SE) | micro-F1 |
/// macro-F1 | hard-macro-F1`. With `percent` every value is scaled by 100.
pub fn render_model_table(rows: &[ModelRow], percent: bool) -> String {
    let scale = if percent { 100.0 } else { 1.0 };
    let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{:.2}", v * scale));
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            let kappa = r.kappa.as_ref().map_or_else(
                || "-".to_string(),
                |k| format!("{:.2} ({:.2})", k.mean * scale, k.se * scale),
            );
            [
                r.model.clone(),
                kappa,
                num(r.micro_f1),
                num(r.macro_f1),
                num(r.hard_macro_f1),
            ]
        })
        .collect();
    let header = ["model", "kappa (SE)", "micro-F1", "macro-F1", "hard-macro-F1"].map(String::from);
    render_grid(&header, &cells)
}

pub(crate) fn render_grid<const N: usize>(header: &[String; N], rows: &[[String; N]]) -> String {
    let mut widths = header.each_ref().map(|h| h.chars().count());
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String; N]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (N - 1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_display() {
        let rows = [ModelRow {
            model: "soft".into(),
            kappa: Some(KappaSummary { n: 3, mean: 0.1148, se: 0.0362 }),
            micro_f1: Some(0.6552),
            macro_f1: None,
            hard_macro_f1: Some(0.5),
        }];
        let text = render_model_table(&rows, true);
        let last = text.lines().nth(2).unwrap();
        assert!(last.contains("11.48 (3.62)"), "{text}");
        assert!(last.contains("65.52"));
        assert!(last.contains(" - "));
    }
}
