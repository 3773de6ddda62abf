use serde::{Deserialize, Serialize};

/// Bin labels, in order: below 0, then `[0,0.2]`, `(0.2,0.4]`, `(0.4,0.6]`,
/// `(0.6,1]`.
pub const BIN_LABELS: [&str; 5] = ["<0", "[0,0.2]", "(0.2,0.4]", "(0.4,0.6]", "(0.6,1]"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IaaHistogram {
    pub counts: [usize; 5],
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

fn bin(k: f64) -> usize {
    if k < 0.0 {
        0
    } else if k <= 0.2 {
        1
    } else if k <= 0.4 {
        2
    } else if k <= 0.6 {
        3
    } else {
        4
    }
}

/// Distribution of pairwise agreement scores; `None` for no scores.
pub fn iaa_histogram(kappas: &[f64]) -> Option<IaaHistogram> {
    if kappas.is_empty() {
        return None;
    }
    let mut counts = [0; 5];
    for &k in kappas {
        counts[bin(k)] += 1;
    }
    Some(IaaHistogram {
        counts,
        mean: kappas.iter().sum::<f64>() / kappas.len() as f64,
        min: kappas.iter().copied().fold(f64::INFINITY, f64::min),
        max: kappas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

impl IaaHistogram {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (label, c) in BIN_LABELS.iter().zip(self.counts) {
            out.push_str(&format!("{label:<10} {c}\n"));
        }
        out.push_str(&format!(
            "mean {:.2}  min {:.2}  max {:.2}\n",
            self.mean, self.min, self.max
        ));
        out
    }
}
