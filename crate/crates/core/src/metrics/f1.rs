use crate::error::{Error, Result};

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

fn check_rows(a: &[Vec<u8>], b: &[Vec<u8>]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let k = a.first().map_or(0, Vec::len);
    for (x, y) in a.iter().zip(b) {
        if x.len() != k {
            return Err(Error::LengthMismatch(x.len(), k));
        }
        if y.len() != k {
            return Err(Error::LengthMismatch(y.len(), k));
        }
    }
    Ok(k)
}

/// Micro- and macro-F1 over the k labels plus a "no violation" label that
/// is on exactly when all k labels are off.
///
/// A label with no gold and no predicted positives has F1 = 0.
pub fn f1_10plus1(pred: &[Vec<u8>], gold: &[Vec<u8>]) -> Result<(f64, f64)> {
    let k = check_rows(pred, gold)?;
    if pred.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut counts = vec![(0usize, 0usize, 0usize); k + 1];
    for (p, g) in pred.iter().zip(gold) {
        let none = |v: &[u8]| u8::from(v.iter().all(|&x| x == 0));
        let pa = p.iter().copied().chain([none(p)]);
        let ga = g.iter().copied().chain([none(g)]);
        for (c, (x, y)) in counts.iter_mut().zip(pa.zip(ga)) {
            match (x != 0, y != 0) {
                (true, true) => c.0 += 1,
                (true, false) => c.1 += 1,
                (false, true) => c.2 += 1,
                _ => {}
            }
        }
    }
    let (tp, fp, fn_) = counts
        .iter()
        .fold((0, 0, 0), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    let macro_ = counts.iter().map(|&(t, p, n)| f1(t, p, n)).sum::<f64>() / counts.len() as f64;
    Ok((f1(tp, fp, fn_), macro_))
}

/// Mean per-article F1 restricted to cases where the article is alleged;
/// articles alleged nowhere are left out of the mean.
pub fn hard_macro_f1(pred: &[Vec<u8>], gold: &[Vec<u8>], alleged: &[Vec<u8>]) -> Result<f64> {
    let k = check_rows(pred, gold)?;
    if check_rows(gold, alleged)? != k {
        return Err(Error::LengthMismatch(alleged.first().map_or(0, Vec::len), k));
    }
    for (i, (g, a)) in gold.iter().zip(alleged).enumerate() {
        if g.iter().zip(a).any(|(&g, &a)| g != 0 && a == 0) {
            return Err(Error::GoldNotSubsetOfAlleged(i));
        }
    }
    let mut scores = Vec::new();
    for j in 0..k {
        let (mut tp, mut fp, mut fn_, mut n) = (0, 0, 0, 0);
        for ((p, g), a) in pred.iter().zip(gold).zip(alleged) {
            if a[j] == 0 {
                continue;
            }
            n += 1;
            match (p[j] != 0, g[j] != 0) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            }
        }
        if n > 0 {
            scores.push(f1(tp, fp, fn_));
        }
    }
    if scores.is_empty() {
        return Ok(0.0);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// F1 of the positive class over flat binary predictions.
pub fn binary_f1(pred: &[u8], gold: &[u8]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch(pred.len(), gold.len()));
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&p, &g) in pred.iter().zip(gold) {
        match (p != 0, g != 0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    Ok(f1(tp, fp, fn_))
}
