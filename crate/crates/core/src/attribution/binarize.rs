use std::cmp::Ordering;

/// Share of non-stop-word positions marked in `bits`; 0 when there are none.
pub fn annotation_density(bits: &[u8], stop_mask: &[bool]) -> f64 {
    let (mut marked, mut total) = (0usize, 0usize);
    for (&b, &stop) in bits.iter().zip(stop_mask) {
        if !stop {
            total += 1;
            marked += usize::from(b == 1);
        }
    }
    if total == 0 {
        0.0
    } else {
        marked as f64 / total as f64
    }
}

/// Marks the `k = round(ρ·N)` highest-scoring non-stop-word positions, where
/// `N` counts non-stop words and `k` is raised to 1 when `ρ > 0`.
///
/// Ties go to the earlier position; stop-word positions are never marked.
pub fn binarize_by_density(scores: &[f64], stop_mask: &[bool], density: f64) -> Vec<u8> {
    let mut candidates: Vec<usize> = (0..scores.len())
        .filter(|&i| !stop_mask.get(i).copied().unwrap_or(false))
        .collect();
    let n = candidates.len();
    let mut k = (density.clamp(0.0, 1.0) * n as f64).round() as usize;
    if density > 0.0 && k == 0 {
        k = 1;
    }
    candidates.sort_by(|&a, &b| match scores[b].partial_cmp(&scores[a]) {
        Some(Ordering::Equal) | None => a.cmp(&b),
        Some(o) => o,
    });
    let mut bits = vec![0u8; scores.len()];
    for &i in candidates.iter().take(k.min(n)) {
        bits[i] = 1;
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn top_half() {
        assert_eq!(binarize_by_density(&[0.9, 0.1, 0.5, 0.3], &[false; 4], 0.5), [1, 0, 1, 0]);
    }

    #[test]
    fn extremes() {
        let stop = [false, true, false, false];
        assert_eq!(binarize_by_density(&[0.9, 0.1, 0.5, 0.3], &stop, 0.0), [0, 0, 0, 0]);
        assert_eq!(binarize_by_density(&[0.9, 0.1, 0.5, 0.3], &stop, 1.0), [1, 0, 1, 1]);
    }

    #[test]
    fn tiny_density_marks_one() {
        assert_eq!(binarize_by_density(&[0.1, 0.4, 0.2], &[false; 3], 0.01), [0, 1, 0]);
    }

    #[test]
    fn ties_go_to_earlier_words() {
        assert_eq!(binarize_by_density(&[0.5, 0.5, 0.5, 0.1], &[false; 4], 0.5), [1, 1, 0, 0]);
    }

    #[test]
    fn density_ignores_stop_words() {
        assert_eq!(annotation_density(&[1, 1, 0, 0], &[false, true, false, false]), 1.0 / 3.0);
        assert_eq!(annotation_density(&[1], &[true]), 0.0);
    }

    proptest! {
        #[test]
        fn count_and_stop_words(
            cells in proptest::collection::vec((-5.0f64..5.0, any::<bool>()), 0..60),
            rho in 0.0f64..=1.0,
        ) {
            let scores: Vec<f64> = cells.iter().map(|c| c.0).collect();
            let stop: Vec<bool> = cells.iter().map(|c| c.1).collect();
            let bits = binarize_by_density(&scores, &stop, rho);
            let n = stop.iter().filter(|&&s| !s).count();
            let mut k = (rho * n as f64).round() as usize;
            if rho > 0.0 && k == 0 { k = 1; }
            prop_assert_eq!(bits.iter().filter(|&&b| b == 1).count(), k.min(n));
            for (b, s) in bits.iter().zip(&stop) {
                prop_assert!(!(*s && *b == 1));
            }
        }

        #[test]
        fn scale_invariant(
            scores in proptest::collection::vec(-5.0f64..5.0, 1..40),
            c in 0.01f64..100.0,
            rho in 0.0f64..=1.0,
        ) {
            let stop = vec![false; scores.len()];
            let scaled: Vec<f64> = scores.iter().map(|s| s * c).collect();
            prop_assert_eq!(binarize_by_density(&scores, &stop, rho), binarize_by_density(&scaled, &stop, rho));
        }
    }
}
