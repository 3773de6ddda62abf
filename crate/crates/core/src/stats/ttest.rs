use serde::{Deserialize, Serialize};

use super::dist::student_t_two_sided;
use crate::error::{Error, Result};

/// Variance assumption of the two-sample test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Pooled variance (Student).
    #[default]
    Student,
    /// Separate variances with Welch–Satterthwaite degrees of freedom.
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: f64,
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sum of squared deviations from the mean.
fn ss(x: &[f64], m: f64) -> f64 {
    x.iter().map(|v| (v - m) * (v - m)).sum()
}

/// Two-sample t-test, `t = (mean1 − mean0) / se`, two-sided p.
///
/// When both groups have zero variance and equal means the result is
/// `t = 0, p = 1`; zero variance with different means is degenerate.
pub fn ttest(group0: &[f64], group1: &[f64], kind: TTestKind) -> Result<TTest> {
    let (n0, n1) = (group0.len(), group1.len());
    if n0 < 2 || n1 < 2 {
        return Err(Error::DegenerateGroup(format!("group sizes {n0} and {n1}; each needs at least 2")));
    }
    let (m0, m1) = (mean(group0), mean(group1));
    let (ss0, ss1) = (ss(group0, m0), ss(group1, m1));
    let (f0, f1) = (n0 as f64, n1 as f64);
    let (se, df) = match kind {
        TTestKind::Student => {
            let df = f0 + f1 - 2.0;
            let pooled = (ss0 + ss1) / df;
            ((pooled * (1.0 / f0 + 1.0 / f1)).sqrt(), df)
        }
        TTestKind::Welch => {
            let (v0, v1) = (ss0 / (f0 - 1.0) / f0, ss1 / (f1 - 1.0) / f1);
            let se2 = v0 + v1;
            let df = if se2 > 0.0 {
                se2 * se2 / (v0 * v0 / (f0 - 1.0) + v1 * v1 / (f1 - 1.0))
            } else {
                f0 + f1 - 2.0
            };
            (se2.sqrt(), df)
        }
    };
    if se == 0.0 {
        if m0 == m1 {
            return Ok(TTest { t: 0.0, p: 1.0, df });
        }
        return Err(Error::DegenerateGroup("zero variance in both groups".into()));
    }
    let t = (m1 - m0) / se;
    Ok(TTest {
        t,
        p: student_t_two_sided(t, df),
        df,
    })
}

/// Student's pooled-variance test.
pub fn ttest_independent(group0: &[f64], group1: &[f64]) -> Result<TTest> {
    ttest(group0, group1, TTestKind::Student)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_instance() {
        let r = ttest_independent(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((r.t.abs() - 3.674_234_614_174_767).abs() < 1e-12, "{}", r.t);
        assert_eq!(r.df, 4.0);
        assert!((r.p - 0.021_311_641_128_756_727).abs() < 1e-10, "{}", r.p);
    }

    #[test]
    fn identical_groups() {
        let g = [0.1, 0.4, 0.2];
        let r = ttest_independent(&g, &g).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
        let c = [0.3, 0.3];
        assert_eq!(ttest_independent(&c, &c).unwrap().p, 1.0);
    }

    #[test]
    fn degenerate() {
        assert!(matches!(ttest_independent(&[1.0], &[1.0, 2.0]), Err(Error::DegenerateGroup(_))));
        assert!(matches!(ttest_independent(&[1.0, 1.0], &[2.0, 2.0]), Err(Error::DegenerateGroup(_))));
    }

    #[test]
    fn welch_equal_sizes_matches_student_t() {
        let (a, b) = ([1.0, 2.0, 3.0, 5.0], [4.0, 5.0, 6.0, 9.0]);
        let s = ttest(&a, &b, TTestKind::Student).unwrap();
        let w = ttest(&a, &b, TTestKind::Welch).unwrap();
        assert!((s.t - w.t).abs() < 1e-12);
        assert!(w.df <= s.df);
    }

    proptest! {
        #[test]
        fn antisymmetric_and_shift_invariant(
            a in proptest::collection::vec(-1.0f64..1.0, 2..30),
            b in proptest::collection::vec(-1.0f64..1.0, 2..30),
            c in -5.0f64..5.0,
        ) {
            let r = ttest_independent(&a, &b);
            prop_assume!(r.is_ok());
            let r = r.unwrap();
            let back = ttest_independent(&b, &a).unwrap();
            prop_assert_eq!(r.t, -back.t);
            let sa: Vec<f64> = a.iter().map(|x| x + c).collect();
            let sb: Vec<f64> = b.iter().map(|x| x + c).collect();
            let shifted = ttest_independent(&sa, &sb).unwrap();
            prop_assert!((shifted.t - r.t).abs() <= 1e-12, "t drift {}", (shifted.t - r.t).abs());
            prop_assert!((shifted.p - r.p).abs() <= 1e-12, "p drift {}", (shifted.p - r.p).abs());
            prop_assert!((0.0..=1.0).contains(&r.p));
        }
    }
}
