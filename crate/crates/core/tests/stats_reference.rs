use rationale_core::stats::{pearson, ttest_independent};
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    group0: Vec<f64>,
    group1: Vec<f64>,
    t: f64,
    p: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    r: f64,
    r_p: f64,
}

fn cases() -> Vec<Case> {
    serde_json::from_str(include_str!("fixtures/stats_reference.json")).unwrap()
}

#[test]
fn ttest_matches_high_precision_reference() {
    let cases = cases();
    assert_eq!(cases.len(), 100);
    for (i, c) in cases.iter().enumerate() {
        let r = ttest_independent(&c.group0, &c.group1).unwrap();
        assert!((r.t - c.t).abs() <= 1e-6, "case {i}: t {} vs {}", r.t, c.t);
        assert!((r.p - c.p).abs() <= 1e-8, "case {i}: p {} vs {}", r.p, c.p);
    }
}

#[test]
fn pearson_matches_high_precision_reference() {
    for (i, c) in cases().iter().enumerate() {
        let r = pearson(&c.x, &c.y).unwrap();
        assert!((r.r - c.r).abs() <= 1e-6, "case {i}: r {} vs {}", r.r, c.r);
        assert!((r.p - c.r_p).abs() <= 1e-8, "case {i}: p {} vs {}", r.p, c.r_p);
    }
}
