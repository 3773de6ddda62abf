use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rationale_core::autodiff::{grad_check, ElementwiseFn, NamedTensors, Tape, Tensor, Var};
use rationale_core::Result;

fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Tensor {
    Tensor::matrix(r, c, (0..r * c).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
}

fn point(items: &[(&str, Tensor)]) -> NamedTensors {
    items.iter().map(|(k, t)| (k.to_string(), t.clone())).collect()
}

/// Weighted sum so every output coordinate gets a distinct upstream gradient.
fn weighted_sum(t: &mut Tape, y: Var) -> Result<Var> {
    let n = t.value(y).numel();
    let w: Vec<f64> = (0..n).map(|i| 0.3 + 0.17 * i as f64).collect();
    let w = t.constant(Tensor::new(t.value(y).shape().to_vec(), w)?);
    let p = t.mul(y, w)?;
    Ok(t.sum(p))
}

#[test]
fn matmul_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = point(&[("a", random(&mut rng, 2, 3)), ("b", random(&mut rng, 3, 2))]);
    let r = grad_check(
        |t, v| {
            let y = t.matmul(v["a"], v["b"])?;
            weighted_sum(t, y)
        },
        &p,
        1e-5,
    )
    .unwrap();
    assert!(r.max_rel_error <= 1e-6, "{r:?}");
    assert_eq!(r.coordinates, 12);
}

#[test]
fn linear_function_is_exact() {
    let p = point(&[("x", Tensor::row(vec![0.5, -1.25, 2.0]))]);
    let r = grad_check(
        |t, v| {
            let y = t.scalar_mul(v["x"], 3.0);
            let y = t.add_scalar(y, 1.0);
            Ok(t.sum(y))
        },
        &p,
        1e-5,
    )
    .unwrap();
    assert!(r.max_rel_error <= 1e-9, "{r:?}");
}

#[test]
fn tanh_chain() {
    let p = point(&[("x", Tensor::row(vec![0.3, -0.7, 1.1]))]);
    let r = grad_check(
        |t, v| {
            let mut y = v["x"];
            for _ in 0..3 {
                y = t.tanh(y);
                y = t.scalar_mul(y, 1.5);
            }
            weighted_sum(t, y)
        },
        &p,
        1e-5,
    )
    .unwrap();
    assert!(r.max_rel_error <= 1e-6, "{r:?}");
}

#[test]
fn corrupted_backward_is_detected() {
    // tanh forward paired with a wrong derivative rule (sign flipped)
    let broken = ElementwiseFn {
        name: "broken_tanh",
        forward: libm_tanh,
        derivative: |_, y| -(1.0 - y * y),
    };
    let p = point(&[("x", Tensor::row(vec![0.3, -0.7, 1.1]))]);
    let r = grad_check(
        |t, v| {
            let y = t.elementwise(v["x"], broken);
            weighted_sum(t, y)
        },
        &p,
        1e-5,
    )
    .unwrap();
    assert!(r.max_rel_error > 1e-2, "{r:?}");
}

fn libm_tanh(x: f64) -> f64 {
    x.tanh()
}

#[test]
fn grad_check_rejects_bad_step() {
    let p = point(&[("x", Tensor::scalar(1.0))]);
    assert!(grad_check(|t, v| Ok(t.sum(v["x"])), &p, 1e-2).is_err());
}

#[test]
fn replay_is_bit_identical() {
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = Tape::new();
        let a = t.leaf(random(&mut rng, 3, 4), true);
        let b = t.leaf(random(&mut rng, 4, 2), true);
        let y = t.matmul(a, b).unwrap();
        let y = t.softmax(y, 1).unwrap();
        let y = t.tanh(y);
        let s = t.mean(y);
        let g = t.backward(s).unwrap();
        (t.value(s).clone(), g.get(a), g.get(b))
    };
    let (x, y) = (run(), run());
    let bits = |t: &Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&x.0), bits(&y.0));
    assert_eq!(bits(&x.1), bits(&y.1));
    assert_eq!(bits(&x.2), bits(&y.2));
}

type Prim = fn(&mut Tape, &BTreeMap<String, Var>) -> Result<Var>;

fn primitives() -> Vec<(&'static str, Prim)> {
    vec![
        ("matmul", |t, v| {
            let bt = t.transpose(v["b"])?;
            t.matmul(v["a"], bt)
        }),
        ("add", |t, v| t.add(v["a"], v["b"])),
        ("sub", |t, v| t.sub(v["a"], v["b"])),
        ("mul", |t, v| t.mul(v["a"], v["b"])),
        ("add_row", |t, v| {
            let r = t.slice(v["b"], 0, 1, 1)?;
            t.add_row(v["a"], r)
        }),
        ("concat0", |t, v| t.concat(&[v["a"], v["b"]], 0)),
        ("concat1", |t, v| t.concat(&[v["a"], v["b"], v["a"]], 1)),
        ("slice0", |t, v| t.slice(v["a"], 0, 1, 2)),
        ("slice1", |t, v| t.slice(v["a"], 1, 1, 2)),
        ("transpose", |t, v| t.transpose(v["a"])),
        ("tanh", |t, v| Ok(t.tanh(v["a"]))),
        ("sigmoid", |t, v| Ok(t.sigmoid(v["a"]))),
        ("softmax0", |t, v| t.softmax(v["a"], 0)),
        ("softmax1", |t, v| t.softmax(v["a"], 1)),
        ("sum", |t, v| Ok(t.sum(v["a"]))),
        ("mean", |t, v| Ok(t.mean(v["a"]))),
        ("scalar_mul", |t, v| Ok(t.scalar_mul(v["a"], -1.7))),
        ("ln", |t, v| {
            let s = t.sigmoid(v["a"]);
            Ok(t.ln_clamped(s, 1e-12))
        }),
        ("gather_rows", |t, v| t.gather_rows(v["a"], &[2, 0, 2, 1])),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_primitive_matches_central_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = point(&[("a", random(&mut rng, 3, 4)), ("b", random(&mut rng, 3, 4))]);
        for (name, f) in primitives() {
            let r = grad_check(|t, v| { let y = f(t, v)?; weighted_sum(t, y) }, &p, 1e-5).unwrap();
            prop_assert!(r.max_rel_error <= 1e-6, "{name}: {r:?}");
        }
    }

    #[test]
    fn softmax_sums_to_one(seed in any::<u64>(), axis in 0usize..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Tape::new();
        let x = t.leaf(random(&mut rng, 3, 5).map(|v| v * 20.0), false);
        let y = t.softmax(x, axis).unwrap();
        let v = t.value(y).clone();
        prop_assert!(v.data().iter().all(|&p| p >= 0.0));
        let sums: Vec<f64> = if axis == 1 {
            v.row_sums()
        } else {
            (0..5).map(|c| (0..3).map(|r| v.get(r, c)).sum()).collect()
        };
        for s in sums {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }
}
