use std::collections::BTreeMap;

use super::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Named tensors, ordered by name.
pub type NamedTensors = BTreeMap<String, Tensor>;

/// Outcome of a finite-difference gradient check.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Tensor name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
    /// Analytic and central-difference values at the worst coordinate.
    pub worst_values: (f64, f64),
    pub coordinates: usize,
}

/// Compares tape gradients of a scalar function against central differences.
///
/// For every coordinate the relative error is
/// `|analytic − numeric| / max(1e-8, |analytic| + |numeric|)`; the report
/// carries the maximum. `f` receives a fresh tape with every point tensor
/// recorded as a requires-grad leaf.
pub fn grad_check<F>(f: F, point: &NamedTensors, eps: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &BTreeMap<String, Var>) -> Result<Var>,
{
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(Error::Config(format!("gradient check step {eps} outside [1e-7, 1e-3]")));
    }
    let eval = |p: &NamedTensors| -> Result<f64> {
        let mut tape = Tape::new();
        let vars = record(&mut tape, p);
        let out = f(&mut tape, &vars)?;
        let v = tape.value(out);
        if !v.is_scalar() {
            return Err(Error::NonScalarOutput(v.shape().to_vec()));
        }
        Ok(v.item())
    };

    let mut tape = Tape::new();
    let vars = record(&mut tape, point);
    let out = f(&mut tape, &vars)?;
    let grads = tape.backward(out)?;

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        worst_values: (0.0, 0.0),
        coordinates: 0,
    };
    let mut probe = point.clone();
    for (name, tensor) in point {
        let analytic = grads.get(vars[name]);
        for i in 0..tensor.numel() {
            let orig = tensor.data()[i];
            probe.get_mut(name).expect("probe").data_mut()[i] = orig + eps;
            let up = eval(&probe)?;
            probe.get_mut(name).expect("probe").data_mut()[i] = orig - eps;
            let down = eval(&probe)?;
            probe.get_mut(name).expect("probe").data_mut()[i] = orig;

            let numeric = (up - down) / (2.0 * eps);
            let a = analytic.data()[i];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
            report.coordinates += 1;
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = Some((name.clone(), i));
                report.worst_values = (a, numeric);
            }
        }
    }
    Ok(report)
}

fn record(tape: &mut Tape, point: &NamedTensors) -> BTreeMap<String, Var> {
    point
        .iter()
        .map(|(k, t)| (k.clone(), tape.leaf(t.clone(), true)))
        .collect()
}
