use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Quadrature rule along the straight path from baseline to input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Nodes `0, 1/m, …, 1` with half weight at the ends.
    #[default]
    Trapezoid,
    /// Nodes `0, 1/m, …, (m−1)/m` with equal weight.
    LeftRiemann,
}

/// Integrated-gradients output for one scalar target.
#[derive(Debug, Clone, PartialEq)]
pub struct IgResult {
    /// `(X − X′) ⊙ averaged gradient`, same shape as the input.
    pub attributions: Tensor,
    /// Per-row (per-token) sums of `attributions`.
    pub token_scores: Vec<f64>,
    pub f_input: f64,
    pub f_baseline: f64,
}

impl IgResult {
    pub fn completeness_gap(&self) -> f64 {
        completeness_gap(&self.token_scores, self.f_input, self.f_baseline)
    }
}

/// `|Σ scores − (F(X) − F(X′))|`.
pub fn completeness_gap(scores: &[f64], f_input: f64, f_baseline: f64) -> f64 {
    (scores.iter().sum::<f64>() - (f_input - f_baseline)).abs()
}

/// Integrated gradients of a scalar function of one input tensor.
///
/// `f` receives a fresh tape and the interpolated input recorded as a
/// requires-grad leaf; it must return a 1×1 value.
pub fn integrated_gradients<F>(f: F, input: &Tensor, baseline: &Tensor, steps: usize, rule: Quadrature) -> Result<IgResult>
where
    F: Fn(&mut Tape, Var) -> Result<Var>,
{
    if steps == 0 {
        return Err(Error::Config("integrated gradients needs at least one step".into()));
    }
    if input.shape() != baseline.shape() {
        return Err(Error::shape(
            "integrated_gradients",
            format!("{:?} vs {:?}", input.shape(), baseline.shape()),
        ));
    }
    let delta = input.axpy(-1.0, baseline)?;
    let eval = |alpha: f64| -> Result<(f64, Tensor)> {
        let point = baseline.axpy(alpha, &delta)?;
        let mut t = Tape::new();
        let x = t.leaf(point, true);
        let out = f(&mut t, x)?;
        let v = t.value(out);
        if !v.is_scalar() {
            return Err(Error::NonScalarTarget(v.shape().to_vec()));
        }
        let value = v.item();
        Ok((value, t.backward(out)?.get(x)))
    };

    let m = steps as f64;
    let mut avg = Tensor::zeros(input.shape());
    let mut f_baseline = 0.0;
    let mut f_input = None;
    let last = match rule {
        Quadrature::Trapezoid => steps,
        Quadrature::LeftRiemann => steps - 1,
    };
    for i in 0..=last {
        let (value, grad) = eval(i as f64 / m)?;
        if i == 0 {
            f_baseline = value;
        }
        if i == steps {
            f_input = Some(value);
        }
        let w = match rule {
            Quadrature::Trapezoid if i == 0 || i == steps => 0.5 / m,
            _ => 1.0 / m,
        };
        avg = avg.axpy(w, &grad)?;
    }
    let f_input = match f_input {
        Some(v) => v,
        None => eval(1.0)?.0,
    };

    let attributions = Tensor::new(
        input.shape().to_vec(),
        delta.data().iter().zip(avg.data()).map(|(d, g)| d * g).collect(),
    )?;
    let token_scores = attributions.row_sums();
    Ok(IgResult {
        attributions,
        token_scores,
        f_input,
        f_baseline,
    })
}
