use crate::autodiff::{NamedTensors, Tensor};
use crate::error::{Error, Result};

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: i32,
    m: NamedTensors,
    v: NamedTensors,
}

impl Adam {
    pub fn new(params: &NamedTensors, lr: f64) -> Self {
        let zeros: NamedTensors = params
            .iter()
            .map(|(k, t)| (k.clone(), Tensor::zeros(t.shape())))
            .collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// One update; every parameter must have a gradient of its shape.
    pub fn step(&mut self, params: &mut NamedTensors, grads: &NamedTensors) -> Result<()> {
        self.step += 1;
        let c1 = 1.0 - libm::pow(self.beta1, f64::from(self.step));
        let c2 = 1.0 - libm::pow(self.beta2, f64::from(self.step));
        for (name, p) in params.iter_mut() {
            let g = grads
                .get(name)
                .ok_or_else(|| Error::shape("adam", format!("no gradient for {name}")))?;
            if g.shape() != p.shape() {
                return Err(Error::shape("adam", format!("{name}: {:?} vs {:?}", g.shape(), p.shape())));
            }
            let m = self.m.get_mut(name).expect("moment").data_mut();
            let v = self.v.get_mut(name).expect("moment").data_mut();
            for (i, x) in p.data_mut().iter_mut().enumerate() {
                let gi = g.data()[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * gi;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * gi * gi;
                *x -= self.lr * (m[i] / c1) / ((v[i] / c2).sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
