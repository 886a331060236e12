use ndarray::{ArrayD, Zip};

use super::model::{DenseModel, Gradients};
use super::Float;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-7 }
    }
}

/// First and second moment accumulators mirroring the trainable tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<F> {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: Vec<ArrayD<F>>,
    pub second_moment: Vec<ArrayD<F>>,
}

impl<F: Float> AdamState<F> {
    pub fn new(model: &DenseModel<F>, config: AdamConfig) -> Self {
        let zeros: Vec<ArrayD<F>> = model.trainable_shapes().into_iter().map(ArrayD::zeros).collect();
        AdamState { config, step: 0, first_moment: zeros.clone(), second_moment: zeros }
    }

    /// One bias-corrected update, `θ −= lr·m̂/(√v̂ + ε)`. Moving statistics
    /// are not touched.
    pub fn step(&mut self, model: &mut DenseModel<F>, grads: &Gradients<F>) -> Result<()> {
        let mut params = model.trainable_params_mut();
        if params.len() != grads.tensors.len() || params.len() != self.first_moment.len() {
            return Err(Error::shape(format!(
                "{} parameters, {} gradients, {} accumulators",
                params.len(),
                grads.tensors.len(),
                self.first_moment.len()
            )));
        }
        for ((p, g), m) in params.iter().zip(&grads.tensors).zip(&self.first_moment) {
            if p.shape() != g.shape() || p.shape() != m.shape() {
                return Err(Error::shape(format!("parameter {:?} vs gradient {:?}", p.shape(), g.shape())));
            }
        }

        self.step += 1;
        let c = self.config;
        let t = self.step as i32;
        let lr = F::from(c.learning_rate).unwrap();
        let b1 = F::from(c.beta1).unwrap();
        let b2 = F::from(c.beta2).unwrap();
        let eps = F::from(c.epsilon).unwrap();
        let corr1 = F::from(1.0 - c.beta1.powi(t)).unwrap();
        let corr2 = F::from(1.0 - c.beta2.powi(t)).unwrap();
        let one = F::one();

        for (i, p) in params.iter_mut().enumerate() {
            Zip::from(p)
                .and(&grads.tensors[i])
                .and(&mut self.first_moment[i])
                .and(&mut self.second_moment[i])
                .for_each(|p, &g, m, v| {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    let m_hat = *m / corr1;
                    let v_hat = *v / corr2;
                    *p -= lr * m_hat / (v_hat.sqrt() + eps);
                });
        }
        Ok(())
    }
}
