use ndarray::{Array1, Array2, Axis};

use super::Float;

pub const DEFAULT_MOMENTUM: f64 = 0.99;
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Per-feature batch normalization with trainable scale/shift and moving
/// statistics for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm<F> {
    pub gamma: Array1<F>,
    pub beta: Array1<F>,
    pub moving_mean: Array1<F>,
    pub moving_var: Array1<F>,
    pub momentum: F,
    pub epsilon: F,
}

#[derive(Debug, Clone)]
pub(crate) struct BatchNormCache<F> {
    normalized: Array2<F>,
    inv_std: Array1<F>,
}

impl<F: Float> BatchNorm<F> {
    pub fn new(features: usize) -> Self {
        BatchNorm {
            gamma: Array1::ones(features),
            beta: Array1::zeros(features),
            moving_mean: Array1::zeros(features),
            moving_var: Array1::ones(features),
            momentum: F::from(DEFAULT_MOMENTUM).unwrap(),
            epsilon: F::from(DEFAULT_EPSILON).unwrap(),
        }
    }

    pub fn features(&self) -> usize {
        self.gamma.len()
    }

    /// Normalizes with batch statistics and folds them into the moving
    /// averages. The moving variance uses the unbiased batch estimate.
    pub(crate) fn forward_train(&mut self, x: &Array2<F>) -> (Array2<F>, BatchNormCache<F>) {
        let b = F::from(x.nrows()).unwrap();
        let mean = x.sum_axis(Axis(0)) / b;
        let centered = x - &mean;
        let var = centered.mapv(|v| v * v).sum_axis(Axis(0)) / b;
        let inv_std = var.mapv(|v| F::one() / (v + self.epsilon).sqrt());
        let normalized = &centered * &inv_std;
        let y = &normalized * &self.gamma + &self.beta;

        let keep = self.momentum;
        let blend = F::one() - keep;
        let unbiased = if x.nrows() > 1 { b / (b - F::one()) } else { F::one() };
        self.moving_mean.zip_mut_with(&mean, |m, &bm| *m = *m * keep + bm * blend);
        self.moving_var.zip_mut_with(&var, |v, &bv| *v = *v * keep + bv * unbiased * blend);
        (y, BatchNormCache { normalized, inv_std })
    }

    pub(crate) fn forward_infer(&self, x: &Array2<F>) -> Array2<F> {
        let scale = &self.gamma / &self.moving_var.mapv(|v| (v + self.epsilon).sqrt());
        let shift = &self.beta - &(&self.moving_mean * &scale);
        x * &scale + &shift
    }

    /// Returns `(d_input, d_gamma, d_beta)`; `d_input` is skipped when not needed.
    pub(crate) fn backward(
        &self,
        dy: &Array2<F>,
        cache: &BatchNormCache<F>,
        need_input_grad: bool,
    ) -> (Option<Array2<F>>, Array1<F>, Array1<F>) {
        let d_beta = dy.sum_axis(Axis(0));
        let d_gamma = (dy * &cache.normalized).sum_axis(Axis(0));
        if !need_input_grad {
            return (None, d_gamma, d_beta);
        }
        let b = F::from(dy.nrows()).unwrap();
        let d_norm = dy * &self.gamma;
        let sum_d = d_norm.sum_axis(Axis(0));
        let sum_dx = (&d_norm * &cache.normalized).sum_axis(Axis(0));
        let mut dx = d_norm * b - &sum_d - &(&cache.normalized * &sum_dx);
        dx *= &(&cache.inv_std / b);
        (Some(dx), d_gamma, d_beta)
    }
}
