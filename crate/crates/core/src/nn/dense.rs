use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use super::Float;

/// Fully connected layer `y = x·Wᵀ + b` with `W` stored out × in, row-major.
const SMALL_BATCH: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Dense<F> {
    pub weights: Array2<F>,
    pub bias: Array1<F>,
}

impl<F: Float> Dense<F> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense { weights: Array2::zeros((outputs, inputs)), bias: Array1::zeros(outputs) }
    }

    /// Symmetric uniform weights with limit `√(6/(fan_in + fan_out))`, zero bias.
    pub fn glorot_uniform<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = Array2::from_shape_simple_fn((outputs, inputs), || {
            F::from(rng.random_range(-limit..limit)).unwrap()
        });
        Dense { weights, bias: Array1::zeros(outputs) }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn forward(&self, x: &Array2<F>) -> Array2<F> {
        // A GEMM packs the whole weight matrix; for a handful of rows a
        // row-major matrix-vector product is several times faster.
        if x.nrows() <= SMALL_BATCH {
            let mut out = Array2::zeros((x.nrows(), self.outputs()));
            for (mut o, row) in out.rows_mut().into_iter().zip(x.rows()) {
                o.assign(&(self.weights.dot(&row) + &self.bias));
            }
            return out;
        }
        x.dot(&self.weights.t()) + &self.bias
    }

    /// Returns `(d_input, d_weights, d_bias)`.
    pub(crate) fn backward(
        &self,
        dy: &Array2<F>,
        x: &Array2<F>,
        need_input_grad: bool,
    ) -> (Option<Array2<F>>, Array2<F>, Array1<F>) {
        let d_weights = dy.t().dot(x);
        let d_bias = dy.sum_axis(Axis(0));
        let dx = need_input_grad.then(|| dy.dot(&self.weights));
        (dx, d_weights, d_bias)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_batches_match_the_matrix_product() {
        let d = Dense::<f64>::glorot_uniform(40, 7, &mut ChaCha8Rng::seed_from_u64(2));
        let x = Array2::from_shape_fn((9, 40), |(i, j)| ((i * 40 + j) as f64 * 0.13).cos());
        let full = d.forward(&x);
        for rows in 1..=SMALL_BATCH {
            let part = d.forward(&x.slice(ndarray::s![..rows, ..]).to_owned());
            for (a, b) in part.iter().zip(full.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn glorot_limit() {
        let d = Dense::<f64>::glorot_uniform(30, 10, &mut ChaCha8Rng::seed_from_u64(0));
        let limit = (6.0f64 / 40.0).sqrt();
        assert!(d.weights.iter().all(|w| w.abs() <= limit));
        assert!(d.bias.iter().all(|&b| b == 0.0));
    }
}
