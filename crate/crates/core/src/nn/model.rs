use ndarray::{Array2, ArrayD, ArrayViewMutD, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::batchnorm::{BatchNorm, BatchNormCache};
use super::dense::Dense;
use super::Float;
use crate::error::{Error, Result};

/// Layer widths of the demodulator network: input, two hidden layers, classes.
pub const PAPER_WIDTHS: [usize; 4] = [4096, 256, 128, 64];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics; moving statistics are updated; activations cached.
    Training,
    /// Moving statistics only; the model is not mutated.
    Inference,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer<F> {
    BatchNorm(BatchNorm<F>),
    Dense(Dense<F>),
    Relu(usize),
    Softmax(usize),
}

impl<F: Float> Layer<F> {
    fn in_width(&self) -> usize {
        match self {
            Layer::BatchNorm(bn) => bn.features(),
            Layer::Dense(d) => d.inputs(),
            Layer::Relu(n) | Layer::Softmax(n) => *n,
        }
    }

    fn out_width(&self) -> usize {
        match self {
            Layer::Dense(d) => d.outputs(),
            other => other.in_width(),
        }
    }
}

enum LayerCache<F> {
    BatchNorm(BatchNormCache<F>),
    Dense(Array2<F>),
    Relu(Array2<F>),
    Softmax(Array2<F>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamCounts {
    pub total: usize,
    pub trainable: usize,
    pub non_trainable: usize,
}

/// Gradients of every trainable tensor, in the order of
/// [`DenseModel::trainable_params_mut`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub tensors: Vec<ArrayD<F>>,
}

pub struct DenseModel<F = f32> {
    layers: Vec<Layer<F>>,
    mode: Mode,
    cache: Option<Vec<LayerCache<F>>>,
}

impl<F: Float> Clone for DenseModel<F> {
    fn clone(&self) -> Self {
        DenseModel { layers: self.layers.clone(), mode: self.mode, cache: None }
    }
}

impl<F: Float> std::fmt::Debug for DenseModel<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseModel")
            .field("widths", &self.widths())
            .field("mode", &self.mode)
            .finish()
    }
}

impl<F: Float> PartialEq for DenseModel<F> {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.mode == other.mode
    }
}

/// The demodulator network with weights drawn from `seed`, in training mode.
pub fn init_model(seed: u64) -> DenseModel<f32> {
    DenseModel::new(&PAPER_WIDTHS, seed).expect("paper widths are valid")
}

impl<F: Float> DenseModel<F> {
    /// Builds the stack for `widths = [input, hidden..., classes]`.
    pub fn new(widths: &[usize], seed: u64) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::shape(format!("invalid layer widths {widths:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = vec![Layer::BatchNorm(BatchNorm::new(widths[0]))];
        let last = widths.len() - 2;
        for (i, pair) in widths.windows(2).enumerate() {
            layers.push(Layer::Dense(Dense::glorot_uniform(pair[0], pair[1], &mut rng)));
            if i < last {
                layers.push(Layer::Relu(pair[1]));
                layers.push(Layer::BatchNorm(BatchNorm::new(pair[1])));
            }
        }
        layers.push(Layer::Softmax(*widths.last().unwrap()));
        Self::from_layers(layers)
    }

    /// Wraps an explicit layer stack after checking that widths chain.
    pub fn from_layers(layers: Vec<Layer<F>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::shape("empty layer stack"));
        }
        for pair in layers.windows(2) {
            if pair[0].out_width() != pair[1].in_width() {
                return Err(Error::shape(format!(
                    "layer of width {} feeds layer expecting {}",
                    pair[0].out_width(),
                    pair[1].in_width()
                )));
            }
        }
        if !matches!(layers.last(), Some(Layer::Softmax(_))) {
            return Err(Error::shape("stack must end in softmax"));
        }
        for layer in &layers {
            if let Layer::BatchNorm(bn) = layer {
                if bn.moving_var.iter().any(|&v| !(v > F::zero())) {
                    return Err(Error::domain("moving variance must be strictly positive"));
                }
            }
        }
        Ok(DenseModel { layers, mode: Mode::Training, cache: None })
    }

    pub fn layers(&self) -> &[Layer<F>] {
        &self.layers
    }

    /// Mutable access to the layers; drops any cached forward pass.
    pub fn layers_mut(&mut self) -> &mut [Layer<F>] {
        self.cache = None;
        &mut self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].in_width()
    }

    pub fn classes(&self) -> usize {
        self.layers.last().unwrap().out_width()
    }

    /// Widths at the input and after every dense layer.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_width()];
        w.extend(self.layers.iter().filter_map(|l| match l {
            Layer::Dense(d) => Some(d.outputs()),
            _ => None,
        }));
        w
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
        self.cache = None;
    }

    pub fn param_counts(&self) -> ParamCounts {
        let (mut trainable, mut non_trainable) = (0, 0);
        for layer in &self.layers {
            match layer {
                Layer::Dense(d) => trainable += d.weights.len() + d.bias.len(),
                Layer::BatchNorm(bn) => {
                    trainable += bn.gamma.len() + bn.beta.len();
                    non_trainable += bn.moving_mean.len() + bn.moving_var.len();
                }
                Layer::Relu(_) | Layer::Softmax(_) => {}
            }
        }
        ParamCounts { total: trainable + non_trainable, trainable, non_trainable }
    }

    fn check_input(&self, x: &Array2<F>) -> Result<()> {
        if x.ncols() != self.input_width() {
            return Err(Error::shape(format!(
                "input width {} but model expects {}",
                x.ncols(),
                self.input_width()
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::domain("empty batch"));
        }
        Ok(())
    }

    /// Runs the model in its current mode. In training mode the batch
    /// statistics update the moving averages and activations are cached for
    /// [`DenseModel::backward`].
    pub fn forward(&mut self, x: &Array2<F>) -> Result<Array2<F>> {
        if self.mode == Mode::Inference {
            return self.predict(x);
        }
        self.check_input(x)?;
        if x.nrows() < 2 {
            return Err(Error::domain("training-mode batch normalization needs at least two rows"));
        }
        self.cache = None;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut act = x.to_owned();
        for layer in &mut self.layers {
            match layer {
                Layer::BatchNorm(bn) => {
                    let (y, c) = bn.forward_train(&act);
                    caches.push(LayerCache::BatchNorm(c));
                    act = y;
                }
                Layer::Dense(d) => {
                    let y = d.forward(&act);
                    caches.push(LayerCache::Dense(std::mem::replace(&mut act, y)));
                }
                Layer::Relu(_) => {
                    act.mapv_inplace(|v| v.max(F::zero()));
                    caches.push(LayerCache::Relu(act.clone()));
                }
                Layer::Softmax(_) => {
                    act = softmax_rows(&act);
                    caches.push(LayerCache::Softmax(act.clone()));
                }
            }
        }
        self.cache = Some(caches);
        Ok(act)
    }

    /// Inference-mode forward pass regardless of the model's mode.
    pub fn predict(&self, x: &Array2<F>) -> Result<Array2<F>> {
        self.check_input(x)?;
        let mut act = x.to_owned();
        for layer in &self.layers {
            act = match layer {
                Layer::BatchNorm(bn) => bn.forward_infer(&act),
                Layer::Dense(d) => d.forward(&act),
                Layer::Relu(_) => act.mapv_into(|v| v.max(F::zero())),
                Layer::Softmax(_) => softmax_rows(&act),
            };
        }
        Ok(act)
    }

    /// Backpropagates categorical cross-entropy against one-hot `targets`
    /// through the cached training-mode forward pass.
    pub fn backward(&self, targets: &Array2<F>) -> Result<Gradients<F>> {
        let caches = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::State("backward needs a cached training-mode forward pass".into()))?;
        let Some(LayerCache::Softmax(probs)) = caches.last() else {
            unreachable!("stack ends in softmax");
        };
        if targets.dim() != probs.dim() {
            return Err(Error::shape(format!("targets {:?} vs outputs {:?}", targets.dim(), probs.dim())));
        }
        let b = F::from(targets.nrows()).unwrap();
        // Softmax and cross-entropy combine to (q − p)/B at the logits.
        let mut grad = (probs - targets) / b;
        let mut tensors = Vec::new();
        let last_index = self.layers.len() - 1;
        for (i, (layer, cache)) in self.layers.iter().zip(caches).enumerate().rev() {
            let need_input = i > 0;
            match (layer, cache) {
                (Layer::Softmax(_), LayerCache::Softmax(_)) => debug_assert_eq!(i, last_index),
                (Layer::Relu(_), LayerCache::Relu(out)) => {
                    grad.zip_mut_with(out, |g, &o| {
                        if o <= F::zero() {
                            *g = F::zero();
                        }
                    });
                }
                (Layer::Dense(d), LayerCache::Dense(input)) => {
                    let (dx, dw, db) = d.backward(&grad, input, need_input);
                    tensors.push(db.into_dyn());
                    tensors.push(dw.into_dyn());
                    if let Some(dx) = dx {
                        grad = dx;
                    }
                }
                (Layer::BatchNorm(bn), LayerCache::BatchNorm(c)) => {
                    let (dx, dg, dbeta) = bn.backward(&grad, c, need_input);
                    tensors.push(dbeta.into_dyn());
                    tensors.push(dg.into_dyn());
                    if let Some(dx) = dx {
                        grad = dx;
                    }
                }
                _ => unreachable!("cache mirrors the layer stack"),
            }
        }
        tensors.reverse();
        Ok(Gradients { tensors })
    }

    /// Trainable tensors in stack order: gamma, beta for batch norm; weights,
    /// bias for dense layers.
    pub fn trainable_params_mut(&mut self) -> Vec<ArrayViewMutD<'_, F>> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::BatchNorm(bn) => {
                    out.push(bn.gamma.view_mut().into_dyn());
                    out.push(bn.beta.view_mut().into_dyn());
                }
                Layer::Dense(d) => {
                    out.push(d.weights.view_mut().into_dyn());
                    out.push(d.bias.view_mut().into_dyn());
                }
                Layer::Relu(_) | Layer::Softmax(_) => {}
            }
        }
        out
    }

    pub fn trainable_shapes(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::BatchNorm(bn) => {
                    out.push(vec![bn.features()]);
                    out.push(vec![bn.features()]);
                }
                Layer::Dense(d) => {
                    out.push(vec![d.outputs(), d.inputs()]);
                    out.push(vec![d.outputs()]);
                }
                Layer::Relu(_) | Layer::Softmax(_) => {}
            }
        }
        out
    }
}

/// Row-wise softmax, shifted by each row's maximum.
pub fn softmax_rows<F: Float>(logits: &Array2<F>) -> Array2<F> {
    let mut out = logits.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.iter().copied().fold(F::neg_infinity(), F::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{cross_entropy, one_hot};
    use rand::Rng;

    #[test]
    fn paper_parameter_accounting() {
        let model = init_model(7);
        let c = model.param_counts();
        assert_eq!(c.total, 1_107_904);
        assert_eq!(c.trainable, 1_098_944);
        assert_eq!(c.non_trainable, 8_960);

        let dense: usize = model
            .layers()
            .iter()
            .filter_map(|l| match l {
                Layer::Dense(d) => Some(d.weights.len() + d.bias.len()),
                _ => None,
            })
            .sum();
        assert_eq!(dense, 4096 * 256 + 256 + 256 * 128 + 128 + 128 * 64 + 64);
        assert_eq!(dense, 1_089_984);
        assert_eq!(model.widths(), PAPER_WIDTHS.to_vec());
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = DenseModel::<f32>::new(&[32, 16, 8, 4], 3).unwrap();
        let b = DenseModel::<f32>::new(&[32, 16, 8, 4], 3).unwrap();
        assert_eq!(a, b);
        let c = DenseModel::<f32>::new(&[32, 16, 8, 4], 4).unwrap();
        assert_ne!(a, c);
        for layer in a.layers() {
            if let Layer::Dense(d) = layer {
                let limit = (6.0 / (d.inputs() + d.outputs()) as f32).sqrt();
                assert!(d.weights.iter().all(|w| w.abs() <= limit));
                assert!(d.bias.iter().all(|&b| b == 0.0));
            }
        }
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        let mut model = DenseModel::<f64>::new(&[16, 8, 6, 4], 1).unwrap();
        for layer in model.layers_mut() {
            if let Layer::Dense(d) = layer {
                d.weights.fill(0.0);
            }
        }
        let x = Array2::from_shape_fn((5, 16), |(i, j)| (i * 16 + j) as f64 * 0.37 - 3.0);
        for mode in [Mode::Inference, Mode::Training] {
            model.set_mode(mode);
            let out = model.forward(&x).unwrap();
            assert!(out.iter().all(|&p| (p - 0.25).abs() < 1e-12));
        }
    }

    #[test]
    fn outputs_are_probabilities_and_inference_is_pure() {
        let mut model = DenseModel::<f32>::new(&[64, 32, 16, 8], 9).unwrap();
        model.set_mode(Mode::Inference);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = Array2::from_shape_simple_fn((7, 64), || rng.random_range(-5.0f32..5.0));
        let before = model.clone();
        let a = model.forward(&x).unwrap();
        let b = model.forward(&x).unwrap();
        assert_eq!(a, b);
        assert_eq!(model, before);
        for row in a.axis_iter(Axis(0)) {
            assert!(row.iter().all(|&p| p >= 0.0));
            assert!((row.sum() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn forward_errors() {
        let mut model = DenseModel::<f32>::new(&[8, 4, 2], 0).unwrap();
        assert!(matches!(model.forward(&Array2::zeros((3, 7))), Err(Error::Shape(_))));
        assert!(matches!(model.forward(&Array2::zeros((0, 8))), Err(Error::Domain(_))));
        assert!(matches!(model.backward(&Array2::zeros((3, 2))), Err(Error::State(_))));
    }

    #[test]
    fn softmax_shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let z = Array2::from_shape_simple_fn((4, 10), || rng.random_range(-20.0f64..20.0));
        let shifted = &z + 123.25;
        let a = softmax_rows(&z);
        let b = softmax_rows(&shifted);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn perfect_targets_give_zero_logit_gradient() {
        let mut model = DenseModel::<f64>::new(&[6, 5, 3], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_simple_fn((4, 6), || rng.random_range(-1.0..1.0));
        let q = model.forward(&x).unwrap();
        let grads = model.backward(&q).unwrap();
        for g in &grads.tensors {
            assert!(g.iter().all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn duplicated_batch_keeps_mean_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = Array2::from_shape_simple_fn((6, 10), || rng.random_range(-2.0..2.0));
        let labels = [0u8, 1, 2, 3, 1, 2];
        let mut doubled = x.clone();
        doubled.append(Axis(0), x.view()).unwrap();
        let mut labels2 = labels.to_vec();
        labels2.extend_from_slice(&labels);

        let mut m1 = DenseModel::<f64>::new(&[10, 7, 5, 4], 5).unwrap();
        let mut m2 = m1.clone();
        m1.forward(&x).unwrap();
        m2.forward(&doubled).unwrap();
        let g1 = m1.backward(&one_hot(&labels, 4).unwrap()).unwrap();
        let g2 = m2.backward(&one_hot(&labels2, 4).unwrap()).unwrap();
        for (a, b) in g1.tensors.iter().zip(&g2.tensors) {
            for (p, q) in a.iter().zip(b) {
                assert!((p - q).abs() < 1e-9, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn gradient_shapes_mirror_parameters() {
        let mut model = DenseModel::<f32>::new(&[12, 6, 4, 3], 0).unwrap();
        let x = Array2::from_shape_fn((4, 12), |(i, j)| ((i + 2 * j) % 5) as f32 - 2.0);
        model.forward(&x).unwrap();
        let g = model.backward(&one_hot(&[0, 1, 2, 0], 3).unwrap()).unwrap();
        let shapes: Vec<Vec<usize>> = g.tensors.iter().map(|t| t.shape().to_vec()).collect();
        assert_eq!(shapes, model.trainable_shapes());
        let loss = cross_entropy(&one_hot(&[0, 1, 2, 0], 3).unwrap(), &model.predict(&x).unwrap()).unwrap();
        assert!(loss.is_finite());
    }
}
