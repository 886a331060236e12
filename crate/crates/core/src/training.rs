//! Mini-batch training loop: per-epoch shuffling, forward/backward/Adam
//! steps, and the loss/accuracy history.

use std::time::Instant;

use ndarray::Array2;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::nn::{accuracy, cross_entropy, one_hot, AdamConfig, AdamState, DenseModel, Mode, PAPER_WIDTHS};
use crate::synthesis::{derive_seed, substream, FrameSource};

const INIT_TAG: u64 = 1;
const SHUFFLE_TAG: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 5, batch_size: 32, learning_rate: 1e-3, seed: 0, shuffle: true }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::domain("epochs must be at least 1"));
        }
        if self.batch_size < 2 {
            return Err(Error::domain("batch normalization needs batches of at least 2"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::domain("learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean of the epoch's step losses.
    pub loss: f64,
    pub accuracy: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub steps: Vec<StepRecord>,
    pub epochs: Vec<EpochRecord>,
}

/// Splits `len` records into batches of `batch_size`, keeping the partial
/// tail. A tail of one record is merged into the batch before it, since
/// batch normalization needs two rows.
pub fn batch_bounds(len: usize, batch_size: usize) -> Vec<(usize, usize)> {
    let mut bounds: Vec<(usize, usize)> = (0..len)
        .step_by(batch_size.max(1))
        .map(|start| (start, (start + batch_size).min(len)))
        .collect();
    if bounds.len() > 1 && bounds.last().is_some_and(|&(s, e)| e - s == 1) {
        let (_, end) = bounds.pop().unwrap();
        bounds.last_mut().unwrap().1 = end;
    }
    bounds
}

/// Trains a fresh demodulator network on `source`.
pub fn train<S: FrameSource + ?Sized>(source: &S, config: &TrainConfig) -> Result<(DenseModel<f32>, TrainHistory)> {
    train_with(source, config, |_| {})
}

/// [`train`] with a callback invoked after every step.
pub fn train_with<S, C>(source: &S, config: &TrainConfig, on_step: C) -> Result<(DenseModel<f32>, TrainHistory)>
where
    S: FrameSource + ?Sized,
    C: FnMut(&StepRecord),
{
    let mut widths = PAPER_WIDTHS;
    widths[0] = source.config().frame_len;
    widths[3] = source.config().alphabet_size;
    let model = DenseModel::new(&widths, derive_seed(config.seed, INIT_TAG))?;
    train_model(model, source, config, on_step)
}

/// Continues training `model` (of any width) on `source`.
pub fn train_model<S, C>(
    mut model: DenseModel<f32>,
    source: &S,
    config: &TrainConfig,
    mut on_step: C,
) -> Result<(DenseModel<f32>, TrainHistory)>
where
    S: FrameSource + ?Sized,
    C: FnMut(&StepRecord),
{
    config.validate()?;
    let len = source.len();
    if len < 2 {
        return Err(Error::domain("training needs at least two labelled frames"));
    }
    let width = source.config().frame_len;
    if width != model.input_width() {
        return Err(Error::shape(format!("frames of {width} samples, model expects {}", model.input_width())));
    }
    let classes = model.classes();
    model.set_mode(Mode::Training);
    let mut adam = AdamState::new(&model, AdamConfig { learning_rate: config.learning_rate, ..AdamConfig::default() });
    let bounds = batch_bounds(len, config.batch_size);
    let shuffle_seed = derive_seed(config.seed, SHUFFLE_TAG);
    let mut order: Vec<usize> = (0..len).collect();
    let mut history = TrainHistory::default();
    let mut step = 0;

    for epoch in 0..config.epochs {
        let started = Instant::now();
        if config.shuffle {
            order.sort_unstable();
            order.shuffle(&mut substream(shuffle_seed, epoch as u64));
        }
        let (mut loss_sum, mut acc_sum) = (0.0, 0.0);
        for &(start, end) in &bounds {
            let rows = end - start;
            let mut inputs = Array2::<f32>::zeros((rows, width));
            let mut labels = Vec::with_capacity(rows);
            for (row, &idx) in order[start..end].iter().enumerate() {
                let slice = inputs.row_mut(row).into_slice().expect("standard layout");
                labels.push(source.fill_frame(idx, slice)?);
            }
            let targets = one_hot::<f32>(&labels, classes)?;
            let probs = model.forward(&inputs)?;
            let loss = cross_entropy(&targets, &probs)? as f64;
            // The log clamp would mask NaN probabilities, so check them too.
            if !loss.is_finite() || probs.iter().any(|p| !p.is_finite()) {
                return Err(Error::Numeric(format!("training diverged at step {step}")));
            }
            let acc = accuracy(&probs, &labels);
            let grads = model.backward(&targets)?;
            adam.step(&mut model, &grads)?;
            if model.trainable_params_mut().iter().any(|t| t.iter().any(|v| !v.is_finite())) {
                return Err(Error::Numeric(format!("non-finite parameter after step {step}")));
            }

            let record = StepRecord { step, epoch, loss, accuracy: acc };
            on_step(&record);
            history.steps.push(record);
            loss_sum += loss;
            acc_sum += acc;
            step += 1;
        }
        let n = bounds.len() as f64;
        history.epochs.push(EpochRecord {
            epoch,
            loss: loss_sum / n,
            accuracy: acc_sum / n,
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    model.set_mode(Mode::Inference);
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::ModulationConfig;
    use crate::synthesis::{build_dataset, DatasetRecipe};

    #[test]
    fn batching_arithmetic() {
        assert_eq!(batch_bounds(100_000, 32).len(), 3125);
        assert_eq!(batch_bounds(100, 32), vec![(0, 32), (32, 64), (64, 96), (96, 100)]);
        assert_eq!(batch_bounds(65, 32), vec![(0, 32), (32, 65)]);
        for len in 2..200 {
            for b in [2, 3, 7, 32] {
                let bounds = batch_bounds(len, b);
                let expect = len.div_ceil(b) - usize::from(len % b == 1);
                assert_eq!(bounds.len(), expect);
                assert!(bounds.iter().all(|(s, e)| e - s >= 2));
                assert_eq!(bounds.last().unwrap().1, len);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let ds = build_dataset(&DatasetRecipe::new(1, (0.0, 0.0), 1, ModulationConfig::orthogonal())).unwrap();
        assert!(matches!(train(&ds, &TrainConfig::default()), Err(Error::Domain(_))));
        let ds = build_dataset(&DatasetRecipe::new(4, (0.0, 0.0), 1, ModulationConfig::orthogonal())).unwrap();
        for cfg in [
            TrainConfig { epochs: 0, ..TrainConfig::default() },
            TrainConfig { batch_size: 1, ..TrainConfig::default() },
            TrainConfig { learning_rate: -1.0, ..TrainConfig::default() },
        ] {
            assert!(matches!(train(&ds, &cfg), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn divergence_is_a_numeric_error() {
        let ds = build_dataset(&DatasetRecipe::new(40, (0.0, 0.0), 2, ModulationConfig::orthogonal())).unwrap();
        let model = DenseModel::new(&[4096, 8, 64], 1).unwrap();
        let cfg = TrainConfig { epochs: 3, batch_size: 8, learning_rate: 1e38, ..TrainConfig::default() };
        assert!(matches!(train_model(model, &ds, &cfg, |_| {}), Err(Error::Numeric(_))));
    }

    #[test]
    fn history_and_determinism_on_a_small_run() {
        let recipe = DatasetRecipe::new(70, (-5.0, 0.0), 3, ModulationConfig::orthogonal());
        let ds = build_dataset(&recipe).unwrap();
        let cfg = TrainConfig { epochs: 2, batch_size: 16, seed: 5, ..TrainConfig::default() };
        let (m1, h1) = train(&ds, &cfg).unwrap();
        let (m2, h2) = train(&recipe, &cfg).unwrap();
        assert_eq!(m1.mode(), Mode::Inference);
        assert_eq!(h1.steps.len(), 2 * 5);
        assert_eq!(h1.epochs.len(), 2);
        for e in &h1.epochs {
            let steps: Vec<_> = h1.steps.iter().filter(|s| s.epoch == e.epoch).collect();
            let mean = steps.iter().map(|s| s.loss).sum::<f64>() / steps.len() as f64;
            assert!((mean - e.loss).abs() < 1e-12);
        }
        // The materialized dataset and the lazy recipe yield the same frames.
        assert_eq!(m1, m2);
        let strip = |h: &TrainHistory| h.steps.clone();
        assert_eq!(strip(&h1), strip(&h2));

        let unshuffled = TrainConfig { shuffle: false, ..cfg.clone() };
        let (m3, _) = train(&ds, &unshuffled).unwrap();
        assert_ne!(m1, m3);
    }
}
