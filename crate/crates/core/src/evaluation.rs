//! Confusion matrices, per-class metrics, Monte-Carlo error-rate curves,
//! SNR gap measurement and inference latency.

use std::time::Instant;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::modem::{ser_to_ber, snr_to_ebn0, theoretical_ber_noncoherent, ModulationConfig};
use crate::nn::{argmax_rows, DenseModel};
use crate::synthesis::{derive_seed, DatasetRecipe, FrameSource, InterferenceSpec};

/// One symbol period of the JT65A frame, the real-time budget per inference.
pub const REALTIME_BUDGET_US: f64 = 371_500.0;

const EVAL_BATCH: usize = 256;

/// Anything that maps rows of samples to symbol decisions.
pub trait Classifier {
    fn input_width(&self) -> usize;

    fn classify(&self, inputs: &Array2<f32>) -> Result<Vec<usize>>;
}

impl Classifier for DenseModel<f32> {
    fn input_width(&self) -> usize {
        DenseModel::input_width(self)
    }

    fn classify(&self, inputs: &Array2<f32>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.predict(inputs)?))
    }
}

/// `counts[truth][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix { classes, counts: vec![0; classes * classes] }
    }

    pub fn from_pairs(classes: usize, truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::shape(format!("{} labels vs {} predictions", truth.len(), predicted.len())));
        }
        let mut cm = ConfusionMatrix::new(classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.record(t, p)?;
        }
        Ok(cm)
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        if truth >= self.classes || predicted >= self.classes {
            return Err(Error::domain(format!("class pair ({truth}, {predicted}) outside 0..{}", self.classes)));
        }
        self.counts[truth * self.classes + predicted] += 1;
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes).map(|c| self.get(c, c)).sum()
    }

    /// Number of frames whose true class is `class`.
    pub fn support(&self, class: usize) -> u64 {
        (0..self.classes).map(|p| self.get(class, p)).sum()
    }

    /// Number of frames predicted as `class`.
    pub fn predicted(&self, class: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, class)).sum()
    }

    pub fn metrics(&self) -> MetricsReport {
        MetricsReport::from_confusion(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub total: u64,
    pub error_rate: f64,
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
}

// A class that never occurs and is never predicted has made no mistakes: 1.
// Any other empty denominator scores 0.
fn ratio(num: u64, den: u64, uninvolved: bool) -> f64 {
    match den {
        0 if uninvolved => 1.0,
        0 => 0.0,
        _ => num as f64 / den as f64,
    }
}

impl MetricsReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        let n = cm.classes();
        let mut precision = Vec::with_capacity(n);
        let mut recall = Vec::with_capacity(n);
        for c in 0..n {
            let (tp, support, predicted) = (cm.get(c, c), cm.support(c), cm.predicted(c));
            let uninvolved = support == 0 && predicted == 0;
            precision.push(ratio(tp, predicted, uninvolved));
            recall.push(ratio(tp, support, uninvolved));
        }
        let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        let total = cm.total();
        let error_rate = ratio(total - cm.correct(), total, false);
        // Every frame gets exactly one prediction, so micro precision and
        // micro recall both reduce to accuracy.
        let accuracy = 1.0 - error_rate;
        MetricsReport {
            total,
            error_rate,
            accuracy,
            macro_precision: mean(&precision),
            macro_recall: mean(&recall),
            micro_precision: accuracy,
            micro_recall: accuracy,
            precision,
            recall,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

/// Runs `classifier` over every frame of `source`.
pub fn evaluate<C, S>(classifier: &C, source: &S) -> Result<Evaluation>
where
    C: Classifier + ?Sized,
    S: FrameSource + ?Sized,
{
    let width = source.config().frame_len;
    if classifier.input_width() != width {
        return Err(Error::shape(format!(
            "frames of {width} samples, classifier expects {}",
            classifier.input_width()
        )));
    }
    let mut confusion = ConfusionMatrix::new(source.config().alphabet_size);
    let len = source.len();
    for start in (0..len).step_by(EVAL_BATCH) {
        let end = (start + EVAL_BATCH).min(len);
        let mut inputs = Array2::<f32>::zeros((end - start, width));
        let mut labels = Vec::with_capacity(end - start);
        for (row, idx) in (start..end).enumerate() {
            let slice = inputs.row_mut(row).into_slice().expect("standard layout");
            labels.push(source.fill_frame(idx, slice)? as usize);
        }
        for (truth, pred) in labels.into_iter().zip(classifier.classify(&inputs)?) {
            confusion.record(truth, pred)?;
        }
    }
    let metrics = confusion.metrics();
    Ok(Evaluation { confusion, metrics })
}

/// One row of an error-rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRatePoint {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub ser: f64,
    pub ber: f64,
    pub theoretical_ber: f64,
}

impl ErrorRatePoint {
    pub fn new(snr_db: f64, ser: f64, config: &ModulationConfig) -> Result<Self> {
        let ebn0_db = snr_to_ebn0(snr_db, config);
        Ok(ErrorRatePoint {
            snr_db,
            ebn0_db,
            ser,
            ber: ser_to_ber(ser, config.alphabet_size)?,
            theoretical_ber: theoretical_ber_noncoherent(ebn0_db),
        })
    }
}

const CURVE_TAG: u64 = 0x6375_7276_6573;

/// Seed of the test frames at grid point `index`. Curve seeds go through
/// their own tag, so they never coincide with a training recipe seeded
/// directly with the same user seed.
pub fn curve_point_seed(seed: u64, index: usize) -> u64 {
    derive_seed(derive_seed(seed, CURVE_TAG), index as u64)
}

/// Monte-Carlo symbol error rate of `classifier` at each SNR of the grid.
pub fn ser_curve<C: Classifier + ?Sized>(
    classifier: &C,
    snr_grid_db: &[f64],
    trials_per_point: usize,
    seed: u64,
    config: &ModulationConfig,
    interference: Option<&InterferenceSpec>,
) -> Result<Vec<ErrorRatePoint>> {
    if trials_per_point == 0 {
        return Err(Error::domain("need at least one trial per point"));
    }
    let mut curve = Vec::with_capacity(snr_grid_db.len());
    for (i, &snr) in snr_grid_db.iter().enumerate() {
        let mut recipe = DatasetRecipe::new(trials_per_point, (snr, snr), curve_point_seed(seed, i), config.clone());
        if let Some(spec) = interference {
            let mut spec = spec.clone();
            spec.rng_seed = derive_seed(spec.rng_seed, i as u64);
            recipe = recipe.with_interference(spec);
        }
        recipe.validate()?;
        let eval = evaluate(classifier, &recipe)?;
        curve.push(ErrorRatePoint::new(snr, eval.metrics.error_rate, config)?);
    }
    Ok(curve)
}

/// Error-rate curve of the network, optionally with interference.
pub fn nn_ser_curve(
    model: &DenseModel<f32>,
    snr_grid_db: &[f64],
    trials_per_point: usize,
    seed: u64,
    config: &ModulationConfig,
    interference: Option<&InterferenceSpec>,
) -> Result<Vec<ErrorRatePoint>> {
    ser_curve(model, snr_grid_db, trials_per_point, seed, config, interference)
}

/// Eb/N0 (dB) at which `(ebn0, ber)` pairs first fall through `target`,
/// interpolating log10 BER linearly in dB. Zero BER is floored at 1e-12.
pub fn crossing_ebn0(points: &[(f64, f64)], target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::domain(format!("target BER {target} outside (0, 1)")));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lg = |b: f64| b.max(1e-12).log10();
    let t = target.log10();
    for w in pts.windows(2) {
        let ((x0, b0), (x1, b1)) = (w[0], w[1]);
        if b0 >= target && b1 < target {
            let (y0, y1) = (lg(b0), lg(b1));
            return Ok(x0 + (t - y0) * (x1 - x0) / (y1 - y0));
        }
    }
    Err(Error::Range(format!("BER {target} is not bracketed by the curve")))
}

/// Extra Eb/N0 (dB) the measured curve needs to reach `target_ber` compared
/// with the theoretical column of the same curve.
pub fn gap_at_ber(curve: &[ErrorRatePoint], target_ber: f64) -> Result<f64> {
    let measured: Vec<_> = curve.iter().map(|p| (p.ebn0_db, p.ber)).collect();
    let theory: Vec<_> = curve.iter().map(|p| (p.ebn0_db, p.theoretical_ber)).collect();
    Ok(crossing_ebn0(&measured, target_ber)? - crossing_ebn0(&theory, target_ber)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyStats {
    pub iterations: usize,
    pub mean_us: f64,
    pub p95_us: f64,
    /// Mean latency below one symbol period.
    pub realtime: bool,
}

/// Times single-frame inference on `input` (one row) over `iterations` runs.
pub fn bench_inference<C: Classifier + ?Sized>(
    classifier: &C,
    input: &Array2<f32>,
    iterations: usize,
) -> Result<LatencyStats> {
    if iterations < 100 {
        return Err(Error::domain("benchmark needs at least 100 iterations"));
    }
    if input.nrows() != 1 {
        return Err(Error::shape("benchmark input must be a single frame"));
    }
    classifier.classify(input)?;
    let mut times = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let start = Instant::now();
        std::hint::black_box(classifier.classify(std::hint::black_box(input))?);
        times.push(start.elapsed().as_secs_f64() * 1e6);
    }
    let mean_us = times.iter().sum::<f64>() / iterations as f64;
    times.sort_by(f64::total_cmp);
    let p95_us = times[(0.95 * iterations as f64).ceil() as usize - 1];
    Ok(LatencyStats { iterations, mean_us, p95_us, realtime: mean_us < REALTIME_BUDGET_US })
}
