//! Labelled symbol-interval synthesis: clean tones, AWGN at an in-band SNR,
//! narrowband and pulse interference, and whole datasets.
//!
//! Noise is white over the full Nyquist band; the SNR is the ratio of the
//! nominal tone power to the part of the noise power that falls inside the
//! reference bandwidth `W`. Every frame of a dataset is a pure function of
//! `(seed, index)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::modem::{db_to_linear, tone_frequency, ModulationConfig};

/// Power of a unit-amplitude carrier, `A²/2`.
pub const SIGNAL_POWER: f64 = 0.5;

/// Lowest frequency the narrowband interferer may take.
pub const INTERFERER_MIN_HZ: f64 = 300.0;

const INTERFERENCE_STREAM_SALT: u64 = 0x6a09_e667_f3bc_c909;

/// Deterministic generator for stream `stream` of a seed. Streams of the
/// same seed never overlap.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a tag into a seed (SplitMix64 finalizer) to obtain an unrelated seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One symbol interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFrame {
    pub samples: Vec<f64>,
    pub label: Option<u8>,
    pub snr_db: Option<f64>,
}

impl SignalFrame {
    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }
}

/// Interference injected on top of AWGN, with powers given as fractions of
/// the AWGN power.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSpec {
    pub narrowband_power_fraction: f64,
    pub pulse_power_fraction: f64,
    pub pulse_duty_cycle: f64,
    pub rng_seed: u64,
}

impl Default for InterferenceSpec {
    fn default() -> Self {
        InterferenceSpec {
            narrowband_power_fraction: 0.20,
            pulse_power_fraction: 0.10,
            pulse_duty_cycle: 0.01,
            rng_seed: 0x1f3d_5b79,
        }
    }
}

impl InterferenceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.narrowband_power_fraction >= 0.0 && self.pulse_power_fraction >= 0.0) {
            return Err(Error::domain("interference power fractions must be non-negative"));
        }
        if !(self.pulse_duty_cycle > 0.0 && self.pulse_duty_cycle <= 1.0) {
            return Err(Error::domain("pulse duty cycle must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Unit-amplitude carrier `cos(2π·f_m·n/fs + phase)`.
pub fn synth_tone(m: usize, phase: f64, config: &ModulationConfig) -> Result<SignalFrame> {
    if !phase.is_finite() {
        return Err(Error::domain("phase must be finite"));
    }
    let f = tone_frequency(m, config)?;
    let cycles_per_sample = f / config.sample_rate_hz;
    let samples = (0..config.frame_len)
        .map(|n| (2.0 * PI * (cycles_per_sample * n as f64).fract() + phase).cos())
        .collect();
    Ok(SignalFrame { samples, label: Some(m as u8), snr_db: None })
}

/// Full-band noise variance giving `snr_db` against the in-band noise power.
pub fn noise_power_for_snr(snr_db: f64, config: &ModulationConfig) -> f64 {
    SIGNAL_POWER / db_to_linear(snr_db) * config.nyquist_hz() / config.bandwidth_hz
}

/// Adds white Gaussian noise. `snr_db = +∞` adds nothing.
pub fn add_awgn<R: Rng + ?Sized>(
    mut frame: SignalFrame,
    snr_db: f64,
    rng: &mut R,
    config: &ModulationConfig,
) -> SignalFrame {
    let sigma = noise_power_for_snr(snr_db, config).sqrt();
    if sigma > 0.0 {
        for x in &mut frame.samples {
            let z: f64 = rng.sample(StandardNormal);
            *x += sigma * z;
        }
    }
    frame.snr_db = Some(snr_db);
    frame
}

/// Adds a random in-band sinusoid and a rectangular burst of wideband noise.
/// Both are scaled from `awgn_power`, the variance of the added AWGN.
pub fn add_interference<R: Rng + ?Sized>(
    mut frame: SignalFrame,
    awgn_power: f64,
    spec: &InterferenceSpec,
    rng: &mut R,
    config: &ModulationConfig,
) -> Result<SignalFrame> {
    spec.validate()?;
    if !(awgn_power > 0.0) {
        return Err(Error::domain("AWGN power must be positive"));
    }
    let n = frame.samples.len();
    // Draw order is fixed regardless of which parts are enabled.
    let freq = rng.random_range(INTERFERER_MIN_HZ..=config.bandwidth_hz);
    let phase = rng.random_range(0.0..2.0 * PI);
    let burst_len = ((spec.pulse_duty_cycle * n as f64).round() as usize).clamp(1, n);
    let burst_start = rng.random_range(0..=n - burst_len);

    if spec.narrowband_power_fraction > 0.0 {
        let amplitude = (2.0 * spec.narrowband_power_fraction * awgn_power).sqrt();
        let step = freq / config.sample_rate_hz;
        for (i, x) in frame.samples.iter_mut().enumerate() {
            *x += amplitude * (2.0 * PI * (step * i as f64).fract() + phase).cos();
        }
    }
    if spec.pulse_power_fraction > 0.0 {
        let burst_power = spec.pulse_power_fraction * awgn_power * n as f64 / burst_len as f64;
        let sigma = burst_power.sqrt();
        for x in &mut frame.samples[burst_start..burst_start + burst_len] {
            let z: f64 = rng.sample(StandardNormal);
            *x += sigma * z;
        }
    }
    Ok(frame)
}

/// Recipe for a labelled dataset; frame `i` depends only on `(seed, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecipe {
    pub count: usize,
    pub snr_range_db: (f64, f64),
    pub seed: u64,
    pub config: ModulationConfig,
    pub interference: Option<InterferenceSpec>,
}

impl DatasetRecipe {
    pub fn new(count: usize, snr_range_db: (f64, f64), seed: u64, config: ModulationConfig) -> Self {
        DatasetRecipe { count, snr_range_db, seed, config, interference: None }
    }

    pub fn with_interference(mut self, spec: InterferenceSpec) -> Self {
        self.interference = Some(spec);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::domain("dataset count must be positive"));
        }
        let (lo, hi) = self.snr_range_db;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::domain(format!("bad SNR range [{lo}, {hi}]")));
        }
        if let Some(spec) = &self.interference {
            spec.validate()?;
        }
        self.config.validate()
    }

    /// Label, carrier phase and SNR of one frame, drawn in that order.
    pub fn draw_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64, f64) {
        let label = rng.random_range(0..self.config.alphabet_size);
        let phase = rng.random_range(0.0..2.0 * PI);
        let (lo, hi) = self.snr_range_db;
        let snr_db = if lo == hi { lo } else { rng.random_range(lo..=hi) };
        (label, phase, snr_db)
    }

    /// Synthesizes frame `index`: uniform label, uniform phase on [0, 2π),
    /// uniform SNR over the range.
    pub fn frame(&self, index: usize) -> Result<SignalFrame> {
        let mut rng = substream(self.seed, index as u64);
        let (label, phase, snr_db) = self.draw_symbol(&mut rng);
        let frame = synth_tone(label, phase, &self.config)?;
        let frame = add_awgn(frame, snr_db, &mut rng, &self.config);
        match &self.interference {
            Some(spec) => {
                let mut irng = substream(derive_seed(spec.rng_seed, INTERFERENCE_STREAM_SALT), index as u64);
                add_interference(frame, noise_power_for_snr(snr_db, &self.config), spec, &mut irng, &self.config)
            }
            None => Ok(frame),
        }
    }
}

/// Anything that can hand out labelled frames by index.
pub trait FrameSource {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn config(&self) -> &ModulationConfig;

    /// Writes frame `index` into `out` as f32 and returns its label.
    fn fill_frame(&self, index: usize, out: &mut [f32]) -> Result<u8>;
}

impl FrameSource for DatasetRecipe {
    fn len(&self) -> usize {
        self.count
    }

    fn config(&self) -> &ModulationConfig {
        &self.config
    }

    fn fill_frame(&self, index: usize, out: &mut [f32]) -> Result<u8> {
        let frame = self.frame(index)?;
        for (o, x) in out.iter_mut().zip(&frame.samples) {
            *o = *x as f32;
        }
        frame.label.ok_or_else(|| Error::domain("synthesized frame has no label"))
    }
}

/// Materialized dataset. Samples are held (and stored on disk) as f32.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config: ModulationConfig,
    /// Generator seed, unknown for datasets read back from disk.
    pub seed: Option<u64>,
    labels: Vec<u8>,
    snr_db: Vec<f32>,
    samples: Vec<f32>,
}

impl Dataset {
    pub fn from_parts(
        config: ModulationConfig,
        seed: Option<u64>,
        labels: Vec<u8>,
        snr_db: Vec<f32>,
        samples: Vec<f32>,
    ) -> Result<Self> {
        let n = config.frame_len;
        if labels.len() != snr_db.len() || samples.len() != labels.len() * n {
            return Err(Error::shape(format!(
                "{} labels, {} SNR tags and {} samples do not describe frames of {n}",
                labels.len(),
                snr_db.len(),
                samples.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= config.alphabet_size) {
            return Err(Error::domain(format!("label {bad} outside the alphabet")));
        }
        Ok(Dataset { config, seed, labels, snr_db, samples })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn snr_tags(&self) -> &[f32] {
        &self.snr_db
    }

    pub fn samples(&self, index: usize) -> &[f32] {
        let n = self.config.frame_len;
        &self.samples[index * n..(index + 1) * n]
    }

    pub fn frame(&self, index: usize) -> SignalFrame {
        SignalFrame {
            samples: self.samples(index).iter().map(|&x| x as f64).collect(),
            label: Some(self.labels[index]),
            snr_db: Some(self.snr_db[index] as f64),
        }
    }

    pub fn frames(&self) -> impl Iterator<Item = SignalFrame> + '_ {
        (0..self.len()).map(|i| self.frame(i))
    }
}

impl FrameSource for Dataset {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn config(&self) -> &ModulationConfig {
        &self.config
    }

    fn fill_frame(&self, index: usize, out: &mut [f32]) -> Result<u8> {
        out.copy_from_slice(self.samples(index));
        Ok(self.labels[index])
    }
}

/// Synthesizes `recipe.count` frames in index order.
pub fn build_dataset(recipe: &DatasetRecipe) -> Result<Dataset> {
    recipe.validate()?;
    let n = recipe.config.frame_len;
    let mut labels = Vec::with_capacity(recipe.count);
    let mut snr_db = Vec::with_capacity(recipe.count);
    let mut samples = Vec::with_capacity(recipe.count * n);
    for i in 0..recipe.count {
        let frame = recipe.frame(i)?;
        labels.push(frame.label.expect("synthesized frames are labelled"));
        snr_db.push(frame.snr_db.expect("synthesized frames are tagged") as f32);
        samples.extend(frame.samples.iter().map(|&x| x as f32));
    }
    Dataset::from_parts(recipe.config.clone(), Some(recipe.seed), labels, snr_db, samples)
}
