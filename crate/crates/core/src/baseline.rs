//! Non-coherent FFT-bank energy detector: picks the tone whose DFT bin holds
//! the most energy.

use ndarray::{Array2, Axis};

use crate::dsp::{dft_samples, esd};
use crate::error::{Error, Result};
use crate::evaluation::{ser_curve, Classifier, ErrorRatePoint};
use crate::modem::{tone_bin, ModulationConfig, SpacingMode};
use crate::synthesis::SignalFrame;

/// DFT bin of every data tone. Exact in orthogonal mode, nearest bin otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToneBinMap {
    bins: Vec<usize>,
}

impl ToneBinMap {
    pub fn new(config: &ModulationConfig) -> Result<Self> {
        let bins = (0..config.alphabet_size)
            .map(|m| tone_bin(m, config))
            .collect::<Result<Vec<_>>>()?;
        if bins.iter().any(|&b| b == 0 || b >= config.frame_len / 2) {
            return Err(Error::domain("tone bins must lie strictly between DC and Nyquist"));
        }
        if config.spacing_mode == SpacingMode::Orthogonal && bins.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("orthogonal tone bins must be distinct"));
        }
        Ok(ToneBinMap { bins })
    }

    pub fn bin(&self, symbol: usize) -> usize {
        self.bins[symbol]
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    /// Symbol mapped to `bin`, if any.
    pub fn symbol(&self, bin: usize) -> Option<usize> {
        self.bins.iter().position(|&b| b == bin)
    }
}

#[derive(Debug, Clone)]
pub struct NoncoherentDetector {
    config: ModulationConfig,
    map: ToneBinMap,
}

impl NoncoherentDetector {
    pub fn new(config: &ModulationConfig) -> Result<Self> {
        Ok(NoncoherentDetector { config: config.clone(), map: ToneBinMap::new(config)? })
    }

    pub fn map(&self) -> &ToneBinMap {
        &self.map
    }

    /// Tone-bin energies followed by the decision; ties go to the lowest symbol.
    pub fn decide(&self, samples: &[f64]) -> Result<usize> {
        if samples.len() != self.config.frame_len {
            return Err(Error::shape(format!(
                "frame of {} samples, expected {}",
                samples.len(),
                self.config.frame_len
            )));
        }
        let energy = esd(&dft_samples(samples, self.config.sample_period_s())?);
        let mut best = 0;
        for (m, &bin) in self.map.bins().iter().enumerate() {
            if energy[bin] > energy[self.map.bin(best)] {
                best = m;
            }
        }
        Ok(best)
    }
}

impl Classifier for NoncoherentDetector {
    fn input_width(&self) -> usize {
        self.config.frame_len
    }

    fn classify(&self, inputs: &Array2<f32>) -> Result<Vec<usize>> {
        inputs
            .axis_iter(Axis(0))
            .map(|row| {
                let samples: Vec<f64> = row.iter().map(|&x| x as f64).collect();
                self.decide(&samples)
            })
            .collect()
    }
}

/// Demodulates one frame by maximum tone-bin energy.
pub fn demod_noncoherent(frame: &SignalFrame, config: &ModulationConfig) -> Result<usize> {
    NoncoherentDetector::new(config)?.decide(&frame.samples)
}

/// Monte-Carlo symbol error curve of the detector over an SNR grid.
pub fn baseline_ser_curve(
    snr_grid_db: &[f64],
    trials_per_point: usize,
    seed: u64,
    config: &ModulationConfig,
) -> Result<Vec<ErrorRatePoint>> {
    if trials_per_point < 100 {
        return Err(Error::domain("need at least 100 trials per point"));
    }
    let detector = NoncoherentDetector::new(config)?;
    ser_curve(&detector, snr_grid_db, trials_per_point, seed, config, None)
}
