//! Spectral analysis: an in-repo iterative radix-2 FFT scaled as an
//! amplitude density (`S(kF) = Ts·Σ x(nTs)·e^{−j2πnk/N}`), energy spectral
//! density and amplitude histograms.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modem::ModulationConfig;
use crate::synthesis::SignalFrame;

/// Precomputed twiddles and bit-reversal permutation for one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    twiddles: Vec<Complex64>,
    reversed: Vec<usize>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::UnsupportedLength(len));
        }
        let bits = len.trailing_zeros();
        let reversed = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        Ok(FftPlan { len, twiddles, reversed })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unscaled in-place transform. `inverse` flips the exponent sign.
    pub fn process(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        for i in 0..self.len {
            let j = self.reversed[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < self.len {
            let stride = self.len / (2 * half);
            for start in (0..self.len).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let top = buf[start + k];
                    let bottom = buf[start + k + half] * w;
                    buf[start + k] = top + bottom;
                    buf[start + k + half] = top - bottom;
                }
            }
            half *= 2;
        }
    }
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Rc<FftPlan>>> = RefCell::new(HashMap::new());
}

fn cached_plan(len: usize) -> Result<Rc<FftPlan>> {
    PLANS.with(|plans| {
        if let Some(plan) = plans.borrow().get(&len) {
            return Ok(Rc::clone(plan));
        }
        let plan = Rc::new(FftPlan::new(len)?);
        plans.borrow_mut().insert(len, Rc::clone(&plan));
        Ok(plan)
    })
}

/// Discrete amplitude density of one frame, in V/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    /// `F = 1/(N·Ts)`.
    pub bin_spacing_hz: f64,
    pub sample_period_s: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Frequency of bin `k`, i.e. `k·F`.
    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.bin_spacing_hz
    }

    /// Inverse transform back to real time-domain samples.
    pub fn inverse(&self) -> Result<Vec<f64>> {
        let plan = cached_plan(self.bins.len())?;
        let mut buf = self.bins.clone();
        plan.process(&mut buf, true);
        let scale = self.bin_spacing_hz;
        Ok(buf.into_iter().map(|c| c.re * scale).collect())
    }
}

/// Transforms raw samples taken every `sample_period_s` seconds.
pub fn dft_samples(samples: &[f64], sample_period_s: f64) -> Result<Spectrum> {
    let plan = cached_plan(samples.len())?;
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.process(&mut buf, false);
    for c in &mut buf {
        *c *= sample_period_s;
    }
    Ok(Spectrum {
        bins: buf,
        bin_spacing_hz: 1.0 / (samples.len() as f64 * sample_period_s),
        sample_period_s,
    })
}

pub fn dft(frame: &SignalFrame, config: &ModulationConfig) -> Result<Spectrum> {
    dft_samples(&frame.samples, config.sample_period_s())
}

/// `|S(kF)|²` per bin, in V²·s/Hz.
pub fn esd(spectrum: &Spectrum) -> Vec<f64> {
    spectrum.bins.iter().map(|c| c.norm_sqr()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` edges spanning `[min, max]` of the samples.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn histogram(frame: &SignalFrame, num_bins: usize) -> Result<Histogram> {
    if num_bins == 0 {
        return Err(Error::domain("histogram needs at least one bin"));
    }
    let samples = &frame.samples;
    if samples.is_empty() {
        return Err(Error::domain("cannot histogram an empty frame"));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / num_bins as f64;
    let edges = (0..=num_bins)
        .map(|i| if i == num_bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0usize; num_bins];
    for &x in samples {
        let idx = if width > 0.0 { ((x - lo) / width) as usize } else { 0 };
        counts[idx.min(num_bins - 1)] += 1;
    }
    Ok(Histogram { edges, counts })
}
