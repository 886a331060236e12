//! Modulation constants, the 64-tone grid, link-budget conversions and the
//! closed-form error-rate expressions every other module leans on.
//!
//! All dB quantities are power ratios (`10·log10`).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Frequency of the JT65A synchronizing tone.
pub const SYNC_TONE_HZ: f64 = 1270.5;

/// Tone spacing printed for the JT65A grid.
pub const PAPER_TONE_SPACING_HZ: f64 = 2.6817;

/// How the 64 data tones are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpacingMode {
    /// Spacing `fs/N` with the base frequency snapped to the nearest DFT bin,
    /// so every tone completes an integer number of cycles per frame.
    Orthogonal,
    /// `f = 1270.5 + 2.6817·(m + 2)` taken literally.
    PaperLiteral,
}

impl SpacingMode {
    pub fn code(self) -> u8 {
        match self {
            SpacingMode::Orthogonal => 0,
            SpacingMode::PaperLiteral => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(SpacingMode::Orthogonal),
            1 => Ok(SpacingMode::PaperLiteral),
            other => Err(Error::format(format!("unknown spacing mode code {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulationConfig {
    pub sample_rate_hz: f64,
    pub frame_len: usize,
    pub alphabet_size: usize,
    pub bits_per_symbol: u32,
    /// Nominal symbol duration used for the data rate `R = k/T`.
    pub symbol_duration_s: f64,
    pub base_freq_hz: f64,
    pub tone_spacing_hz: f64,
    /// Reference bandwidth `W` for SNR and Eb/N0.
    pub bandwidth_hz: f64,
    pub spacing_mode: SpacingMode,
}

impl ModulationConfig {
    /// JT65A parameters: 11025 Hz sampling, 4096-sample symbols, 64 tones,
    /// 2500 Hz reference bandwidth.
    pub fn jt65a(spacing_mode: SpacingMode) -> Self {
        let sample_rate_hz = 11025.0;
        let frame_len = 4096;
        let (base_freq_hz, tone_spacing_hz) = match spacing_mode {
            SpacingMode::Orthogonal => {
                let bin = sample_rate_hz / frame_len as f64;
                ((SYNC_TONE_HZ / bin).round() * bin, bin)
            }
            SpacingMode::PaperLiteral => (SYNC_TONE_HZ, PAPER_TONE_SPACING_HZ),
        };
        ModulationConfig {
            sample_rate_hz,
            frame_len,
            alphabet_size: 64,
            bits_per_symbol: 6,
            symbol_duration_s: 0.3715,
            base_freq_hz,
            tone_spacing_hz,
            bandwidth_hz: 2500.0,
            spacing_mode,
        }
    }

    pub fn orthogonal() -> Self {
        Self::jt65a(SpacingMode::Orthogonal)
    }

    pub fn paper_literal() -> Self {
        Self::jt65a(SpacingMode::PaperLiteral)
    }

    /// Checks the structural invariants of the configuration.
    pub fn validate(&self) -> Result<()> {
        let m = self.alphabet_size;
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::domain(format!("alphabet size {m} is not a power of two ≥ 2")));
        }
        if self.bits_per_symbol != m.trailing_zeros() {
            return Err(Error::domain(format!(
                "bits per symbol {} != log2({m})",
                self.bits_per_symbol
            )));
        }
        if !(self.sample_rate_hz > 0.0 && self.bandwidth_hz > 0.0 && self.symbol_duration_s > 0.0)
        {
            return Err(Error::domain("rates, durations and bandwidth must be positive"));
        }
        if self.frame_len == 0 {
            return Err(Error::domain("frame length must be positive"));
        }
        let top = self.base_freq_hz + self.tone_spacing_hz * (m + 1) as f64;
        if self.base_freq_hz <= 0.0 || top > self.bandwidth_hz || top >= self.nyquist_hz() {
            return Err(Error::domain(format!(
                "tone grid [{}, {top}] Hz does not fit the band",
                self.base_freq_hz
            )));
        }
        Ok(())
    }

    pub fn sample_period_s(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }

    /// Duration actually spanned by one frame, `N/fs`.
    pub fn frame_duration_s(&self) -> f64 {
        self.frame_len as f64 / self.sample_rate_hz
    }

    /// DFT bin spacing `F = 1/(N·Ts)`.
    pub fn bin_spacing_hz(&self) -> f64 {
        self.sample_rate_hz / self.frame_len as f64
    }

    /// Data rate `R = k/T` in bit/s.
    pub fn data_rate_bps(&self) -> f64 {
        self.bits_per_symbol as f64 / self.symbol_duration_s
    }
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self::orthogonal()
    }
}

/// Frequency of data tone `m`: `base + spacing·(m + 2)`.
pub fn tone_frequency(m: usize, config: &ModulationConfig) -> Result<f64> {
    if m >= config.alphabet_size {
        return Err(Error::domain(format!(
            "symbol index {m} outside 0..{}",
            config.alphabet_size
        )));
    }
    Ok(config.base_freq_hz + config.tone_spacing_hz * (m as f64 + 2.0))
}

/// Nearest DFT bin of data tone `m`. Exact in orthogonal mode.
pub fn tone_bin(m: usize, config: &ModulationConfig) -> Result<usize> {
    let f = tone_frequency(m, config)?;
    Ok((f / config.bin_spacing_hz()).round() as usize)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// `Eb/N0 = S/N · W/R` in dB.
pub fn snr_to_ebn0(snr_db: f64, config: &ModulationConfig) -> f64 {
    snr_db + linear_to_db(config.bandwidth_hz / config.data_rate_bps())
}

pub fn ebn0_to_snr(ebn0_db: f64, config: &ModulationConfig) -> f64 {
    ebn0_db - linear_to_db(config.bandwidth_hz / config.data_rate_bps())
}

/// Linear `Es/N0 = SNR·W·N/fs` seen by a detector integrating one frame.
pub fn snr_to_esn0(snr_db: f64, config: &ModulationConfig) -> f64 {
    db_to_linear(snr_db) * config.bandwidth_hz * config.frame_duration_s()
}

/// Inverse of [`snr_to_esn0`].
pub fn esn0_to_snr(esn0_linear: f64, config: &ModulationConfig) -> f64 {
    linear_to_db(esn0_linear / (config.bandwidth_hz * config.frame_duration_s()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub data_rate_bps: f64,
    pub bandwidth_hz: f64,
}

impl LinkBudget {
    pub fn from_snr(snr_db: f64, config: &ModulationConfig) -> Self {
        LinkBudget {
            snr_db,
            ebn0_db: snr_to_ebn0(snr_db, config),
            data_rate_bps: config.data_rate_bps(),
            bandwidth_hz: config.bandwidth_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates {
    pub ser: f64,
    pub ber: f64,
}

impl ErrorRates {
    pub fn from_ser(ser: f64, alphabet_size: usize) -> Result<Self> {
        Ok(ErrorRates { ser, ber: ser_to_ber(ser, alphabet_size)? })
    }
}

/// Bit error rate of orthogonal M-ary signalling given its symbol error
/// rate: `Pb = Pe·(M/2)/(M−1)`.
pub fn ser_to_ber(pe: f64, alphabet_size: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&pe) {
        return Err(Error::domain(format!("symbol error rate {pe} outside [0, 1]")));
    }
    if alphabet_size < 2 {
        return Err(Error::domain("alphabet size must be at least 2"));
    }
    let m = alphabet_size as f64;
    Ok(pe * (m / 2.0) / (m - 1.0))
}

/// `Pb = ½·exp(−½·Eb/N0)`, the non-coherent orthogonal-signal reference curve.
pub fn theoretical_ber_noncoherent(ebn0_db: f64) -> f64 {
    0.5 * (-0.5 * db_to_linear(ebn0_db)).exp()
}

/// Inverse of [`theoretical_ber_noncoherent`]: the Eb/N0 in dB at which the
/// reference curve reaches `pb`.
pub fn theoretical_ebn0_for_ber(pb: f64) -> Result<f64> {
    if !(pb > 0.0 && pb < 0.5) {
        return Err(Error::domain(format!("target BER {pb} outside (0, 0.5)")));
    }
    Ok(linear_to_db(-2.0 * (2.0 * pb).ln()))
}

/// Exact symbol error probability of non-coherent orthogonal M-FSK,
///
/// `Pe = Σ_{j=1}^{M−1} (−1)^{j+1} C(M−1, j)/(j+1) · exp(−j/(j+1) · Es/N0)`.
///
/// The alternating sum loses all precision for large M (its terms reach
/// ~1e16 at M = 64 while the result is at most 1), so it is evaluated through
/// the equivalent integral over the signal-bin energy `y`:
///
/// `Pe = ∫ e^{−(y+s)} I0(2√(sy)) · [1 − (1 − e^{−y})^{M−1}] dy`,
///
/// whose integrand is non-negative.
pub fn exact_noncoherent_ser(esn0_linear: f64, alphabet_size: usize) -> f64 {
    assert!(alphabet_size >= 2, "alphabet size must be at least 2");
    assert!(esn0_linear >= 0.0, "Es/N0 must be non-negative");
    let others = (alphabet_size - 1) as f64;
    let a = esn0_linear.sqrt();
    // Substituting y = r² gives a smooth bump of unit width near r = a,
    // multiplied by a factor that decays like (M−1)·e^{−r²}.
    let integrand = |r: f64| -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let y = r * r;
        let miss = -(others * (-(-y).exp()).ln_1p()).exp_m1();
        2.0 * r * (-(r - a) * (r - a)).exp() * bessel_i0_scaled(2.0 * a * r) * miss
    };
    let upper = a + 12.0;
    let intervals = {
        let n = (upper / 0.004).ceil() as usize;
        n + n % 2
    };
    let h = upper / intervals as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..intervals {
        let v = integrand(i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    let pe = h / 3.0 * (integrand(0.0) + 4.0 * odd + 2.0 * even + integrand(upper));
    pe.clamp(0.0, others / alphabet_size as f64)
}

/// Exponentially scaled modified Bessel function `I0(x)·e^{−x}` for `x ≥ 0`.
pub(crate) fn bessel_i0_scaled(x: f64) -> f64 {
    if x <= 20.0 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // Asymptotic expansion, truncated at its smallest term.
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let k = k as f64;
            let ratio = (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
            if ratio >= 1.0 {
                break;
            }
            term *= ratio;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}
