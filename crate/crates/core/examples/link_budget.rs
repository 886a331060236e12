//! Tone grid and link budget: where the 64 tones sit, and how SNR in a
//! 2500 Hz bandwidth maps to Eb/N0, Es/N0 and the reference bit error rate.

use mfsk_demod::modem::{
    exact_noncoherent_ser, ser_to_ber, snr_to_ebn0, snr_to_esn0, theoretical_ber_noncoherent, tone_bin,
    tone_frequency, ModulationConfig,
};

fn main() -> mfsk_demod::Result<()> {
    for cfg in [ModulationConfig::orthogonal(), ModulationConfig::paper_literal()] {
        println!("{:?}: {:.3} bit/s", cfg.spacing_mode, cfg.data_rate_bps());
        for m in [0, 1, 31, 63] {
            println!("  tone {m:>2}: {:9.3} Hz (bin {})", tone_frequency(m, &cfg)?, tone_bin(m, &cfg)?);
        }
    }

    let cfg = ModulationConfig::orthogonal();
    println!("\n snr dB   Eb/N0 dB   Es/N0    Pb(64-FSK)   Pb(reference)");
    for snr in (-24..=-8).step_by(2).map(f64::from) {
        let esn0 = snr_to_esn0(snr, &cfg);
        let ebn0 = snr_to_ebn0(snr, &cfg);
        let pb = ser_to_ber(exact_noncoherent_ser(esn0, 64), 64)?;
        println!("{snr:>7.1} {ebn0:>10.3} {esn0:>8.3} {pb:>12.3e} {:>14.3e}", theoretical_ber_noncoherent(ebn0));
    }
    Ok(())
}
