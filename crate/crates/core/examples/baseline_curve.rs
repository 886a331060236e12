//! Monte-Carlo error rates of the non-coherent FFT-bank detector next to the
//! closed-form 64-ary symbol error rate and the binary reference curve.

use mfsk_demod::baseline::baseline_ser_curve;
use mfsk_demod::evaluation::gap_at_ber;
use mfsk_demod::modem::{exact_noncoherent_ser, snr_to_esn0};
use mfsk_demod::ModulationConfig;

fn main() -> mfsk_demod::Result<()> {
    let cfg = ModulationConfig::orthogonal();
    let grid: Vec<f64> = (-24..=-10).map(f64::from).collect();
    let curve = baseline_ser_curve(&grid, 2000, 5, &cfg)?;
    println!(" snr dB  Eb/N0 dB   SER       exact SER   BER       reference");
    for p in &curve {
        let exact = exact_noncoherent_ser(snr_to_esn0(p.snr_db, &cfg), 64);
        println!(
            "{:>7.1} {:>8.2}   {:<9.4} {:<11.4} {:<9.4} {:.4}",
            p.snr_db, p.ebn0_db, p.ser, exact, p.ber, p.theoretical_ber
        );
    }
    println!("gap to the reference at Pb = 1e-2: {:.2} dB", gap_at_ber(&curve, 1e-2)?);
    Ok(())
}
