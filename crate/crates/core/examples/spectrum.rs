//! Energy spectral density of one noisy symbol: the tone stands out of the
//! noise floor at its DFT bin even at -10 dB.

use mfsk_demod::dsp::{dft, esd, histogram};
use mfsk_demod::modem::tone_bin;
use mfsk_demod::synthesis::{add_awgn, substream, synth_tone};
use mfsk_demod::ModulationConfig;

fn main() -> mfsk_demod::Result<()> {
    let cfg = ModulationConfig::orthogonal();
    let symbol = 42;
    let frame = add_awgn(synth_tone(symbol, 0.3, &cfg)?, -10.0, &mut substream(3, 0), &cfg);
    let spectrum = dft(&frame, &cfg)?;
    let energy = esd(&spectrum);

    let half = &energy[..=cfg.frame_len / 2];
    let mut ranked: Vec<usize> = (0..half.len()).collect();
    ranked.sort_by(|&a, &b| half[b].total_cmp(&half[a]));
    println!("symbol {symbol} lives in bin {}", tone_bin(symbol, &cfg)?);
    for &k in &ranked[..5] {
        println!("  bin {k:>4} ({:8.2} Hz): {:.3e}", spectrum.frequency(k), half[k]);
    }
    let median = {
        let mut v = half.to_vec();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    println!("median bin energy {median:.3e}");

    let h = histogram(&frame, 12)?;
    println!("\namplitude histogram");
    for (edge, count) in h.edges.iter().zip(&h.counts) {
        println!("  {edge:>7.2} {}", "#".repeat(count / 20));
    }
    Ok(())
}
