//! Network error-rate curves with and without interference, and their gaps
//! to the reference curve at Pb = 1e-2.
//!
//! cargo run --release --example error_rate_curves -- [model path] [trials]
//!
//! Without a model path a small network is trained first.

use mfsk_demod::evaluation::{gap_at_ber, nn_ser_curve};
use mfsk_demod::nn::load_model;
use mfsk_demod::training::{train, TrainConfig};
use mfsk_demod::{DatasetRecipe, InterferenceSpec, ModulationConfig};

fn main() -> mfsk_demod::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg = ModulationConfig::orthogonal();
    let model = match args.next() {
        Some(path) => load_model(path)?,
        None => {
            let recipe = DatasetRecipe::new(5_000, (-20.0, 0.0), 1, cfg.clone());
            train(&recipe, &TrainConfig { seed: 1, ..TrainConfig::default() })?.0
        }
    };
    let trials: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(1000);

    let grid: Vec<f64> = (-20..=0).map(f64::from).collect();
    let clean = nn_ser_curve(&model, &grid, trials, 7, &cfg, None)?;
    let dirty = nn_ser_curve(&model, &grid, trials, 7, &cfg, Some(&InterferenceSpec::default()))?;
    println!(" snr dB  Eb/N0 dB   BER        BER (interference)   reference");
    for (c, d) in clean.iter().zip(&dirty) {
        println!("{:>7.1} {:>8.2}   {:<10.5} {:<20.5} {:.5}", c.snr_db, c.ebn0_db, c.ber, d.ber, c.theoretical_ber);
    }
    match (gap_at_ber(&clean, 1e-2), gap_at_ber(&dirty, 1e-2)) {
        (Ok(g), Ok(h)) => println!("gap {g:.2} dB, with interference {h:.2} dB (shift {:.2} dB)", h - g),
        (g, h) => println!("gap {g:?}, with interference {h:?}"),
    }
    Ok(())
}
