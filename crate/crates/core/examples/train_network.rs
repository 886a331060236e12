//! Trains the dense demodulator on lazily synthesized frames, saves it and
//! evaluates it on a fixed-SNR test set.
//!
//! cargo run --release --example train_network -- [frames] [epochs] [model path]

use mfsk_demod::evaluation::evaluate;
use mfsk_demod::nn::{load_model, save_model};
use mfsk_demod::training::{train_with, TrainConfig};
use mfsk_demod::{DatasetRecipe, ModulationConfig};

fn main() -> mfsk_demod::Result<()> {
    let mut args = std::env::args().skip(1);
    let frames: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5_000);
    let epochs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let path = args.next().unwrap_or_else(|| std::env::temp_dir().join("mfsk_example.nn").display().to_string());

    let cfg = ModulationConfig::orthogonal();
    let recipe = DatasetRecipe::new(frames, (-20.0, 0.0), 1, cfg.clone());
    let config = TrainConfig { epochs, seed: 1, ..TrainConfig::default() };
    let (model, history) = train_with(&recipe, &config, |s| {
        if s.step % 250 == 0 {
            println!("step {:>6}  loss {:.4}  batch accuracy {:.3}", s.step, s.loss, s.accuracy);
        }
    })?;
    for e in &history.epochs {
        println!("epoch {}  loss {:.4}  accuracy {:.4}  {:.1} s", e.epoch + 1, e.loss, e.accuracy, e.seconds);
    }
    let counts = model.param_counts();
    println!("{} parameters ({} trainable)", counts.total, counts.trainable);

    save_model(&model, &path)?;
    let model = load_model(&path)?;
    for snr in [-15.0, -10.0, -5.0] {
        let test = DatasetRecipe::new(2000, (snr, snr), 1_000_003, cfg.clone());
        let m = evaluate(&model, &test)?.metrics;
        println!("{snr:>6.1} dB: accuracy {:.4}, macro recall {:.4}", m.accuracy, m.macro_recall);
    }
    println!("model saved to {path}");
    Ok(())
}
