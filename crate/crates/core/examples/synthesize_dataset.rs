//! Builds a small labelled dataset, writes it to disk, reads it back and
//! summarizes it.
//!
//! cargo run --release --example synthesize_dataset -- [count] [path]

use mfsk_demod::dataset_file::{read_dataset, write_dataset};
use mfsk_demod::synthesis::build_dataset;
use mfsk_demod::{DatasetRecipe, InterferenceSpec, ModulationConfig};

fn main() -> mfsk_demod::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(500);
    let path = args.next().unwrap_or_else(|| std::env::temp_dir().join("mfsk_example.ds").display().to_string());

    let recipe = DatasetRecipe::new(count, (-20.0, 0.0), 1, ModulationConfig::orthogonal())
        .with_interference(InterferenceSpec::default());
    let dataset = build_dataset(&recipe)?;
    write_dataset(&path, &dataset)?;
    let back = read_dataset(&path)?;
    assert_eq!(back.labels(), dataset.labels());

    let mut hist = [0usize; 64];
    for &l in back.labels() {
        hist[l as usize] += 1;
    }
    let snr = back.snr_tags();
    let (lo, hi) = snr.iter().fold((f32::MAX, f32::MIN), |(a, b), &s| (a.min(s), b.max(s)));
    println!("{} frames in {path}", back.len());
    println!("SNR tags span [{lo:.2}, {hi:.2}] dB");
    println!("label counts min {} max {}", hist.iter().min().unwrap(), hist.iter().max().unwrap());
    println!("frame 0: label {}, mean square {:.3}", back.labels()[0], back.frame(0).mean_square());
    Ok(())
}
