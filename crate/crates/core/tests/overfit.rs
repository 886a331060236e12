//! The full-size network memorizes one clean-ish frame per class.

use mfsk_demod::evaluation::evaluate;
use mfsk_demod::modem::ModulationConfig;
use mfsk_demod::synthesis::{add_awgn, substream, synth_tone, Dataset};
use mfsk_demod::training::{train, TrainConfig};
use rand::Rng;

#[test]
fn memorizes_64_frames_at_plus_20_db() {
    let cfg = ModulationConfig::orthogonal();
    let mut rng = substream(64, 0);
    let mut labels = Vec::new();
    let mut snrs = Vec::new();
    let mut samples = Vec::new();
    for m in 0..64 {
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let f = add_awgn(synth_tone(m, phase, &cfg).unwrap(), 20.0, &mut rng, &cfg);
        labels.push(m as u8);
        snrs.push(20.0f32);
        samples.extend(f.samples.iter().map(|&x| x as f32));
    }
    let ds = Dataset::from_parts(cfg, None, labels, snrs, samples).unwrap();
    let (model, history) = train(&ds, &TrainConfig { epochs: 200, seed: 3, ..TrainConfig::default() }).unwrap();
    assert_eq!(history.epochs.last().unwrap().accuracy, 1.0);
    assert_eq!(evaluate(&model, &ds).unwrap().metrics.accuracy, 1.0);
    let first = history.epochs[0].loss;
    let last = history.epochs.last().unwrap().loss;
    assert!(last < 0.1 * first, "{first} -> {last}");
}
