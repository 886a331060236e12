//! Single-frame latency of the network and of the FFT-bank detector against
//! the 371.5 ms symbol period.

use mfsk_demod::baseline::NoncoherentDetector;
use mfsk_demod::evaluation::bench_inference;
use mfsk_demod::nn::{init_model, Mode};
use mfsk_demod::{DatasetRecipe, ModulationConfig};
use ndarray::Array2;

fn main() -> mfsk_demod::Result<()> {
    let cfg = ModulationConfig::orthogonal();
    let mut model = init_model(1);
    model.set_mode(Mode::Inference);
    let frame = DatasetRecipe::new(1, (-10.0, -10.0), 9, cfg.clone()).frame(0)?;
    let x = Array2::from_shape_fn((1, cfg.frame_len), |(_, j)| frame.samples[j] as f32);

    for iters in [200, 400] {
        let nn = bench_inference(&model, &x, iters)?;
        let fft = bench_inference(&NoncoherentDetector::new(&cfg)?, &x, iters)?;
        println!(
            "{iters} frames: network mean {:.1} us (p95 {:.1}), FFT bank mean {:.1} us (p95 {:.1}), real time: {}",
            nn.mean_us, nn.p95_us, fft.mean_us, fft.p95_us, nn.realtime
        );
    }
    Ok(())
}
