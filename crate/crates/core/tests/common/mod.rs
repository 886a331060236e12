#![allow(dead_code)]

use mfsk_demod::nn::{cross_entropy, one_hot, DenseModel};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Largest relative error between backprop and central differences with
/// step `h`, one entry per trainable tensor.
pub fn gradient_check(widths: &[usize], batch: usize, seed: u64, h: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = DenseModel::<f64>::new(widths, seed).unwrap();
    let x = Array2::from_shape_fn((batch, widths[0]), |_| rng.random_range(-2.0..2.0));
    let classes = *widths.last().unwrap();
    let labels: Vec<u8> = (0..batch).map(|i| (i % classes) as u8).collect();
    let t = one_hot::<f64>(&labels, classes).unwrap();
    let loss = |m: &mut DenseModel<f64>| cross_entropy(&t, &m.forward(&x).unwrap()).unwrap();

    model.forward(&x).unwrap();
    let analytic = model.backward(&t).unwrap();
    let mut worst = Vec::new();
    for (k, grad) in analytic.tensors.iter().enumerate() {
        let mut err = 0.0f64;
        for (idx, &a) in grad.iter().enumerate() {
            let nudge = |m: &mut DenseModel<f64>, delta: f64| {
                *m.trainable_params_mut()[k].iter_mut().nth(idx).unwrap() += delta;
            };
            nudge(&mut model, h);
            let up = loss(&mut model);
            nudge(&mut model, -2.0 * h);
            let down = loss(&mut model);
            nudge(&mut model, h);
            let numeric = (up - down) / (2.0 * h);
            let scale = a.abs().max(numeric.abs()).max(1e-6);
            err = err.max((a - numeric).abs() / scale);
        }
        worst.push(err);
    }
    worst
}

/// Direct O(N²) evaluation of `X_k = Ts·Σ x_n·e^{−j2πkn/N}`.
pub fn brute_force_dft(x: &[f64], ts: f64) -> Vec<Complex64> {
    let n = x.len();
    let table: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(1.0, -2.0 * PI * i as f64 / n as f64)).collect();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                acc += table[(k * i) % n] * v;
            }
            acc * ts
        })
        .collect()
}
