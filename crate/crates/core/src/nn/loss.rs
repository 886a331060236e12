use ndarray::{Array2, ArrayView1, Axis, Zip};

use super::Float;
use crate::error::{Error, Result};

/// Lower clamp applied to probabilities before the logarithm.
pub const LOG_CLAMP: f64 = 1e-7;

/// Mean over the batch of `−Σ p(x)·log q(x)`.
pub fn cross_entropy<F: Float>(targets: &Array2<F>, predictions: &Array2<F>) -> Result<F> {
    if targets.dim() != predictions.dim() {
        return Err(Error::shape(format!(
            "targets {:?} vs predictions {:?}",
            targets.dim(),
            predictions.dim()
        )));
    }
    if targets.nrows() == 0 {
        return Err(Error::domain("empty batch"));
    }
    let clamp = F::from(LOG_CLAMP).unwrap();
    let mut total = F::zero();
    Zip::from(targets).and(predictions).for_each(|&p, &q| {
        if p != F::zero() {
            total -= p * q.max(clamp).min(F::one()).ln();
        }
    });
    Ok(total / F::from(targets.nrows()).unwrap())
}

pub fn one_hot<F: Float>(labels: &[u8], classes: usize) -> Result<Array2<F>> {
    let mut out = Array2::zeros((labels.len(), classes));
    for (row, &label) in labels.iter().enumerate() {
        if label as usize >= classes {
            return Err(Error::domain(format!("label {label} outside 0..{classes}")));
        }
        out[[row, label as usize]] = F::one();
    }
    Ok(out)
}

fn argmax<F: Float>(row: ArrayView1<F>) -> usize {
    // First maximum wins.
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub fn argmax_rows<F: Float>(probabilities: &Array2<F>) -> Vec<usize> {
    probabilities.axis_iter(Axis(0)).map(argmax).collect()
}

/// Fraction of rows whose argmax equals the label.
pub fn accuracy<F: Float>(probabilities: &Array2<F>, labels: &[u8]) -> f64 {
    let hits = argmax_rows(probabilities)
        .into_iter()
        .zip(labels)
        .filter(|(p, &l)| *p == l as usize)
        .count();
    hits as f64 / labels.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_has_zero_loss() {
        let t = one_hot::<f64>(&[2, 0], 4).unwrap();
        assert_eq!(cross_entropy(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn uniform_prediction_costs_ln_classes() {
        let t = one_hot::<f64>(&[5, 17, 63], 64).unwrap();
        let q = Array2::from_elem((3, 64), 1.0 / 64.0);
        let loss = cross_entropy(&t, &q).unwrap();
        assert!((loss - 4.158_883_083_4).abs() < 1e-9);
        assert!((loss - 64f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn vanishing_probability_is_clamped() {
        let t = one_hot::<f64>(&[0], 2).unwrap();
        let q = Array2::from_shape_vec((1, 2), vec![0.0, 1.0]).unwrap();
        let loss = cross_entropy(&t, &q).unwrap();
        assert!((loss + LOG_CLAMP.ln()).abs() < 1e-12);
    }

    #[test]
    fn shape_and_label_errors() {
        let t = one_hot::<f32>(&[0], 2).unwrap();
        let q = Array2::<f32>::zeros((1, 3));
        assert!(matches!(cross_entropy(&t, &q), Err(Error::Shape(_))));
        assert!(one_hot::<f32>(&[4], 4).is_err());
    }

    #[test]
    fn argmax_prefers_first_maximum() {
        let p = Array2::from_shape_vec((2, 3), vec![0.2f32, 0.4, 0.4, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(argmax_rows(&p), vec![1, 0]);
        assert_eq!(accuracy(&p, &[1, 2]), 0.5);
    }
}
