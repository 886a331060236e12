//! CSV writers for curves, metrics, training history and figure data.
//!
//! Floats use Rust's shortest round-trip formatting, so identical values
//! always produce identical bytes. Wall-clock timings are never written.

use std::io::Write;

use crate::dsp::{Histogram, Spectrum};
use crate::error::Result;
use crate::evaluation::{ConfusionMatrix, ErrorRatePoint, MetricsReport};
use crate::training::TrainHistory;

pub const CURVE_HEADER: &str = "snr_db,ebn0_db,ser,ber,theoretical_ber";
pub const METRICS_HEADER: &str = "class,precision,recall";
pub const SUMMARY_HEADER: &str = "error_rate,accuracy,macro_precision,macro_recall,micro_precision,micro_recall";

pub fn write_curve_csv<W: Write>(mut out: W, curve: &[ErrorRatePoint]) -> Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for p in curve {
        writeln!(out, "{},{},{},{},{}", p.snr_db, p.ebn0_db, p.ser, p.ber, p.theoretical_ber)?;
    }
    out.flush()?;
    Ok(())
}

/// Per-class rows, then the summary header and its single row.
pub fn write_metrics_csv<W: Write>(mut out: W, m: &MetricsReport) -> Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for (c, (p, r)) in m.precision.iter().zip(&m.recall).enumerate() {
        writeln!(out, "{c},{p},{r}")?;
    }
    writeln!(out, "{SUMMARY_HEADER}")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        m.error_rate, m.accuracy, m.macro_precision, m.macro_recall, m.micro_precision, m.micro_recall
    )?;
    out.flush()?;
    Ok(())
}

/// Rows are true classes, columns predictions.
pub fn write_confusion_csv<W: Write>(mut out: W, cm: &ConfusionMatrix) -> Result<()> {
    let n = cm.classes();
    let header: Vec<String> = (0..n).map(|p| format!("pred_{p}")).collect();
    writeln!(out, "truth,{}", header.join(","))?;
    for t in 0..n {
        let row: Vec<String> = (0..n).map(|p| cm.get(t, p).to_string()).collect();
        writeln!(out, "{t},{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_step_history_csv<W: Write>(mut out: W, history: &TrainHistory) -> Result<()> {
    writeln!(out, "step,epoch,loss,accuracy")?;
    for s in &history.steps {
        writeln!(out, "{},{},{},{}", s.step, s.epoch, s.loss, s.accuracy)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_epoch_history_csv<W: Write>(mut out: W, history: &TrainHistory) -> Result<()> {
    writeln!(out, "epoch,loss,accuracy")?;
    for e in &history.epochs {
        writeln!(out, "{},{},{}", e.epoch, e.loss, e.accuracy)?;
    }
    out.flush()?;
    Ok(())
}

/// First `count` samples as `(n, x)`.
pub fn write_waveform_csv<W: Write>(mut out: W, samples: &[f64], count: usize) -> Result<()> {
    writeln!(out, "n,x")?;
    for (n, x) in samples.iter().take(count).enumerate() {
        writeln!(out, "{n},{x}")?;
    }
    out.flush()?;
    Ok(())
}

/// One-sided ESD, bins 0 through N/2.
pub fn write_esd_csv<W: Write>(mut out: W, spectrum: &Spectrum, esd: &[f64]) -> Result<()> {
    writeln!(out, "f_hz,esd")?;
    for (k, e) in esd.iter().enumerate().take(spectrum.len() / 2 + 1) {
        writeln!(out, "{},{e}", spectrum.frequency(k))?;
    }
    out.flush()?;
    Ok(())
}

/// Left edge of each bin with its count.
pub fn write_histogram_csv<W: Write>(mut out: W, hist: &Histogram) -> Result<()> {
    writeln!(out, "edge,count")?;
    for (edge, count) in hist.edges.iter().zip(&hist.counts) {
        writeln!(out, "{edge},{count}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::ModulationConfig;
    use crate::training::{EpochRecord, StepRecord};

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn curve_rows() {
        let cfg = ModulationConfig::orthogonal();
        let curve = vec![ErrorRatePoint::new(-10.0, 0.5, &cfg).unwrap()];
        let s = text(|b| write_curve_csv(b, &curve));
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], CURVE_HEADER);
        let cols: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 5);
        assert_eq!(cols[2], 0.5);
        assert_eq!(cols[3], curve[0].ber);
    }

    #[test]
    fn metrics_layout() {
        let cm = ConfusionMatrix::from_pairs(3, &[0, 1, 2, 2], &[0, 1, 2, 1]).unwrap();
        let s = text(|b| write_metrics_csv(b, &cm.metrics()));
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines.len(), 1 + 3 + 2);
        assert_eq!(lines[4], SUMMARY_HEADER);
        assert!(lines[5].starts_with("0.25,0.75,"));
        let c = text(|b| write_confusion_csv(b, &cm));
        assert_eq!(c.lines().nth(3).unwrap(), "2,0,1,1");
    }

    #[test]
    fn history_rows() {
        let h = TrainHistory {
            steps: vec![StepRecord { step: 0, epoch: 0, loss: 1.5, accuracy: 0.25 }],
            epochs: vec![EpochRecord { epoch: 0, loss: 1.5, accuracy: 0.25, seconds: 3.0 }],
        };
        assert_eq!(text(|b| write_step_history_csv(b, &h)), "step,epoch,loss,accuracy\n0,0,1.5,0.25\n");
        assert_eq!(text(|b| write_epoch_history_csv(b, &h)), "epoch,loss,accuracy\n0,1.5,0.25\n");
    }

    #[test]
    fn figure_tables() {
        let w = text(|b| write_waveform_csv(b, &[0.5; 300], 200));
        assert_eq!(w.lines().count(), 201);
        let spectrum = crate::dsp::dft_samples(&[1.0; 8], 0.5).unwrap();
        let e = crate::dsp::esd(&spectrum);
        let s = text(|b| write_esd_csv(b, &spectrum, &e));
        assert_eq!(s.lines().count(), 1 + 5);
        let hist = Histogram { edges: vec![0.0, 1.0, 2.0], counts: vec![3, 4] };
        assert_eq!(text(|b| write_histogram_csv(b, &hist)), "edge,count\n0,3\n1,4\n");
    }
}
