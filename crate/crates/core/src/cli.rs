//! Command-line front end: `mfsk <subcommand>`.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or file-format error,
//! 3 numeric failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;

use crate::baseline::{baseline_ser_curve, NoncoherentDetector};
use crate::dataset_file::{read_dataset, DatasetWriter};
use crate::dsp::{dft, esd, histogram};
use crate::error::{Error, Result};
use crate::evaluation::{bench_inference, evaluate, nn_ser_curve, ErrorRatePoint, REALTIME_BUDGET_US};
use crate::modem::{ModulationConfig, SpacingMode};
use crate::nn::{load_model, save_model, DenseModel};
use crate::report;
use crate::synthesis::{add_awgn, derive_seed, substream, synth_tone, DatasetRecipe, InterferenceSpec};
use crate::training::{train_with, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FORMAT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const DEFAULT_SEED: u64 = 20_190_801;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    /// Tones on DFT bins (spacing fs/N).
    Orthogonal,
    /// 1270.5 Hz base, 2.6817 Hz spacing.
    Paper,
}

impl From<Spacing> for SpacingMode {
    fn from(s: Spacing) -> Self {
        match s {
            Spacing::Orthogonal => SpacingMode::Orthogonal,
            Spacing::Paper => SpacingMode::PaperLiteral,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mfsk", version, about = "64-FSK synthesis, neural and FFT-bank demodulation, error-rate curves")]
pub struct Cli {
    /// Master seed; a default is used (and printed) when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value = "orthogonal")]
    pub spacing: Spacing,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct InterferenceArgs {
    /// Add narrowband and pulse interference.
    #[arg(long)]
    pub interference: bool,
    /// Narrowband power as a fraction of the AWGN power.
    #[arg(long, default_value_t = 0.2)]
    pub narrowband: f64,
    /// Time-averaged pulse power as a fraction of the AWGN power.
    #[arg(long, default_value_t = 0.1)]
    pub pulse: f64,
    #[arg(long, default_value_t = 0.01)]
    pub duty: f64,
}

impl InterferenceArgs {
    fn spec(&self, seed: u64) -> Option<InterferenceSpec> {
        self.interference.then(|| InterferenceSpec {
            narrowband_power_fraction: self.narrowband,
            pulse_power_fraction: self.pulse,
            pulse_duty_cycle: self.duty,
            rng_seed: derive_seed(seed, INTERFERENCE_TAG),
        })
    }
}

#[derive(Debug, Args, Clone)]
pub struct GridArgs {
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// Test frames per SNR point.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a labelled dataset file.
    Synth {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
        snr_min: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        snr_max: f64,
        #[command(flatten)]
        interference: InterferenceArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the network on a dataset file; writes the model and history CSVs.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long)]
        out: PathBuf,
        /// Per-step history CSV (default: `<out>.steps.csv`).
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Confusion matrix and metrics on a fresh fixed-SNR test set.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        snr: f64,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[command(flatten)]
        interference: InterferenceArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Network error-rate curve with the theoretical column.
    Curves {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        interference: InterferenceArgs,
    },
    /// Error-rate curve of the non-coherent FFT-bank detector.
    BaselineCurves {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Single-frame inference latency.
    Bench {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
    },
    /// Waveform, ESD and histogram of one noisy symbol.
    Figures {
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        snr: f64,
        #[arg(long, default_value_t = 0)]
        symbol: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

const TEST_TAG: u64 = 0x7465_7374;
const INTERFERENCE_TAG: u64 = 0x6e6f_6973;
const FIGURE_TAG: u64 = 0x6669_6773;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Format(_) | Error::Shape(_) => EXIT_FORMAT,
        Error::Numeric(_) => EXIT_NUMERIC,
        Error::Domain(_) | Error::State(_) | Error::Range(_) | Error::UnsupportedLength(_) => EXIT_USAGE,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn grid(args: &GridArgs) -> Result<Vec<f64>> {
    if !(args.step > 0.0 && args.from.is_finite() && args.to.is_finite() && args.from <= args.to) {
        return Err(Error::domain("grid needs from <= to and a positive step"));
    }
    let n = ((args.to - args.from) / args.step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| args.from + i as f64 * args.step).collect())
}

fn load_checked(path: &Path, config: &ModulationConfig) -> Result<DenseModel<f32>> {
    let model = load_model(path)?;
    if model.input_width() != config.frame_len || model.classes() != config.alphabet_size {
        return Err(Error::format(format!(
            "model maps {} inputs to {} classes, expected {} to {}",
            model.input_width(),
            model.classes(),
            config.frame_len,
            config.alphabet_size
        )));
    }
    Ok(model)
}

fn print_curve(curve: &[ErrorRatePoint]) {
    for p in curve {
        println!(
            "snr {:>6.1} dB  Eb/N0 {:>6.2} dB  SER {:.5}  BER {:.5}  theory {:.5}",
            p.snr_db, p.ebn0_db, p.ser, p.ber, p.theoretical_ber
        );
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or_else(|| {
        eprintln!("seed: {DEFAULT_SEED} (default)");
        DEFAULT_SEED
    });
    let config = ModulationConfig::jt65a(cli.spacing.into());

    match &cli.command {
        Command::Synth { count, snr_min, snr_max, interference, out } => {
            let mut recipe = DatasetRecipe::new(*count, (*snr_min, *snr_max), seed, config);
            if let Some(spec) = interference.spec(seed) {
                recipe = recipe.with_interference(spec);
            }
            recipe.validate()?;
            let mut writer = DatasetWriter::create(out, *count, &recipe.config)?;
            for i in 0..*count {
                writer.write_frame(&recipe.frame(i)?)?;
            }
            writer.finish()?;
            eprintln!("wrote {count} frames to {}", out.display());
        }
        Command::Train { data, epochs, batch, lr, out, history } => {
            let dataset = read_dataset(data)?;
            let cfg = TrainConfig { epochs: *epochs, batch_size: *batch, learning_rate: *lr, seed, shuffle: true };
            cfg.validate()?;
            let (model, hist) = train_with(&dataset, &cfg, |_| {})?;
            for e in &hist.epochs {
                eprintln!("epoch {} loss {:.4} accuracy {:.4} ({:.1} s)", e.epoch + 1, e.loss, e.accuracy, e.seconds);
            }
            save_model(&model, out)?;
            let steps_path = history.clone().unwrap_or_else(|| with_suffix(out, ".steps.csv"));
            report::write_step_history_csv(create(&steps_path)?, &hist)?;
            report::write_epoch_history_csv(create(&with_suffix(out, ".epochs.csv"))?, &hist)?;
            eprintln!("model {} ({} steps)", out.display(), hist.steps.len());
        }
        Command::Eval { model, snr, count, interference, out_dir } => {
            let model = load_checked(model, &config)?;
            let test_seed = derive_seed(seed, TEST_TAG);
            let mut recipe = DatasetRecipe::new(*count, (*snr, *snr), test_seed, config);
            if let Some(spec) = interference.spec(test_seed) {
                recipe = recipe.with_interference(spec);
            }
            recipe.validate()?;
            let eval = evaluate(&model, &recipe)?;
            std::fs::create_dir_all(out_dir)?;
            report::write_confusion_csv(create(&out_dir.join("confusion.csv"))?, &eval.confusion)?;
            report::write_metrics_csv(create(&out_dir.join("metrics.csv"))?, &eval.metrics)?;
            let m = &eval.metrics;
            println!(
                "frames {}  error rate {:.5}  accuracy {:.5}  macro P/R {:.5}/{:.5}  micro P/R {:.5}/{:.5}",
                m.total, m.error_rate, m.accuracy, m.macro_precision, m.macro_recall, m.micro_precision, m.micro_recall
            );
        }
        Command::Curves { model, grid: g, interference } => {
            let model = load_checked(model, &config)?;
            let spec = interference.spec(seed);
            let curve = nn_ser_curve(&model, &grid(g)?, g.trials, seed, &config, spec.as_ref())?;
            report::write_curve_csv(create(&g.out)?, &curve)?;
            print_curve(&curve);
        }
        Command::BaselineCurves { grid: g } => {
            let curve = baseline_ser_curve(&grid(g)?, g.trials, seed, &config)?;
            report::write_curve_csv(create(&g.out)?, &curve)?;
            print_curve(&curve);
        }
        Command::Bench { model, iters } => {
            let model = load_checked(model, &config)?;
            let recipe = DatasetRecipe::new(1, (-10.0, -10.0), seed, config.clone());
            let frame = recipe.frame(0)?;
            let input = Array2::from_shape_fn((1, config.frame_len), |(_, j)| frame.samples[j] as f32);
            let nn = bench_inference(&model, &input, *iters)?;
            let fft = bench_inference(&NoncoherentDetector::new(&config)?, &input, *iters)?;
            println!("network   mean {:.1} us  p95 {:.1} us over {} frames", nn.mean_us, nn.p95_us, nn.iterations);
            println!("fft bank  mean {:.1} us  p95 {:.1} us", fft.mean_us, fft.p95_us);
            println!(
                "symbol period {REALTIME_BUDGET_US} us: {}; reference platforms 34-85 us/sample",
                if nn.realtime { "real time" } else { "NOT real time" }
            );
        }
        Command::Figures { snr, symbol, bins, out_dir } => {
            let mut rng = substream(derive_seed(seed, FIGURE_TAG), 0);
            let clean = synth_tone(*symbol, 0.0, &config)?;
            let noisy = add_awgn(clean, *snr, &mut rng, &config);
            std::fs::create_dir_all(out_dir)?;
            report::write_waveform_csv(create(&out_dir.join("waveform.csv"))?, &noisy.samples, 200)?;
            let spectrum = dft(&noisy, &config)?;
            report::write_esd_csv(create(&out_dir.join("esd.csv"))?, &spectrum, &esd(&spectrum))?;
            report::write_histogram_csv(create(&out_dir.join("histogram.csv"))?, &histogram(&noisy, *bins)?)?;
            eprintln!("figure data in {}", out_dir.display());
        }
    }
    std::io::stdout().flush()?;
    Ok(())
}
