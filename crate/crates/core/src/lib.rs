//! 64-ary FSK (JT65A-style) symbol synthesis and demodulation.
//!
//! The crate generates labelled symbol intervals in additive noise,
//! demodulates them with a dense neural network trained from scratch and
//! with a classical non-coherent FFT-bank detector, and measures symbol and
//! bit error rates against the non-coherent reference curve.
//!
//! Runnable walkthroughs for each capability live in `examples/`; the `mfsk`
//! binary wraps the whole pipeline behind subcommands.

pub mod baseline;
pub mod cli;
pub mod dataset_file;
pub mod dsp;
pub mod error;
pub mod evaluation;
pub mod modem;
pub mod nn;
pub mod report;
pub mod synthesis;
pub mod training;

pub use error::{Error, Result};
pub use modem::{ModulationConfig, SpacingMode};
pub use synthesis::{Dataset, DatasetRecipe, InterferenceSpec, SignalFrame};
