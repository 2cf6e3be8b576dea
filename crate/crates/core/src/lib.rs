//! Simulator of a six-command tactile P300 brain-computer interface.
//!
//! The pipeline mirrors an online oddball BCI driven by contact-less palm
//! stimulation: synthetic 8-channel parietal EEG at 512 Hz
//! ([`signal`]), a 0.1-60 Hz band-pass with a 48-52 Hz notch, 0-800 ms
//! epochs block-averaged by 20 ([`dsp`]), randomized rounds of 100 ms
//! stimuli with 300 ms gaps ([`paradigm`]), a stepwise LDA classifier
//! ([`swlda`]) and six-way decisions averaged over 3 rounds online or 15
//! during calibration ([`decoder`]). Decisions drive a grid robot arm
//! through a six-step pick-and-move task ([`robot`]) and are scored
//! against the 1/6 chance level ([`eval`]). Sessions are recorded and
//! replayable ([`session`]).
//!
//! ```no_run
//! use tactile_bci::config::Config;
//! use tactile_bci::decoder::{run_calibration, run_online};
//! use tactile_bci::paradigm::{CommandId, SessionMode};
//!
//! let cfg = Config::default();
//! let (_, model) = run_calibration(&cfg.simulation(SessionMode::Calibration, 0))?;
//! let intents = vec![CommandId::new(4)?];
//! let results = run_online(&cfg.simulation(SessionMode::Online, 1), &model, &intents)?;
//! println!("decoded {}", results[0].chosen);
//! # Ok::<(), tactile_bci::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod decoder;
pub mod dsp;
mod error;
pub mod eval;
pub mod paradigm;
pub mod robot;
pub mod seed;
pub mod session;
pub mod signal;
pub mod sweep;
pub mod swlda;

pub use error::{Error, Result};
