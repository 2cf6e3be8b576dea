//! Accuracy over an ERP-amplitude x rounds-per-selection grid.

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::decoder::{self, random_intents};
use crate::error::Result;
use crate::eval;
use crate::paradigm::SessionMode;
use crate::seed::derive_seed;

pub const SWEEP_ROUNDS: [usize; 3] = [1, 3, 15];
pub const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub amplitude: f64,
    pub rounds: usize,
    pub selections: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// One calibration per amplitude, then `selections` online selections per
/// rounds value. Intents are random but fixed per (seed, amplitude, rounds).
pub fn run_sweep(
    base: &Config,
    amplitudes: &[f64],
    rounds: &[usize],
    selections: usize,
) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::with_capacity(amplitudes.len() * rounds.len());
    for (ai, &amplitude) in amplitudes.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.erp_amplitude = amplitude;
        cfg.validate()?;
        let (_, model) = decoder::run_calibration(&cfg.simulation(SessionMode::Calibration, 0))?;
        for &r in rounds {
            let mut online = cfg.clone();
            online.rounds_online = r;
            online.validate()?;
            let intents = random_intents(selections, derive_seed(cfg.seed, &[ai as u64, r as u64]));
            let results = decoder::run_online(
                &online.simulation(SessionMode::Online, selections),
                &model,
                &intents,
            )?;
            let correct = results.iter().filter(|s| s.is_correct()).count();
            let (ci_low, ci_high) =
                eval::clopper_pearson(correct as u64, selections as u64, CI_LEVEL)?;
            cells.push(SweepCell {
                amplitude,
                rounds: r,
                selections,
                correct,
                accuracy: correct as f64 / selections as f64,
                ci_low,
                ci_high,
            });
        }
    }
    Ok(cells)
}

/// Tab-separated table with a header row.
pub fn render_table(cells: &[SweepCell]) -> String {
    let mut s =
        String::from("amplitude_uv\trounds\tselections\tcorrect\taccuracy\tci95_low\tci95_high\n");
    for c in cells {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\n",
            c.amplitude, c.rounds, c.selections, c.correct, c.accuracy, c.ci_low, c.ci_high
        ));
    }
    s
}
