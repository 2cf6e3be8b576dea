//! Tactile oddball stimulation schedule.
//!
//! Each round stimulates all six palm positions once in random order.
//! Stimuli last 100 ms with a 300 ms inter-stimulus interval, so onsets
//! are one SOA (400 ms, rounded to 205 samples at 512 Hz) apart. A
//! selection is `rounds_per_selection` consecutive rounds.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, STREAM_ROUND};

pub const N_COMMANDS: usize = 6;
pub const STIMULUS_MS: f64 = 100.0;
pub const ISI_MS: f64 = 300.0;
pub const ROUNDS_ONLINE: usize = 3;
pub const ROUNDS_CALIBRATION: usize = 15;
pub const INTER_SELECTION_GAP_MS: f64 = 2000.0;
/// Post-stimulus window analysed for every event.
pub const EPOCH_MS: f64 = 800.0;

/// One of the six stimulated positions, which doubles as a robot command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct CommandId(u8);

impl CommandId {
    pub fn new(index: usize) -> Result<Self> {
        if index < N_COMMANDS {
            Ok(CommandId(index as u8))
        } else {
            Err(Error::invalid(format!(
                "command index {index} outside 0..{N_COMMANDS}"
            )))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = CommandId> {
        (0..N_COMMANDS as u8).map(CommandId)
    }
}

impl TryFrom<u8> for CommandId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        CommandId::new(v as usize)
    }
}

impl From<CommandId> for u8 {
    fn from(c: CommandId) -> u8 {
        c.0
    }
}

impl std::fmt::Display for CommandId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One tactile stimulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimulusEvent {
    pub command: CommandId,
    pub onset_sample: usize,
    pub round_index: usize,
    /// Ground truth; `None` when the schedule does not know the attended command.
    pub is_target: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionMode {
    Calibration,
    Online,
}

/// What the selections of a session are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selections {
    /// Calibration: the command the user attends in each selection.
    Intended(Vec<CommandId>),
    /// Online: only the number of selections is known to the schedule.
    Count(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub mode: SessionMode,
    pub rounds_per_selection: usize,
    pub selections: Selections,
    pub stimulus_ms: f64,
    pub isi_ms: f64,
    pub inter_selection_gap_ms: f64,
    pub epoch_ms: f64,
    pub sample_rate: f64,
}

impl SessionPlan {
    /// Calibration run: one selection per command in a 0..5 sweep, 15 rounds each.
    pub fn calibration() -> Self {
        SessionPlan {
            mode: SessionMode::Calibration,
            rounds_per_selection: ROUNDS_CALIBRATION,
            selections: Selections::Intended(CommandId::all().collect()),
            stimulus_ms: STIMULUS_MS,
            isi_ms: ISI_MS,
            inter_selection_gap_ms: INTER_SELECTION_GAP_MS,
            epoch_ms: EPOCH_MS,
            sample_rate: crate::signal::DEFAULT_SAMPLE_RATE,
        }
    }

    pub fn online(count: usize) -> Self {
        SessionPlan {
            mode: SessionMode::Online,
            rounds_per_selection: ROUNDS_ONLINE,
            selections: Selections::Count(count),
            ..SessionPlan::calibration()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds_per_selection < 1 {
            return Err(Error::invalid("rounds_per_selection must be at least 1"));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::invalid("sample_rate must be positive"));
        }
        for (name, v) in [
            ("stimulus_ms", self.stimulus_ms),
            ("isi_ms", self.isi_ms),
            ("inter_selection_gap_ms", self.inter_selection_gap_ms),
            ("epoch_ms", self.epoch_ms),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0")));
            }
        }
        if self.soa_samples() == 0 {
            return Err(Error::invalid(
                "stimulus onset asynchrony rounds to zero samples",
            ));
        }
        Ok(())
    }

    pub fn selection_count(&self) -> usize {
        match &self.selections {
            Selections::Intended(v) => v.len(),
            Selections::Count(n) => *n,
        }
    }

    pub fn intended(&self, selection_index: usize) -> Option<CommandId> {
        match &self.selections {
            Selections::Intended(v) => v.get(selection_index).copied(),
            Selections::Count(_) => None,
        }
    }

    pub fn soa_ms(&self) -> f64 {
        self.stimulus_ms + self.isi_ms
    }

    /// Onset-to-onset spacing on the sample grid: round(0.4 s * 512 Hz) = 205.
    pub fn soa_samples(&self) -> usize {
        (self.soa_ms() * self.sample_rate / 1000.0).round() as usize
    }

    pub fn events_per_selection(&self) -> usize {
        self.rounds_per_selection * N_COMMANDS
    }

    /// Samples from the first onset of a selection to the end of its last epoch.
    pub fn selection_span_samples(&self) -> usize {
        (self.events_per_selection() - 1) * self.soa_samples()
            + crate::dsp::epoch_len(self.sample_rate, self.epoch_ms)
    }

    pub fn gap_samples(&self) -> usize {
        (self.inter_selection_gap_ms * self.sample_rate / 1000.0).round() as usize
    }
}

/// Random permutation of the six commands whose first element differs from
/// `previous_last`, so no position is stimulated twice in a row across rounds.
pub fn build_round(seed: u64, previous_last: Option<CommandId>) -> [CommandId; N_COMMANDS] {
    let mut rng = seed::rng_for(seed, &[]);
    let mut order = [0u8, 1, 2, 3, 4, 5].map(CommandId);
    order.shuffle(&mut rng);
    if previous_last == Some(order[0]) {
        let j = rng.random_range(1..N_COMMANDS);
        order.swap(0, j);
    }
    order
}

/// Stimulus events of one selection starting at `start_sample`.
pub fn schedule_selection(
    plan: &SessionPlan,
    selection_index: usize,
    start_sample: usize,
    seed: u64,
) -> Vec<StimulusEvent> {
    let soa = plan.soa_samples();
    let intended = plan.intended(selection_index);
    let mut events = Vec::with_capacity(plan.events_per_selection());
    let mut previous_last = None;
    for round in 0..plan.rounds_per_selection {
        let order = build_round(
            seed::derive_seed(seed, &[STREAM_ROUND, selection_index as u64, round as u64]),
            previous_last,
        );
        for &command in &order {
            let onset_sample = start_sample + events.len() * soa;
            events.push(StimulusEvent {
                command,
                onset_sample,
                round_index: round,
                is_target: intended.map(|t| t == command),
            });
        }
        previous_last = Some(order[N_COMMANDS - 1]);
    }
    events
}

/// Scheduled time in seconds: each selection runs to the end of the epoch
/// following its last onset, and selections are separated by the gap.
pub fn session_duration(plan: &SessionPlan) -> f64 {
    let n = plan.selection_count();
    if n == 0 {
        return 0.0;
    }
    let per_selection = ((plan.events_per_selection() - 1) * plan.soa_samples()) as f64
        / plan.sample_rate
        + plan.epoch_ms / 1000.0;
    n as f64 * per_selection + (n - 1) as f64 * plan.inter_selection_gap_ms / 1000.0
}
