//! Closed-loop decoding: schedule, synthesize, condition, score, decide.
//!
//! Every selection is simulated in its own buffer. The buffer opens with
//! one inter-selection gap of background activity so the high-pass filter
//! has settled before the first stimulus, then carries the selection's
//! stimuli and ends with the last epoch. Each selection draws from seeds
//! derived from (session seed, mode, selection index), so selections can be
//! computed in any order, or in parallel, with identical results.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{self, FilterChain};
use crate::error::{Error, Result};
use crate::paradigm::{self, CommandId, SessionMode, SessionPlan, StimulusEvent, N_COMMANDS};
use crate::seed::{self, STREAM_BACKGROUND, STREAM_ERP, STREAM_SELECTION};
use crate::signal::{self, ChannelLayout, ErpModel, NoiseModel, SignalBuffer};
use crate::swlda::{self, Dataset, SwldaModel, SwldaParams};

/// One six-way decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub intended: Option<CommandId>,
    pub chosen: CommandId,
    /// Mean epoch score per command.
    pub command_scores: [f64; N_COMMANDS],
    pub rounds_used: usize,
    pub tie_flag: bool,
}

impl SelectionResult {
    pub fn is_correct(&self) -> bool {
        self.intended == Some(self.chosen)
    }
}

/// Conditioning parameters between raw signal and features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    pub high_pass_hz: f64,
    pub low_pass_hz: f64,
    pub notch_band_hz: (f64, f64),
    pub decimation: usize,
}

impl Default for Conditioning {
    fn default() -> Self {
        Conditioning {
            high_pass_hz: dsp::HIGH_PASS_HZ,
            low_pass_hz: dsp::LOW_PASS_HZ,
            notch_band_hz: dsp::NOTCH_BAND_HZ,
            decimation: dsp::DECIMATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub noise: NoiseModel,
    pub erp: ErpModel,
    pub plan: SessionPlan,
    pub seed: u64,
    pub layout: ChannelLayout,
    pub conditioning: Conditioning,
    pub swlda: SwldaParams,
}

impl SimulationConfig {
    pub fn new(plan: SessionPlan, seed: u64) -> Self {
        SimulationConfig {
            noise: NoiseModel::default(),
            erp: ErpModel::default(),
            plan,
            seed,
            layout: ChannelLayout::default(),
            conditioning: Conditioning::default(),
            swlda: SwldaParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        self.erp.validate()?;
        self.plan.validate()?;
        self.swlda.validate()?;
        if self.conditioning.decimation == 0 {
            return Err(Error::invalid("decimation must be >= 1"));
        }
        if self.conditioning.decimation > self.epoch_len() {
            return Err(Error::invalid("decimation exceeds the epoch length"));
        }
        self.filter_chain().map(|_| ())
    }

    pub fn filter_chain(&self) -> Result<FilterChain> {
        let c = &self.conditioning;
        FilterChain::new(
            self.plan.sample_rate,
            c.high_pass_hz,
            c.low_pass_hz,
            c.notch_band_hz,
        )
    }

    pub fn epoch_len(&self) -> usize {
        dsp::epoch_len(self.plan.sample_rate, self.plan.epoch_ms)
    }

    /// Channels times whole decimation blocks per epoch (8 x 20 = 160 by default).
    pub fn feature_dim(&self) -> usize {
        self.layout.names().len() * (self.epoch_len() / self.conditioning.decimation)
    }
}

/// Mean score per command and the argmax; exact ties go to the lowest index.
pub fn decide(scored_events: &[(StimulusEvent, f64)]) -> Result<SelectionResult> {
    let mut sums = [0.0; N_COMMANDS];
    let mut counts = [0usize; N_COMMANDS];
    for (e, s) in scored_events {
        sums[e.command.index()] += s;
        counts[e.command.index()] += 1;
    }
    if counts[0] == 0 || counts.iter().any(|&c| c != counts[0]) {
        return Err(Error::invalid(format!(
            "every command needs the same non-zero number of epochs, got {counts:?}"
        )));
    }
    let rounds = counts[0];
    let command_scores = sums.map(|s| s / rounds as f64);
    if command_scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("non-finite epoch score"));
    }
    let mut best = 0;
    for c in 1..N_COMMANDS {
        if command_scores[c] > command_scores[best] {
            best = c;
        }
    }
    let tie_flag = command_scores
        .iter()
        .enumerate()
        .any(|(c, &s)| c != best && s == command_scores[best]);
    Ok(SelectionResult {
        intended: None,
        chosen: CommandId::new(best)?,
        command_scores,
        rounds_used: rounds,
        tie_flag,
    })
}

/// Conditioned features of one simulated selection.
pub struct SelectionData {
    /// Scheduled events as recorded (online events carry no labels).
    pub events: Vec<StimulusEvent>,
    pub features: Vec<Vec<f64>>,
    /// Unfiltered synthetic signal, kept only when requested.
    pub raw: Option<SignalBuffer>,
}

fn mode_tag(mode: SessionMode) -> u64 {
    match mode {
        SessionMode::Calibration => 1,
        SessionMode::Online => 2,
    }
}

/// Simulates one selection in which the user attends `target`.
pub fn simulate_selection(
    config: &SimulationConfig,
    chain: &FilterChain,
    selection_index: usize,
    target: CommandId,
    keep_raw: bool,
) -> Result<SelectionData> {
    let plan = &config.plan;
    let sel_seed = seed::derive_seed(
        config.seed,
        &[
            STREAM_SELECTION,
            mode_tag(plan.mode),
            selection_index as u64,
        ],
    );
    let start = plan.gap_samples();
    let events = paradigm::schedule_selection(plan, selection_index, start, sel_seed);
    let truth: Vec<StimulusEvent> = events
        .iter()
        .map(|e| StimulusEvent {
            is_target: Some(e.command == target),
            ..*e
        })
        .collect();
    let erp_window = dsp::epoch_len(plan.sample_rate, paradigm::EPOCH_MS);
    let len = start
        + plan
            .selection_span_samples()
            .max((plan.events_per_selection() - 1) * plan.soa_samples() + erp_window);
    let background = signal::background_samples(
        &config.layout,
        len,
        plan.sample_rate,
        &config.noise,
        seed::derive_seed(sel_seed, &[STREAM_BACKGROUND]),
    )?;
    let raw = signal::inject_erp(
        &background,
        &truth,
        &config.erp,
        seed::derive_seed(sel_seed, &[STREAM_ERP]),
    )?;
    let filtered = dsp::apply_chain(chain, &raw)?;
    let epochs = dsp::extract_epochs(&filtered, &events, config.epoch_len())?;
    let features = epochs
        .iter()
        .map(|ep| dsp::decimate_epoch(ep, config.conditioning.decimation).map(|fv| fv.values))
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionData {
        events,
        features,
        raw: keep_raw.then_some(raw),
    })
}

fn score_selection(
    model: &SwldaModel,
    data: &SelectionData,
    intended: Option<CommandId>,
) -> Result<SelectionResult> {
    let scored = data
        .events
        .iter()
        .zip(&data.features)
        .map(|(e, f)| Ok((*e, swlda::score(model, f)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut result = decide(&scored)?;
    result.intended = intended;
    Ok(result)
}

/// Everything a calibration session produces.
pub struct CalibrationRun {
    pub dataset: Dataset,
    pub model: SwldaModel,
    pub events: Vec<StimulusEvent>,
    /// The trained model's decisions on its own calibration selections.
    pub selections: Vec<SelectionResult>,
    pub raw: Vec<SignalBuffer>,
}

pub fn run_calibration(config: &SimulationConfig) -> Result<(Dataset, SwldaModel)> {
    let run = run_calibration_session(config, false)?;
    Ok((run.dataset, run.model))
}

pub fn run_calibration_session(
    config: &SimulationConfig,
    keep_raw: bool,
) -> Result<CalibrationRun> {
    config.validate()?;
    let plan = &config.plan;
    if plan.mode != SessionMode::Calibration {
        return Err(Error::invalid("run_calibration needs a calibration plan"));
    }
    let chain = config.filter_chain()?;
    let data = (0..plan.selection_count())
        .into_par_iter()
        .map(|i| {
            let target = plan
                .intended(i)
                .expect("calibration selections carry targets");
            simulate_selection(config, &chain, i, target, keep_raw)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for d in &data {
        for (e, f) in d.events.iter().zip(&d.features) {
            rows.push(f.clone());
            labels.push(if e.is_target == Some(true) { 1.0 } else { -1.0 });
        }
    }
    let dataset = Dataset::new(rows, labels)?;
    let model = swlda::train(&dataset, &config.swlda)?;
    let selections = data
        .iter()
        .enumerate()
        .map(|(i, d)| score_selection(&model, d, plan.intended(i)))
        .collect::<Result<Vec<_>>>()?;
    let mut events = Vec::new();
    let mut raw = Vec::new();
    for d in data {
        events.extend(d.events);
        raw.extend(d.raw);
    }
    Ok(CalibrationRun {
        dataset,
        model,
        events,
        selections,
        raw,
    })
}

pub struct OnlineRun {
    pub selections: Vec<SelectionResult>,
    pub events: Vec<StimulusEvent>,
    pub raw: Vec<SignalBuffer>,
}

pub fn run_online(
    config: &SimulationConfig,
    model: &SwldaModel,
    intents: &[CommandId],
) -> Result<Vec<SelectionResult>> {
    Ok(run_online_session(config, model, intents, false)?.selections)
}

pub fn run_online_session(
    config: &SimulationConfig,
    model: &SwldaModel,
    intents: &[CommandId],
    keep_raw: bool,
) -> Result<OnlineRun> {
    if intents.is_empty() {
        return Err(Error::invalid("online run needs at least one intent"));
    }
    config.validate()?;
    model.validate()?;
    if config.plan.mode != SessionMode::Online {
        return Err(Error::invalid("run_online needs an online plan"));
    }
    if model.feature_dim != config.feature_dim() {
        return Err(Error::invalid(format!(
            "model expects {} features, pipeline produces {}",
            model.feature_dim,
            config.feature_dim()
        )));
    }
    let chain = config.filter_chain()?;
    let per_selection = intents
        .par_iter()
        .enumerate()
        .map(|(i, &intent)| {
            let data = simulate_selection(config, &chain, i, intent, keep_raw)?;
            let result = score_selection(model, &data, Some(intent))?;
            Ok((result, data.events, data.raw))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut run = OnlineRun {
        selections: Vec::with_capacity(intents.len()),
        events: Vec::new(),
        raw: Vec::new(),
    };
    for (r, e, raw) in per_selection {
        run.selections.push(r);
        run.events.extend(e);
        run.raw.extend(raw);
    }
    Ok(run)
}

/// Uniformly random intents, reproducible from `seed`.
pub fn random_intents(count: usize, seed: u64) -> Vec<CommandId> {
    use rand::Rng;
    let mut rng = seed::rng_for(seed, &[seed::STREAM_INTENT]);
    (0..count)
        .map(|_| CommandId::new(rng.random_range(0..N_COMMANDS)).expect("in range"))
        .collect()
}
