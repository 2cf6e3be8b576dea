//! TOML configuration with one flat key per tunable.
//!
//! Missing keys take their defaults, unknown keys are rejected, and every
//! validation error names the key at fault.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decoder::{Conditioning, SimulationConfig};
use crate::error::{Error, Result};
use crate::paradigm::{CommandId, Selections, SessionMode, SessionPlan, N_COMMANDS};
use crate::signal::{ChannelLayout, ErpModel, NoiseModel, N_CHANNELS};
use crate::swlda::SwldaParams;
use crate::{dsp, paradigm, signal, swlda};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub sample_rate: f64,
    pub hp: f64,
    pub lp: f64,
    pub notch: [f64; 2],
    pub epoch_ms: f64,
    pub decimation: usize,
    pub stimulus_ms: f64,
    pub isi_ms: f64,
    pub inter_selection_gap_ms: f64,
    pub rounds_online: usize,
    pub rounds_calibration: usize,
    pub n_commands: usize,
    /// Attended command of each calibration selection.
    pub calibration_targets: Vec<usize>,
    pub p_enter: f64,
    pub p_remove: f64,
    pub max_features: usize,
    pub background_rms: f64,
    pub spectral_slope: f64,
    pub mains_freq: f64,
    pub mains_amplitude: f64,
    pub erp_amplitude: f64,
    pub erp_latency_ms: f64,
    pub erp_jitter_ms: f64,
    pub erp_width_ms: f64,
    pub nontarget_scale: f64,
    pub spatial_weights: Vec<f64>,
    pub channels: Vec<String>,
    pub reference: String,
    pub ground: String,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        let noise = NoiseModel::default();
        let erp = ErpModel::default();
        let layout = ChannelLayout::default();
        Config {
            sample_rate: signal::DEFAULT_SAMPLE_RATE,
            hp: dsp::HIGH_PASS_HZ,
            lp: dsp::LOW_PASS_HZ,
            notch: [dsp::NOTCH_BAND_HZ.0, dsp::NOTCH_BAND_HZ.1],
            epoch_ms: paradigm::EPOCH_MS,
            decimation: dsp::DECIMATION,
            stimulus_ms: paradigm::STIMULUS_MS,
            isi_ms: paradigm::ISI_MS,
            inter_selection_gap_ms: paradigm::INTER_SELECTION_GAP_MS,
            rounds_online: paradigm::ROUNDS_ONLINE,
            rounds_calibration: paradigm::ROUNDS_CALIBRATION,
            n_commands: N_COMMANDS,
            calibration_targets: (0..N_COMMANDS).collect(),
            p_enter: swlda::P_ENTER,
            p_remove: swlda::P_REMOVE,
            max_features: swlda::MAX_FEATURES,
            background_rms: noise.background_rms,
            spectral_slope: noise.spectral_slope,
            mains_freq: noise.mains_freq,
            mains_amplitude: noise.mains_amplitude,
            erp_amplitude: erp.target_amplitude,
            erp_latency_ms: erp.latency_mean_ms,
            erp_jitter_ms: erp.latency_jitter_sd_ms,
            erp_width_ms: erp.width_sd_ms,
            nontarget_scale: erp.nontarget_scale,
            spatial_weights: erp.spatial_weights.to_vec(),
            channels: layout.names().to_vec(),
            reference: layout.reference_label().to_string(),
            ground: layout.ground_label().to_string(),
            seed: 1,
        }
    }
}

fn check(ok: bool, key: &str, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(key, msg))
    }
}

fn keyed<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidArgument(m) => Error::config(key, m),
        other => other,
    })
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
        let known = Config::known_keys();
        if let Some(k) = table.keys().find(|k| !known.contains(k)) {
            return Err(Error::config(k.clone(), "unknown key"));
        }
        let cfg: Config = table.clone().try_into().map_err(|e: toml::de::Error| {
            // find the offending key by decoding each one on its own
            let key = table
                .iter()
                .find(|(k, v)| {
                    let mut single = toml::Table::new();
                    single.insert((*k).clone(), (*v).clone());
                    single.try_into::<Config>().is_err()
                })
                .map(|(k, _)| k.clone())
                .unwrap_or_else(|| "<file>".into());
            Error::config(key, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn known_keys() -> Vec<String> {
        match toml::Table::try_from(Config::default()) {
            Ok(t) => t.keys().cloned().collect(),
            Err(_) => Vec::new(),
        }
    }

    /// Applies `key=value`, where `value` is a TOML value (`0.5`, `[48, 52]`, `"Pz"`).
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
        let key = key.trim();
        let mut table = toml::Table::try_from(&*self).expect("config serializes");
        if !table.contains_key(key) {
            return Err(Error::config(key, "unknown key"));
        }
        let value = value.trim();
        let parsed: toml::Value = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            // bare words are taken as strings
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        // integers are accepted where floats are expected
        let parsed = match (&table[key], parsed) {
            (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (_, v) => v,
        };
        table.insert(key.to_string(), parsed);
        let next: Config = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(key, e.message().to_string()))?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.sample_rate.is_finite() && self.sample_rate >= 256.0,
            "sample_rate",
            "must be >= 256 Hz",
        )?;
        check(
            self.hp > 0.0 && self.hp < self.lp,
            "hp",
            "must satisfy 0 < hp < lp",
        )?;
        check(
            self.lp < self.sample_rate / 2.0,
            "lp",
            "must be below Nyquist",
        )?;
        let [lo, hi] = self.notch;
        check(
            self.hp < lo && lo < hi && hi < self.lp,
            "notch",
            "must be [low, high] with hp < low < high < lp",
        )?;
        check(
            self.epoch_ms.is_finite() && self.epoch_ms > 0.0,
            "epoch_ms",
            "must be > 0",
        )?;
        let epoch_len = dsp::epoch_len(self.sample_rate, self.epoch_ms);
        check(
            self.decimation >= 1 && self.decimation <= epoch_len,
            "decimation",
            "must be between 1 and the epoch length in samples",
        )?;
        check(
            self.stimulus_ms.is_finite() && self.stimulus_ms >= 0.0,
            "stimulus_ms",
            "must be >= 0",
        )?;
        check(
            self.isi_ms.is_finite() && self.isi_ms >= 0.0,
            "isi_ms",
            "must be >= 0",
        )?;
        check(
            ((self.stimulus_ms + self.isi_ms) * self.sample_rate / 1000.0).round() >= 1.0,
            "isi_ms",
            "stimulus onset asynchrony must be at least one sample",
        )?;
        check(
            self.inter_selection_gap_ms.is_finite() && self.inter_selection_gap_ms >= 0.0,
            "inter_selection_gap_ms",
            "must be >= 0",
        )?;
        check(self.rounds_online >= 1, "rounds_online", "must be >= 1")?;
        check(
            self.rounds_calibration >= 1,
            "rounds_calibration",
            "must be >= 1",
        )?;
        check(
            self.n_commands == N_COMMANDS,
            "n_commands",
            "the paradigm has exactly 6 commands",
        )?;
        check(
            self.calibration_targets.iter().all(|&t| t < N_COMMANDS),
            "calibration_targets",
            "targets must be command indices 0..5",
        )?;
        check(
            !self.calibration_targets.is_empty(),
            "calibration_targets",
            "at least one calibration selection is needed",
        )?;
        check(
            self.p_enter > 0.0 && self.p_enter < 1.0,
            "p_enter",
            "must lie in (0, 1)",
        )?;
        check(
            self.p_remove >= self.p_enter && self.p_remove < 1.0,
            "p_remove",
            "must satisfy p_enter <= p_remove < 1",
        )?;
        check(self.max_features >= 1, "max_features", "must be >= 1")?;
        check(
            self.background_rms.is_finite() && self.background_rms >= 0.0,
            "background_rms",
            "must be >= 0",
        )?;
        check(
            (0.0..=2.0).contains(&self.spectral_slope),
            "spectral_slope",
            "must lie in [0, 2]",
        )?;
        check(
            self.mains_amplitude >= 0.0,
            "mains_amplitude",
            "must be >= 0",
        )?;
        check(
            self.erp_amplitude.is_finite() && self.erp_amplitude >= 0.0,
            "erp_amplitude",
            "must be >= 0",
        )?;
        check(
            self.erp_width_ms.is_finite() && self.erp_width_ms > 0.0,
            "erp_width_ms",
            "must be > 0",
        )?;
        check(
            self.erp_latency_ms >= 0.0
                && self.erp_latency_ms + 3.0 * self.erp_width_ms < paradigm::EPOCH_MS,
            "erp_latency_ms",
            "erp_latency_ms + 3 * erp_width_ms must stay below 800 ms",
        )?;
        check(self.erp_jitter_ms >= 0.0, "erp_jitter_ms", "must be >= 0")?;
        check(
            self.nontarget_scale >= 0.0,
            "nontarget_scale",
            "must be >= 0",
        )?;
        check(
            self.spatial_weights.len() == N_CHANNELS
                && self.spatial_weights.iter().all(|w| (0.0..=1.0).contains(w))
                && self.spatial_weights.contains(&1.0),
            "spatial_weights",
            "need 8 weights in [0, 1] with at least one equal to 1",
        )?;
        check(
            self.seed <= i64::MAX as u64,
            "seed",
            "must fit in a signed 64-bit integer",
        )?;
        keyed(
            "channels",
            ChannelLayout::new(
                self.channels.clone(),
                self.reference.clone(),
                self.ground.clone(),
            ),
        )?;
        Ok(())
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            background_rms: self.background_rms,
            spectral_slope: self.spectral_slope,
            mains_freq: self.mains_freq,
            mains_amplitude: self.mains_amplitude,
        }
    }

    pub fn erp(&self) -> ErpModel {
        let mut spatial_weights = [0.0; N_CHANNELS];
        for (dst, src) in spatial_weights.iter_mut().zip(&self.spatial_weights) {
            *dst = *src;
        }
        ErpModel {
            target_amplitude: self.erp_amplitude,
            latency_mean_ms: self.erp_latency_ms,
            latency_jitter_sd_ms: self.erp_jitter_ms,
            width_sd_ms: self.erp_width_ms,
            nontarget_scale: self.nontarget_scale,
            spatial_weights,
        }
    }

    pub fn plan(&self, mode: SessionMode, online_count: usize) -> SessionPlan {
        let (rounds, selections) = match mode {
            SessionMode::Calibration => (
                self.rounds_calibration,
                Selections::Intended(
                    self.calibration_targets
                        .iter()
                        .map(|&t| CommandId::new(t).expect("validated"))
                        .collect(),
                ),
            ),
            SessionMode::Online => (self.rounds_online, Selections::Count(online_count)),
        };
        SessionPlan {
            mode,
            rounds_per_selection: rounds,
            selections,
            stimulus_ms: self.stimulus_ms,
            isi_ms: self.isi_ms,
            inter_selection_gap_ms: self.inter_selection_gap_ms,
            epoch_ms: self.epoch_ms,
            sample_rate: self.sample_rate,
        }
    }

    pub fn simulation(&self, mode: SessionMode, online_count: usize) -> SimulationConfig {
        SimulationConfig {
            noise: self.noise(),
            erp: self.erp(),
            plan: self.plan(mode, online_count),
            seed: self.seed,
            layout: ChannelLayout::new(
                self.channels.clone(),
                self.reference.clone(),
                self.ground.clone(),
            )
            .expect("validated"),
            conditioning: Conditioning {
                high_pass_hz: self.hp,
                low_pass_hz: self.lp,
                notch_band_hz: (self.notch[0], self.notch[1]),
                decimation: self.decimation,
            },
            swlda: SwldaParams {
                p_enter: self.p_enter,
                p_remove: self.p_remove,
                max_features: self.max_features,
            },
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Config::from_toml_str(&text)
}
