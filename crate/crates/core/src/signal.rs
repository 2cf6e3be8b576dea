//! Synthetic multichannel EEG.
//!
//! Background activity is white Gaussian noise shaped to a 1/f^slope power
//! spectrum and scaled to a target RMS, plus a mains sinusoid with random
//! phase per channel. Event-related potentials are Gaussian bumps added
//! after target (and optionally non-target) stimulus onsets.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paradigm::{StimulusEvent, EPOCH_MS};
use crate::seed::{self, STREAM_BACKGROUND, STREAM_ERP};

pub const N_CHANNELS: usize = 8;
pub const DEFAULT_SAMPLE_RATE: f64 = 512.0;

/// Electrode montage over the parietal cortex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelLayout {
    names: Vec<String>,
    reference_label: String,
    ground_label: String,
}

impl ChannelLayout {
    pub fn new(
        names: Vec<String>,
        reference_label: impl Into<String>,
        ground_label: impl Into<String>,
    ) -> Result<Self> {
        if names.len() != N_CHANNELS {
            return Err(Error::invalid(format!(
                "layout needs exactly {N_CHANNELS} channels, got {}",
                names.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if n.trim().is_empty() {
                return Err(Error::invalid(format!("channel {i} has an empty label")));
            }
            if names[..i].contains(n) {
                return Err(Error::invalid(format!("duplicate channel label {n:?}")));
            }
        }
        Ok(ChannelLayout {
            names,
            reference_label: reference_label.into(),
            ground_label: ground_label.into(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn reference_label(&self) -> &str {
        &self.reference_label
    }

    pub fn ground_label(&self) -> &str {
        &self.ground_label
    }
}

impl Default for ChannelLayout {
    fn default() -> Self {
        let names = ["P3", "Pz", "P4", "CP1", "CP2", "CP5", "CP6", "POz"]
            .map(String::from)
            .to_vec();
        ChannelLayout::new(names, "A1", "Fpz").expect("default montage is valid")
    }
}

/// Channels x time samples in microvolts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBuffer")]
pub struct SignalBuffer {
    sample_rate: f64,
    channels: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawBuffer {
    sample_rate: f64,
    channels: Vec<Vec<f64>>,
}

impl TryFrom<RawBuffer> for SignalBuffer {
    type Error = Error;

    fn try_from(raw: RawBuffer) -> Result<Self> {
        SignalBuffer::new(raw.sample_rate, raw.channels)
    }
}

impl SignalBuffer {
    pub fn new(sample_rate: f64, channels: Vec<Vec<f64>>) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate {sample_rate} must be > 0"
            )));
        }
        if let Some(first) = channels.first() {
            if channels.iter().any(|c| c.len() != first.len()) {
                return Err(Error::invalid("channels have unequal lengths"));
            }
        }
        if channels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("buffer contains non-finite samples"));
        }
        Ok(SignalBuffer {
            sample_rate,
            channels,
        })
    }

    pub fn zeros(n_channels: usize, len: usize, sample_rate: f64) -> Result<Self> {
        SignalBuffer::new(sample_rate, vec![vec![0.0; len]; n_channels])
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Root-mean-square of one channel.
    pub fn rms(&self, index: usize) -> f64 {
        let c = &self.channels[index];
        if c.is_empty() {
            return 0.0;
        }
        (c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64).sqrt()
    }

    pub(crate) fn channels_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.channels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// RMS of the broadband background, microvolts.
    pub background_rms: f64,
    /// Exponent of the 1/f^slope power spectrum.
    pub spectral_slope: f64,
    pub mains_freq: f64,
    /// Peak amplitude of the mains sinusoid, microvolts.
    pub mains_amplitude: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            background_rms: 10.0,
            spectral_slope: 1.0,
            mains_freq: 50.0,
            mains_amplitude: 2.0,
        }
    }
}

impl NoiseModel {
    pub fn silent() -> Self {
        NoiseModel {
            background_rms: 0.0,
            mains_amplitude: 0.0,
            ..NoiseModel::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.background_rms.is_finite() && self.background_rms >= 0.0) {
            return Err(Error::invalid("background_rms must be >= 0"));
        }
        if !(self.mains_amplitude.is_finite() && self.mains_amplitude >= 0.0) {
            return Err(Error::invalid("mains_amplitude must be >= 0"));
        }
        if !(0.0..=2.0).contains(&self.spectral_slope) {
            return Err(Error::invalid("spectral_slope must lie in [0, 2]"));
        }
        if !(self.mains_freq.is_finite() && self.mains_freq >= 0.0) {
            return Err(Error::invalid("mains_freq must be >= 0"));
        }
        Ok(())
    }
}

/// Shape of the simulated somatosensory response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErpModel {
    /// Peak amplitude on target epochs, microvolts.
    pub target_amplitude: f64,
    pub latency_mean_ms: f64,
    pub latency_jitter_sd_ms: f64,
    /// Standard deviation of the Gaussian envelope.
    pub width_sd_ms: f64,
    /// Fraction of the target amplitude evoked by non-target stimuli.
    pub nontarget_scale: f64,
    pub spatial_weights: [f64; N_CHANNELS],
}

impl Default for ErpModel {
    fn default() -> Self {
        ErpModel {
            target_amplitude: 5.0,
            latency_mean_ms: 350.0,
            latency_jitter_sd_ms: 20.0,
            width_sd_ms: 60.0,
            nontarget_scale: 0.0,
            // P3 Pz P4 CP1 CP2 CP5 CP6 POz
            spatial_weights: [0.8, 1.0, 0.8, 0.7, 0.7, 0.5, 0.5, 0.9],
        }
    }
}

impl ErpModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_amplitude.is_finite() && self.target_amplitude >= 0.0) {
            return Err(Error::invalid("target_amplitude must be >= 0"));
        }
        if !(self.width_sd_ms.is_finite() && self.width_sd_ms > 0.0) {
            return Err(Error::invalid("width_sd_ms must be > 0"));
        }
        if !(self.latency_mean_ms.is_finite() && self.latency_mean_ms >= 0.0) {
            return Err(Error::invalid("latency_mean_ms must be >= 0"));
        }
        if self.latency_mean_ms + 3.0 * self.width_sd_ms >= EPOCH_MS {
            return Err(Error::invalid(format!(
                "latency_mean_ms + 3*width_sd_ms must stay below {EPOCH_MS} ms"
            )));
        }
        if !(self.latency_jitter_sd_ms.is_finite() && self.latency_jitter_sd_ms >= 0.0) {
            return Err(Error::invalid("latency_jitter_sd_ms must be >= 0"));
        }
        if !(self.nontarget_scale.is_finite() && self.nontarget_scale >= 0.0) {
            return Err(Error::invalid("nontarget_scale must be >= 0"));
        }
        if self
            .spatial_weights
            .iter()
            .any(|w| !(0.0..=1.0).contains(w))
        {
            return Err(Error::invalid("spatial_weights must lie in [0, 1]"));
        }
        if !self.spatial_weights.contains(&1.0) {
            return Err(Error::invalid("at least one spatial weight must equal 1"));
        }
        Ok(())
    }
}

/// Background EEG of `duration` seconds at the default 512 Hz.
pub fn generate_background(
    layout: &ChannelLayout,
    duration: f64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<SignalBuffer> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::invalid(format!("duration {duration} must be > 0")));
    }
    let len = (duration * DEFAULT_SAMPLE_RATE).floor() as usize;
    background_samples(layout, len, DEFAULT_SAMPLE_RATE, noise, seed)
}

/// Background EEG with an explicit length in samples and sample rate.
pub fn background_samples(
    layout: &ChannelLayout,
    len: usize,
    sample_rate: f64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<SignalBuffer> {
    noise.validate()?;
    let mut planner = FftPlanner::new();
    let channels = (0..layout.names().len())
        .map(|ch| {
            let mut rng = seed::rng_for(seed, &[STREAM_BACKGROUND, ch as u64]);
            let mut x = if noise.background_rms > 0.0 && len > 1 {
                pink_noise(
                    &mut planner,
                    &mut rng,
                    len,
                    noise.spectral_slope,
                    noise.background_rms,
                )
            } else {
                vec![0.0; len]
            };
            if noise.mains_amplitude > 0.0 {
                let phase = rng.random::<f64>() * 2.0 * PI;
                let w = 2.0 * PI * noise.mains_freq / sample_rate;
                for (i, v) in x.iter_mut().enumerate() {
                    *v += noise.mains_amplitude * (w * i as f64 + phase).sin();
                }
            }
            x
        })
        .collect();
    SignalBuffer::new(sample_rate, channels)
}

fn pink_noise(
    planner: &mut FftPlanner<f64>,
    rng: &mut impl Rng,
    len: usize,
    slope: f64,
    rms: f64,
) -> Vec<f64> {
    let mut spec: Vec<Complex<f64>> = (0..len)
        .map(|_| Complex::new(rng.sample(StandardNormal), 0.0))
        .collect();
    planner.plan_fft_forward(len).process(&mut spec);
    spec[0] = Complex::new(0.0, 0.0);
    for (k, c) in spec.iter_mut().enumerate().skip(1) {
        // bin index stands in for frequency; the overall scale is fixed below
        let f = k.min(len - k) as f64;
        *c *= f.powf(-slope / 2.0);
    }
    planner.plan_fft_inverse(len).process(&mut spec);
    let mut x: Vec<f64> = spec.iter().map(|c| c.re).collect();
    let actual = (x.iter().map(|v| v * v).sum::<f64>() / len as f64).sqrt();
    if actual > 0.0 {
        let g = rms / actual;
        x.iter_mut().for_each(|v| *v *= g);
    }
    x
}

/// Gaussian deflection peaking at the sample nearest `latency_ms`.
///
/// The peak is placed on the sample grid, so the peak sample carries
/// exactly `target_amplitude`.
pub fn erp_template(
    erp: &ErpModel,
    latency_ms: f64,
    length: usize,
    sample_rate: f64,
) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(Error::invalid("template length must be > 0"));
    }
    if erp.target_amplitude == 0.0 {
        return Ok(vec![0.0; length]);
    }
    let peak = (latency_ms * sample_rate / 1000.0).round();
    let width = erp.width_sd_ms;
    Ok((0..length)
        .map(|i| {
            let dt_ms = (i as f64 - peak) * 1000.0 / sample_rate;
            erp.target_amplitude * (-0.5 * (dt_ms / width).powi(2)).exp()
        })
        .collect())
}

/// Adds an ERP after every event. Targets get the full response, others
/// `nontarget_scale` of it; unknown labels count as non-targets. Latency
/// jitter for an event is drawn from a stream keyed on the event itself
/// (onset and command), so splitting an event list across calls gives the
/// same signal as one call.
pub fn inject_erp(
    buffer: &SignalBuffer,
    events: &[StimulusEvent],
    erp: &ErpModel,
    seed: u64,
) -> Result<SignalBuffer> {
    erp.validate()?;
    if buffer.n_channels() != N_CHANNELS {
        return Err(Error::invalid(format!(
            "ERP injection needs {N_CHANNELS} channels, buffer has {}",
            buffer.n_channels()
        )));
    }
    let sr = buffer.sample_rate();
    let window = crate::dsp::epoch_len(sr, EPOCH_MS);
    for (i, e) in events.iter().enumerate() {
        if e.onset_sample + window > buffer.len() {
            return Err(Error::OutOfRange(format!(
                "event {i} (command {}, onset sample {}) needs {window} samples but buffer ends at {}",
                e.command,
                e.onset_sample,
                buffer.len()
            )));
        }
    }
    let mut out = buffer.clone();
    if erp.target_amplitude == 0.0 {
        return Ok(out);
    }
    for e in events {
        let scale = if e.is_target == Some(true) {
            1.0
        } else {
            erp.nontarget_scale
        };
        if scale == 0.0 {
            continue;
        }
        let mut rng = seed::rng_for(
            seed,
            &[STREAM_ERP, e.onset_sample as u64, e.command.index() as u64],
        );
        let jitter: f64 = rng.sample(StandardNormal);
        let latency = erp.latency_mean_ms + erp.latency_jitter_sd_ms * jitter;
        let template = erp_template(erp, latency, window, sr)?;
        for (ch, row) in out.channels_mut().iter_mut().enumerate() {
            let w = scale * erp.spatial_weights[ch];
            if w == 0.0 {
                continue;
            }
            for (dst, t) in row[e.onset_sample..e.onset_sample + window]
                .iter_mut()
                .zip(&template)
            {
                *dst += w * t;
            }
        }
    }
    Ok(out)
}
