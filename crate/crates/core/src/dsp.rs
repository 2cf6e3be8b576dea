//! Signal conditioning: causal band-pass and mains notch, epoch extraction,
//! block-mean decimation.
//!
//! The chain is a cascade of biquads designed by the bilinear transform:
//! a 2nd-order Butterworth high-pass at 0.1 Hz, an 8th-order Butterworth
//! low-pass at 60 Hz and a notch at the centre of the 48-52 Hz rejection
//! band whose -3 dB edges sit on the band limits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paradigm::StimulusEvent;
use crate::signal::SignalBuffer;

pub const HIGH_PASS_HZ: f64 = 0.1;
pub const LOW_PASS_HZ: f64 = 60.0;
pub const NOTCH_BAND_HZ: (f64, f64) = (48.0, 52.0);
pub const DECIMATION: usize = 20;
pub const HIGH_PASS_ORDER: usize = 2;
pub const LOW_PASS_ORDER: usize = 8;

/// Normalized second-order section, `a0 == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    fn normalized(b: [f64; 3], a: [f64; 3]) -> Self {
        Biquad {
            b0: b[0] / a[0],
            b1: b[1] / a[0],
            b2: b[2] / a[0],
            a1: a[1] / a[0],
            a2: a[2] / a[0],
        }
    }

    pub fn low_pass(sample_rate: f64, cutoff: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff / sample_rate;
        let (s, c) = w0.sin_cos();
        let alpha = s / (2.0 * q);
        Biquad::normalized(
            [(1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0],
            [1.0 + alpha, -2.0 * c, 1.0 - alpha],
        )
    }

    pub fn high_pass(sample_rate: f64, cutoff: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff / sample_rate;
        let (s, c) = w0.sin_cos();
        let alpha = s / (2.0 * q);
        Biquad::normalized(
            [(1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0],
            [1.0 + alpha, -2.0 * c, 1.0 - alpha],
        )
    }

    /// Notch with a zero at `center` and a digital -3 dB bandwidth of `bandwidth` Hz.
    pub fn notch(sample_rate: f64, center: f64, bandwidth: f64) -> Self {
        let w0 = 2.0 * PI * center / sample_rate;
        let c = w0.cos();
        let alpha = (PI * bandwidth / sample_rate).tan();
        Biquad::normalized([1.0, -2.0 * c, 1.0], [1.0 + alpha, -2.0 * c, 1.0 - alpha])
    }

    /// Magnitude response at `freq` Hz.
    pub fn gain(&self, freq: f64, sample_rate: f64) -> f64 {
        let w = 2.0 * PI * freq / sample_rate;
        let z1 = (w.cos(), -w.sin());
        let z2 = ((2.0 * w).cos(), -(2.0 * w).sin());
        let num = (
            self.b0 + self.b1 * z1.0 + self.b2 * z2.0,
            self.b1 * z1.1 + self.b2 * z2.1,
        );
        let den = (
            1.0 + self.a1 * z1.0 + self.a2 * z2.0,
            self.a1 * z1.1 + self.a2 * z2.1,
        );
        num.0.hypot(num.1) / den.0.hypot(den.1)
    }

    // transposed direct form II, state starts at rest
    fn run(&self, x: &mut [f64]) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b0 * input + s1;
            s1 = self.b1 * input - self.a1 * y + s2;
            s2 = self.b2 * input - self.a2 * y;
            *v = y;
        }
    }
}

/// Butterworth section Q values for an even `order`.
fn butterworth_qs(order: usize) -> impl Iterator<Item = f64> {
    (0..order / 2).map(move |k| {
        let theta = (2 * k + 1) as f64 * PI / (2 * order) as f64;
        1.0 / (2.0 * theta.cos())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterChain {
    pub high_pass_cutoff: f64,
    pub low_pass_cutoff: f64,
    pub notch_band: (f64, f64),
    pub sample_rate: f64,
    sections: Vec<Biquad>,
}

impl FilterChain {
    pub fn new(
        sample_rate: f64,
        high_pass_cutoff: f64,
        low_pass_cutoff: f64,
        notch_band: (f64, f64),
    ) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate {sample_rate} must be > 0"
            )));
        }
        if !(0.0 < high_pass_cutoff
            && high_pass_cutoff < low_pass_cutoff
            && low_pass_cutoff < sample_rate / 2.0)
        {
            return Err(Error::invalid(format!(
                "need 0 < high-pass ({high_pass_cutoff}) < low-pass ({low_pass_cutoff}) < Nyquist ({})",
                sample_rate / 2.0
            )));
        }
        let (lo, hi) = notch_band;
        if !(high_pass_cutoff < lo && lo < hi && hi < low_pass_cutoff) {
            return Err(Error::invalid(format!(
                "notch band ({lo}, {hi}) must be ordered and inside the pass band"
            )));
        }
        let mut sections: Vec<Biquad> = butterworth_qs(HIGH_PASS_ORDER)
            .map(|q| Biquad::high_pass(sample_rate, high_pass_cutoff, q))
            .collect();
        sections.extend(
            butterworth_qs(LOW_PASS_ORDER)
                .map(|q| Biquad::low_pass(sample_rate, low_pass_cutoff, q)),
        );
        sections.push(Biquad::notch(sample_rate, (lo + hi) / 2.0, hi - lo));
        Ok(FilterChain {
            high_pass_cutoff,
            low_pass_cutoff,
            notch_band,
            sample_rate,
            sections,
        })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Magnitude response of the whole cascade.
    pub fn gain(&self, freq: f64) -> f64 {
        self.sections
            .iter()
            .map(|s| s.gain(freq, self.sample_rate))
            .product()
    }

    /// Filters one channel in place from a resting state.
    pub fn filter_in_place(&self, x: &mut [f64]) {
        for s in &self.sections {
            s.run(x);
        }
    }
}

/// The standard 0.1-60 Hz band-pass with a 48-52 Hz notch.
pub fn design_chain(sample_rate: f64) -> Result<FilterChain> {
    if !(sample_rate >= 256.0) {
        return Err(Error::invalid(format!(
            "sample rate {sample_rate} Hz is too low for the {LOW_PASS_HZ} Hz low-pass (need >= 256)"
        )));
    }
    FilterChain::new(sample_rate, HIGH_PASS_HZ, LOW_PASS_HZ, NOTCH_BAND_HZ)
}

pub fn apply_chain(chain: &FilterChain, buffer: &SignalBuffer) -> Result<SignalBuffer> {
    if chain.sample_rate != buffer.sample_rate() {
        return Err(Error::invalid(format!(
            "buffer sampled at {} Hz but filter designed for {} Hz",
            buffer.sample_rate(),
            chain.sample_rate
        )));
    }
    let channels = buffer
        .channels()
        .iter()
        .map(|c| {
            let mut x = c.clone();
            chain.filter_in_place(&mut x);
            x
        })
        .collect();
    SignalBuffer::new(buffer.sample_rate(), channels)
}

/// Samples covering `epoch_ms`, rounded up: 800 ms at 512 Hz is 410.
pub fn epoch_len(sample_rate: f64, epoch_ms: f64) -> usize {
    let exact = epoch_ms * sample_rate / 1000.0;
    // guard against 409.6000000001-style representation error
    (exact - 1e-9).ceil().max(0.0) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub samples: Vec<Vec<f64>>,
    pub event: StimulusEvent,
}

impl Epoch {
    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Target,
    NonTarget,
    Unknown,
}

impl From<Option<bool>> for Label {
    fn from(v: Option<bool>) -> Self {
        match v {
            Some(true) => Label::Target,
            Some(false) => Label::NonTarget,
            None => Label::Unknown,
        }
    }
}

/// Channel-major block means: channel 0 blocks 0..b, then channel 1, ...
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Label,
}

/// Cuts `[onset, onset + epoch_len)` for every event. Windows may overlap.
pub fn extract_epochs(
    buffer: &SignalBuffer,
    events: &[StimulusEvent],
    epoch_len: usize,
) -> Result<Vec<Epoch>> {
    events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let end = e.onset_sample + epoch_len;
            if end > buffer.len() {
                return Err(Error::OutOfRange(format!(
                    "event {i} (command {}, onset sample {}) window ends at {end}, buffer has {} samples",
                    e.command,
                    e.onset_sample,
                    buffer.len()
                )));
            }
            Ok(Epoch {
                samples: buffer
                    .channels()
                    .iter()
                    .map(|c| c[e.onset_sample..end].to_vec())
                    .collect(),
                event: *e,
            })
        })
        .collect()
}

/// Averages complete blocks of `factor` samples per channel; a trailing
/// partial block is dropped (410 samples / 20 leaves 10 unused).
pub fn decimate_epoch(epoch: &Epoch, factor: usize) -> Result<FeatureVector> {
    if factor == 0 {
        return Err(Error::invalid("decimation factor must be >= 1"));
    }
    if factor > epoch.len() {
        return Err(Error::invalid(format!(
            "decimation factor {factor} exceeds epoch length {}",
            epoch.len()
        )));
    }
    let blocks = epoch.len() / factor;
    let values = epoch
        .samples
        .iter()
        .flat_map(|c| {
            c.chunks_exact(factor)
                .take(blocks)
                .map(|b| b.iter().sum::<f64>() / factor as f64)
        })
        .collect();
    Ok(FeatureVector {
        values,
        label: epoch.event.is_target.into(),
    })
}
