use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::recurrence::{DEFAULT_EPSILON, DEFAULT_INCREMENT};

/// Engine configuration. Defaults reproduce the reference sonification
/// settings: scaling 500, buffers 202/256, 100 partials, both oscillators
/// at 80 Hz, path gains 0.3 and 0.075.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineParams {
    pub sample_value_scaling: f64,
    pub buffer_size_p1: usize,
    pub buffer_size_p2: usize,
    pub num_partials: usize,
    pub oscillator_hz: f64,
    pub fundamental_hz: f64,
    pub gain_p1: f64,
    pub gain_p2: f64,
    pub max_instances: usize,
    pub sample_rate_hz: f64,
    pub seconds_per_generation: f64,
    /// Fraction of recurrent indices let through to the partial bank.
    pub recurrence_keep: f64,
    pub recurrence_epsilon: f64,
    pub amplitude_increment: f64,
    pub throttle_seed: u64,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            sample_value_scaling: 500.0,
            buffer_size_p1: 202,
            buffer_size_p2: 256,
            num_partials: 100,
            oscillator_hz: 80.0,
            fundamental_hz: 80.0,
            gain_p1: 0.3,
            gain_p2: 0.075,
            max_instances: 100,
            sample_rate_hz: 48_000.0,
            seconds_per_generation: 0.5,
            recurrence_keep: 1.0,
            recurrence_epsilon: DEFAULT_EPSILON,
            amplitude_increment: DEFAULT_INCREMENT,
            throttle_seed: 0,
        }
    }
}

/// Parameters that may change while a run is sounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiveParam {
    SampleValueScaling,
    OscillatorHz,
    FundamentalHz,
    GainP1,
    GainP2,
}

impl LiveParam {
    pub const ALL: [LiveParam; 5] = [
        LiveParam::SampleValueScaling,
        LiveParam::OscillatorHz,
        LiveParam::FundamentalHz,
        LiveParam::GainP1,
        LiveParam::GainP2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LiveParam::SampleValueScaling => "sample_value_scaling",
            LiveParam::OscillatorHz => "oscillator_hz",
            LiveParam::FundamentalHz => "fundamental_hz",
            LiveParam::GainP1 => "gain_p1",
            LiveParam::GainP2 => "gain_p2",
        }
    }

    fn accepts(self, value: f64) -> bool {
        value.is_finite()
            && match self {
                LiveParam::GainP1 | LiveParam::GainP2 => (0.0..=1.0).contains(&value),
                _ => value > 0.0,
            }
    }
}

impl fmt::Display for LiveParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const FIXED_PARAMS: [&str; 10] = [
    "buffer_size_p1",
    "buffer_size_p2",
    "num_partials",
    "max_instances",
    "sample_rate_hz",
    "seconds_per_generation",
    "recurrence_keep",
    "recurrence_epsilon",
    "amplitude_increment",
    "throttle_seed",
];

impl FromStr for LiveParam {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(p) = LiveParam::ALL.into_iter().find(|p| p.name() == s) {
            Ok(p)
        } else if FIXED_PARAMS.contains(&s) {
            Err(EngineError::NotLiveTunable(s.to_owned()))
        } else {
            Err(EngineError::UnknownParam(s.to_owned()))
        }
    }
}

impl EngineParams {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: &str| Err(EngineError::InvalidParams(msg.to_owned()));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.sample_value_scaling) {
            return bad("sample_value_scaling must be positive");
        }
        if !positive(self.oscillator_hz) || !positive(self.fundamental_hz) {
            return bad("oscillator frequencies must be positive");
        }
        if !positive(self.sample_rate_hz) || !positive(self.seconds_per_generation) {
            return bad("sample_rate_hz and seconds_per_generation must be positive");
        }
        if self.sample_rate_hz <= 2.0 * self.oscillator_hz {
            return bad("sample_rate_hz must exceed twice oscillator_hz");
        }
        if !(0.0..=1.0).contains(&self.gain_p1) || !(0.0..=1.0).contains(&self.gain_p2) {
            return bad("gains must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.recurrence_keep) {
            return bad("recurrence_keep must lie in [0, 1]");
        }
        if self.recurrence_epsilon.is_nan()
            || self.recurrence_epsilon < 0.0
            || !positive(self.amplitude_increment)
        {
            return bad("recurrence_epsilon must be >= 0 and amplitude_increment > 0");
        }
        if self.max_instances == 0 {
            return bad("max_instances must be positive");
        }
        if self.buffer_size_p1 < 2 * self.max_instances
            || self.buffer_size_p2 < 2 * self.max_instances
        {
            return bad("buffer sizes must hold at least 2 * max_instances samples");
        }
        if self.num_partials < self.max_instances {
            return bad("num_partials must be at least max_instances");
        }
        Ok(())
    }

    pub fn get(&self, param: LiveParam) -> f64 {
        match param {
            LiveParam::SampleValueScaling => self.sample_value_scaling,
            LiveParam::OscillatorHz => self.oscillator_hz,
            LiveParam::FundamentalHz => self.fundamental_hz,
            LiveParam::GainP1 => self.gain_p1,
            LiveParam::GainP2 => self.gain_p2,
        }
    }

    /// Sets a live-tunable parameter after range-checking the value.
    pub fn set(&mut self, param: LiveParam, value: f64) -> Result<(), EngineError> {
        if !param.accepts(value) {
            return Err(EngineError::InvalidValue {
                name: param.name().to_owned(),
                value,
            });
        }
        match param {
            LiveParam::SampleValueScaling => self.sample_value_scaling = value,
            LiveParam::OscillatorHz => {
                if self.sample_rate_hz <= 2.0 * value {
                    return Err(EngineError::InvalidValue {
                        name: param.name().to_owned(),
                        value,
                    });
                }
                self.oscillator_hz = value
            }
            LiveParam::FundamentalHz => self.fundamental_hz = value,
            LiveParam::GainP1 => self.gain_p1 = value,
            LiveParam::GainP2 => self.gain_p2 = value,
        }
        Ok(())
    }

    pub fn frames_per_generation(&self) -> usize {
        (self.seconds_per_generation * self.sample_rate_hz).round() as usize
    }
}
