//! Fixed-step hybrid simulation of reset systems. Linear flow is advanced
//! with zero-order-hold discretizations; resets are applied at the first
//! sample after the trigger changes sign.

mod csv;
mod engine;
mod measure;

pub use csv::{write_csv, CSV_HEADER};
pub use engine::{simulate_closed_loop, simulate_linear, simulate_open_loop, ControllerChain};
pub use measure::{error_norms, extract_harmonics, peak, ErrorNorms, HarmonicMeasurement};

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::lincore::LinError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Linear(#[from] LinError),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("simulation diverged at t = {t} s (|y| = {y:e} exceeds {limit:e})")]
    Unstable { t: f64, y: f64, limit: f64 },
    #[error("unknown signal {0:?}")]
    UnknownSignal(String),
    #[error("need at least 4 whole periods after the discarded transient, have {0}")]
    ShortWindow(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResetPolicy {
    /// Apply the jump at the first sample whose trigger value has the
    /// opposite sign of the previous one, or is exactly zero after a
    /// nonzero sample.
    #[default]
    SampleAfterCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub periods_total: usize,
    pub periods_discard: usize,
    #[serde(default)]
    pub reset_policy: ResetPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            periods_total: 20,
            periods_discard: 10,
            reset_policy: ResetPolicy::SampleAfterCrossing,
        }
    }
}

impl SimConfig {
    /// Step chosen as an exact fraction of the period of `omega`.
    pub fn per_period(omega: f64, samples_per_period: usize) -> Self {
        Self {
            dt: TAU / omega / samples_per_period as f64,
            ..Self::default()
        }
    }

    pub fn with_periods(mut self, total: usize, discard: usize) -> Self {
        self.periods_total = total;
        self.periods_discard = discard;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.periods_discard >= self.periods_total {
            return Err(SimError::Config(format!(
                "periods_discard ({}) must be below periods_total ({})",
                self.periods_discard, self.periods_total
            )));
        }
        Ok(())
    }
}

/// One sinusoidal component `amplitude · sin(omega t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub amplitude: f64,
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Reference or open-loop input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Signal {
    Zero {
        omega: f64,
    },
    Sine(Tone),
    /// Sum of tones; `omega` is the fundamental whose period is common to all.
    MultiSine {
        tones: Vec<Tone>,
        omega: f64,
    },
}

impl Signal {
    pub fn sine(amplitude: f64, omega: f64) -> Self {
        Signal::Sine(Tone {
            amplitude,
            omega,
            phase: 0.0,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Signal::Zero { .. } => 0.0,
            Signal::Sine(tone) => tone.amplitude * (tone.omega * t + tone.phase).sin(),
            Signal::MultiSine { tones, .. } => tones
                .iter()
                .map(|c| c.amplitude * (c.omega * t + c.phase).sin())
                .sum(),
        }
    }

    /// Fundamental frequency that sets the period bookkeeping.
    pub fn base_omega(&self) -> f64 {
        match self {
            Signal::Zero { omega } | Signal::MultiSine { omega, .. } => *omega,
            Signal::Sine(tone) => tone.omega,
        }
    }

    /// Upper bound of `|value|`.
    pub fn peak_bound(&self) -> f64 {
        match self {
            Signal::Zero { .. } => 0.0,
            Signal::Sine(tone) => tone.amplitude.abs(),
            Signal::MultiSine { tones, .. } => tones.iter().map(|c| c.amplitude.abs()).sum(),
        }
    }

    /// Amplitude and phase used to reference harmonic measurements.
    pub fn reference(&self) -> (f64, f64) {
        match self {
            Signal::Sine(tone) => (tone.amplitude, tone.phase),
            _ => (1.0, 0.0),
        }
    }
}

/// Sampled signals of one run. All vectors have the same length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub time: Vec<f64>,
    pub e: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub control_input: Vec<f64>,
    pub reset_flags: Vec<bool>,
    pub input: Signal,
    pub config: SimConfig,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn signal(&self, name: &str) -> Result<&[f64], SimError> {
        match name {
            "e" => Ok(&self.e),
            "u" => Ok(&self.u),
            "y" => Ok(&self.y),
            "control_input" => Ok(&self.control_input),
            other => Err(SimError::UnknownSignal(other.to_string())),
        }
    }

    /// First retained sample after the discarded transient.
    pub fn steady_start(&self) -> usize {
        let t0 = self.config.periods_discard as f64 * TAU / self.input.base_omega();
        self.time
            .partition_point(|&t| t < t0 - 0.5 * self.config.dt)
    }

    pub fn reset_count(&self) -> usize {
        self.reset_flags.iter().filter(|&&f| f).count()
    }
}

pub(crate) fn sample_count(cfg: &SimConfig, omega: f64) -> usize {
    (cfg.periods_total as f64 * TAU / omega / cfg.dt).round() as usize
}
