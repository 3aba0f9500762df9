use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{SimError, SimTrace};

/// Harmonics of one signal, as complex gains referenced to the input
/// sinusoid: a response `A|G| sin(n(ωt + p) + ∠G)` to `A sin(ωt + p)`
/// is reported as `G`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicMeasurement {
    pub base_freq: f64,
    pub orders: Vec<usize>,
    pub values: Vec<Complex64>,
    pub periods: usize,
    pub samples: usize,
}

impl HarmonicMeasurement {
    pub fn get(&self, n: usize) -> Option<Complex64> {
        self.orders
            .iter()
            .position(|&o| o == n)
            .map(|k| self.values[k])
    }
}

/// Whole-period window after the discarded transient. Among the period
/// counts that fit, picks the one whose length is closest to an integer
/// number of samples (largest count on ties).
fn window(trace: &SimTrace, base_freq: f64) -> Result<(usize, usize, usize), SimError> {
    let start = trace.steady_start();
    let avail = trace.len().saturating_sub(start);
    let spp = TAU / base_freq / trace.config.dt;
    let max_periods = (avail as f64 / spp).floor() as usize;
    if max_periods < 4 {
        return Err(SimError::ShortWindow(max_periods));
    }
    let mut best = (f64::INFINITY, 0usize);
    for m in (4..=max_periods).rev() {
        let len = m as f64 * spp;
        let frac = (len - len.round()).abs();
        if frac < best.0 - 1e-9 && len.round() as usize <= avail {
            best = (frac, m);
        }
    }
    let m = best.1;
    let len = (m as f64 * spp).round() as usize;
    Ok((start, len, m))
}

/// Single-bin discrete Fourier projections of `signal` at `n · base_freq`.
pub fn extract_harmonics(
    trace: &SimTrace,
    signal: &str,
    base_freq: f64,
    orders: &[usize],
) -> Result<HarmonicMeasurement, SimError> {
    let data = trace.signal(signal)?;
    let (start, len, periods) = window(trace, base_freq)?;
    let (amp, phase) = trace.input.reference();
    let values = orders
        .iter()
        .map(|&n| {
            let w = n as f64 * base_freq;
            let mut acc = Complex64::new(0.0, 0.0);
            for (v, t) in data[start..start + len]
                .iter()
                .zip(&trace.time[start..start + len])
            {
                acc += v * Complex64::from_polar(1.0, -w * t);
            }
            let x = acc * (2.0 / len as f64);
            Complex64::i() * x / amp * Complex64::from_polar(1.0, -(n as f64) * phase)
        })
        .collect();
    Ok(HarmonicMeasurement {
        base_freq,
        orders: orders.to_vec(),
        values,
        periods,
        samples: len,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    /// `sqrt(∫ e² dt)` over the retained window.
    pub l2: f64,
    pub linf: f64,
    pub rms: f64,
    /// Norms divided by the reference peak bound (zero if the reference is zero).
    pub l2_normalized: f64,
    pub linf_normalized: f64,
    pub rms_normalized: f64,
}

/// Norms of the error signal over the steady-state window.
pub fn error_norms(trace: &SimTrace) -> ErrorNorms {
    let start = trace.steady_start().min(trace.len());
    let e = &trace.e[start..];
    let sum_sq: f64 = e.iter().map(|v| v * v).sum();
    let l2 = (sum_sq * trace.config.dt).sqrt();
    let rms = if e.is_empty() {
        0.0
    } else {
        (sum_sq / e.len() as f64).sqrt()
    };
    let linf = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = trace.input.peak_bound();
    let norm = |v: f64| if scale > 0.0 { v / scale } else { 0.0 };
    ErrorNorms {
        l2,
        linf,
        rms,
        l2_normalized: norm(l2),
        linf_normalized: norm(linf),
        rms_normalized: norm(rms),
    }
}

/// Largest `|value|` of `signal` over the steady-state window.
pub fn peak(trace: &SimTrace, signal: &str) -> Result<f64, SimError> {
    let start = trace.steady_start().min(trace.len());
    Ok(trace.signal(signal)?[start..]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs())))
}
