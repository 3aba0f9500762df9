//! Linear substrate: polynomial transfer functions, factored cascades,
//! state-space realizations, zero-order-hold discretization and the CRONE
//! approximation of fractional-order lags.
//!
//! Conventions used throughout the crate:
//! - polynomial coefficients are stored in ascending powers of `s`;
//! - frequencies are in rad/s, phases in radians;
//! - `omega = 0` is never evaluated by the describing-function code.

mod crone;
mod grid;
mod poly;
mod ss;
mod tf;

pub use crone::FractionalLag;
pub use grid::FreqGrid;
pub use ss::{zoh_discretize, DiscreteStateSpace, StateSpace};
pub use tf::{series, tf_to_ss, Cascade, TransferFunction};

use num_complex::Complex64;

/// Anything with a complex frequency response `H(jω)`.
pub trait FrequencyResponse {
    fn response(&self, omega: f64) -> Complex64;

    fn phase(&self, omega: f64) -> f64 {
        self.response(omega).arg()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinError {
    #[error("denominator polynomial is empty or identically zero")]
    ZeroDenominator,
    #[error("denominator vanishes on the imaginary axis at omega = {omega} rad/s")]
    PoleOnAxis { omega: f64 },
    #[error("transfer function is improper (numerator degree {num} > denominator degree {den})")]
    Improper { num: usize, den: usize },
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("state-space dimensions are inconsistent: {0}")]
    Dimension(String),
    #[error("invalid band: need 0 < omega_l ({omega_l}) < omega_h ({omega_h})")]
    InvalidBand { omega_l: f64, omega_h: f64 },
    #[error("frequency grid must be strictly increasing and positive")]
    InvalidGrid,
    #[error("sample time must be positive, got {0}")]
    NonPositiveStep(f64),
}

/// Converts Hz to rad/s.
pub fn hz(f: f64) -> f64 {
    2.0 * std::f64::consts::PI * f
}

/// Converts rad/s to Hz.
pub fn to_hz(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI)
}
