//! Phase shaping: a filter `F = N₁ L_f N₂` placed in front of a reset lag so
//! that the reset element is nonlinear only inside a chosen band.
//!
//! The trigger stays on the unfiltered error while the reset state is driven
//! through `F K`; `ψ(ω) = ∠(F K R)(jω)` then controls the harmonics, and
//! every frequency where `ψ = 0` is a notch of all higher harmonics.

mod design;
mod element;
mod filter;
mod solve;

pub use design::DesignDocument;
pub use element::{
    build_bandpassed_cglp, build_bandpassed_clegg, build_bandpassed_fore, conventional_cglp,
    default_omega_f, fit_alpha, fit_alpha_inband, k_filter, ShapedResetElement, Tail,
};
pub use filter::{build_shaping_filter, ShapingFilter};
pub use solve::{exact_filter_phase, solve_lambda_q, LambdaQ};

use serde::{Deserialize, Serialize};

use crate::lincore::LinError;
use crate::resetfreq::ResetError;

/// Default number of CRONE sections per band.
pub const DEFAULT_CRONE_N: usize = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShapingError {
    #[error(transparent)]
    Linear(#[from] LinError),
    #[error(transparent)]
    Reset(#[from] ResetError),
    #[error("invalid shaping spec: {0}")]
    InvalidSpec(String),
    #[error(
        "(lambda, q) solver did not converge after {iterations} iterations: \
         lambda = {lambda}, q = {q}, residuals = [{r1:e}, {r2:e}] rad"
    )]
    NoConvergence {
        iterations: usize,
        lambda: f64,
        q: f64,
        r1: f64,
        r2: f64,
    },
    #[error("bisection bracket [{lo}, {hi}] does not contain a root")]
    Bracket { lo: f64, hi: f64 },
}

/// `ζ = ω_m1/ω_l`: where the phase of the anti-notch `N₁` peaks.
pub fn zeta_of_q(q: f64) -> f64 {
    (std::f64::consts::FRAC_1_SQRT_2) * ((2.0 * q + 1.0 - (1.0 + 4.0 * q).sqrt()) / q).sqrt()
}

/// Which pair of equations fixes `(λ, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintForm {
    /// `∠L_f(ω_c) + 2∠N₁(ω_c) = ψ_f` and `∠L_f(ω_m1) + ∠N₁(ω_m1) = ε₂`,
    /// neglecting `N₂` at `ω_m1`. Depends only on `ω_h/ω_l`.
    #[default]
    Symmetric,
    /// Same targets on the complete exact-phase filter `N₁ L_f N₂`.
    FullFilter,
    /// `∠F(ω_c) = ψ_f` and `ψ(ω_pin) = ∠F(ω_pin) − atan(ω_pin/ω_f) = 0`,
    /// putting a harmonic notch exactly at `ω_pin`.
    PinnedNotch { omega_pin: f64, omega_f: f64 },
}

/// Targets for the shaping filter. Angles in radians, frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapingSpec {
    pub omega_l: f64,
    pub omega_h: f64,
    /// In-band phase of `F` at `ω_c`.
    pub psi_f: f64,
    /// Optional out-of-band bound, only checked after the fact.
    pub psi_b: Option<f64>,
    pub epsilon2: f64,
    pub omega_c: f64,
    pub form: ConstraintForm,
}

impl ShapingSpec {
    /// Band `[ω_l, ω_h]` centred at the geometric mean, `ε₂ = 1°`.
    pub fn new(omega_l: f64, omega_h: f64, psi_f: f64) -> Result<Self, ShapingError> {
        let spec = Self {
            omega_l,
            omega_h,
            psi_f,
            psi_b: None,
            epsilon2: std::f64::consts::PI / 180.0,
            omega_c: (omega_l * omega_h).sqrt(),
            form: ConstraintForm::Symmetric,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// One-decade band starting at `ω_l`.
    pub fn decade(omega_l: f64, psi_f: f64) -> Result<Self, ShapingError> {
        Self::new(omega_l, 10.0 * omega_l, psi_f)
    }

    pub fn with_form(mut self, form: ConstraintForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_epsilon2(mut self, epsilon2: f64) -> Self {
        self.epsilon2 = epsilon2;
        self
    }

    pub fn is_decade(&self) -> bool {
        ((self.omega_h / self.omega_l) - 10.0).abs() < 1e-9
    }

    pub fn validate(&self) -> Result<(), ShapingError> {
        if !(self.omega_l > 0.0 && self.omega_h > self.omega_l && self.omega_h.is_finite()) {
            return Err(ShapingError::InvalidSpec(format!(
                "need 0 < omega_l < omega_h, got [{}, {}]",
                self.omega_l, self.omega_h
            )));
        }
        if !(self.psi_f > -std::f64::consts::FRAC_PI_2 && self.psi_f < 0.0) {
            return Err(ShapingError::InvalidSpec(format!(
                "psi_f must lie in (-90, 0) degrees, got {}",
                self.psi_f.to_degrees()
            )));
        }
        if !(self.epsilon2 > 0.0) {
            return Err(ShapingError::InvalidSpec(
                "epsilon2 must be positive".into(),
            ));
        }
        if !(self.omega_c > self.omega_l && self.omega_c < self.omega_h) {
            return Err(ShapingError::InvalidSpec(
                "omega_c must lie inside the band".into(),
            ));
        }
        if let ConstraintForm::PinnedNotch { omega_pin, omega_f } = self.form {
            if !(omega_pin > 0.0 && omega_f > 0.0) {
                return Err(ShapingError::InvalidSpec(
                    "pinned notch frequencies must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}
