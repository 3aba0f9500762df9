//! Higher-order sinusoidal input describing functions of reset elements.
//!
//! A reset element is a linear state-space filter whose state is multiplied
//! by `A_ρ` whenever the trigger signal crosses zero. The engines here give
//! the complex gain from `sin(ωt)` at the input to the `n`-th harmonic of the
//! steady-state output.

mod closed_form;
mod element;
mod hosidf;
mod psi;
mod tuning;

pub use closed_form::{closed_form_single_state, harmonic_factor};
pub use element::ResetElement;
pub use hosidf::{
    hosidf, hosidf_shifted, hosidf_sweep, odd_orders, HosidfKernel, HosidfResult, ShiftedKernel,
};
pub use psi::{find_omega_lb, psi_of, psi_profile, PsiProfile};
pub use tuning::{phase_approx, solve_gamma_psi, GammaPsi};

use num_complex::Complex64;

use crate::lincore::LinError;

/// Default cap on stored harmonic orders.
pub const DEFAULT_MAX_ORDER: usize = 9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResetError {
    #[error(transparent)]
    Linear(#[from] LinError),
    #[error("matrix {matrix} is singular at omega = {omega} rad/s")]
    Singular { matrix: &'static str, omega: f64 },
    #[error("harmonic order must be at least 1")]
    ZeroOrder,
    #[error("reset matrix is {rows}x{cols} but the base system has {states} states")]
    ResetDimension {
        rows: usize,
        cols: usize,
        states: usize,
    },
    #[error("{0}")]
    Domain(String),
}

/// Anything whose response to `sin(ωt)` has a well-defined `n`-th harmonic.
pub trait HarmonicResponse: Sync {
    fn harmonic(&self, omega: f64, n: usize) -> Result<Complex64, ResetError>;

    fn harmonics(&self, omega: f64, orders: &[usize]) -> Result<Vec<Complex64>, ResetError> {
        orders.iter().map(|&n| self.harmonic(omega, n)).collect()
    }

    /// True when every harmonic above the first vanishes identically.
    fn is_linear(&self) -> bool {
        false
    }
}

impl HarmonicResponse for crate::lincore::TransferFunction {
    fn harmonic(&self, omega: f64, n: usize) -> Result<Complex64, ResetError> {
        match n {
            0 => Err(ResetError::ZeroOrder),
            1 => Ok(self.eval_freq(omega)?),
            _ => Ok(Complex64::new(0.0, 0.0)),
        }
    }

    fn is_linear(&self) -> bool {
        true
    }
}

impl HarmonicResponse for crate::lincore::Cascade {
    fn harmonic(&self, omega: f64, n: usize) -> Result<Complex64, ResetError> {
        match n {
            0 => Err(ResetError::ZeroOrder),
            1 => Ok(self.eval_freq(omega)?),
            _ => Ok(Complex64::new(0.0, 0.0)),
        }
    }

    fn is_linear(&self) -> bool {
        true
    }
}

pub(crate) fn check_args(omega: f64, n: usize) -> Result<(), ResetError> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(LinError::NonPositiveFrequency(omega).into());
    }
    if n == 0 {
        return Err(ResetError::ZeroOrder);
    }
    Ok(())
}
