use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Cascade, FrequencyResponse, LinError, TransferFunction};

/// Fractional-order lag/lead `((s/ω_l + 1)/(s/ω_h + 1))^λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalLag {
    pub lambda: f64,
    pub omega_l: f64,
    pub omega_h: f64,
}

impl FractionalLag {
    pub fn new(lambda: f64, omega_l: f64, omega_h: f64) -> Result<Self, LinError> {
        if !(omega_l > 0.0 && omega_h > omega_l && omega_h.is_finite()) {
            return Err(LinError::InvalidBand { omega_l, omega_h });
        }
        Ok(Self {
            lambda,
            omega_l,
            omega_h,
        })
    }

    /// Exact phase, `λ (atan(ω/ω_l) − atan(ω/ω_h))`.
    pub fn exact_phase(&self, omega: f64) -> f64 {
        self.lambda * ((omega / self.omega_l).atan() - (omega / self.omega_h).atan())
    }

    pub fn exact_magnitude(&self, omega: f64) -> f64 {
        let num = (1.0 + (omega / self.omega_l).powi(2)).sqrt();
        let den = (1.0 + (omega / self.omega_h).powi(2)).sqrt();
        (num / den).powf(self.lambda)
    }

    pub fn eval_fractional(&self, omega: f64) -> Result<Complex64, LinError> {
        if !(omega > 0.0) {
            return Err(LinError::NonPositiveFrequency(omega));
        }
        Ok(Complex64::from_polar(
            self.exact_magnitude(omega),
            self.exact_phase(omega),
        ))
    }

    /// Zero and pole corners of the `n`-section log-equispaced approximation.
    pub fn crone_corners(&self, n: usize) -> Vec<(f64, f64)> {
        let ratio = self.omega_h / self.omega_l;
        let nf = n as f64;
        (1..=n)
            .map(|m| {
                let k = 2.0 * m as f64 - 1.0;
                let z = self.omega_l * ratio.powf((k - self.lambda) / (2.0 * nf));
                let p = self.omega_l * ratio.powf((k + self.lambda) / (2.0 * nf));
                (z, p)
            })
            .collect()
    }

    /// Biproper sections `(s/ω_z + 1)/(s/ω_p + 1)`, unit DC gain overall.
    pub fn crone_sections(&self, n: usize) -> Cascade {
        let sections = self
            .crone_corners(n.max(1))
            .into_iter()
            .map(|(z, p)| TransferFunction::lead_lag(z, p))
            .collect();
        Cascade::from_sections(sections)
    }

    pub fn crone_realize(&self, n: usize) -> TransferFunction {
        self.crone_sections(n).to_tf()
    }
}

impl FrequencyResponse for FractionalLag {
    fn response(&self, omega: f64) -> Complex64 {
        Complex64::from_polar(self.exact_magnitude(omega), self.exact_phase(omega))
    }

    fn phase(&self, omega: f64) -> f64 {
        self.exact_phase(omega)
    }
}
