use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::DesignError;
use crate::resetfreq::{solve_gamma_psi, ResetElement};
use crate::shaping::{
    build_bandpassed_cglp, conventional_cglp, fit_alpha, ConstraintForm, ShapedResetElement,
    ShapingFilter, ShapingSpec, DEFAULT_CRONE_N,
};

/// Small band-passed CgLp on the `[1, 10]` rad/s band next to a
/// conventional CgLp with larger `γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub omega_l: f64,
    pub omega_h: f64,
    pub omega_r: f64,
    pub gamma: f64,
    pub gamma_conventional: f64,
    pub omega_f: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            omega_l: 1.0,
            omega_h: 10.0,
            omega_r: 0.5,
            gamma: 0.2,
            gamma_conventional: 0.35,
            omega_f: 1e4,
        }
    }
}

impl DemoConfig {
    /// `ψ_f` giving the band-passed element the same high-frequency phase
    /// as the conventional one, whose reset lag sits at
    /// `−π/2 + atan(4(1 − γ)/(π(1 + γ)))`.
    pub fn psi_f(&self) -> Result<f64, DesignError> {
        let g = self.gamma_conventional;
        let target = -FRAC_PI_2 + (4.0 * (1.0 - g) / (PI * (1.0 + g))).atan();
        let ratio = (self.omega_l * self.omega_h).sqrt() / self.omega_r;
        let roots = solve_gamma_psi(target, &[self.gamma], (-FRAC_PI_2, 0.0), ratio)?;
        roots
            .first()
            .map(|r| r.psi)
            .ok_or_else(|| DesignError::InvalidSpec(format!("no psi_f for gamma = {}", self.gamma)))
    }

    pub fn filter(&self) -> Result<ShapingFilter, DesignError> {
        let spec = ShapingSpec::new(self.omega_l, self.omega_h, self.psi_f()?)?
            .with_form(ConstraintForm::FullFilter);
        Ok(ShapingFilter::build(&spec, DEFAULT_CRONE_N)?.0)
    }
}

pub fn demo_bandpassed_cglp(cfg: &DemoConfig) -> Result<ShapedResetElement, DesignError> {
    Ok(build_bandpassed_cglp(
        &cfg.filter()?,
        cfg.omega_r,
        cfg.gamma,
        Some(cfg.omega_f),
        None,
    )?)
}

pub fn demo_conventional_cglp(cfg: &DemoConfig) -> Result<ResetElement, DesignError> {
    let alpha = fit_alpha(cfg.gamma_conventional)?;
    Ok(conventional_cglp(
        cfg.omega_r,
        cfg.gamma_conventional,
        cfg.omega_f,
        alpha,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_psi_f() {
        let psi = DemoConfig::default().psi_f().unwrap().to_degrees();
        assert!((psi + 71.89).abs() < 0.01, "{psi}");
    }
}
