use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DesignError;
use crate::lincore::{hz, Cascade, FreqGrid, StateSpace, TransferFunction};
use crate::resetfreq::{hosidf_sweep, HarmonicResponse, HosidfResult, ResetElement, ResetError};
use crate::shaping::{
    build_bandpassed_cglp, conventional_cglp, fit_alpha, ConstraintForm, ShapedResetElement,
    ShapingFilter, ShapingSpec, DEFAULT_CRONE_N,
};
use crate::timesim::ControllerChain;

/// Identified stage model `3.038e4 / (s² + 0.7413 s + 243.3)`.
pub fn plant() -> TransferFunction {
    TransferFunction::new(vec![3.038e4], vec![243.3, 0.7413, 1.0]).expect("nonzero denominator")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    BandpassedCglp,
    ConventionalCglp,
    Pid,
}

/// Controller parameters. Frequencies in Hz, angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    /// Crossover frequency where the first-harmonic loop gain is 1.
    #[serde(default = "default_crossover")]
    pub omega_c_hz: f64,
    pub omega_i_hz: f64,
    pub omega_d_hz: f64,
    pub omega_t_hz: f64,
    /// Corner of the squared low-pass in the PI block.
    pub omega_f_hz: f64,
    /// Corner of the low-pass in `K`; defaults to `omega_f_hz`.
    #[serde(default)]
    pub omega_f_k_hz: Option<f64>,
    #[serde(default)]
    pub omega_r_hz: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub psi_f_deg: Option<f64>,
    /// Fixed `(λ, q)`; when absent they are solved.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    /// Frequency pinned into `ω_lb` when solving `(λ, q)`; absent means the
    /// symmetric constraints.
    #[serde(default)]
    pub notch_hz: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub k_p: Option<f64>,
    #[serde(default = "default_crone_n")]
    pub crone_n: usize,
}

fn default_crossover() -> f64 {
    100.0
}

fn default_crone_n() -> usize {
    DEFAULT_CRONE_N
}

impl ControllerSpec {
    fn base(kind: ControllerKind, omega_d_hz: f64, omega_t_hz: f64) -> Self {
        Self {
            kind,
            omega_c_hz: 100.0,
            omega_i_hz: 10.0,
            omega_d_hz,
            omega_t_hz,
            omega_f_hz: 1000.0,
            omega_f_k_hz: None,
            omega_r_hz: None,
            gamma: None,
            psi_f_deg: None,
            lambda: None,
            q: None,
            notch_hz: None,
            alpha: None,
            k_p: None,
            crone_n: DEFAULT_CRONE_N,
        }
    }

    pub fn pid() -> Self {
        Self::base(ControllerKind::Pid, 27.0, 370.0)
    }

    pub fn conventional_cglp() -> Self {
        Self {
            omega_r_hz: Some(5.0),
            gamma: Some(0.25),
            ..Self::base(ControllerKind::ConventionalCglp, 60.6, 165.0)
        }
    }

    /// Band `[ω_c/√10, ω_c√10]` with the 22 Hz harmonic notch.
    pub fn bandpassed_cglp() -> Self {
        Self {
            omega_r_hz: Some(5.0),
            gamma: Some(-0.05),
            psi_f_deg: Some(-57.34),
            notch_hz: Some(22.0),
            ..Self::base(ControllerKind::BandpassedCglp, 60.6, 165.0)
        }
    }

    pub fn table() -> Vec<Self> {
        vec![
            Self::bandpassed_cglp(),
            Self::pid(),
            Self::conventional_cglp(),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ControllerKind::BandpassedCglp => "bandpassed_cglp",
            ControllerKind::ConventionalCglp => "conventional_cglp",
            ControllerKind::Pid => "pid",
        }
    }

    fn require(&self, v: Option<f64>, what: &str) -> Result<f64, DesignError> {
        v.ok_or_else(|| DesignError::InvalidSpec(format!("{} needs {what}", self.name())))
    }

    fn validate(&self) -> Result<(), DesignError> {
        let freqs = [
            ("omega_c_hz", Some(self.omega_c_hz)),
            ("omega_i_hz", Some(self.omega_i_hz)),
            ("omega_d_hz", Some(self.omega_d_hz)),
            ("omega_t_hz", Some(self.omega_t_hz)),
            ("omega_f_hz", Some(self.omega_f_hz)),
            ("omega_f_k_hz", self.omega_f_k_hz),
            ("omega_r_hz", self.omega_r_hz),
            ("notch_hz", self.notch_hz),
        ];
        for (name, v) in freqs {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(DesignError::InvalidSpec(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        if self.kind == ControllerKind::Pid && (self.gamma.is_some() || self.omega_r_hz.is_some()) {
            return Err(DesignError::InvalidSpec(
                "pid takes no reset parameters".into(),
            ));
        }
        if self.lambda.is_some() != self.q.is_some() {
            return Err(DesignError::InvalidSpec(
                "lambda and q must be given together".into(),
            ));
        }
        Ok(())
    }
}

/// Reset part in front of the linear blocks.
#[derive(Debug, Clone)]
pub enum Front {
    None,
    Conventional(ResetElement),
    Shaped(Box<ShapedResetElement>),
}

impl Front {
    fn harmonic(&self, omega: f64, n: usize) -> Result<Complex64, ResetError> {
        match self {
            Front::None => Ok(if n == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }),
            Front::Conventional(el) => el.harmonic(omega, n),
            Front::Shaped(el) => el.harmonic(omega, n),
        }
    }

    fn element(&self) -> Result<Option<ResetElement>, DesignError> {
        Ok(match self {
            Front::None => None,
            Front::Conventional(el) => Some(el.clone()),
            Front::Shaped(el) => Some(el.to_reset_element()?),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Controller {
    pub spec: ControllerSpec,
    pub k_p: f64,
    pub front: Front,
    /// `k_p(1 + ω_i/s)/(s/ω_f + 1)² · (s/ω_d + 1)/(s/ω_t + 1)`.
    pub back: Cascade,
    pub chain: ControllerChain,
    pub phase_margin_deg: f64,
    pub filter: Option<ShapingFilter>,
    pub warnings: Vec<String>,
}

impl HarmonicResponse for Controller {
    fn harmonic(&self, omega: f64, n: usize) -> Result<Complex64, ResetError> {
        let f = self.front.harmonic(omega, n)?;
        if f == Complex64::new(0.0, 0.0) {
            return Ok(f);
        }
        Ok(f * self.back.eval_freq(n as f64 * omega)?)
    }

    fn is_linear(&self) -> bool {
        matches!(self.front, Front::None)
    }
}

fn linear_back(k_p: f64, omega_i: f64, omega_f: f64, omega_d: f64, omega_t: f64) -> Cascade {
    Cascade::from_sections(vec![
        TransferFunction::pi(k_p, omega_i),
        TransferFunction::new(
            vec![1.0],
            vec![1.0, 2.0 / omega_f, 1.0 / (omega_f * omega_f)],
        )
        .expect("nonzero"),
        TransferFunction::lead_lag(omega_d, omega_t),
    ])
}

/// Assembles the controller, then picks `k_p` so the first-harmonic loop
/// gain is 1 at the crossover, and checks that the base-linear loop is stable.
pub fn build_controller(spec: &ControllerSpec) -> Result<Controller, DesignError> {
    spec.validate()?;
    let wc = hz(spec.omega_c_hz);
    let wf = hz(spec.omega_f_hz);
    let wf_k = hz(spec.omega_f_k_hz.unwrap_or(spec.omega_f_hz));
    let mut warnings = Vec::new();
    let mut filter = None;
    let front = match spec.kind {
        ControllerKind::Pid => Front::None,
        ControllerKind::ConventionalCglp => {
            let wr = hz(spec.require(spec.omega_r_hz, "omega_r_hz")?);
            let gamma = spec.require(spec.gamma, "gamma")?;
            let alpha = match spec.alpha {
                Some(a) => a,
                None => fit_alpha(gamma)?,
            };
            Front::Conventional(conventional_cglp(wr, gamma, wf_k, alpha)?)
        }
        ControllerKind::BandpassedCglp => {
            let wr = hz(spec.require(spec.omega_r_hz, "omega_r_hz")?);
            let gamma = spec.require(spec.gamma, "gamma")?;
            let psi_f = spec.require(spec.psi_f_deg, "psi_f_deg")?.to_radians();
            let (wl, wh) = (wc / 10f64.sqrt(), wc * 10f64.sqrt());
            let f = match (spec.lambda, spec.q) {
                (Some(l), Some(q)) => ShapingFilter::from_parameters(l, q, wl, wh, spec.crone_n)?,
                _ => {
                    let mut s = ShapingSpec::new(wl, wh, psi_f)?;
                    if let Some(pin) = spec.notch_hz {
                        s = s.with_form(ConstraintForm::PinnedNotch {
                            omega_pin: hz(pin),
                            omega_f: wf_k,
                        });
                    }
                    ShapingFilter::build(&s, spec.crone_n)?.0
                }
            };
            let el = build_bandpassed_cglp(&f, wr, gamma, Some(wf_k), spec.alpha)?;
            warnings.extend(el.warnings().iter().cloned());
            filter = Some(f);
            Front::Shaped(Box::new(el))
        }
    };
    let (wi, wd, wt) = (
        hz(spec.omega_i_hz),
        hz(spec.omega_d_hz),
        hz(spec.omega_t_hz),
    );
    let p = plant();
    let unit = linear_back(1.0, wi, wf, wd, wt);
    let l1 = front.harmonic(wc, 1)? * unit.eval_freq(wc)? * p.eval_freq(wc)?;
    let k_p = match spec.k_p {
        Some(k) => k,
        None => 1.0 / l1.norm(),
    };
    let phase_margin_deg = 180.0 + l1.arg().to_degrees();
    let back = linear_back(k_p, wi, wf, wd, wt);
    let chain = match front.element()? {
        Some(el) => ControllerChain::new(el, back.clone())?,
        None => ControllerChain::linear(back.clone())?,
    };
    check_base_linear(&chain, &p.to_state_space()?)?;
    Ok(Controller {
        spec: spec.clone(),
        k_p,
        front,
        back,
        chain,
        phase_margin_deg,
        filter,
        warnings,
    })
}

fn check_base_linear(chain: &ControllerChain, plant: &StateSpace) -> Result<(), DesignError> {
    let a = chain.combined().base().closed_loop_a(plant)?;
    let max_real = a
        .complex_eigenvalues()
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_real >= 0.0 {
        return Err(DesignError::UnstableBaseLinear { max_real });
    }
    Ok(())
}

/// Controller harmonics times the plant evaluated at `nω`.
pub struct OpenLoop<'a> {
    pub controller: &'a Controller,
    pub plant: &'a TransferFunction,
}

impl HarmonicResponse for OpenLoop<'_> {
    fn harmonic(&self, omega: f64, n: usize) -> Result<Complex64, ResetError> {
        let c = self.controller.harmonic(omega, n)?;
        if c == Complex64::new(0.0, 0.0) {
            return Ok(c);
        }
        Ok(c * self.plant.eval_freq(n as f64 * omega)?)
    }

    fn is_linear(&self) -> bool {
        self.controller.is_linear()
    }
}

pub fn open_loop_hosidf(
    controller: &Controller,
    plant: &TransferFunction,
    grid: &FreqGrid,
    max_order: usize,
) -> Result<HosidfResult, DesignError> {
    let mut r = hosidf_sweep(&OpenLoop { controller, plant }, grid, max_order)?;
    r.gamma = controller.spec.gamma;
    r.meta = format!("open loop {}", controller.spec.name());
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plant_static_gain() {
        let p = plant();
        assert!((p.dc_gain() - 124.866).abs() < 1e-3);
    }

    #[test]
    fn pid_meets_phase_margin() {
        let c = build_controller(&ControllerSpec::pid()).unwrap();
        assert!(
            (c.phase_margin_deg - 42.0).abs() < 1.0,
            "{}",
            c.phase_margin_deg
        );
        let l = OpenLoop {
            controller: &c,
            plant: &plant(),
        }
        .harmonic(hz(100.0), 1)
        .unwrap();
        assert!((l.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spec_rejects_inconsistent_fields() {
        let mut s = ControllerSpec::pid();
        s.gamma = Some(0.3);
        assert!(build_controller(&s).is_err());
        let mut s = ControllerSpec::bandpassed_cglp();
        s.lambda = Some(-0.7);
        assert!(build_controller(&s).is_err());
    }
}
