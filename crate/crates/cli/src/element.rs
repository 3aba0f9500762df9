//! Turns the `band`/`target`/`shaping`/`reset` sections into filters and
//! elements.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use resetshape::designkit::DesignError;
use resetshape::lincore::hz;
use resetshape::resetfreq::{solve_gamma_psi, HarmonicResponse, ResetElement, ResetError};
use resetshape::shaping::{
    build_bandpassed_cglp, build_bandpassed_clegg, build_bandpassed_fore, conventional_cglp,
    default_omega_f, fit_alpha, ConstraintForm, LambdaQ, ShapedResetElement, ShapingError,
    ShapingFilter, ShapingSpec, DEFAULT_CRONE_N,
};
use resetshape::timesim::SimError;

use crate::config::{CliConfig, ElementKind, Form, Reset};
use crate::CliError;

impl From<ShapingError> for CliError {
    fn from(e: ShapingError) -> Self {
        match e {
            ShapingError::InvalidSpec(_) => CliError::Config(e.to_string()),
            ShapingError::Reset(r) => r.into(),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<ResetError> for CliError {
    fn from(e: ResetError) -> Self {
        match e {
            ResetError::Domain(_) | ResetError::ResetDimension { .. } | ResetError::ZeroOrder => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::UnknownSignal(_) | SimError::ShortWindow(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::InvalidSpec(_) => CliError::Config(e.to_string()),
            DesignError::Shaping(s) => s.into(),
            DesignError::Reset(r) => r.into(),
            DesignError::Sim(s) => s.into(),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn missing(what: &str) -> CliError {
    CliError::Config(format!("missing `{what}`"))
}

fn reset(cfg: &CliConfig) -> Result<&Reset, CliError> {
    cfg.reset.as_ref().ok_or_else(|| missing("reset"))
}

fn omega_r(r: &Reset) -> Result<f64, CliError> {
    r.omega_r_hz
        .map(hz)
        .ok_or_else(|| missing("reset.omega_r_hz"))
}

/// `ψ_f` in radians from `target`.
pub fn psi_f(cfg: &CliConfig) -> Result<f64, CliError> {
    let t = cfg.target.as_ref().ok_or_else(|| missing("target"))?;
    match (t.psi_f_deg, t.phase_advantage_deg) {
        (Some(p), None) => Ok(p.to_radians()),
        (None, Some(adv)) => {
            let r = reset(cfg)?;
            let band = cfg.band.as_ref().ok_or_else(|| missing("band"))?;
            let wc = hz((band.omega_l_hz * band.omega_h_hz).sqrt());
            let ratio = wc / r.omega_r_hz.map(hz).unwrap_or(wc / 10.0);
            let target = -FRAC_PI_2 + adv.to_radians();
            let roots = solve_gamma_psi(target, &[r.gamma], (-FRAC_PI_2, 0.0), ratio)?;
            roots.first().map(|g| g.psi).ok_or_else(|| {
                CliError::Config(format!(
                    "phase advantage {adv} deg is not reachable with gamma = {}",
                    r.gamma
                ))
            })
        }
        _ => Err(CliError::Config(
            "target needs exactly one of psi_f_deg and phase_advantage_deg".into(),
        )),
    }
}

pub fn shaping_spec(cfg: &CliConfig) -> Result<ShapingSpec, CliError> {
    let band = cfg.band.as_ref().ok_or_else(|| missing("band"))?;
    let mut spec = ShapingSpec::new(hz(band.omega_l_hz), hz(band.omega_h_hz), psi_f(cfg)?)?;
    let sh = cfg.shaping.clone().unwrap_or_default();
    if let Some(e) = sh.epsilon2_deg {
        spec = spec.with_epsilon2(e.to_radians());
    }
    spec.psi_b = sh.psi_b_deg.map(f64::to_radians);
    spec.form = match sh.form {
        Form::Symmetric => ConstraintForm::Symmetric,
        Form::FullFilter => ConstraintForm::FullFilter,
        Form::PinnedNotch => {
            let pin = sh.notch_hz.ok_or_else(|| missing("shaping.notch_hz"))?;
            let omega_f = match cfg.reset.as_ref() {
                Some(r) => match r.omega_f_hz {
                    Some(f) => hz(f),
                    None => (20.0 * spec.omega_c).max(100.0 * omega_r(r)?),
                },
                None => 20.0 * spec.omega_c,
            };
            ConstraintForm::PinnedNotch {
                omega_pin: hz(pin),
                omega_f,
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

pub fn crone_n(cfg: &CliConfig) -> usize {
    cfg.shaping
        .as_ref()
        .and_then(|s| s.crone_n)
        .unwrap_or(DEFAULT_CRONE_N)
}

pub fn filter(cfg: &CliConfig) -> Result<(ShapingSpec, ShapingFilter, LambdaQ), CliError> {
    let spec = shaping_spec(cfg)?;
    let (f, lq) = ShapingFilter::build(&spec, crone_n(cfg))?;
    Ok((spec, f, lq))
}

pub enum Element {
    Plain(ResetElement),
    Shaped(Box<ShapedResetElement>),
}

impl Element {
    pub fn label(&self) -> String {
        match self {
            Element::Plain(e) => e.label().to_string(),
            Element::Shaped(_) => "band-passed element".into(),
        }
    }

    pub fn shaped(&self) -> Option<&ShapedResetElement> {
        match self {
            Element::Shaped(e) => Some(e),
            Element::Plain(_) => None,
        }
    }

    /// State-space form driven by the simulator.
    pub fn realization(&self) -> Result<ResetElement, CliError> {
        Ok(match self {
            Element::Plain(e) => e.clone(),
            Element::Shaped(e) => e.to_reset_element()?,
        })
    }
}

impl HarmonicResponse for Element {
    fn harmonic(&self, omega: f64, n: usize) -> Result<Complex64, ResetError> {
        match self {
            Element::Plain(e) => e.harmonic(omega, n),
            Element::Shaped(e) => e.harmonic(omega, n),
        }
    }

    fn is_linear(&self) -> bool {
        match self {
            Element::Plain(e) => e.is_linear(),
            Element::Shaped(e) => e.is_linear(),
        }
    }
}

/// The element of the `reset` section; band-passed kinds also need the
/// shaping sections. The kind defaults to a band-passed CgLp when a band is
/// given and to a Clegg integrator otherwise.
pub fn element(cfg: &CliConfig) -> Result<Element, CliError> {
    let r = reset(cfg)?;
    let kind = r.element.unwrap_or(if cfg.band.is_some() {
        ElementKind::BandpassedCglp
    } else {
        ElementKind::Clegg
    });
    let g = r.gamma;
    let wf = r.omega_f_hz.map(hz);
    Ok(match kind {
        ElementKind::Clegg => Element::Plain(ResetElement::clegg(g)),
        ElementKind::Fore => Element::Plain(ResetElement::fore(omega_r(r)?, g)),
        ElementKind::Sore => {
            let beta = r.beta.ok_or_else(|| missing("reset.beta"))?;
            Element::Plain(ResetElement::sore(omega_r(r)?, beta, g))
        }
        ElementKind::ConventionalCglp => {
            let wr = omega_r(r)?;
            let alpha = match r.alpha {
                Some(a) => a,
                None => fit_alpha(g)?,
            };
            let wf = wf.unwrap_or_else(|| default_omega_f(None, wr));
            Element::Plain(conventional_cglp(wr, g, wf, alpha)?)
        }
        ElementKind::BandpassedCglp
        | ElementKind::BandpassedClegg
        | ElementKind::BandpassedFore => {
            let (_, f, _) = filter(cfg)?;
            let wr = omega_r(r)?;
            let el = match kind {
                ElementKind::BandpassedCglp => build_bandpassed_cglp(&f, wr, g, wf, r.alpha)?,
                ElementKind::BandpassedClegg => build_bandpassed_clegg(&f, wr, g, wf)?,
                _ => {
                    let wrr = r
                        .omega_rr_hz
                        .map(hz)
                        .ok_or_else(|| missing("reset.omega_rr_hz"))?;
                    build_bandpassed_fore(&f, wr, g, wrr, wf)?
                }
            };
            Element::Shaped(Box::new(el))
        }
    })
}
