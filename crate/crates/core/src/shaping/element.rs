use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use super::{ShapingError, ShapingFilter};
use crate::lincore::{Cascade, FreqGrid, FrequencyResponse, TransferFunction};
use crate::resetfreq::{
    check_args, closed_form_single_state, find_omega_lb, hosidf, psi_profile, HarmonicResponse,
    PsiProfile, ResetElement, ResetError,
};

/// Linear filter after the reset core, in addition to `F⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// `W = (s/ω_rα + 1)/(s/ω_r + 1)`, `ω_rα = ω_r/α`.
    Cglp { alpha: f64 },
    /// `1/s`.
    Clegg,
    /// `1/(s/ω_rr + 1)`.
    Fore { omega_rr: f64 },
}

impl Tail {
    pub fn transfer_function(&self, omega_r: f64) -> TransferFunction {
        match *self {
            Tail::Cglp { alpha } => TransferFunction::lead_lag(omega_r / alpha, omega_r),
            Tail::Clegg => TransferFunction::integrator(),
            Tail::Fore { omega_rr } => TransferFunction::first_order_lag(omega_rr),
        }
    }
}

/// `K = R⁻¹/(s/ω_f + 1)` written directly as `(s/ω_r + 1)/(s/ω_f + 1)`, so
/// that `K R` is exactly a first-order low-pass.
pub fn k_filter(omega_r: f64, omega_f: f64) -> TransferFunction {
    TransferFunction::lead_lag(omega_r, omega_f)
}

/// `F → K → reset lag R → F⁻¹ → tail`, reset triggered by the input of `F`.
#[derive(Debug, Clone, Serialize)]
pub struct ShapedResetElement {
    filter: Option<ShapingFilter>,
    f: Cascade,
    k: TransferFunction,
    r: TransferFunction,
    t: Cascade,
    pub omega_r: f64,
    pub gamma: f64,
    pub omega_f: f64,
    pub tail: Tail,
    warnings: Vec<String>,
}

impl ShapedResetElement {
    /// `filter = None` means `F ≡ 1`.
    pub fn new(
        filter: Option<ShapingFilter>,
        omega_r: f64,
        gamma: f64,
        omega_f: f64,
        tail: Tail,
    ) -> Result<Self, ShapingError> {
        if !(omega_r > 0.0 && omega_f > 0.0) {
            return Err(ShapingError::InvalidSpec(
                "omega_r and omega_f must be positive".into(),
            ));
        }
        if let Tail::Cglp { alpha } = tail {
            if !(alpha > 0.0) {
                return Err(ShapingError::InvalidSpec(format!(
                    "alpha must be positive, got {alpha}"
                )));
            }
        }
        if let Tail::Fore { omega_rr } = tail {
            if !(omega_rr > 0.0) {
                return Err(ShapingError::InvalidSpec(
                    "omega_rr must be positive".into(),
                ));
            }
        }
        let mut warnings = Vec::new();
        if gamma.abs() > 1.0 {
            warnings.push(format!("reset coefficient {gamma} has magnitude above 1"));
        }
        if gamma < 0.0 {
            warnings.push(format!("negative reset coefficient {gamma}"));
        }
        if omega_f < 20.0 * omega_r {
            warnings.push(format!(
                "omega_f = {omega_f} is below 20 omega_r = {}",
                20.0 * omega_r
            ));
        }
        let f = filter
            .as_ref()
            .map(|f| f.realized().clone())
            .unwrap_or_default();
        let finv = filter.as_ref().map(|f| f.inverse()).unwrap_or_default();
        Ok(Self {
            filter,
            f,
            k: k_filter(omega_r, omega_f),
            r: TransferFunction::first_order_lag(omega_r),
            t: finv.then(tail.transfer_function(omega_r)),
            omega_r,
            gamma,
            omega_f,
            tail,
            warnings,
        })
    }

    pub fn filter(&self) -> Option<&ShapingFilter> {
        self.filter.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `Q = F K`: from the trigger signal to the reset core's input.
    pub fn q_response(&self, omega: f64) -> Complex64 {
        let s = Complex64::new(0.0, omega);
        self.f.eval(s) * self.k.eval(s)
    }

    pub fn t_response(&self, omega: f64) -> Complex64 {
        self.t.eval(Complex64::new(0.0, omega))
    }

    /// Principal value of `ψ(ω) = ∠(F K R)(jω)`.
    pub fn psi(&self, omega: f64) -> f64 {
        self.psi_response(omega).arg()
    }

    fn psi_response(&self, omega: f64) -> Complex64 {
        self.q_response(omega) * self.r.eval(Complex64::new(0.0, omega))
    }

    pub fn psi_profile(&self, grid: &FreqGrid) -> PsiProfile {
        psi_profile(|w| self.psi_response(w), grid)
    }

    /// Zero crossings of `ψ` in `[lo, hi]`.
    pub fn omega_lb(&self, lo: f64, hi: f64) -> Result<Vec<f64>, ShapingError> {
        let grid = FreqGrid::per_decade(lo, hi, 200)?;
        Ok(find_omega_lb(&self.psi_profile(&grid), |w| {
            self.psi_response(w)
        }))
    }

    /// Every linear section in signal order with the reset core at index
    /// [`Self::core_index`].
    pub fn sections(&self) -> Cascade {
        self.f
            .clone()
            .then(self.k.clone())
            .then(self.r.clone())
            .extend(&self.t)
    }

    pub fn core_index(&self) -> usize {
        self.f.sections().len() + 1
    }

    /// State-space form for the matrix describing function and the simulator.
    pub fn to_reset_element(&self) -> Result<ResetElement, ShapingError> {
        Ok(
            ResetElement::from_sections(&self.sections(), self.core_index(), self.gamma)?
                .labelled(format!("shaped reset element gamma={}", self.gamma)),
        )
    }

    /// Base-linear twin (`γ = 1`).
    pub fn linear_twin(&self) -> Self {
        let mut lin = self.clone();
        lin.gamma = 1.0;
        lin
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        let mut e = self.clone();
        e.gamma = gamma;
        e
    }
}

impl HarmonicResponse for ShapedResetElement {
    /// `H_n(ω) = Q(jω) G_φn(ω) T(jnω)` with the single-state closed form for
    /// `G_φn` and `φ = ψ + atan(ω/ω_r)`.
    fn harmonic(&self, omega: f64, n: usize) -> Result<Complex64, ResetError> {
        check_args(omega, n)?;
        if n >= 2 && n.is_multiple_of(2) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let g = closed_form_single_state(self.omega_r, self.gamma, self.psi(omega), omega, n)?;
        Ok(self.q_response(omega) * g * self.t_response(n as f64 * omega))
    }

    fn is_linear(&self) -> bool {
        self.gamma == 1.0
    }
}

impl FrequencyResponse for ShapedResetElement {
    /// First harmonic.
    fn response(&self, omega: f64) -> Complex64 {
        self.harmonic(omega, 1)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
}

/// `max(20 ω_c, 100 ω_r)`, the `K` low-pass corner used when none is given.
pub fn default_omega_f(filter: Option<&ShapingFilter>, omega_r: f64) -> f64 {
    let wc = filter.map_or(0.0, |f| f.omega_c());
    (20.0 * wc).max(100.0 * omega_r)
}

/// Band-passed CgLp. With `alpha = None` the corner correction is fitted so
/// the in-band first-harmonic gain matches the base-linear one.
pub fn build_bandpassed_cglp(
    filter: &ShapingFilter,
    omega_r: f64,
    gamma: f64,
    omega_f: Option<f64>,
    alpha: Option<f64>,
) -> Result<ShapedResetElement, ShapingError> {
    let omega_f = omega_f.unwrap_or_else(|| default_omega_f(Some(filter), omega_r));
    let alpha = match alpha {
        Some(a) => a,
        None => fit_alpha_inband(Some(filter), omega_r, gamma, omega_f, filter.omega_c())?,
    };
    ShapedResetElement::new(
        Some(filter.clone()),
        omega_r,
        gamma,
        omega_f,
        Tail::Cglp { alpha },
    )
}

/// Band-passed Clegg integrator, `T = F⁻¹/s`.
pub fn build_bandpassed_clegg(
    filter: &ShapingFilter,
    omega_r: f64,
    gamma: f64,
    omega_f: Option<f64>,
) -> Result<ShapedResetElement, ShapingError> {
    let omega_f = omega_f.unwrap_or_else(|| default_omega_f(Some(filter), omega_r));
    ShapedResetElement::new(Some(filter.clone()), omega_r, gamma, omega_f, Tail::Clegg)
}

/// Band-passed FORE, `T = F⁻¹/(s/ω_rr + 1)`.
pub fn build_bandpassed_fore(
    filter: &ShapingFilter,
    omega_r: f64,
    gamma: f64,
    omega_rr: f64,
    omega_f: Option<f64>,
) -> Result<ShapedResetElement, ShapingError> {
    let omega_f = omega_f.unwrap_or_else(|| default_omega_f(Some(filter), omega_r));
    ShapedResetElement::new(
        Some(filter.clone()),
        omega_r,
        gamma,
        omega_f,
        Tail::Fore { omega_rr },
    )
}

/// Conventional FORE CgLp: reset lag `1/(s/ω_rα + 1)` then the linear lead
/// `(s/ω_r + 1)/(s/ω_f + 1)`.
pub fn conventional_cglp(
    omega_r: f64,
    gamma: f64,
    omega_f: f64,
    alpha: f64,
) -> Result<ResetElement, ShapingError> {
    let c = Cascade::from_sections(vec![
        TransferFunction::first_order_lag(omega_r / alpha),
        TransferFunction::lead_lag(omega_r, omega_f),
    ]);
    Ok(ResetElement::from_sections(&c, 0, gamma)?
        .labelled(format!("conventional CgLp gamma={gamma} alpha={alpha}")))
}

/// `α` such that the reset FORE with corner `ω_r/α` has first-harmonic gain
/// `1/√2` at `ω_r`. Frequency-normalized to `ω_r = 1`; bisection on `[0.1, 10]`.
pub fn fit_alpha(gamma: f64) -> Result<f64, ShapingError> {
    if gamma == 1.0 {
        return Ok(1.0);
    }
    if !(gamma.abs() < 1.0) {
        return Err(ShapingError::InvalidSpec(format!(
            "fit_alpha needs |gamma| < 1, got {gamma}"
        )));
    }
    let g = |alpha: f64| -> Result<f64, ShapingError> {
        Ok(hosidf(&ResetElement::fore(1.0 / alpha, gamma), 1.0, 1)?.norm() - FRAC_1_SQRT_2)
    };
    bisect(g, 0.1, 10.0)
}

/// In-band `α` of a shaped CgLp: ratio of base-linear to reset first-harmonic
/// gain at `omega`, both evaluated with `W = 1`.
pub fn fit_alpha_inband(
    filter: Option<&ShapingFilter>,
    omega_r: f64,
    gamma: f64,
    omega_f: f64,
    omega: f64,
) -> Result<f64, ShapingError> {
    let el = ShapedResetElement::new(
        filter.cloned(),
        omega_r,
        gamma,
        omega_f,
        Tail::Cglp { alpha: 1.0 },
    )?;
    let reset = el.harmonic(omega, 1)?.norm();
    let linear = el.linear_twin().harmonic(omega, 1)?.norm();
    Ok(linear / reset)
}

fn bisect(
    f: impl Fn(f64) -> Result<f64, ShapingError>,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64, ShapingError> {
    let (a, b) = (lo, hi);
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.signum() == fhi.signum() {
        return Err(ShapingError::Bracket { lo: a, hi: b });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
