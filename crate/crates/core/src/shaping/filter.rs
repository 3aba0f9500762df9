use num_complex::Complex64;
use serde::Serialize;

use super::solve::{exact_filter_phase, solve_lambda_q};
use super::{zeta_of_q, LambdaQ, ShapingError, ShapingSpec};
use crate::lincore::{Cascade, FractionalLag, FreqGrid, FrequencyResponse, TransferFunction};
use crate::resetfreq::{find_omega_lb, psi_profile};

/// `F = N₁ L_f N₂`, kept both in exact form (for design) and as a rational
/// cascade with `L_f` replaced by its CRONE approximation (for realization).
#[derive(Debug, Clone, Serialize)]
pub struct ShapingFilter {
    pub lambda: f64,
    pub q: f64,
    pub crone_n: usize,
    n1: TransferFunction,
    n2: TransferFunction,
    lf: FractionalLag,
    realized: Cascade,
}

impl ShapingFilter {
    pub fn from_parameters(
        lambda: f64,
        q: f64,
        omega_l: f64,
        omega_h: f64,
        crone_n: usize,
    ) -> Result<Self, ShapingError> {
        if crone_n == 0 {
            return Err(ShapingError::InvalidSpec(
                "CRONE section count must be at least 1".into(),
            ));
        }
        if !(q > 0.0) {
            return Err(ShapingError::InvalidSpec(format!(
                "q must be positive, got {q}"
            )));
        }
        let lf = FractionalLag::new(lambda, omega_l, omega_h)?;
        let (wl, wh) = (omega_l, omega_h);
        let n1 = TransferFunction::new(
            vec![1.0, 1.0 / wl, 1.0 / (wl * wl)],
            vec![1.0, 1.0 / (q * wl), 1.0 / (wl * wl)],
        )?;
        let n2 = TransferFunction::new(
            vec![1.0, 1.0 / (q * wh), 1.0 / (wh * wh)],
            vec![1.0, 1.0 / wh, 1.0 / (wh * wh)],
        )?;
        let realized = Cascade::from_sections(vec![n1.clone()])
            .extend(&lf.crone_sections(crone_n))
            .then(n2.clone());
        if realized.sections().iter().any(|s| !s.is_biproper()) {
            return Err(ShapingError::InvalidSpec(
                "realized shaping filter is not biproper".into(),
            ));
        }
        Ok(Self {
            lambda,
            q,
            crone_n,
            n1,
            n2,
            lf,
            realized,
        })
    }

    /// Solves `(λ, q)` for `spec` and assembles the filter.
    pub fn build(spec: &ShapingSpec, crone_n: usize) -> Result<(Self, LambdaQ), ShapingError> {
        let sol = solve_lambda_q(spec)?;
        let f = Self::from_parameters(sol.lambda, sol.q, spec.omega_l, spec.omega_h, crone_n)?;
        Ok((f, sol))
    }

    pub fn omega_l(&self) -> f64 {
        self.lf.omega_l
    }

    pub fn omega_h(&self) -> f64 {
        self.lf.omega_h
    }

    pub fn omega_c(&self) -> f64 {
        (self.lf.omega_l * self.lf.omega_h).sqrt()
    }

    pub fn n1(&self) -> &TransferFunction {
        &self.n1
    }

    pub fn n2(&self) -> &TransferFunction {
        &self.n2
    }

    pub fn lf(&self) -> &FractionalLag {
        &self.lf
    }

    /// `N₁`, CRONE sections, `N₂`.
    pub fn realized(&self) -> &Cascade {
        &self.realized
    }

    pub fn realized_tf(&self) -> TransferFunction {
        self.realized.to_tf()
    }

    /// `F⁻¹` as a cascade of inverted sections in reverse order.
    pub fn inverse(&self) -> Cascade {
        self.realized
            .inverse()
            .expect("biproper sections have nonzero numerators")
    }

    pub fn exact_response(&self, omega: f64) -> Complex64 {
        self.n1.eval(Complex64::new(0.0, omega))
            * self.lf.response(omega)
            * self.n2.eval(Complex64::new(0.0, omega))
    }

    pub fn exact_phase(&self, omega: f64) -> f64 {
        exact_filter_phase(self.lambda, self.q, self.lf.omega_l, self.lf.omega_h, omega)
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        self.realized.zeros()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.realized.poles()
    }

    /// Largest `|∠F|` (exact) outside `[ω_m1, ω_m2] = [ζω_l, ω_h/ζ]`, over
    /// three decades on each side. Closer to the band the lag of `L_f`
    /// necessarily dominates.
    pub fn out_of_band_bound(&self) -> f64 {
        let z = zeta_of_q(self.q);
        let (wm1, wm2) = (z * self.omega_l(), self.omega_h() / z);
        let below = FreqGrid::per_decade(wm1 * 1e-3, wm1, 400).expect("valid grid");
        let above = FreqGrid::per_decade(wm2, wm2 * 1e3, 400).expect("valid grid");
        below
            .points()
            .iter()
            .chain(above.points())
            .map(|&w| self.exact_phase(w).abs())
            .fold(0.0, f64::max)
    }

    /// Sign changes of `∠F` over four decades around the band.
    pub fn phase_crossings(&self, exact: bool) -> Vec<f64> {
        let grid = FreqGrid::per_decade(self.omega_l() * 1e-2, self.omega_h() * 1e2, 400)
            .expect("valid grid");
        let resp = |w: f64| {
            if exact {
                self.exact_response(w)
            } else {
                self.response(w)
            }
        };
        let profile = psi_profile(resp, &grid);
        find_omega_lb(&profile, resp)
    }
}

impl FrequencyResponse for ShapingFilter {
    fn response(&self, omega: f64) -> Complex64 {
        self.realized.eval(Complex64::new(0.0, omega))
    }
}

/// Solves and assembles in one step.
pub fn build_shaping_filter(
    spec: &ShapingSpec,
    crone_n: usize,
) -> Result<ShapingFilter, ShapingError> {
    ShapingFilter::build(spec, crone_n).map(|(f, _)| f)
}
