use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;

use super::{HarmonicResponse, ResetError};
use crate::lincore::{Cascade, StateSpace, TransferFunction};

/// Linear base system plus the reset matrix applied at trigger zero crossings.
#[derive(Debug, Clone, PartialEq)]
pub struct ResetElement {
    base: StateSpace,
    a_rho: DMatrix<f64>,
    label: String,
}

impl ResetElement {
    pub fn new(base: StateSpace, a_rho: DMatrix<f64>) -> Result<Self, ResetError> {
        let n = base.order();
        if a_rho.nrows() != n || a_rho.ncols() != n {
            return Err(ResetError::ResetDimension {
                rows: a_rho.nrows(),
                cols: a_rho.ncols(),
                states: n,
            });
        }
        Ok(Self {
            base,
            a_rho,
            label: "reset element".into(),
        })
    }

    /// Diagonal reset matrix with one coefficient per state.
    pub fn with_gammas(base: StateSpace, gammas: &[f64]) -> Result<Self, ResetError> {
        let a_rho = DMatrix::from_diagonal(&DVector::from_column_slice(gammas));
        Self::new(base, a_rho)
    }

    /// Every state of `tf`'s realization resets by `gamma`.
    pub fn from_tf(tf: &TransferFunction, gamma: f64) -> Result<Self, ResetError> {
        let base = tf.to_state_space()?;
        let n = base.order();
        Self::with_gammas(base, &vec![gamma; n])
    }

    /// Series realization of `sections` in which only the states of
    /// `sections[core]` reset, by `gamma`.
    pub fn from_sections(sections: &Cascade, core: usize, gamma: f64) -> Result<Self, ResetError> {
        let secs = sections.sections();
        if core >= secs.len() {
            return Err(ResetError::Domain(format!(
                "core section {core} out of range for {} sections",
                secs.len()
            )));
        }
        let base = sections.to_state_space()?;
        let start: usize = secs[..core].iter().map(|s| s.order()).sum();
        let mut gammas = vec![1.0; base.order()];
        for g in &mut gammas[start..start + secs[core].order()] {
            *g = gamma;
        }
        Self::with_gammas(base, &gammas)
    }

    /// Reset integrator `1/s`.
    pub fn clegg(gamma: f64) -> Self {
        let base = StateSpace::new(
            DMatrix::zeros(1, 1),
            DVector::from_element(1, 1.0),
            RowDVector::from_element(1, 1.0),
            0.0,
        )
        .expect("1x1 realization");
        Self::with_gammas(base, &[gamma])
            .expect("1x1 reset matrix")
            .labelled(format!("Clegg gamma={gamma}"))
    }

    /// First-order reset lag `1/(s/ω_r + 1)` with `A_r = −ω_r`, `B_r = ω_r`.
    pub fn fore(omega_r: f64, gamma: f64) -> Self {
        let base = StateSpace::new(
            DMatrix::from_element(1, 1, -omega_r),
            DVector::from_element(1, omega_r),
            RowDVector::from_element(1, 1.0),
            0.0,
        )
        .expect("1x1 realization");
        Self::with_gammas(base, &[gamma])
            .expect("1x1 reset matrix")
            .labelled(format!("FORE omega_r={omega_r} gamma={gamma}"))
    }

    /// Second-order reset lag `1/((s/ω_r)² + 2βs/ω_r + 1)`, both states reset.
    pub fn sore(omega_r: f64, beta: f64, gamma: f64) -> Self {
        let tf = TransferFunction::new(
            vec![1.0],
            vec![1.0, 2.0 * beta / omega_r, 1.0 / (omega_r * omega_r)],
        )
        .expect("nonzero denominator");
        Self::from_tf(&tf, gamma)
            .expect("proper second-order lag")
            .labelled(format!("SORE omega_r={omega_r} beta={beta} gamma={gamma}"))
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn base(&self) -> &StateSpace {
        &self.base
    }

    pub fn a_rho(&self) -> &DMatrix<f64> {
        &self.a_rho
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    /// Diagonal of `A_ρ`.
    pub fn gammas(&self) -> Vec<f64> {
        self.a_rho.diagonal().iter().copied().collect()
    }

    /// Indices of states that actually change at a reset.
    pub fn reset_states(&self) -> Vec<usize> {
        (0..self.order())
            .filter(|&i| {
                (0..self.order()).any(|j| {
                    let id = if i == j { 1.0 } else { 0.0 };
                    self.a_rho[(i, j)] != id
                })
            })
            .collect()
    }

    /// `A_ρ = I`: resetting does nothing.
    pub fn is_identity_reset(&self) -> bool {
        self.a_rho == DMatrix::identity(self.order(), self.order())
    }

    /// Violations of the scalar necessary condition `|γ_i| ≤ 1`.
    pub fn warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .gammas()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.abs() > 1.0)
            .map(|(i, g)| format!("reset coefficient {g} of state {i} has magnitude above 1"))
            .collect();
        if !is_diagonal(&self.a_rho) {
            out.push("reset matrix is not diagonal".into());
        }
        out
    }

    /// Linear response of the base system.
    pub fn base_response(&self, omega: f64) -> Result<Complex64, ResetError> {
        Ok(self.base.eval_freq(omega)?)
    }
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
}

impl HarmonicResponse for ResetElement {
    fn harmonic(&self, omega: f64, n: usize) -> Result<Complex64, ResetError> {
        super::hosidf(self, omega, n)
    }

    fn harmonics(&self, omega: f64, orders: &[usize]) -> Result<Vec<Complex64>, ResetError> {
        let k = super::HosidfKernel::new(self, omega)?;
        orders.iter().map(|&n| k.harmonic(n)).collect()
    }

    fn is_linear(&self) -> bool {
        self.is_identity_reset()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_have_expected_structure() {
        let c = ResetElement::clegg(0.0);
        assert_eq!(c.order(), 1);
        assert_eq!(c.base().a()[(0, 0)], 0.0);
        let f = ResetElement::fore(2.0, 0.3);
        assert_eq!(f.base().a()[(0, 0)], -2.0);
        assert_eq!(f.base().b()[0], 2.0);
        assert_eq!(f.gammas(), vec![0.3]);
        let s = ResetElement::sore(1.0, 0.5, 0.2);
        assert_eq!(s.order(), 2);
        assert_eq!(s.reset_states(), vec![0, 1]);
    }

    #[test]
    fn gamma_above_one_is_warned_not_rejected() {
        let f = ResetElement::fore(1.0, -1.5);
        assert_eq!(f.warnings().len(), 1);
        assert!(ResetElement::fore(1.0, -0.05).warnings().is_empty());
    }

    #[test]
    fn wrong_reset_dimension() {
        let base = ResetElement::fore(1.0, 0.0).base().clone();
        assert!(ResetElement::new(base, DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn sections_reset_only_core_states() {
        let c = Cascade::from_sections(vec![
            TransferFunction::lead_lag(1.0, 10.0),
            TransferFunction::first_order_lag(2.0),
            TransferFunction::new(vec![1.0], vec![1.0, 0.5, 0.1]).unwrap(),
        ]);
        let e = ResetElement::from_sections(&c, 1, 0.3).unwrap();
        assert_eq!(e.gammas(), vec![1.0, 0.3, 1.0, 1.0]);
        assert_eq!(e.reset_states(), vec![1]);
        assert!(ResetElement::from_sections(&c, 3, 0.3).is_err());
    }

    #[test]
    fn identity_reset_has_no_reset_states() {
        let e = ResetElement::fore(1.0, 1.0);
        assert!(e.is_identity_reset());
        assert!(e.reset_states().is_empty());
    }
}
