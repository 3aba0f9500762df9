use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{poly, FrequencyResponse, LinError, StateSpace};

/// Real-rational transfer function `num(s) / den(s)`, coefficients in
/// ascending powers of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl TransferFunction {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self, LinError> {
        let den = poly::trim(den);
        if den.is_empty() {
            return Err(LinError::ZeroDenominator);
        }
        let mut num = poly::trim(num);
        if num.is_empty() {
            num.push(0.0);
        }
        Ok(Self { num, den })
    }

    pub fn gain(k: f64) -> Self {
        Self {
            num: vec![k],
            den: vec![1.0],
        }
    }

    pub fn unity() -> Self {
        Self::gain(1.0)
    }

    /// `1 / s`
    pub fn integrator() -> Self {
        Self {
            num: vec![1.0],
            den: vec![0.0, 1.0],
        }
    }

    /// `1 / (s/corner + 1)`
    pub fn first_order_lag(corner: f64) -> Self {
        Self {
            num: vec![1.0],
            den: vec![1.0, 1.0 / corner],
        }
    }

    /// `(s/zero + 1) / (s/pole + 1)`
    pub fn lead_lag(zero: f64, pole: f64) -> Self {
        Self {
            num: vec![1.0, 1.0 / zero],
            den: vec![1.0, 1.0 / pole],
        }
    }

    /// `k (1 + omega_i / s)`
    pub fn pi(k: f64, omega_i: f64) -> Self {
        Self {
            num: vec![k * omega_i, k],
            den: vec![0.0, 1.0],
        }
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    /// Number of states of a minimal companion realization.
    pub fn order(&self) -> usize {
        poly::degree(&self.den)
    }

    pub fn is_proper(&self) -> bool {
        poly::degree(&self.num) <= poly::degree(&self.den)
    }

    pub fn is_biproper(&self) -> bool {
        poly::degree(&self.num) == poly::degree(&self.den) && self.num.iter().any(|&c| c != 0.0)
    }

    /// Evaluates at an arbitrary complex `s` (no pole check).
    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly::eval(&self.num, s) / poly::eval(&self.den, s)
    }

    pub fn eval_freq(&self, omega: f64) -> Result<Complex64, LinError> {
        if !(omega > 0.0) {
            return Err(LinError::NonPositiveFrequency(omega));
        }
        let s = Complex64::new(0.0, omega);
        let den = poly::eval(&self.den, s);
        let scale = poly::magnitude_scale(&self.den, omega);
        if den.norm() <= 64.0 * f64::EPSILON * scale {
            return Err(LinError::PoleOnAxis { omega });
        }
        Ok(poly::eval(&self.num, s) / den)
    }

    pub fn dc_gain(&self) -> f64 {
        self.num[0] / self.den[0]
    }

    /// Polynomial product; common factors are kept.
    pub fn series(&self, other: &TransferFunction) -> TransferFunction {
        TransferFunction {
            num: poly::trim(poly::mul(&self.num, &other.num)),
            den: poly::trim(poly::mul(&self.den, &other.den)),
        }
    }

    /// Swaps numerator and denominator.
    pub fn inverse(&self) -> Result<TransferFunction, LinError> {
        TransferFunction::new(self.den.clone(), self.num.clone())
    }

    pub fn scaled(&self, k: f64) -> TransferFunction {
        TransferFunction {
            num: self.num.iter().map(|c| c * k).collect(),
            den: self.den.clone(),
        }
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        poly::roots(&self.num)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        poly::roots(&self.den)
    }

    pub fn to_state_space(&self) -> Result<StateSpace, LinError> {
        tf_to_ss(self)
    }
}

impl FrequencyResponse for TransferFunction {
    fn response(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }
}

impl std::ops::Mul for &TransferFunction {
    type Output = TransferFunction;

    fn mul(self, rhs: Self) -> TransferFunction {
        self.series(rhs)
    }
}

/// `a · b` as a single polynomial ratio.
pub fn series(a: &TransferFunction, b: &TransferFunction) -> TransferFunction {
    a.series(b)
}

/// Observer canonical realization.
///
/// For `1/(s/ω+1)` this gives `A = -ω, B = ω, C = 1, D = 0`, so the single
/// state is the filter output itself. That is the realization the reset
/// formulas assume for a first-order reset element.
pub fn tf_to_ss(tf: &TransferFunction) -> Result<StateSpace, LinError> {
    if !tf.is_proper() {
        return Err(LinError::Improper {
            num: poly::degree(&tf.num),
            den: poly::degree(&tf.den),
        });
    }
    let n = tf.order();
    let lead = tf.den[n];
    let den: Vec<f64> = tf.den.iter().map(|c| c / lead).collect();
    let mut num: Vec<f64> = tf.num.iter().map(|c| c / lead).collect();
    num.resize(n + 1, 0.0);
    let d = num[n];
    let mut a = DMatrix::zeros(n, n);
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        a[(i, n - 1)] = -den[i];
    }
    let b = DVector::from_iterator(n, (0..n).map(|i| num[i] - d * den[i]));
    let mut c = RowDVector::zeros(n);
    if n > 0 {
        c[n - 1] = 1.0;
    }
    StateSpace::new(a, b, c, d)
}

/// A series connection kept in factored form.
///
/// High-order filters (a CRONE lag with six pole/zero pairs between two
/// notches spans ten or more orders) lose all accuracy once multiplied out
/// into a single polynomial; a cascade evaluates and realizes them section
/// by section instead.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    sections: Vec<TransferFunction>,
}

impl Cascade {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sections(sections: Vec<TransferFunction>) -> Self {
        Self { sections }
    }

    pub fn push(&mut self, tf: TransferFunction) {
        self.sections.push(tf);
    }

    pub fn then(mut self, tf: TransferFunction) -> Self {
        self.sections.push(tf);
        self
    }

    pub fn extend(mut self, other: &Cascade) -> Self {
        self.sections.extend(other.sections.iter().cloned());
        self
    }

    pub fn sections(&self) -> &[TransferFunction] {
        &self.sections
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn order(&self) -> usize {
        self.sections.iter().map(TransferFunction::order).sum()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, tf| acc * tf.eval(s))
    }

    pub fn eval_freq(&self, omega: f64) -> Result<Complex64, LinError> {
        self.sections
            .iter()
            .try_fold(Complex64::new(1.0, 0.0), |acc, tf| {
                Ok(acc * tf.eval_freq(omega)?)
            })
    }

    /// Phase as the sum of per-section phases. Each section's phase is a
    /// principal value, so this is continuous in `omega` whenever every
    /// section is of order ≤ 2 with stable or minimum-phase roots.
    pub fn phase_sum(&self, omega: f64) -> f64 {
        let s = Complex64::new(0.0, omega);
        self.sections.iter().map(|tf| tf.eval(s).arg()).sum()
    }

    /// Section-wise inverse (reversed order, each section inverted).
    pub fn inverse(&self) -> Result<Cascade, LinError> {
        let sections = self
            .sections
            .iter()
            .rev()
            .map(TransferFunction::inverse)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Cascade { sections })
    }

    /// Multiplies everything out. Only sensible for low total order.
    pub fn to_tf(&self) -> TransferFunction {
        self.sections
            .iter()
            .fold(TransferFunction::unity(), |acc, tf| acc.series(tf))
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        self.sections
            .iter()
            .flat_map(TransferFunction::zeros)
            .collect()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.sections
            .iter()
            .flat_map(TransferFunction::poles)
            .collect()
    }

    /// Series realization: the state vector is the concatenation of the
    /// section states in cascade order.
    pub fn to_state_space(&self) -> Result<StateSpace, LinError> {
        self.sections
            .iter()
            .try_fold(StateSpace::gain(1.0), |acc, tf| {
                Ok(acc.series(&tf_to_ss(tf)?))
            })
    }
}

impl FrequencyResponse for Cascade {
    fn response(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }
}

impl From<TransferFunction> for Cascade {
    fn from(tf: TransferFunction) -> Self {
        Cascade { sections: vec![tf] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn plant() -> TransferFunction {
        TransferFunction::new(vec![3.038e4], vec![243.3, 0.7413, 1.0]).unwrap()
    }

    #[test]
    fn plant_dc_gain() {
        let g = plant().eval_freq(1e-9).unwrap();
        assert!((g.norm() - 3.038e4 / 243.3).abs() < 1e-6);
        assert!((20.0 * g.norm().log10() - 41.93).abs() < 0.01);
    }

    #[test]
    fn identity_is_one() {
        let g = TransferFunction::unity().eval_freq(7.3).unwrap();
        assert_eq!(g, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn lag_at_corner() {
        let w = 5.0 * 2.0 * PI;
        let g = TransferFunction::first_order_lag(w).eval_freq(w).unwrap();
        assert!((g.norm() - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((g.arg().to_degrees() + 45.0).abs() < 1e-12);
    }

    #[test]
    fn pole_on_axis_is_reported() {
        // 1 / (s^2 + 4) has poles at ±2j
        let tf = TransferFunction::new(vec![1.0], vec![4.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            tf.eval_freq(2.0),
            Err(LinError::PoleOnAxis { .. })
        ));
        assert!(matches!(
            tf.eval_freq(0.0),
            Err(LinError::NonPositiveFrequency(_))
        ));
    }

    #[test]
    fn empty_denominator_rejected() {
        assert_eq!(
            TransferFunction::new(vec![1.0], vec![0.0, 0.0]),
            Err(LinError::ZeroDenominator)
        );
    }

    #[test]
    fn series_cancellation_numerically_exact() {
        let w = 3.0;
        let lag = TransferFunction::first_order_lag(w);
        let lead = lag.inverse().unwrap();
        let prod = series(&lag, &lead);
        for omega in [0.01, 1.0, 3.0, 100.0, 1e4] {
            let g = prod.eval_freq(omega).unwrap();
            assert!((g - 1.0).norm() < 1e-12);
        }
        // common factor kept
        assert_eq!(prod.order(), 1);
        assert_eq!(prod.num(), prod.den());
    }

    #[test]
    fn series_with_unity_is_identity() {
        let p = plant();
        assert_eq!(series(&p, &TransferFunction::unity()), p);
    }

    #[test]
    fn tf_to_ss_first_order_lag_matches_reset_convention() {
        let w = 5.0 * 2.0 * PI;
        let ss = tf_to_ss(&TransferFunction::first_order_lag(w)).unwrap();
        assert_eq!(ss.order(), 1);
        assert!((ss.a()[(0, 0)] + w).abs() < 1e-12);
        assert!((ss.b()[0] - w).abs() < 1e-12);
        assert_eq!(ss.c()[0], 1.0);
        assert_eq!(ss.d(), 0.0);
    }

    #[test]
    fn tf_to_ss_constant() {
        let ss = tf_to_ss(&TransferFunction::gain(2.5)).unwrap();
        assert_eq!(ss.order(), 0);
        assert_eq!(ss.d(), 2.5);
    }

    #[test]
    fn tf_to_ss_plant_eigenvalues() {
        let ss = tf_to_ss(&plant()).unwrap();
        assert_eq!(ss.order(), 2);
        for ev in ss.eigenvalues() {
            assert!((ev.re + 0.7413 / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn improper_rejected() {
        let tf = TransferFunction::new(vec![0.0, 0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            tf_to_ss(&tf),
            Err(LinError::Improper { num: 2, den: 1 })
        ));
    }

    #[test]
    fn cascade_matches_polynomial_product() {
        let c = Cascade::new()
            .then(TransferFunction::lead_lag(2.0, 20.0))
            .then(TransferFunction::new(vec![1.0, 0.1, 0.01], vec![1.0, 0.02, 0.01]).unwrap())
            .then(TransferFunction::first_order_lag(7.0));
        let tf = c.to_tf();
        let ss = c.to_state_space().unwrap();
        for omega in [0.1, 1.0, 9.0, 55.0] {
            let a = c.eval_freq(omega).unwrap();
            assert!((a - tf.eval_freq(omega).unwrap()).norm() < 1e-12 * a.norm());
            assert!((a - ss.eval_freq(omega).unwrap()).norm() < 1e-10 * a.norm());
        }
        let inv = c.inverse().unwrap();
        assert!((c.eval_freq(3.3).unwrap() * inv.eval_freq(3.3).unwrap() - 1.0).norm() < 1e-12);
    }
}
