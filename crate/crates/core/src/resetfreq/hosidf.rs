use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_args, HarmonicResponse, ResetElement, ResetError};
use crate::lincore::FreqGrid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn solve_real(
    m: DMatrix<f64>,
    rhs: &DVector<f64>,
    matrix: &'static str,
    omega: f64,
) -> Result<DVector<f64>, ResetError> {
    let scale = m.amax();
    let x = m
        .clone()
        .lu()
        .solve(rhs)
        .filter(|x| x.iter().all(|v| v.is_finite()));
    match x {
        // reject solutions that do not actually solve the system
        Some(x) if (&m * &x - rhs).amax() <= 1e-8 * (scale * x.amax() + rhs.amax()) => Ok(x),
        _ => Err(ResetError::Singular { matrix, omega }),
    }
}

/// `C (s I − A)⁻¹ x` for complex `s` and `x`.
fn resolvent(
    el: &ResetElement,
    s: Complex64,
    x: &DVector<Complex64>,
    omega: f64,
) -> Result<Complex64, ResetError> {
    let a = el.base().a();
    let n = a.nrows();
    let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
        let diag = if i == j { s } else { ZERO };
        diag - a[(i, j)]
    });
    let sol = m.lu().solve(x).ok_or(ResetError::Singular {
        matrix: "sI - A",
        omega,
    })?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(ResetError::Singular {
            matrix: "sI - A",
            omega,
        });
    }
    Ok(el
        .base()
        .c()
        .iter()
        .zip(sol.iter())
        .map(|(c, v)| *c * v)
        .sum())
}

struct Common {
    delta: DMatrix<f64>,
    delta_rho: DMatrix<f64>,
    v: DVector<f64>,
}

fn common(el: &ResetElement, omega: f64) -> Result<Common, ResetError> {
    let a = el.base().a();
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let lambda = &id * (omega * omega) + a * a;
    let e = (a * (PI / omega)).exp();
    let delta = &id + &e;
    let delta_rho = &id + el.a_rho() * &e;
    let v = solve_real(lambda, el.base().b(), "Lambda", omega)?;
    Ok(Common {
        delta,
        delta_rho,
        v,
    })
}

/// Per-frequency state of the unshifted describing function: the vector
/// `ΘB`, from which every harmonic follows with one linear solve.
pub struct HosidfKernel<'a> {
    el: &'a ResetElement,
    omega: f64,
    theta_b: DVector<f64>,
}

impl<'a> HosidfKernel<'a> {
    pub fn new(el: &'a ResetElement, omega: f64) -> Result<Self, ResetError> {
        check_args(omega, 1)?;
        if el.order() == 0 {
            return Ok(Self {
                el,
                omega,
                theta_b: DVector::zeros(0),
            });
        }
        let Common {
            delta,
            delta_rho,
            v,
        } = common(el, omega)?;
        let rhs = el.a_rho() * (&delta * &v);
        let w = solve_real(delta_rho, &rhs, "Delta_rho", omega)?;
        let theta_b = &delta * (w - &v) * (-2.0 * omega * omega / PI);
        Ok(Self { el, omega, theta_b })
    }

    pub fn theta_b(&self) -> &DVector<f64> {
        &self.theta_b
    }

    pub fn harmonic(&self, n: usize) -> Result<Complex64, ResetError> {
        check_args(self.omega, n)?;
        let d = Complex64::new(self.el.base().d(), 0.0);
        if self.el.order() == 0 {
            return Ok(if n == 1 { d } else { ZERO });
        }
        let j = Complex64::i();
        let s = j * (n as f64 * self.omega);
        match n {
            1 => {
                let x = DVector::from_fn(self.theta_b.len(), |i, _| {
                    Complex64::new(self.el.base().b()[i], self.theta_b[i])
                });
                Ok(resolvent(self.el, s, &x, self.omega)? + d)
            }
            _ if n.is_multiple_of(2) => Ok(ZERO),
            _ => {
                let x = self.theta_b.map(|t| j * t);
                resolvent(self.el, s, &x, self.omega)
            }
        }
    }
}

/// Unshifted describing function: reset instants at the zeros of `sin(ωt)`.
pub fn hosidf(el: &ResetElement, omega: f64, n: usize) -> Result<Complex64, ResetError> {
    check_args(omega, n)?;
    HosidfKernel::new(el, omega)?.harmonic(n)
}

/// Per-frequency state of the describing function with the trigger
/// `sin(ωt − φ)`: the complex vector `Θ_φ`.
pub struct ShiftedKernel<'a> {
    el: &'a ResetElement,
    omega: f64,
    theta_phi: DVector<Complex64>,
}

impl<'a> ShiftedKernel<'a> {
    pub fn new(el: &'a ResetElement, omega: f64, phi: f64) -> Result<Self, ResetError> {
        check_args(omega, 1)?;
        if el.order() == 0 {
            return Ok(Self {
                el,
                omega,
                theta_phi: DVector::zeros(0),
            });
        }
        let Common {
            delta,
            delta_rho,
            v,
        } = common(el, omega)?;
        let a = el.base().a();
        let x = &v * (omega * phi.cos()) + a * &v * phi.sin();
        let dx = &delta * &x;
        let inner = solve_real(delta_rho, &(el.a_rho() * &dx), "Delta_rho", omega)?;
        let omega_x = dx - &delta * inner;
        let k = Complex64::new(0.0, -2.0 * omega / PI) * Complex64::from_polar(1.0, -phi);
        let theta_phi = omega_x.map(|t| k * t);
        Ok(Self {
            el,
            omega,
            theta_phi,
        })
    }

    pub fn harmonic(&self, n: usize) -> Result<Complex64, ResetError> {
        check_args(self.omega, n)?;
        let d = Complex64::new(self.el.base().d(), 0.0);
        if self.el.order() == 0 {
            return Ok(if n == 1 { d } else { ZERO });
        }
        let s = Complex64::new(0.0, n as f64 * self.omega);
        // C (A − sI)⁻¹ Θ_φ = −C (sI − A)⁻¹ Θ_φ
        let nonlinear = -resolvent(self.el, s, &self.theta_phi, self.omega)?;
        match n {
            1 => {
                let b = self.el.base().b().map(|v| Complex64::new(v, 0.0));
                Ok(nonlinear + resolvent(self.el, s, &b, self.omega)? + d)
            }
            _ if n.is_multiple_of(2) => Ok(ZERO),
            _ => Ok(nonlinear),
        }
    }
}

/// Describing function with reset instants at the zeros of `sin(ωt − φ)`.
pub fn hosidf_shifted(
    el: &ResetElement,
    omega: f64,
    n: usize,
    phi: f64,
) -> Result<Complex64, ResetError> {
    check_args(omega, n)?;
    ShiftedKernel::new(el, omega, phi)?.harmonic(n)
}

/// Sweep of the odd harmonics (plus the first) over a frequency grid.
#[derive(Debug, Clone, Serialize)]
pub struct HosidfResult {
    pub grid: FreqGrid,
    pub orders: Vec<usize>,
    /// `values[k][i]` is order `orders[k]` at `grid.points()[i]`.
    pub values: Vec<Vec<Complex64>>,
    pub gamma: Option<f64>,
    pub meta: String,
}

impl HosidfResult {
    /// Value at order `n` and grid index `i`; even orders are zero.
    pub fn get(&self, n: usize, i: usize) -> Option<Complex64> {
        if n >= 2 && n.is_multiple_of(2) {
            return (i < self.grid.len()).then_some(ZERO);
        }
        let k = self.orders.iter().position(|&o| o == n)?;
        self.values[k].get(i).copied()
    }

    pub fn series(&self, n: usize) -> Option<Vec<Complex64>> {
        let k = self.orders.iter().position(|&o| o == n)?;
        Some(self.values[k].clone())
    }

    /// Rows `(omega, n, value)` ordered by frequency then order.
    pub fn rows(&self) -> Vec<(f64, usize, Complex64)> {
        let mut out = Vec::with_capacity(self.grid.len() * self.orders.len());
        for (i, &w) in self.grid.points().iter().enumerate() {
            for (k, &n) in self.orders.iter().enumerate() {
                out.push((w, n, self.values[k][i]));
            }
        }
        out
    }
}

/// Odd orders `1, 3, …, ≤ max_order`.
pub fn odd_orders(max_order: usize) -> Vec<usize> {
    (1..=max_order.max(1)).step_by(2).collect()
}

/// Evaluates every grid point in parallel. Linear evaluators only store `n = 1`.
pub fn hosidf_sweep<H: HarmonicResponse + ?Sized>(
    h: &H,
    grid: &FreqGrid,
    max_order: usize,
) -> Result<HosidfResult, ResetError> {
    let orders = if h.is_linear() {
        vec![1]
    } else {
        odd_orders(max_order)
    };
    let per_point: Vec<Vec<Complex64>> = grid
        .points()
        .par_iter()
        .map(|&w| h.harmonics(w, &orders))
        .collect::<Result<_, _>>()?;
    let values = (0..orders.len())
        .map(|k| per_point.iter().map(|p| p[k]).collect())
        .collect();
    Ok(HosidfResult {
        grid: grid.clone(),
        orders,
        values,
        gamma: None,
        meta: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn clegg_first_harmonic() {
        let el = ResetElement::clegg(0.0);
        for w in [0.1, 1.0, 10.0, 100.0] {
            let g = hosidf(&el, w, 1).unwrap();
            let want = Complex64::new(1.0, 4.0 / PI) / Complex64::new(0.0, w);
            assert!(close(g, want, 1e-12));
            assert!((g.norm() * w - 1.619).abs() < 1e-3);
            assert!((g.arg().to_degrees() + 38.15).abs() < 0.01);
        }
    }

    #[test]
    fn clegg_third_harmonic() {
        let g = hosidf(&ResetElement::clegg(0.0), 1.0, 3).unwrap();
        assert!((g.re - 4.0 / (3.0 * PI)).abs() < 1e-12);
        assert!(g.im.abs() < 1e-12);
    }

    #[test]
    fn clegg_general_gamma() {
        let gamma: f64 = 0.47;
        let theta = 4.0 / PI * (1.0 - gamma) / (1.0 + gamma);
        let g = hosidf(&ResetElement::clegg(gamma), 2.0, 1).unwrap();
        assert!((g.arg() - (theta.atan() - PI / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn even_orders_vanish() {
        let el = ResetElement::sore(1.0, 0.5, 0.2);
        for n in [2, 4, 6] {
            assert_eq!(hosidf(&el, 1.3, n).unwrap(), ZERO);
            assert_eq!(hosidf_shifted(&el, 1.3, n, 0.4).unwrap(), ZERO);
        }
    }

    #[test]
    fn identity_reset_is_linear() {
        let el = ResetElement::sore(2.0, 0.3, 1.0);
        let lin = el.base().eval_freq(1.7).unwrap();
        assert!(close(hosidf(&el, 1.7, 1).unwrap(), lin, 1e-12));
        assert!(hosidf(&el, 1.7, 3).unwrap().norm() < 1e-14);
        assert!(close(hosidf_shifted(&el, 1.7, 1, 0.8).unwrap(), lin, 1e-12));
        assert!(hosidf_shifted(&el, 1.7, 5, 0.8).unwrap().norm() < 1e-14);
    }

    #[test]
    fn zero_shift_matches_unshifted() {
        for el in [
            ResetElement::fore(1.0, 0.3),
            ResetElement::sore(1.0, 0.5, -0.2),
            ResetElement::clegg(0.1),
        ] {
            for w in [0.1, 1.0, 10.0] {
                for n in [1, 3, 5] {
                    let a = hosidf(&el, w, n).unwrap();
                    let b = hosidf_shifted(&el, w, n, 0.0).unwrap();
                    assert!(
                        (a - b).norm() < 1e-10 * a.norm().max(1.0),
                        "{} w={w} n={n}",
                        el.label()
                    );
                }
            }
        }
    }

    #[test]
    fn singular_delta_rho_reported() {
        // γ = −1 with A = 0 makes Δ_ρ = I − I = 0
        let err = hosidf(&ResetElement::clegg(-1.0), 1.0, 1).unwrap_err();
        assert!(matches!(
            err,
            ResetError::Singular {
                matrix: "Delta_rho",
                ..
            }
        ));
    }

    #[test]
    fn nonpositive_frequency_rejected() {
        assert!(hosidf(&ResetElement::clegg(0.0), 0.0, 1).is_err());
        assert!(matches!(
            hosidf(&ResetElement::clegg(0.0), 1.0, 0),
            Err(ResetError::ZeroOrder)
        ));
    }

    #[test]
    fn sweep_shapes() {
        let grid = FreqGrid::log_space(0.1, 10.0, 7).unwrap();
        let r = hosidf_sweep(&ResetElement::fore(1.0, 0.0), &grid, 7).unwrap();
        assert_eq!(r.orders, vec![1, 3, 5, 7]);
        assert_eq!(r.rows().len(), 28);
        assert_eq!(r.get(4, 2), Some(ZERO));
        let lin = hosidf_sweep(&ResetElement::fore(1.0, 1.0), &grid, 7).unwrap();
        assert_eq!(lin.orders, vec![1]);
    }
}
