use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_args, ResetError};

/// Closed-form harmonics of the single-state reset lag
/// `A_r = −ω_r, B_r = ω_r, C_r = 1, D_r = 0` when the trigger leads the
/// base-linear reset state by `ψ`, i.e. the shift is `φ = ψ + atan(ω/ω_r)`.
///
/// For `n = 1` the base-linear response `1/(jω/ω_r + 1)` is added.
pub fn closed_form_single_state(
    omega_r: f64,
    gamma: f64,
    psi: f64,
    omega: f64,
    n: usize,
) -> Result<Complex64, ResetError> {
    check_args(omega, n)?;
    if n >= 2 && n.is_multiple_of(2) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let f = f_n(omega_r, gamma, omega, n)?;
    let nonlinear = f * (1.0 - Complex64::from_polar(1.0, -2.0 * psi));
    if n == 1 {
        let linear = 1.0 / Complex64::new(1.0, omega / omega_r);
        Ok(nonlinear + linear)
    } else {
        Ok(nonlinear)
    }
}

fn f_n(omega_r: f64, gamma: f64, omega: f64, n: usize) -> Result<Complex64, ResetError> {
    let decay = (-PI * omega_r / omega).exp();
    let delta = 1.0 + decay;
    let delta_rho = 1.0 + gamma * decay;
    if delta_rho == 0.0 || !delta_rho.is_finite() {
        return Err(ResetError::Singular {
            matrix: "delta_rho",
            omega,
        });
    }
    let ratio = omega / omega_r;
    let resolvent = 1.0 / Complex64::new(-omega_r, -(n as f64) * omega);
    let shape = Complex64::from_polar(omega / (PI * (1.0 + ratio * ratio).sqrt()), -ratio.atan());
    Ok(resolvent * shape * ((1.0 - gamma) * delta / delta_rho))
}

/// Magnitude of the nonlinear part of harmonic `n`, `|f(n,ω)(1 − e^{−j2ψ})|`.
pub fn harmonic_factor(
    omega_r: f64,
    gamma: f64,
    psi: f64,
    omega: f64,
    n: usize,
) -> Result<f64, ResetError> {
    check_args(omega, n)?;
    Ok((f_n(omega_r, gamma, omega, n)? * (1.0 - Complex64::from_polar(1.0, -2.0 * psi))).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resetfreq::{hosidf_shifted, ResetElement};

    #[test]
    fn zero_psi_leaves_linear_part() {
        for n in [3, 5, 7] {
            assert_eq!(
                closed_form_single_state(2.0, 0.0, 0.0, 3.0, n)
                    .unwrap()
                    .norm(),
                0.0
            );
        }
        let g = closed_form_single_state(2.0, 0.0, 0.0, 3.0, 1).unwrap();
        assert!((g - 1.0 / Complex64::new(1.0, 1.5)).norm() < 1e-15);
    }

    #[test]
    fn gamma_one_is_linear() {
        assert_eq!(
            closed_form_single_state(1.0, 1.0, 0.7, 3.0, 3)
                .unwrap()
                .norm(),
            0.0
        );
    }

    #[test]
    fn matches_shifted_matrix_formula() {
        let (wr, gamma, psi, w) = (1.0, 0.0, PI / 2.0, 10.0);
        let el = ResetElement::fore(wr, gamma);
        let phi = psi + (w / wr).atan();
        for n in [1, 3] {
            let a = closed_form_single_state(wr, gamma, psi, w, n).unwrap();
            let b = hosidf_shifted(&el, w, n, phi).unwrap();
            assert!((a - b).norm() < 1e-10 * b.norm(), "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn harmonics_decay_with_order() {
        let mags: Vec<f64> = [1, 3, 5, 7, 9]
            .iter()
            .map(|&n| f_n(1.0, 0.2, 4.0, n).unwrap().norm())
            .collect();
        assert!(mags.windows(2).all(|p| p[1] < p[0]));
    }
}
