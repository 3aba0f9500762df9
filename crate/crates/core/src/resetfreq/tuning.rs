use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use super::{harmonic_factor, ResetError};

/// High-frequency approximation of the first-harmonic phase of a
/// single-state reset lag driven with trigger lead `ψ`. Valid for
/// `ω > 10 ω_r`. The branch is chosen continuous with `−π/2` at `ψ = 0`.
pub fn phase_approx(gamma: f64, psi: f64) -> Result<f64, ResetError> {
    if gamma == -1.0 || !gamma.is_finite() {
        return Err(ResetError::Domain(format!(
            "phase approximation undefined for gamma = {gamma}"
        )));
    }
    let u = 2.0 * (1.0 - gamma) / (PI * (1.0 + gamma));
    let s = psi.sin();
    let r = (u * (2.0 * psi).sin() - 1.0).atan2(2.0 * u * s * s);
    Ok(if r > FRAC_PI_2 { r - TAU } else { r })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPsi {
    pub gamma: f64,
    pub psi: f64,
    /// `|f(3, ω_c)(1 − e^{−j2ψ})|` for a unit-corner element at `ω_c`.
    pub harmonic_factor: f64,
}

const SCAN_POINTS: usize = 2000;

/// All `(γ, ψ)` with `phase_approx(γ, ψ) = target` for `γ` in `gammas` and
/// `ψ` in `psi_range`, sorted by ascending third-harmonic factor evaluated
/// at `omega_ratio = ω_c/ω_r`. Gammas with no solution are omitted.
pub fn solve_gamma_psi(
    target: f64,
    gammas: &[f64],
    psi_range: (f64, f64),
    omega_ratio: f64,
) -> Result<Vec<GammaPsi>, ResetError> {
    let (lo, hi) = psi_range;
    if !(hi > lo) {
        return Err(ResetError::Domain("psi range must be increasing".into()));
    }
    let mut out = Vec::new();
    for &gamma in gammas {
        let resid = |psi: f64| phase_approx(gamma, psi).map(|p| p - target);
        let step = (hi - lo) / SCAN_POINTS as f64;
        let mut prev = (lo, resid(lo)?);
        if prev.1 == 0.0 {
            out.push(pair(gamma, lo, omega_ratio)?);
        }
        for i in 1..=SCAN_POINTS {
            let psi = if i == SCAN_POINTS {
                hi
            } else {
                lo + step * i as f64
            };
            let r = resid(psi)?;
            if r == 0.0 {
                out.push(pair(gamma, psi, omega_ratio)?);
            } else if prev.1 != 0.0 && r.signum() != prev.1.signum() {
                // skip the branch jump of the arctangent
                if (r - prev.1).abs() < PI {
                    let root = bisect(&resid, prev.0, psi, prev.1)?;
                    out.push(pair(gamma, root, omega_ratio)?);
                }
            }
            prev = (psi, r);
        }
    }
    out.sort_by(|a, b| a.harmonic_factor.total_cmp(&b.harmonic_factor));
    Ok(out)
}

fn pair(gamma: f64, psi: f64, omega_ratio: f64) -> Result<GammaPsi, ResetError> {
    Ok(GammaPsi {
        gamma,
        psi,
        harmonic_factor: harmonic_factor(1.0, gamma, psi, omega_ratio, 3)?,
    })
}

fn bisect(
    f: &impl Fn(f64) -> Result<f64, ResetError>,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
) -> Result<f64, ResetError> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
