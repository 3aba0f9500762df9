use serde::Serialize;

use super::{zeta_of_q, ConstraintForm, ShapingError, ShapingSpec};

const MAX_ITER: usize = 200;
const TOL: f64 = 1e-9;
const INITIAL_GUESSES: [(f64, f64); 6] = [
    (-0.6, 2.3),
    (-0.3, 1.5),
    (-0.9, 3.5),
    (-0.05, 1.05),
    (-0.15, 1.2),
    (-1.2, 5.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaQ {
    pub lambda: f64,
    pub q: f64,
    pub iterations: usize,
    /// Final residuals in radians.
    pub residuals: [f64; 2],
}

/// Phase of the anti-notch `N₁` at `x = ω/ω_l`.
pub(crate) fn n1_phase(x: f64, q: f64) -> f64 {
    let re = 1.0 - x * x;
    x.atan2(re) - (x / q).atan2(re)
}

/// Phase of the notch `N₂` at `y = ω/ω_h`.
pub(crate) fn n2_phase(y: f64, q: f64) -> f64 {
    -n1_phase(y, q)
}

/// Exact phase of `N₁ L_f N₂` with `L_f` evaluated in closed form.
pub fn exact_filter_phase(lambda: f64, q: f64, omega_l: f64, omega_h: f64, omega: f64) -> f64 {
    let lf = lambda * ((omega / omega_l).atan() - (omega / omega_h).atan());
    n1_phase(omega / omega_l, q) + lf + n2_phase(omega / omega_h, q)
}

fn residuals(spec: &ShapingSpec, lambda: f64, q: f64) -> [f64; 2] {
    let (wl, wh, wc) = (spec.omega_l, spec.omega_h, spec.omega_c);
    let zeta = zeta_of_q(q);
    let wm1 = zeta * wl;
    let lf = |w: f64| lambda * ((w / wl).atan() - (w / wh).atan());
    match spec.form {
        ConstraintForm::Symmetric => [
            lf(wc) + 2.0 * n1_phase(wc / wl, q) - spec.psi_f,
            lf(wm1) + n1_phase(zeta, q) - spec.epsilon2,
        ],
        ConstraintForm::FullFilter => [
            exact_filter_phase(lambda, q, wl, wh, wc) - spec.psi_f,
            exact_filter_phase(lambda, q, wl, wh, wm1) - spec.epsilon2,
        ],
        ConstraintForm::PinnedNotch { omega_pin, omega_f } => [
            exact_filter_phase(lambda, q, wl, wh, wc) - spec.psi_f,
            exact_filter_phase(lambda, q, wl, wh, omega_pin) - (omega_pin / omega_f).atan(),
        ],
    }
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

fn admissible(q: f64) -> bool {
    q > 1.0 && q.is_finite() && (zeta_of_q(q).powi(2) - 1.0).abs() > 1e-12
}

/// Solves the two phase constraints for `(λ, q)` with a damped Newton
/// iteration on a finite-difference Jacobian, trying several starting
/// points. The phases are the exact fractional ones, not a CRONE realization.
pub fn solve_lambda_q(spec: &ShapingSpec) -> Result<LambdaQ, ShapingError> {
    spec.validate()?;
    let mut best: Option<(f64, f64, [f64; 2], usize)> = None;
    for (l0, q0) in INITIAL_GUESSES {
        match newton(spec, l0, q0) {
            Ok(sol) => return Ok(sol),
            Err((l, q, r, it)) => {
                if best.is_none_or(|b| norm(r) < norm(b.2)) {
                    best = Some((l, q, r, it));
                }
            }
        }
    }
    let (lambda, q, r, iterations) = best.expect("at least one initial guess");
    Err(ShapingError::NoConvergence {
        iterations,
        lambda,
        q,
        r1: r[0],
        r2: r[1],
    })
}

fn newton(spec: &ShapingSpec, l0: f64, q0: f64) -> Result<LambdaQ, (f64, f64, [f64; 2], usize)> {
    let (mut l, mut q) = (l0, q0);
    let mut r = residuals(spec, l, q);
    for it in 0..MAX_ITER {
        if r[0].abs() < TOL && r[1].abs() < TOL {
            return Ok(LambdaQ {
                lambda: l,
                q,
                iterations: it,
                residuals: r,
            });
        }
        let hl = 1e-7 * l.abs().max(1.0);
        let hq = 1e-7 * q.abs().max(1.0);
        let rl = residuals(spec, l + hl, q);
        let rq = residuals(spec, l, q + hq);
        let j = [
            [(rl[0] - r[0]) / hl, (rq[0] - r[0]) / hq],
            [(rl[1] - r[1]) / hl, (rq[1] - r[1]) / hq],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err((l, q, r, it));
        }
        let dl = -(j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dq = -(-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (nl, nq) = (l + t * dl, q + t * dq);
            if admissible(nq) {
                let nr = residuals(spec, nl, nq);
                if norm(nr) < norm(r) {
                    l = nl;
                    q = nq;
                    r = nr;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err((l, q, r, it));
        }
    }
    if r[0].abs() < TOL && r[1].abs() < TOL {
        Ok(LambdaQ {
            lambda: l,
            q,
            iterations: MAX_ITER,
            residuals: r,
        })
    } else {
        Err((l, q, r, MAX_ITER))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn n1_phase_matches_rational_evaluation() {
        let q = 2.4;
        let n1 =
            crate::lincore::TransferFunction::new(vec![1.0, 1.0, 1.0], vec![1.0, 1.0 / q, 1.0])
                .unwrap();
        for x in [0.1, 0.7, 1.0, 3.0, 30.0] {
            let want = n1.eval_freq(x).unwrap().arg();
            assert!((n1_phase(x, q) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn symmetric_decade_solution_satisfies_constraints() {
        let spec = ShapingSpec::decade(1.0, (-57.34f64).to_radians()).unwrap();
        let s = solve_lambda_q(&spec).unwrap();
        let r = residuals(&spec, s.lambda, s.q);
        assert!(r[0].abs() < 1e-9 && r[1].abs() < 1e-9);
        // printed decade expansions
        let r10 = 10f64.sqrt();
        let z = zeta_of_q(s.q);
        let c1 = s.lambda * (r10.atan() - (1.0 / r10).atan())
            + 2.0 * ((r10 / (9.0 * s.q)).atan() - (r10 / 9.0).atan());
        let c2 = s.lambda * (z.atan() - (z / 10.0).atan()) + (z / (1.0 - z * z)).atan()
            - ((z / s.q) / (1.0 - z * z)).atan();
        assert!((c1 - spec.psi_f).abs() < 1e-9);
        assert!((c2 - PI / 180.0).abs() < 1e-9);
    }

    #[test]
    fn small_target_needs_little_lag() {
        let spec = ShapingSpec::decade(1.0, (-1.0f64).to_radians()).unwrap();
        let s = solve_lambda_q(&spec).unwrap();
        assert!(s.lambda.abs() < 0.02, "{s:?}");
    }

    #[test]
    fn full_filter_and_pinned_forms_converge() {
        let base = ShapingSpec::decade(1.0, (-57.34f64).to_radians()).unwrap();
        let full = solve_lambda_q(&base.with_form(ConstraintForm::FullFilter)).unwrap();
        assert!(
            (exact_filter_phase(full.lambda, full.q, 1.0, 10.0, 10f64.sqrt()) - base.psi_f).abs()
                < 1e-9
        );
        let pinned = base.with_form(ConstraintForm::PinnedNotch {
            omega_pin: 0.7,
            omega_f: 100.0,
        });
        let p = solve_lambda_q(&pinned).unwrap();
        let psi = exact_filter_phase(p.lambda, p.q, 1.0, 10.0, 0.7) - (0.7f64 / 100.0).atan();
        assert!(psi.abs() < 1e-9);
    }

    #[test]
    fn contradictory_constraints_report_residuals() {
        // pinning ψ = 0 at ω_c contradicts ∠F(ω_c) = ψ_f < 0
        let wc = 10f64.sqrt();
        let spec = ShapingSpec::decade(1.0, (-30.0f64).to_radians())
            .unwrap()
            .with_form(ConstraintForm::PinnedNotch {
                omega_pin: wc,
                omega_f: 1e3,
            });
        match solve_lambda_q(&spec) {
            Err(ShapingError::NoConvergence { r1, r2, .. }) => {
                assert!(r1.abs().max(r2.abs()) > 1e-3)
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
