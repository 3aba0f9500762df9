use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::lincore::{FreqGrid, TransferFunction};

/// Unwrapped phase of the base-linear reset-state path relative to the trigger.
#[derive(Debug, Clone, Serialize)]
pub struct PsiProfile {
    pub grid: FreqGrid,
    /// Radians, one per grid point.
    pub psi: Vec<f64>,
}

const MAX_REFINE_DEPTH: u32 = 24;

fn nearest_branch(raw: f64, reference: f64) -> f64 {
    raw + TAU * ((reference - raw) / TAU).round()
}

/// Unwraps `arg(response(ω))` along the grid starting from the principal
/// value at the first point. Where adjacent samples differ by more than
/// π/2 the interval is bisected geometrically until the steps are small.
pub fn psi_profile(response: impl Fn(f64) -> Complex64, grid: &FreqGrid) -> PsiProfile {
    let pts = grid.points();
    let mut ws = Vec::with_capacity(pts.len());
    let mut psi = Vec::with_capacity(pts.len());
    let Some(&first) = pts.first() else {
        return PsiProfile {
            grid: grid.clone(),
            psi,
        };
    };
    ws.push(first);
    psi.push(response(first).arg());
    for pair in pts.windows(2) {
        refine(
            &response,
            pair[0],
            pair[1],
            *psi.last().unwrap(),
            0,
            &mut ws,
            &mut psi,
        );
    }
    let grid = FreqGrid::new(ws).expect("refined grid stays sorted");
    PsiProfile { grid, psi }
}

fn refine(
    response: &impl Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    psi_lo: f64,
    depth: u32,
    ws: &mut Vec<f64>,
    psi: &mut Vec<f64>,
) {
    let psi_hi = nearest_branch(response(hi).arg(), psi_lo);
    if (psi_hi - psi_lo).abs() < FRAC_PI_2 || depth >= MAX_REFINE_DEPTH {
        ws.push(hi);
        psi.push(psi_hi);
        return;
    }
    let mid = (lo * hi).sqrt();
    if !(mid > lo && mid < hi) {
        ws.push(hi);
        psi.push(psi_hi);
        return;
    }
    refine(response, lo, mid, psi_lo, depth + 1, ws, psi);
    let psi_mid = *psi.last().unwrap();
    refine(response, mid, hi, psi_mid, depth + 1, ws, psi);
}

/// `ψ(ω) = ∠(F K R)(jω)` over `grid`.
pub fn psi_of(
    f: &TransferFunction,
    k: &TransferFunction,
    r: &TransferFunction,
    grid: &FreqGrid,
) -> PsiProfile {
    psi_profile(
        |w| {
            f.eval_freq(w).unwrap_or(Complex64::new(f64::NAN, 0.0))
                * k.eval_freq(w).unwrap_or(Complex64::new(f64::NAN, 0.0))
                * r.eval_freq(w).unwrap_or(Complex64::new(f64::NAN, 0.0))
        },
        grid,
    )
}

/// Frequencies where the unwrapped `ψ` changes sign, refined by bisection on
/// `arg(response)` down to adjacent floating-point numbers. A profile that
/// touches zero without changing sign contributes nothing.
pub fn find_omega_lb(profile: &PsiProfile, response: impl Fn(f64) -> Complex64) -> Vec<f64> {
    let ws = profile.grid.points();
    let p = &profile.psi;
    let mut roots = Vec::new();
    let mut last_nonzero: Option<usize> = None;
    for i in 0..ws.len() {
        if p[i] == 0.0 {
            continue;
        }
        if let Some(j) = last_nonzero {
            if p[j].signum() != p[i].signum() {
                if i == j + 1 {
                    roots.push(bisect(&response, ws[j], ws[i], p[j], p[i]));
                } else {
                    // exact zeros in between: report the first
                    roots.push(ws[j + 1]);
                }
            }
        }
        last_nonzero = Some(i);
    }
    roots
}

fn bisect(
    response: &impl Fn(f64) -> Complex64,
    mut lo: f64,
    mut hi: f64,
    mut p_lo: f64,
    p_hi: f64,
) -> f64 {
    let mut p_hi = p_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let p_mid = nearest_branch(response(mid).arg(), p_lo);
        if p_mid == 0.0 {
            return mid;
        }
        if p_mid.signum() == p_lo.signum() {
            lo = mid;
            p_lo = p_mid;
        } else {
            hi = mid;
            p_hi = p_mid;
        }
    }
    if p_lo.abs() <= p_hi.abs() {
        lo
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unity_chain_is_flat() {
        let one = TransferFunction::unity();
        let g = FreqGrid::log_space(0.1, 100.0, 20).unwrap();
        let p = psi_of(&one, &one, &one, &g);
        assert!(p.psi.iter().all(|&x| x == 0.0));
        assert!(find_omega_lb(&p, |_| Complex64::new(1.0, 0.0)).is_empty());
    }

    #[test]
    fn unwrap_through_many_poles() {
        // 1/(s+1)^5 reaches −450°: unwrapped phase must be monotone
        let mut tf = TransferFunction::unity();
        for _ in 0..5 {
            tf = tf.series(&TransferFunction::first_order_lag(1.0));
        }
        let g = FreqGrid::log_space(0.01, 1e4, 8).unwrap();
        let p = psi_profile(|w| tf.eval_freq(w).unwrap(), &g);
        assert!(p.grid.len() > 8);
        assert!(p.psi.windows(2).all(|s| s[1] <= s[0]));
        assert!((p.psi.last().unwrap() + 2.5 * PI).abs() < 1e-2);
    }

    #[test]
    fn crossing_of_lead_lag_product() {
        // (s+1)/(s/10+1) · 1/(s/100+1)^2 ... phase crosses zero once
        let lead = TransferFunction::lead_lag(1.0, 10.0);
        let lag = TransferFunction::first_order_lag(3.0);
        let chain = lead.series(&lag);
        let g = FreqGrid::log_space(0.01, 1e3, 30).unwrap();
        let p = psi_profile(|w| chain.eval_freq(w).unwrap(), &g);
        let roots = find_omega_lb(&p, |w| chain.eval_freq(w).unwrap());
        // atan(w) − atan(w/10) − atan(w/3) = 0
        assert_eq!(roots.len(), 1);
        let w = roots[0];
        let resid = w.atan() - (w / 10.0).atan() - (w / 3.0).atan();
        assert!(resid.abs() < 1e-14);
    }
}
