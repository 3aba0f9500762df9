use num_complex::Complex64;

/// Horner evaluation of an ascending-order polynomial.
pub(crate) fn eval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

/// Sum of `|a_k| * |s|^k`, the natural scale against which a cancellation in
/// `eval` is judged.
pub(crate) fn magnitude_scale(coeffs: &[f64], s_abs: f64) -> f64 {
    coeffs
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * s_abs + c.abs())
}

pub(crate) fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Drops zero high-order coefficients.
pub(crate) fn trim(mut v: Vec<f64>) -> Vec<f64> {
    while matches!(v.last(), Some(&c) if c == 0.0) {
        v.pop();
    }
    v
}

/// Degree of a trimmed polynomial; the zero polynomial reports degree 0.
pub(crate) fn degree(v: &[f64]) -> usize {
    v.len().saturating_sub(1)
}

/// Roots of a real polynomial of degree ≤ 2 (enough for the factored
/// sections this crate builds). Higher degrees fall back to the companion
/// matrix eigenvalues.
pub(crate) fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let c = trim(coeffs.to_vec());
    match c.len() {
        0 | 1 => Vec::new(),
        2 => vec![Complex64::new(-c[0] / c[1], 0.0)],
        3 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = b * b - 4.0 * a * cc;
            if disc >= 0.0 {
                // Numerically stable pairing.
                let q = -0.5 * (b + b.signum() * disc.sqrt());
                let (r1, r2) = if q == 0.0 {
                    (0.0, 0.0)
                } else {
                    (q / a, cc / q)
                };
                vec![Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)]
            } else {
                let re = -b / (2.0 * a);
                let im = (-disc).sqrt() / (2.0 * a);
                vec![Complex64::new(re, im.abs()), Complex64::new(re, -im.abs())]
            }
        }
        n => {
            let deg = n - 1;
            let lead = c[deg];
            let mut comp = nalgebra::DMatrix::<f64>::zeros(deg, deg);
            for i in 1..deg {
                comp[(i, i - 1)] = 1.0;
            }
            for i in 0..deg {
                comp[(i, deg - 1)] = -c[i] / lead;
            }
            comp.complex_eigenvalues().iter().copied().collect()
        }
    }
}
