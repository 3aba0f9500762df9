use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use resetshape::lincore::{series, tf_to_ss, FractionalLag, FreqGrid, TransferFunction};

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Denominator from left-half-plane poles; complex poles come in pairs.
fn random_stable_tf(rng: &mut StdRng) -> TransferFunction {
    let order = rng.random_range(1..=6usize);
    let mut den = vec![1.0];
    let mut left = order;
    while left > 0 {
        let re = -rng.random_range(0.1..10.0);
        if left >= 2 && rng.random_bool(0.5) {
            let im: f64 = rng.random_range(0.1..10.0);
            den = poly_mul(&den, &[re * re + im * im, -2.0 * re, 1.0]);
            left -= 2;
        } else {
            den = poly_mul(&den, &[-re, 1.0]);
            left -= 1;
        }
    }
    let num_deg = rng.random_range(0..=order);
    let num = (0..=num_deg).map(|_| rng.random_range(-5.0..5.0)).collect();
    TransferFunction::new(num, den).unwrap()
}

#[test]
fn realization_matches_rational_evaluation() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let grid = FreqGrid::log_space(1e-2, 1e2, 41).unwrap();
    for case in 0..100 {
        let tf = random_stable_tf(&mut rng);
        let ss = tf_to_ss(&tf).unwrap();
        assert_eq!(ss.order(), tf.order());
        for &w in grid.points() {
            let a = tf.eval_freq(w).unwrap();
            let b = ss.eval_freq(w).unwrap();
            assert!(
                (a - b).norm() <= 1e-9 * a.norm().max(1e-300),
                "case {case} w={w}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn realization_of_pure_gain_has_no_states() {
    let ss = tf_to_ss(&TransferFunction::gain(2.5)).unwrap();
    assert_eq!(ss.order(), 0);
    assert_eq!(ss.eval_freq(3.0).unwrap(), Complex64::new(2.5, 0.0));
}

#[test]
fn improper_transfer_function_is_rejected() {
    let tf = TransferFunction::new(vec![0.0, 0.0, 1.0], vec![1.0, 1.0]).unwrap();
    assert!(tf_to_ss(&tf).is_err());
}

#[test]
fn crone_error_shrinks_with_more_sections() {
    let lag = FractionalLag::new(-0.65, 1.0, 10.0).unwrap();
    let grid = FreqGrid::log_space(1.0, 10.0, 401).unwrap();
    let err = |n: usize| {
        let tf = lag.crone_realize(n);
        grid.points()
            .iter()
            .map(|&w| (tf.eval_freq(w).unwrap().arg() - lag.exact_phase(w)).abs())
            .fold(0.0, f64::max)
    };
    let (e4, e10) = (err(4), err(10));
    assert!(e10 < e4, "N=10: {e10}, N=4: {e4}");
}

fn factor() -> impl Strategy<Value = TransferFunction> {
    (
        prop::collection::vec(-3.0..3.0f64, 1..=4),
        prop::collection::vec(0.1..3.0f64, 1..=4),
    )
        .prop_map(|(num, den)| TransferFunction::new(num, den).unwrap())
}

proptest! {
    #[test]
    fn series_is_associative(a in factor(), b in factor(), c in factor()) {
        let left = series(&series(&a, &b), &c);
        let right = series(&a, &series(&b, &c));
        for (x, y) in [(left.num(), right.num()), (left.den(), right.den())] {
            prop_assert_eq!(x.len(), y.len());
            let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (p, q) in x.iter().zip(y) {
                prop_assert!((p - q).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn series_multiplies_responses(a in factor(), b in factor(), w in 0.01..100.0f64) {
        let ab = series(&a, &b).eval_freq(w).unwrap();
        let prod = a.eval_freq(w).unwrap() * b.eval_freq(w).unwrap();
        prop_assert!((ab - prod).norm() <= 1e-10 * prod.norm().max(1e-12));
    }
}
