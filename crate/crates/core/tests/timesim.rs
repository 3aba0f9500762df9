use std::f64::consts::{FRAC_PI_2, PI, TAU};

use proptest::prelude::*;
use resetshape::designkit::{build_controller, plant, ControllerSpec};
use resetshape::lincore::{hz, tf_to_ss, TransferFunction};
use resetshape::resetfreq::{hosidf, ResetElement};
use resetshape::shaping::{conventional_cglp, fit_alpha};
use resetshape::timesim::{
    extract_harmonics, simulate_closed_loop, simulate_linear, simulate_open_loop, ControllerChain,
    Signal, SimConfig, Tone,
};

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

#[test]
fn closed_loop_runs_are_bit_identical() {
    let chain = build_controller(&ControllerSpec::conventional_cglp())
        .unwrap()
        .chain;
    let p = tf_to_ss(&plant()).unwrap();
    let r = Signal::sine(2e-4, hz(5.0));
    let cfg = SimConfig::default().with_periods(6, 2);
    let a = simulate_closed_loop(&chain, &p, &r, &cfg).unwrap();
    let b = simulate_closed_loop(&chain, &p, &r, &cfg).unwrap();
    assert_eq!(a.y, b.y);
    assert_eq!(a.control_input, b.control_input);
    assert_eq!(a.reset_flags, b.reset_flags);
}

#[test]
fn identity_reset_matches_linear_open_loop() {
    let w = 3.0;
    let cfg = SimConfig::per_period(w, 500).with_periods(6, 2);
    let input = Signal::sine(1.5, w);
    for (el, tf) in [
        (
            ResetElement::fore(2.0, 1.0),
            TransferFunction::first_order_lag(2.0),
        ),
        (
            ResetElement::sore(4.0, 0.3, 1.0),
            TransferFunction::new(vec![1.0], vec![1.0, 0.6 / 4.0, 1.0 / 16.0]).unwrap(),
        ),
    ] {
        let reset = simulate_open_loop(&el, &input, None, &cfg).unwrap();
        let linear = simulate_linear(&tf_to_ss(&tf).unwrap(), &input, &cfg).unwrap();
        assert!(reset.reset_flags.iter().any(|&f| f));
        assert!(max_rel_diff(&reset.y, &linear.y) < 1e-9);
    }
}

#[test]
fn identity_reset_matches_linear_closed_loop() {
    let ctrl = build_controller(&ControllerSpec::conventional_cglp()).unwrap();
    let spec = &ctrl.spec;
    let wr = hz(spec.omega_r_hz.unwrap());
    let wf = hz(spec.omega_f_k_hz.unwrap_or(spec.omega_f_hz));
    let alpha = fit_alpha(spec.gamma.unwrap()).unwrap();
    let back = ctrl.chain.back().clone();
    let reset =
        ControllerChain::new(conventional_cglp(wr, 1.0, wf, alpha).unwrap(), back.clone()).unwrap();
    let linear = ControllerChain::linear(
        back.then(TransferFunction::first_order_lag(wr / alpha))
            .then(TransferFunction::lead_lag(wr, wf)),
    )
    .unwrap();
    let p = tf_to_ss(&plant()).unwrap();
    let r = Signal::sine(2e-4, hz(5.0));
    let cfg = SimConfig::default().with_periods(6, 2);
    let a = simulate_closed_loop(&reset, &p, &r, &cfg).unwrap();
    let b = simulate_closed_loop(&linear, &p, &r, &cfg).unwrap();
    assert!(max_rel_diff(&a.y, &b.y) < 1e-9);
    assert!(max_rel_diff(&a.control_input, &b.control_input) < 1e-9);
}

#[test]
fn harmonics_converge_when_step_is_halved() {
    let w = 1.0;
    let el = ResetElement::fore(1.0, 0.0);
    let input = Signal::sine(1.0, w);
    let run = |spp: usize| {
        let cfg = SimConfig::per_period(w, spp).with_periods(12, 6);
        let tr = simulate_open_loop(&el, &input, None, &cfg).unwrap();
        extract_harmonics(&tr, "y", w, &[1, 3, 5]).unwrap()
    };
    let (coarse, fine) = (run(4096), run(8192));
    for (a, b) in coarse.values.iter().zip(&fine.values) {
        assert!((a - b).norm() < 2e-3 * b.norm(), "{a} vs {b}");
    }
}

#[test]
fn clegg_and_fore_match_describing_functions() {
    let w = 1.0;
    let cfg = SimConfig::per_period(w, 8192).with_periods(12, 6);
    for el in [ResetElement::clegg(0.0), ResetElement::fore(1.0, 0.0)] {
        let tr = simulate_open_loop(&el, &Signal::sine(1.0, w), None, &cfg).unwrap();
        let h = extract_harmonics(&tr, "y", w, &[1, 3]).unwrap();
        for (k, n) in [1, 3].into_iter().enumerate() {
            let g = hosidf(&el, w, n).unwrap();
            assert!(
                (h.values[k] - g).norm() < 1e-2 * g.norm(),
                "{} n={n}",
                el.label()
            );
        }
    }
}

#[test]
fn reset_instants_follow_trigger_zeros() {
    let w = 5.0;
    let cfg = SimConfig::per_period(w, 333).with_periods(5, 1);
    let el = ResetElement::fore(2.0, 0.2);
    for shift in [None, Some(0.4)] {
        let tr = simulate_open_loop(&el, &Signal::sine(1.0, w), shift, &cfg).unwrap();
        let phi = shift.unwrap_or(0.0);
        let times: Vec<f64> = (0..tr.len())
            .filter(|&k| tr.reset_flags[k])
            .map(|k| tr.time[k])
            .collect();
        assert!(times.len() >= 9);
        for t in times {
            let k = ((w * t - phi) / PI).round();
            let tk = (k * PI + phi) / w;
            assert!(
                t >= tk - 1e-12 && t - tk <= cfg.dt * (1.0 + 1e-9),
                "{t} vs {tk}"
            );
        }
    }
}

/// `x'' + a₁x' + a₀x = b u` by classical RK4 under a unit step.
fn plant_step_rk4(t_end: f64, h: f64) -> f64 {
    let (b, a0, a1) = (3.038e4, 243.3, 0.7413);
    let f = |x: [f64; 2]| [x[1], b - a0 * x[0] - a1 * x[1]];
    let mut x = [0.0, 0.0];
    let steps = (t_end / h).round() as usize;
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f([x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
        let k3 = f([x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
        let k4 = f([x[0] + h * k3[0], x[1] + h * k3[1]]);
        for i in 0..2 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x[0]
}

#[test]
fn plant_step_response_matches_rk4() {
    // a zero-frequency tone at a quarter-turn phase is a unit step
    let step = Signal::MultiSine {
        tones: vec![Tone {
            amplitude: 1.0,
            omega: 0.0,
            phase: FRAC_PI_2,
        }],
        omega: TAU,
    };
    let cfg = SimConfig::default().with_periods(1, 0);
    let tr = simulate_linear(&tf_to_ss(&plant()).unwrap(), &step, &cfg).unwrap();
    let k = 1000;
    assert!((tr.time[k] - 0.1).abs() < 1e-12);
    let oracle = plant_step_rk4(0.1, 1e-6);
    assert!(
        (tr.y[k] - oracle).abs() < 1e-3 * oracle.abs(),
        "{} vs {oracle}",
        tr.y[k]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reset_never_grows_the_state(wr in 0.2..5.0f64, gamma in 0.0..=1.0f64, w in 0.5..5.0f64) {
        let cfg = SimConfig::per_period(w, 200).with_periods(4, 1);
        let ad = (-wr * cfg.dt).exp();
        let tr = simulate_open_loop(&ResetElement::fore(wr, gamma), &Signal::sine(1.0, w), None, &cfg).unwrap();
        for k in 1..tr.len() {
            if tr.reset_flags[k] {
                let before = ad * tr.y[k - 1] + (1.0 - ad) * tr.e[k - 1];
                prop_assert!(tr.y[k].abs() <= before.abs() * (1.0 + 1e-12));
            }
        }
    }
}
