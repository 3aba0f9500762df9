use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Controller, DesignError};
use crate::lincore::{hz, StateSpace};
use crate::timesim::{
    error_norms, extract_harmonics, peak, simulate_closed_loop, ErrorNorms, Signal, SimConfig,
    SimError, SimTrace, Tone,
};

/// One reference run of the tracking suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCase {
    pub name: String,
    pub signal: Signal,
    /// Error harmonics to record, as multiples of the base frequency.
    #[serde(default)]
    pub orders: Vec<usize>,
}

/// Three-tone reference at 13, 7 and `third_hz` Hz.
pub fn multisine_reference(third_hz: f64) -> Signal {
    let tones = vec![
        Tone {
            amplitude: 1.5e-5,
            omega: hz(13.0),
            phase: 0.0,
        },
        Tone {
            amplitude: 2.5e-5,
            omega: hz(7.0),
            phase: 0.0,
        },
        Tone {
            amplitude: 5.0e-5,
            omega: hz(third_hz),
            phase: 0.0,
        },
    ];
    let base = if third_hz.fract() == 0.0 { 1.0 } else { 0.5 };
    Signal::MultiSine {
        tones,
        omega: hz(base),
    }
}

/// 5 Hz sine, 1..=24 Hz sweep, the 21/22/23 Hz harmonic runs and the
/// multi-sine.
pub fn standard_references() -> Vec<ReferenceCase> {
    let mut v = vec![ReferenceCase {
        name: "sine_5hz".into(),
        signal: Signal::sine(2e-4, hz(5.0)),
        orders: vec![1, 3],
    }];
    for f in 1..=24 {
        v.push(ReferenceCase {
            name: format!("sweep_{f}hz"),
            signal: Signal::sine(7.143e-5, hz(f as f64)),
            orders: vec![1, 3, 5, 7],
        });
    }
    v.push(ReferenceCase {
        name: "multisine".into(),
        signal: multisine_reference(5.0),
        orders: vec![],
    });
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicEntry {
    pub n: usize,
    /// `|E_n|` relative to the reference amplitude.
    pub magnitude: f64,
    pub magnitude_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Ok {
        norms: ErrorNorms,
        control_input_peak: f64,
        resets: usize,
        harmonics: Vec<HarmonicEntry>,
    },
    Unstable {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub controller: String,
    pub reference: String,
    pub dt: f64,
    pub periods_total: usize,
    pub periods_discard: usize,
    /// Index into `SuiteOutput::traces` when the run completed.
    pub trace: Option<usize>,
    #[serde(flatten)]
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub controllers: Vec<ControllerSummary>,
    pub runs: Vec<RunReport>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerSummary {
    pub name: String,
    pub k_p: f64,
    pub phase_margin_deg: f64,
    pub warnings: Vec<String>,
}

pub struct SuiteOutput {
    pub report: ExperimentReport,
    pub traces: Vec<SimTrace>,
}

/// Periods per run: at least `cfg` asks for, and at least one second
/// discarded and two seconds retained.
fn run_config(cfg: &SimConfig, signal: &Signal) -> SimConfig {
    let f = signal.base_omega() / TAU;
    let discard = cfg.periods_discard.max(f.ceil() as usize);
    let keep = (cfg.periods_total - cfg.periods_discard).max((2.0 * f).ceil() as usize);
    SimConfig {
        periods_total: discard + keep,
        periods_discard: discard,
        ..*cfg
    }
}

fn measure(trace: &SimTrace, case: &ReferenceCase) -> Result<RunOutcome, SimError> {
    let harmonics = if case.orders.is_empty() {
        Vec::new()
    } else {
        let m = extract_harmonics(trace, "e", case.signal.base_omega(), &case.orders)?;
        m.orders
            .iter()
            .zip(&m.values)
            .map(|(&n, v)| HarmonicEntry {
                n,
                magnitude: v.norm(),
                magnitude_db: 20.0 * v.norm().log10(),
            })
            .collect()
    };
    Ok(RunOutcome::Ok {
        norms: error_norms(trace),
        control_input_peak: peak(trace, "control_input")?,
        resets: trace.reset_count(),
        harmonics,
    })
}

/// Runs every controller against every reference (in parallel) and
/// evaluates the tracking properties on the results.
pub fn run_tracking_suite(
    controllers: &[Controller],
    plant: &StateSpace,
    references: &[ReferenceCase],
    cfg: &SimConfig,
) -> Result<SuiteOutput, DesignError> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..controllers.len())
        .flat_map(|c| (0..references.len()).map(move |r| (c, r)))
        .collect();
    let results: Vec<(RunReport, Option<SimTrace>)> = jobs
        .par_iter()
        .map(|&(ci, ri)| {
            let (c, case) = (&controllers[ci], &references[ri]);
            let rc = run_config(cfg, &case.signal);
            let sim = simulate_closed_loop(&c.chain, plant, &case.signal, &rc);
            let (outcome, trace) = match sim {
                Ok(tr) => match measure(&tr, case) {
                    Ok(o) => (o, Some(tr)),
                    Err(e) => (
                        RunOutcome::Unstable {
                            message: e.to_string(),
                        },
                        None,
                    ),
                },
                Err(e @ SimError::Unstable { .. }) => (
                    RunOutcome::Unstable {
                        message: e.to_string(),
                    },
                    None,
                ),
                Err(e) => return Err(e),
            };
            let report = RunReport {
                controller: c.spec.name().to_string(),
                reference: case.name.clone(),
                dt: rc.dt,
                periods_total: rc.periods_total,
                periods_discard: rc.periods_discard,
                trace: None,
                outcome,
            };
            Ok((report, trace))
        })
        .collect::<Result<_, SimError>>()?;
    let mut runs = Vec::with_capacity(results.len());
    let mut traces = Vec::new();
    for (mut r, t) in results {
        if let Some(t) = t {
            r.trace = Some(traces.len());
            traces.push(t);
        }
        runs.push(r);
    }
    let controllers = controllers
        .iter()
        .map(|c| ControllerSummary {
            name: c.spec.name().to_string(),
            k_p: c.k_p,
            phase_margin_deg: c.phase_margin_deg,
            warnings: c.warnings.clone(),
        })
        .collect();
    let checks = check_properties(&runs);
    Ok(SuiteOutput {
        report: ExperimentReport {
            controllers,
            runs,
            checks,
        },
        traces,
    })
}

fn find<'a>(runs: &'a [RunReport], controller: &str, reference: &str) -> Option<&'a RunOutcome> {
    runs.iter()
        .find(|r| r.controller == controller && r.reference == reference)
        .map(|r| &r.outcome)
}

fn ok_fields(o: Option<&RunOutcome>) -> Option<(&ErrorNorms, f64, &[HarmonicEntry])> {
    match o? {
        RunOutcome::Ok {
            norms,
            control_input_peak,
            harmonics,
            ..
        } => Some((norms, *control_input_peak, harmonics)),
        RunOutcome::Unstable { .. } => None,
    }
}

fn check(name: &str, value: Option<(bool, String)>) -> Check {
    let (passed, detail) = value.unwrap_or((false, "required runs missing or unstable".into()));
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

/// Orderings between the band-passed CgLp, PID and conventional CgLp runs:
/// RMS error at 5 Hz, control-input peak at 5 Hz, third error harmonic
/// around 22 Hz, and peak error on the multi-sine.
pub fn check_properties(runs: &[RunReport]) -> Vec<Check> {
    let (bp, pid, conv) = ("bandpassed_cglp", "pid", "conventional_cglp");
    let five = |c| ok_fields(find(runs, c, "sine_5hz"));
    let a = (|| {
        let (b, p, c) = (five(bp)?.0.rms, five(pid)?.0.rms, five(conv)?.0.rms);
        Some((
            b < p && p < c,
            format!("rms error bp={b:.4e} pid={p:.4e} conv={c:.4e}"),
        ))
    })();
    let b = (|| {
        let (pb, pc) = (five(bp)?.1, five(conv)?.1);
        let ratio = pc / pb;
        Some((
            ratio >= 5.0,
            format!("control input peak conv/bp = {ratio:.3}"),
        ))
    })();
    let third = |f: usize| -> Option<f64> {
        let (_, _, h) = ok_fields(find(runs, bp, &format!("sweep_{f}hz")))?;
        h.iter().find(|e| e.n == 3).map(|e| e.magnitude_db)
    };
    let c = (|| {
        let (h21, h22, h23) = (third(21)?, third(22)?, third(23)?);
        Some((
            h22 <= h21 - 6.0 && h22 <= h23 - 6.0,
            format!("third error harmonic 21/22/23 Hz = {h21:.2}/{h22:.2}/{h23:.2} dB"),
        ))
    })();
    let ms = |c| ok_fields(find(runs, c, "multisine")).map(|f| f.0.linf);
    let d = (|| {
        let (b, p, c) = (ms(bp)?, ms(pid)?, ms(conv)?);
        Some((
            b < p && p < c,
            format!("multisine peak error bp={b:.4e} pid={p:.4e} conv={c:.4e}"),
        ))
    })();
    vec![
        check("rms_error_5hz_ordering", a),
        check("control_input_peak_ratio_5hz", b),
        check("third_harmonic_notch_22hz", c),
        check("multisine_peak_error_ordering", d),
    ]
}
