use std::f64::consts::TAU;
use std::path::Path;

use rayon::prelude::*;
use resetshape::designkit::{
    build_controller, hosidf_csv, hosidf_svg, multisine_reference, open_loop_hosidf, plant,
    run_tracking_suite, standard_references, write_atomic, write_suite, ControllerSpec,
    ReferenceCase, RunOutcome, SuiteFormats,
};
use resetshape::lincore::{hz, to_hz, FreqGrid};
use resetshape::plot::Plot;
use resetshape::resetfreq::{hosidf_sweep, HarmonicResponse, HosidfResult};
use resetshape::shaping::DesignDocument;
use resetshape::timesim::{
    extract_harmonics, simulate_linear, simulate_open_loop, write_csv, Signal, SimConfig,
};
use serde::Serialize;

use crate::config::{CliConfig, Format, Reference};
use crate::element::{element, filter};
use crate::{CliArgs, CliError};

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    write(path, text.as_bytes())
}

/// Prints one line per check and fails when `enforce` is set and any failed.
fn report_checks(checks: &[(String, bool, String)], enforce: bool) -> Result<(), CliError> {
    for (name, ok, detail) in checks {
        println!(
            "check {name}: {} ({detail})",
            if *ok { "pass" } else { "FAIL" }
        );
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.1)
        .map(|c| c.0.clone())
        .collect();
    if enforce && !failed.is_empty() {
        return Err(CliError::Check(failed));
    }
    Ok(())
}

fn load(args: &CliArgs) -> Result<(CliConfig, std::path::PathBuf), CliError> {
    let cfg = CliConfig::load(&args.config)?;
    let dir = cfg.out_dir(args.out.as_deref())?;
    Ok((cfg, dir))
}

fn grid(cfg: &CliConfig, default_hz: Option<(f64, f64)>) -> Result<(FreqGrid, usize), CliError> {
    let (lo, hi, ppd, order) = match (&cfg.grid, default_hz) {
        (Some(g), _) => (g.f_min_hz, g.f_max_hz, g.points_per_decade, g.max_order),
        (None, Some((lo, hi))) => (lo, hi, 200, resetshape::resetfreq::DEFAULT_MAX_ORDER),
        (None, None) => return Err(CliError::Config("missing `grid`".into())),
    };
    let g =
        FreqGrid::per_decade(hz(lo), hz(hi), ppd).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((g, order))
}

#[derive(Serialize)]
struct DesignSummary {
    #[serde(flatten)]
    document: DesignDocument,
    iterations: usize,
    residuals_rad: [f64; 2],
    out_of_band_bound_deg: f64,
}

pub fn design(args: &CliArgs) -> Result<(), CliError> {
    let (cfg, dir) = load(args)?;
    let (spec, f, lq) = filter(&cfg)?;
    println!(
        "lambda = {:.6}, q = {:.6} ({} iterations, residuals {:.3e}, {:.3e} rad)",
        lq.lambda, lq.q, lq.iterations, lq.residuals[0], lq.residuals[1]
    );
    let el = match cfg.reset {
        Some(_) => element(&cfg)?,
        None => crate::element::Element::Plain(resetshape::resetfreq::ResetElement::clegg(1.0)),
    };
    let doc = DesignDocument::new(&spec, &f, el.shaped());
    let bound = f.out_of_band_bound();
    if cfg.wants(Format::Json) {
        let summary = DesignSummary {
            document: doc,
            iterations: lq.iterations,
            residuals_rad: lq.residuals,
            out_of_band_bound_deg: bound.to_degrees(),
        };
        write_json(&dir.join("design.json"), &summary)?;
    }
    let g = FreqGrid::per_decade(spec.omega_l / 100.0, spec.omega_h * 100.0, 50)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let rows: Vec<(f64, f64, f64)> = g
        .points()
        .iter()
        .map(|&w| {
            let realized = f
                .realized()
                .eval_freq(w)
                .map(|v| v.arg())
                .unwrap_or(f64::NAN);
            (
                to_hz(w),
                f.exact_phase(w).to_degrees(),
                realized.to_degrees(),
            )
        })
        .collect();
    if cfg.wants(Format::Csv) {
        let mut s = String::from("freq_hz,exact_phase_deg,realized_phase_deg\n");
        for (fq, e, r) in &rows {
            s.push_str(&format!("{fq:.10e},{e:.10e},{r:.10e}\n"));
        }
        write(&dir.join("filter_phase.csv"), s.as_bytes())?;
    }
    if cfg.wants(Format::Svg) {
        let svg = Plot::new(
            "shaping filter phase",
            "frequency [Hz]",
            "phase [deg]",
            true,
        )
        .add("exact", rows.iter().map(|r| (r.0, r.1)).collect())
        .add("realized", rows.iter().map(|r| (r.0, r.2)).collect())
        .to_svg();
        write(&dir.join("filter_phase.svg"), svg.as_bytes())?;
    }
    let at_c = f.exact_phase(spec.omega_c);
    let realized_c = f
        .realized()
        .eval_freq(spec.omega_c)
        .map_err(|e| CliError::Runtime(e.to_string()))?
        .arg();
    let mut checks = vec![
        (
            "exact_phase_at_crossover".to_string(),
            (at_c - spec.psi_f).abs() < 1e-6,
            format!(
                "{:.6} deg vs target {:.6} deg",
                at_c.to_degrees(),
                spec.psi_f.to_degrees()
            ),
        ),
        (
            "realized_phase_at_crossover".to_string(),
            (realized_c - spec.psi_f).abs() < 2f64.to_radians(),
            format!("{:.4} deg", realized_c.to_degrees()),
        ),
    ];
    if let Some(b) = spec.psi_b {
        checks.push((
            "out_of_band_bound".to_string(),
            bound <= b.abs(),
            format!(
                "{:.3} deg vs {:.3} deg",
                bound.to_degrees(),
                b.abs().to_degrees()
            ),
        ));
    }
    report_checks(&checks, args.check)
}

pub fn hosidf(args: &CliArgs) -> Result<(), CliError> {
    let (cfg, dir) = load(args)?;
    if cfg.reset.is_none() {
        return hosidf_controllers(&cfg, &dir, args.check);
    }
    let el = element(&cfg)?;
    let band = cfg
        .band
        .as_ref()
        .map(|b| (b.omega_l_hz / 100.0, b.omega_h_hz * 100.0));
    let (mut g, order) = grid(&cfg, band)?;
    let mut notches = Vec::new();
    if let Some(s) = el.shaped() {
        let pts = g.points();
        notches = s.omega_lb(pts[0], pts[pts.len() - 1])?;
        g = g
            .with_points(&notches)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let r = hosidf_sweep(&el, &g, order)?;
    if cfg.wants(Format::Csv) {
        write(&dir.join("hosidf.csv"), hosidf_csv(&r).as_bytes())?;
    }
    if cfg.wants(Format::Svg) {
        let svg = hosidf_svg(
            &[(el.label().as_str(), &r)],
            &[1, 3, 5],
            "describing functions",
        );
        write(&dir.join("hosidf.svg"), svg.as_bytes())?;
    }
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for &w in &notches {
        let h1 = el.harmonic(w, 1)?.norm();
        for n in (3..=order).step_by(2) {
            worst = worst.max(el.harmonic(w, n)?.norm() / h1);
        }
    }
    if !notches.is_empty() {
        checks.push((
            "harmonic_notches".to_string(),
            worst < 1e-8,
            format!("{} notches, worst |H_n/H_1| = {worst:.3e}", notches.len()),
        ));
    }
    if cfg.wants(Format::Json) {
        #[derive(Serialize)]
        struct Summary<'a> {
            element: String,
            orders: &'a [usize],
            points: usize,
            notches_hz: Vec<f64>,
            worst_notch_ratio: f64,
        }
        let s = Summary {
            element: el.label(),
            orders: &r.orders,
            points: g.len(),
            notches_hz: notches.iter().map(|&w| to_hz(w)).collect(),
            worst_notch_ratio: worst,
        };
        write_json(&dir.join("hosidf.json"), &s)?;
    }
    report_checks(&checks, args.check)
}

fn controllers(cfg: &CliConfig) -> Vec<ControllerSpec> {
    cfg.controllers
        .clone()
        .unwrap_or_else(ControllerSpec::table)
}

fn hosidf_controllers(cfg: &CliConfig, dir: &Path, check: bool) -> Result<(), CliError> {
    let (g, order) = grid(cfg, Some((0.5, 2000.0)))?;
    let p = plant();
    let mut results: Vec<(String, HosidfResult)> = Vec::new();
    for spec in controllers(cfg) {
        let c = build_controller(&spec)?;
        results.push((
            spec.name().to_string(),
            open_loop_hosidf(&c, &p, &g, order)?,
        ));
    }
    for (name, r) in &results {
        if cfg.wants(Format::Csv) {
            write(
                &dir.join(format!("hosidf_{name}.csv")),
                hosidf_csv(r).as_bytes(),
            )?;
        }
    }
    if cfg.wants(Format::Svg) {
        let refs: Vec<(&str, &HosidfResult)> =
            results.iter().map(|(n, r)| (n.as_str(), r)).collect();
        write(
            &dir.join("hosidf.svg"),
            hosidf_svg(&refs, &[1, 3], "open-loop describing functions").as_bytes(),
        )?;
    }
    report_checks(&[], check)
}

#[derive(Serialize)]
struct HarmonicRow {
    freq_hz: f64,
    n: usize,
    measured_re: f64,
    measured_im: f64,
    analytic_re: f64,
    analytic_im: f64,
    relative_error: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    element: String,
    samples_per_period: Option<usize>,
    rows: Vec<HarmonicRow>,
    linear_deviation: Option<f64>,
}

pub fn simulate(args: &CliArgs) -> Result<(), CliError> {
    let (cfg, dir) = load(args)?;
    let el = element(&cfg)?;
    let real = el.realization()?;
    let sim = cfg.sim.clone().unwrap_or_default();
    if sim.frequencies_hz.is_empty() {
        return Err(CliError::Config("missing `sim.frequencies_hz`".into()));
    }
    let amplitude = sim.amplitude.unwrap_or(1.0);
    let orders = sim.orders.clone().unwrap_or_else(|| vec![1, 3, 5]);
    let spp = sim
        .samples_per_period
        .or(if sim.dt_s.is_none() { Some(4096) } else { None });
    let run_cfg = |w: f64| -> Result<SimConfig, CliError> {
        let base = match spp {
            Some(n) => SimConfig::per_period(w, n),
            None => SimConfig {
                dt: sim.dt_s.unwrap_or(1e-4),
                ..SimConfig::default()
            },
        };
        let c = base.with_periods(sim.periods.unwrap_or(20), sim.discard.unwrap_or(10));
        c.validate()?;
        Ok(c)
    };
    let runs: Vec<_> = sim
        .frequencies_hz
        .par_iter()
        .map(|&f| -> Result<_, CliError> {
            let w = hz(f);
            let c = run_cfg(w)?;
            let input = Signal::sine(amplitude, w);
            let tr = simulate_open_loop(&real, &input, None, &c)?;
            let m = extract_harmonics(&tr, "y", w, &orders)?;
            let lin = if sim.compare_linear {
                let lt = simulate_linear(real.base(), &input, &c)?;
                let scale = lt.y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let diff =
                    tr.y.iter()
                        .zip(&lt.y)
                        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                Some(if scale > 0.0 { diff / scale } else { diff })
            } else {
                None
            };
            Ok((f, tr, m, lin))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut linear_deviation: Option<f64> = None;
    for (f, tr, m, lin) in &runs {
        let w = hz(*f);
        let h1 = el.harmonic(w, 1)?.norm();
        for (&n, &meas) in m.orders.iter().zip(&m.values) {
            let ana = el.harmonic(w, n)?;
            let scale = if ana.norm() > 1e-6 * h1 {
                ana.norm()
            } else {
                h1
            };
            let rel = (meas - ana).norm() / scale;
            let tol = if n >= 5 { 0.02 } else { 0.01 };
            checks.push((
                format!("harmonic_{f}hz_n{n}"),
                rel < tol,
                format!("relative error {rel:.3e}"),
            ));
            rows.push(HarmonicRow {
                freq_hz: *f,
                n,
                measured_re: meas.re,
                measured_im: meas.im,
                analytic_re: ana.re,
                analytic_im: ana.im,
                relative_error: rel,
            });
        }
        if let Some(d) = lin {
            linear_deviation = Some(linear_deviation.unwrap_or(0.0).max(*d));
            checks.push((
                format!("linear_equivalence_{f}hz"),
                *d < 1e-9,
                format!("max deviation {d:.3e}"),
            ));
        }
        if cfg.wants(Format::Csv) {
            let mut buf = Vec::new();
            write_csv(tr, &mut buf)?;
            write(&dir.join(format!("sim_{f}hz.csv")), &buf)?;
        }
    }
    if cfg.wants(Format::Json) {
        let rep = SimulateReport {
            element: el.label(),
            samples_per_period: spp,
            rows,
            linear_deviation,
        };
        write_json(&dir.join("simulate.json"), &rep)?;
    }
    if cfg.wants(Format::Svg) {
        let mut plot = Plot::new(
            "simulated vs analytic harmonics",
            "frequency [Hz]",
            "magnitude [dB]",
            true,
        );
        for &n in &orders {
            let mut meas = Vec::new();
            let mut ana = Vec::new();
            for (f, _, m, _) in &runs {
                if let Some(v) = m.get(n) {
                    meas.push((*f, 20.0 * v.norm().log10()));
                    ana.push((*f, 20.0 * el.harmonic(hz(*f), n)?.norm().log10()));
                }
            }
            plot = plot
                .add(&format!("simulated n={n}"), meas)
                .add(&format!("analytic n={n}"), ana);
        }
        write(&dir.join("simulate.svg"), plot.to_svg().as_bytes())?;
    }
    report_checks(&checks, args.check)
}

fn references(cfg: &CliConfig) -> Vec<ReferenceCase> {
    match &cfg.references {
        None => standard_references(),
        Some(list) => list
            .iter()
            .map(|r| match r {
                Reference::Sine {
                    name,
                    freq_hz,
                    amplitude,
                    orders,
                } => ReferenceCase {
                    name: name.clone(),
                    signal: Signal::sine(*amplitude, hz(*freq_hz)),
                    orders: orders.clone(),
                },
                Reference::Multisine { name, third_hz } => ReferenceCase {
                    name: name.clone(),
                    signal: multisine_reference(*third_hz),
                    orders: Vec::new(),
                },
            })
            .collect(),
    }
}

pub fn track(args: &CliArgs) -> Result<(), CliError> {
    let (cfg, dir) = load(args)?;
    let sim = cfg.sim.clone().unwrap_or_default();
    let d = SimConfig::default();
    let sc = SimConfig {
        dt: sim.dt_s.unwrap_or(d.dt),
        periods_total: sim.periods.unwrap_or(d.periods_total),
        periods_discard: sim.discard.unwrap_or(d.periods_discard),
        ..d
    };
    sc.validate()?;
    let refs = references(&cfg);
    for r in &refs {
        if r.signal.base_omega() / TAU * sc.dt * 20.0 > 1.0 {
            return Err(CliError::Config(format!(
                "dt too coarse for reference {}",
                r.name
            )));
        }
    }
    let ctrls = controllers(&cfg)
        .iter()
        .map(build_controller)
        .collect::<Result<Vec<_>, _>>()?;
    for c in &ctrls {
        println!(
            "{}: k_p = {:.6}, phase margin = {:.3} deg",
            c.spec.name(),
            c.k_p,
            c.phase_margin_deg
        );
        for w in &c.warnings {
            println!("  warning: {w}");
        }
    }
    let p = plant()
        .to_state_space()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let out = run_tracking_suite(&ctrls, &p, &refs, &sc)?;
    let formats = SuiteFormats {
        report: cfg.wants(Format::Json),
        traces: cfg.wants(Format::Csv),
        plots: cfg.wants(Format::Svg),
    };
    for path in write_suite(&out, &dir, formats)? {
        println!("wrote {}", path.display());
    }
    let unstable: Vec<String> = out
        .report
        .runs
        .iter()
        .filter_map(|r| match &r.outcome {
            RunOutcome::Unstable { message } => {
                Some(format!("{} / {}: {message}", r.controller, r.reference))
            }
            RunOutcome::Ok { .. } => None,
        })
        .collect();
    let selected = match &cfg.checks {
        None => out.report.checks.clone(),
        Some(names) => names
            .iter()
            .map(|n| {
                out.report
                    .checks
                    .iter()
                    .find(|c| &c.name == n)
                    .cloned()
                    .ok_or_else(|| CliError::Config(format!("unknown check `{n}`")))
            })
            .collect::<Result<_, _>>()?,
    };
    if !unstable.is_empty() {
        for u in &unstable {
            eprintln!("unstable: {u}");
        }
        return Err(CliError::Runtime(format!(
            "{} run(s) diverged",
            unstable.len()
        )));
    }
    let checks: Vec<_> = selected
        .into_iter()
        .map(|c| (c.name, c.passed, c.detail))
        .collect();
    report_checks(&checks, args.check)
}
