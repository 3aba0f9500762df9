use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::{ExperimentReport, RunOutcome, SuiteOutput};
use crate::lincore::to_hz;
use crate::plot::Plot;
use crate::resetfreq::HosidfResult;
use crate::timesim::write_csv;

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

/// `freq_hz,n,mag_db,phase_deg`, one row per frequency and order. Rows of
/// even orders are skipped since they vanish identically.
pub fn hosidf_csv(r: &HosidfResult) -> String {
    let mut s = String::from("freq_hz,n,mag_db,phase_deg\n");
    for (i, &w) in r.grid.points().iter().enumerate() {
        for (k, &n) in r.orders.iter().enumerate() {
            let v = r.values[k][i];
            s.push_str(&format!(
                "{:.10e},{n},{:.10e},{:.10e}\n",
                to_hz(w),
                20.0 * v.norm().log10(),
                v.arg().to_degrees()
            ));
        }
    }
    s
}

pub fn hosidf_svg(results: &[(&str, &HosidfResult)], orders: &[usize], title: &str) -> String {
    let mut plot = Plot::new(title, "frequency [Hz]", "magnitude [dB]", true);
    for (name, r) in results {
        for &n in orders {
            if let Some(k) = r.orders.iter().position(|&o| o == n) {
                let pts = r
                    .grid
                    .points()
                    .iter()
                    .zip(&r.values[k])
                    .map(|(&w, v)| (to_hz(w), 20.0 * v.norm().log10()));
                plot = plot.add(&format!("{name} n={n}"), pts.collect());
            }
        }
    }
    plot.to_svg()
}

pub fn trace_file_name(controller: &str, reference: &str) -> String {
    format!("{controller}_{reference}.csv")
}

/// RMS error against sweep frequency per controller.
fn sweep_plot(report: &ExperimentReport) -> String {
    let mut plot = Plot::new(
        "steady-state RMS error",
        "frequency [Hz]",
        "RMS error [m]",
        false,
    );
    for c in &report.controllers {
        let mut pts: Vec<(f64, f64)> = report
            .runs
            .iter()
            .filter(|r| r.controller == c.name)
            .filter_map(|r| {
                let f: f64 = r
                    .reference
                    .strip_prefix("sweep_")?
                    .strip_suffix("hz")?
                    .parse()
                    .ok()?;
                match &r.outcome {
                    RunOutcome::Ok { norms, .. } => Some((f, norms.rms)),
                    RunOutcome::Unstable { .. } => None,
                }
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        plot = plot.add(&c.name, pts);
    }
    plot.to_svg()
}

/// Which suite artifacts to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteFormats {
    pub report: bool,
    pub traces: bool,
    pub plots: bool,
}

impl Default for SuiteFormats {
    fn default() -> Self {
        Self {
            report: true,
            traces: true,
            plots: true,
        }
    }
}

/// `report.json`, one CSV per completed run under `traces/` and the sweep
/// plot. Returns the written paths.
pub fn write_suite(
    out: &SuiteOutput,
    dir: &Path,
    formats: SuiteFormats,
) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if formats.report {
        let report = serde_json::to_string_pretty(&out.report).map_err(io::Error::other)?;
        let p = dir.join("report.json");
        write_atomic(&p, report.as_bytes())?;
        written.push(p);
    }
    for r in out.report.runs.iter().filter(|_| formats.traces) {
        if let Some(k) = r.trace {
            let mut buf = Vec::new();
            write_csv(&out.traces[k], &mut buf)?;
            let p = dir
                .join("traces")
                .join(trace_file_name(&r.controller, &r.reference));
            write_atomic(&p, &buf)?;
            written.push(p);
        }
    }
    if formats.plots {
        let p = dir.join("sweep_rms.svg");
        write_atomic(&p, sweep_plot(&out.report).as_bytes())?;
        written.push(p);
    }
    Ok(written)
}
