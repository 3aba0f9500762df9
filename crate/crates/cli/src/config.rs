//! JSON configuration shared by all subcommands. Frequencies are in Hz and
//! angles in degrees; unknown keys are rejected.

use std::path::{Path, PathBuf};

use resetshape::designkit::ControllerSpec;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub band: Option<Band>,
    pub target: Option<Target>,
    pub shaping: Option<Shaping>,
    pub reset: Option<Reset>,
    pub grid: Option<Grid>,
    pub sim: Option<Sim>,
    pub output: Option<Output>,
    /// Closed-loop controllers; the three stage presets when absent.
    pub controllers: Option<Vec<ControllerSpec>>,
    /// Closed-loop references; the standard suite when absent.
    pub references: Option<Vec<Reference>>,
    /// Names of the tracking checks enforced by `--check`; all when absent.
    pub checks: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub omega_l_hz: f64,
    pub omega_h_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub psi_f_deg: Option<f64>,
    /// First-harmonic phase lead of the reset lag over `−90°`; converted to
    /// `ψ_f` with the high-frequency approximation and `reset.gamma`.
    pub phase_advantage_deg: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    #[default]
    Symmetric,
    FullFilter,
    PinnedNotch,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shaping {
    #[serde(default)]
    pub form: Form,
    /// Required by `pinned_notch`.
    pub notch_hz: Option<f64>,
    pub epsilon2_deg: Option<f64>,
    pub crone_n: Option<usize>,
    pub psi_b_deg: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Clegg,
    Fore,
    Sore,
    ConventionalCglp,
    BandpassedCglp,
    BandpassedClegg,
    BandpassedFore,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reset {
    pub element: Option<ElementKind>,
    pub gamma: f64,
    pub omega_r_hz: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub omega_f_hz: Option<f64>,
    pub omega_rr_hz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    #[serde(default = "default_ppd")]
    pub points_per_decade: usize,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
}

fn default_ppd() -> usize {
    200
}

fn default_max_order() -> usize {
    resetshape::resetfreq::DEFAULT_MAX_ORDER
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sim {
    pub dt_s: Option<f64>,
    /// Samples per period of each input; overrides `dt_s` per run.
    pub samples_per_period: Option<usize>,
    pub periods: Option<usize>,
    pub discard: Option<usize>,
    /// Open-loop input frequencies for `simulate`.
    #[serde(default)]
    pub frequencies_hz: Vec<f64>,
    pub amplitude: Option<f64>,
    pub orders: Option<Vec<usize>>,
    /// Also simulate the base-linear system and compare (for `gamma = 1`).
    #[serde(default)]
    pub compare_linear: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Reference {
    Sine {
        name: String,
        freq_hz: f64,
        amplitude: f64,
        #[serde(default)]
        orders: Vec<usize>,
    },
    Multisine {
        name: String,
        #[serde(default = "default_third")]
        third_hz: f64,
    },
}

fn default_third() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at `{path}`: {}", e.inner()))
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output
            .as_ref()
            .and_then(|o| o.formats.as_ref())
            .is_none_or(|v| v.contains(&f))
    }

    /// `--out` wins over `output.dir`.
    pub fn out_dir(&self, cli: Option<&Path>) -> Result<PathBuf, CliError> {
        cli.map(Path::to_path_buf)
            .or_else(|| self.output.as_ref().and_then(|o| o.dir.clone()))
            .ok_or_else(|| {
                CliError::Config("no output directory: pass --out or set output.dir".into())
            })
    }
}
