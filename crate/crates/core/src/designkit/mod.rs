//! The motion-stage example: plant model, the three controllers (PID,
//! FORE CgLp, band-passed CgLp), open-loop describing-function sweeps and
//! the closed-loop tracking experiments.
//!
//! Controller parameters are given in Hz and degrees and converted to rad/s
//! and radians when the controller is built.

mod artifacts;
mod controller;
mod demo;
mod suite;

pub use artifacts::{
    hosidf_csv, hosidf_svg, trace_file_name, write_atomic, write_suite, SuiteFormats,
};
pub use controller::{
    build_controller, open_loop_hosidf, plant, Controller, ControllerKind, ControllerSpec, Front,
    OpenLoop,
};
pub use demo::{demo_bandpassed_cglp, demo_conventional_cglp, DemoConfig};
pub use suite::{
    check_properties, multisine_reference, run_tracking_suite, standard_references, Check,
    ControllerSummary, ExperimentReport, HarmonicEntry, ReferenceCase, RunOutcome, RunReport,
    SuiteOutput,
};

use crate::resetfreq::ResetError;
use crate::shaping::ShapingError;
use crate::timesim::SimError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DesignError {
    #[error(transparent)]
    Shaping(#[from] ShapingError),
    #[error(transparent)]
    Reset(#[from] ResetError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Linear(#[from] crate::lincore::LinError),
    #[error("invalid controller spec: {0}")]
    InvalidSpec(String),
    #[error("base linear closed loop is not stable (eigenvalue with real part {max_real})")]
    UnstableBaseLinear { max_real: f64 },
}
