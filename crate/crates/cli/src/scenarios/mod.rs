//! One runner per scenario kind. Each returns its CSV series and the
//! verification report; writing files is left to the caller.

mod discrete;
mod hydrogen;
mod twolevel;
mod wave;

use unideform::verify::VerificationReport;
use unideform::Result;

use crate::config::{Kind, ScenarioConfig};
use crate::output::Series;

pub use discrete::{nlevel_family, run_discrete};
pub use hydrogen::run_hydrogen;
pub use twolevel::{cubic_schedules, run_axis, run_cubic};
pub use wave::{run_wave, WaveDrive};

/// Everything a scenario produced in memory.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub series: Vec<Series>,
    pub report: VerificationReport,
}

/// Runs the scenario described by a validated config.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Outcome> {
    match cfg.kind {
        Kind::TwolevelCubic => run_cubic(cfg),
        Kind::TwolevelAxis => run_axis(cfg),
        Kind::Transport1d => run_wave(cfg, WaveDrive::Transport),
        Kind::Dilatation1d => run_wave(cfg, WaveDrive::Dilatation),
        Kind::HydrogenCheck => run_hydrogen(cfg),
        Kind::Nlevel | Kind::Custom => run_discrete(cfg),
    }
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a: f64, b| a.max(b.abs()))
}
