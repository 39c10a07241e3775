//! Scenario runner for `unideform`: TOML configs in, CSV series and a JSON
//! verification report out.

pub mod config;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use unideform::verify::VerificationReport;

pub use config::{apply_override, parse_table, validate_config, validate_table, ConfigError, Kind, ScenarioConfig, Violation};
pub use output::{report_json, Series};
pub use scenarios::{run_scenario, Outcome};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("scenario {kind}: {source}")]
    Scenario { kind: Kind, source: unideform::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario { source, .. } if source.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self) -> Value {
        match self {
            CliError::Config(ConfigError::Syntax { line, column, message }) => json!({
                "error": "syntax",
                "line": line,
                "column": column,
                "message": message,
            }),
            CliError::Config(ConfigError::Invalid(v)) => json!({
                "error": "config",
                "violations": v,
            }),
            CliError::Read { path, source } => json!({
                "error": "config",
                "violations": [{ "field": "path", "message": format!("cannot read {}: {source}", path.display()) }],
            }),
            CliError::Scenario { kind, source } => json!({
                "error": if source.is_numerical() { "numerical" } else { "invalid-argument" },
                "scenario": kind,
                "message": source.to_string(),
            }),
            CliError::Write { path, source } => json!({
                "error": "output",
                "path": path,
                "message": source.to_string(),
            }),
        }
    }
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub report: VerificationReport,
    /// CSV files written, in emission order.
    pub files: Vec<PathBuf>,
    pub report_path: PathBuf,
    pub exit_code: i32,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.exit_code == EXIT_PASS
    }
}

/// Reads, overrides and validates a config file.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let mut table = parse_table(&text)?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    Ok(validate_table(&table)?)
}

/// Runs a scenario and writes its CSV series, `report.json` and
/// `manifest.json` (config echo, file list, exit status) into `out`.
pub fn execute(cfg: &ScenarioConfig, out: &Path) -> Result<RunReport, CliError> {
    let outcome = run_scenario(cfg).map_err(|source| CliError::Scenario { kind: cfg.kind, source })?;
    let write = |name: &str, text: &str| {
        let path = out.join(name);
        output::write_file(&path, text).map_err(|source| CliError::Write { path, source })
    };
    let mut files = Vec::with_capacity(outcome.series.len());
    for s in &outcome.series {
        files.push(write(&s.file_name(), &s.to_csv())?);
    }
    let report = report_json(&outcome.report);
    let report_path = write("report.json", &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))?;
    let exit_code = if outcome.report.all_pass() { EXIT_PASS } else { EXIT_TOLERANCE };
    let manifest = json!({
        "scenario": cfg.echo(),
        "files": files.iter().map(|f| f.file_name().unwrap().to_string_lossy()).collect::<Vec<_>>(),
        "report": "report.json",
        "exit_status": exit_code,
    });
    write("manifest.json", &format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap()))?;
    Ok(RunReport { config: cfg.clone(), report: outcome.report, files, report_path, exit_code })
}
