use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use unideform_cli::{execute, load_config, CliError, Kind, EXIT_PASS};

#[derive(Parser)]
#[command(name = "unideform", version, about = "Run deformed-driver scenarios and verify adiabatic tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV series plus report.json
    Run {
        config: PathBuf,
        /// Output directory (overrides output.dir)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a config key, e.g. numerics.n_steps=2000
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check a config and print it with defaults filled in
    Validate { config: PathBuf },
    /// List the scenario kinds
    ListScenarios,
}

fn fail(err: CliError) -> ExitCode {
    eprintln!("error: {err}");
    println!("{}", serde_json::to_string_pretty(&err.to_json()).unwrap());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListScenarios => {
            for k in Kind::ALL {
                println!("{:<16} {}", k.name(), k.summary());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load_config(&config, &[]) {
            Ok(cfg) => {
                println!("{}", serde_json::to_string_pretty(&cfg.echo()).unwrap());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Run { config, out, overrides } => {
            let cfg = match load_config(&config, &overrides) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            match execute(&cfg, &dir) {
                Ok(run) => {
                    for m in &run.report.metrics {
                        let tol = m.tolerance.map_or("-".to_string(), |t| format!("{t:e}"));
                        let status = if m.tolerance.is_none() { "info" } else if m.pass { "pass" } else { "FAIL" };
                        println!("{:<32} {:>24e} {:>10} {status}", m.name, m.value, tol);
                    }
                    for f in &run.files {
                        println!("wrote {}", f.display());
                    }
                    println!("wrote {}", run.report_path.display());
                    if run.exit_code != EXIT_PASS {
                        eprintln!("{} metric(s) outside tolerance", run.report.failures().len());
                    }
                    ExitCode::from(run.exit_code as u8)
                }
                Err(e) => fail(e),
            }
        }
    }
}
