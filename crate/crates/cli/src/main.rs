use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use miso_lab::experiments::{self, tolerance_scale, ExperimentConfig, Report, Tolerances};
use miso_lab::Exec;

/// Verification suites for m-isometries, their generators, and shifts on
/// harmonically weighted Dirichlet spaces.
#[derive(Parser)]
#[command(name = "miso-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Evaluate records on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Run one of the shipped worked examples.
    Examples {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(experiments::example_names()))]
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    }
}

fn execute(cli: Cli) -> Result<Report, String> {
    let scale = tolerance_scale().map_err(|e| e.to_string())?;
    match cli.command {
        Command::Run { config, out, format, sequential } => {
            let text =
                std::fs::read_to_string(&config).map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let config = ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?;
            let tol = Tolerances::new(&config.tolerances_override, scale);
            let exec = if sequential { Exec::Sequential } else { Exec::Parallel };
            let report = experiments::run(&config, &tol, exec).map_err(|e| e.to_string())?;
            let body = render(&report, format);
            match out {
                Some(path) => {
                    std::fs::write(&path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))?
                }
                None => print!("{body}"),
            }
            Ok(report)
        }
        Command::Examples { name, format } => {
            let tol = Tolerances::new(&Default::default(), scale);
            let report = experiments::run_example(&name, &tol, Exec::Parallel).map_err(|e| e.to_string())?;
            print!("{}", render(&report, format));
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(report) if report.all_passed() => ExitCode::SUCCESS,
        Ok(report) => {
            eprintln!("{} of {} records failed", report.summary.failed, report.summary.total);
            ExitCode::from(1)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
