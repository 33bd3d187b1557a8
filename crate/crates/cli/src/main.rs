use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nmrgate::experiment::{self, ExperimentConfig, Status};
use nmrgate::Error;

/// Simulate multi-controlled NOT gates on liquid-state NMR registers.
#[derive(Parser)]
#[command(name = "nmrgate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config and write spectra, peak tables and a report.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List the shipped spin systems.
    Presets,
    /// Print the two-qubit network for Lambda_n(not), n = 2 or 3.
    Decompose { n: usize },
    /// Fidelity of the selective pulse against pulse amplitude, as CSV.
    Scan {
        config: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_PHYSICS: u8 = 3;

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Io(_) => ExitCode::from(EXIT_RUNTIME),
        _ => ExitCode::from(EXIT_CONFIG),
    }
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    ExperimentConfig::from_toml(&text)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let report = match cfg.resolve().and_then(|exp| exp.run()) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let dir = out
                .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            if let Err(e) = report.write_to(&dir) {
                return fail(e);
            }
            print!("{}", report.summary());
            println!("output_dir={}", dir.display());
            match report.status {
                Status::Passed => ExitCode::SUCCESS,
                Status::Failed => ExitCode::from(EXIT_PHYSICS),
            }
        }
        Command::Presets => match experiment::describe_presets() {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Decompose { n } => match experiment::describe_decomposition(n) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Scan { config, out } => {
            let result = load(&config).and_then(|cfg| {
                let exp = cfg.resolve()?;
                let amps = cfg.scan_amplitudes(&exp)?;
                exp.scan(&amps)
            });
            let csv = match result {
                Ok(points) => experiment::scan_to_csv(&points),
                Err(e) => return fail(e),
            };
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, csv) {
                        return fail(e.into());
                    }
                }
                None => print!("{csv}"),
            }
            ExitCode::SUCCESS
        }
    }
}
