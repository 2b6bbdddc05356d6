//! Command-line driver. Exit codes: 0 pass, 1 failed check, 2 configuration
//! error, 3 numeric error.

use apsdet::cli::{run, ConfigError, ExperimentConfig, Format, Kind, RunError};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "apsdet", version, about = "Zeta-determinants with APS boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configured truncation.
    #[arg(long, global = true)]
    kmax: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the configuration without running it.
    Validate,
    Spectrum,
    Logdet,
    DetRatio,
    BfkCheck,
    Adiabatic,
    Identities,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Text,
    Csv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Text => Format::Text,
            OutFormat::Csv => Format::Csv,
        }
    }
}

impl Command {
    fn kind(self) -> Option<Kind> {
        Some(match self {
            Command::Validate => return None,
            Command::Spectrum => Kind::Spectrum,
            Command::Logdet => Kind::Logdet,
            Command::DetRatio => Kind::DetRatio,
            Command::BfkCheck => Kind::BfkCheck,
            Command::Adiabatic => Kind::Adiabatic,
            Command::Identities => Kind::Identities,
        })
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let path = cli.config.as_ref().ok_or_else(|| ConfigError {
        path: String::new(),
        message: "--config is required".into(),
    })?;
    let mut config = ExperimentConfig::from_file(path)?;
    if let Some(kind) = cli.command.kind() {
        match config.kind {
            Some(k) if k != kind => {
                return Err(ConfigError {
                    path: "kind".into(),
                    message: format!("config is for `{}`, not `{}`", k.name(), kind.name()),
                })
            }
            _ => config.kind = Some(kind),
        }
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(k) = cli.kmax {
        config.truncation = k;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Command::Validate = cli.command {
        return match config.resolve() {
            Ok(_) => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    let report = match run(&config) {
        Ok(r) => r,
        Err(e @ RunError::Config(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e @ RunError::Numeric(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let format = cli.format.map(Format::from).unwrap_or_else(|| config.format());
    let text = report.render(format);
    let out = cli.out.clone().or_else(|| config.output.as_ref().and_then(|o| o.path.clone()).map(PathBuf::from));
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
