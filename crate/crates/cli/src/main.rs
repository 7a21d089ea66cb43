mod commands;
mod config;
mod json;

use clap::{Parser, Subcommand};
use commands::{CliError, Check, Method, EXIT_VALIDATION};
use config::ValidationError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "stokes-lab", version, about = "Stokes matrices of confluent hypergeometric systems and their quantum relations")]
struct Cli {
    /// Problem description in JSON.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Formal series solution at infinity and its residual.
    Formal {
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
    /// One Stokes block entry for the pair `s,t` (1-based).
    Stokes {
        #[arg(long)]
        pair: String,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Full Stokes matrices at direction `d`.
    Assemble {
        #[arg(long, allow_negative_numbers = true)]
        d: Option<f64>,
    },
    /// Run one of the relation or consistency checks.
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[arg(long, allow_negative_numbers = true)]
        d: Option<f64>,
    },
    /// Apply a braid word such as `s1 s2^-1` to the Stokes data at `d`.
    Braid {
        #[arg(long, allow_negative_numbers = true)]
        word: String,
        #[arg(long, allow_negative_numbers = true)]
        d: Option<f64>,
    },
    /// Geometry and resonance summary; `--all` also runs every check.
    Report {
        #[arg(long)]
        all: bool,
        #[arg(long, allow_negative_numbers = true)]
        d: Option<f64>,
    },
}

const THREADS_VAR: &str = "STOKES_LAB_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let invalid = |message: String| CliError::Validation(ValidationError { pointer: THREADS_VAR.into(), message });
    let n: usize = match text.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(invalid(format!("expected a positive integer, got {text:?}"))),
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| invalid(e.to_string()))
}

fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    configure_threads()?;
    let Some(path) = &cli.config else {
        return Err(CliError::Validation(ValidationError {
            pointer: "--config".into(),
            message: "a problem file is required".into(),
        }));
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(ValidationError { pointer: "--config".into(), message: format!("{}: {e}", path.display()) })
    })?;
    let problem = config::parse(&text)?;
    let setup = config::setup(&problem)?;
    match &cli.command {
        Command::Formal { order } => commands::formal(&setup, *order),
        Command::Stokes { pair, method } => commands::stokes(&setup, pair, *method),
        Command::Assemble { d } => commands::assemble(&setup, commands::resolve_direction(&setup, *d)?),
        Command::Verify { check, d } => commands::verify(&setup, *check, commands::resolve_direction(&setup, *d)?),
        Command::Braid { word, d } => commands::braid(&setup, word, commands::resolve_direction(&setup, *d)?),
        Command::Report { all, d } => commands::report(&setup, *all, commands::resolve_direction(&setup, *d)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (value, code) = match run(&cli) {
        Ok(v) => (v, 0),
        Err(e) => {
            eprintln!("stokes-lab: {}", e.to_json()["error"]["message"].as_str().unwrap_or("error"));
            (e.to_json(), e.exit_code())
        }
    };
    println!("{}", serde_json::to_string_pretty(&value).expect("reports serialize"));
    debug_assert!(code == 0 || code >= EXIT_VALIDATION);
    ExitCode::from(code as u8)
}
