use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bgda::experiment::{run_experiment, summarize_trace};
use bgda::{io, Error};
use clap::{Parser, Subcommand};

/// Log verbosity, in `env_logger` filter syntax (default `warn`).
const LOG_ENV: &str = "BGDA_LOG";

#[derive(Parser)]
#[command(name = "bgda", version, about = "Bregman descent-ascent loss weighting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its trace and summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Master seed; takes precedence over the config and overrides.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// `section.key=value`, applied in order after the file is read.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Recompute the summary of a trace file and print it as JSON.
    Summarize { trace: PathBuf },
    /// Print the fully resolved config (defaults filled in) as TOML.
    Config {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

/// A failure together with the process exit code it maps to.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn input(e: Error) -> Self {
        let kind = match &e {
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "input",
            _ => return Self::from(e),
        };
        Self { code: 2, kind, message: e.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Config(_) => (2, "config"),
            Error::Parse { .. } => (2, "parse"),
            Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::MissingColumn(_) | Error::Unsupported(_) => {
                (2, "input")
            }
            Error::Io(_) => (1, "io"),
            e if e.is_numeric() => (3, "numeric"),
            Error::UndefinedRatio => (3, "numeric"),
            _ => (1, "internal"),
        };
        Self { code, kind, message: e.to_string() }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        kind: "input",
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, seed, out, mut overrides } => {
            let text = read_text(&config)?;
            if let Some(seed) = seed {
                overrides.push(format!("seed={seed}"));
            }
            let cfg = io::load_config(&text, &overrides).map_err(Failure::input)?;
            let outcome = run_experiment(&cfg, &out)?;
            log::info!("wrote results to {}", out.display());
            match outcome.failure {
                None => Ok(()),
                Some(e) => Err(Failure { code: 3, kind: "numeric", message: e.to_string() }),
            }
        }
        Command::Summarize { trace } => {
            let text = read_text(&trace)?;
            let parsed = io::parse_trace(&text).map_err(Failure::input)?;
            let summary = summarize_trace(&parsed)?;
            print!("{}", io::summary_to_json(&summary)?);
            Ok(())
        }
        Command::Config { config, overrides } => {
            let text = match config {
                Some(path) => read_text(&path)?,
                None => String::new(),
            };
            let cfg = io::load_config(&text, &overrides).map_err(Failure::input)?;
            print!("{}", io::emit_config(&cfg)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let doc = serde_json::json!({ "error": { "kind": f.kind, "message": f.message, "exit_code": f.code } });
            eprintln!("{doc}");
            ExitCode::from(f.code)
        }
    }
}
