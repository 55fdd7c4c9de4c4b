use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use biharm_cli::commands::EXIT_FAILURE;
use biharm_cli::{configure_threads, parse_config, run_certify, run_solve, run_validate, OracleKind, Outcome, Suite};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "biharm", version, about = "Nonlocal bi-Laplacian reaction-diffusion solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the contraction certificate and write certificate.json.
    Certify {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to output.directory from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Picard iteration and write field.csv and summary.json.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        oracle: Option<OracleKind>,
    },
    /// Run a validation suite and print a JSON report.
    Validate {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<Outcome> {
    configure_threads()?;
    match cli.command {
        Command::Certify { config, out } => {
            let cfg = load(&config)?;
            let out = out.unwrap_or_else(|| cfg.output.directory.clone());
            run_certify(&cfg, &out)
        }
        Command::Solve { config, out, oracle } => run_solve(&load(&config)?, &out, oracle),
        Command::Validate { suite, seed } => run_validate(suite, seed, &mut std::io::stdout().lock()),
    }
}

fn load(path: &PathBuf) -> anyhow::Result<biharm_cli::RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(outcome) => {
            eprintln!("{}", outcome.message);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
