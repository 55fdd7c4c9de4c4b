//! Command-line front end for the `biharm` solver: TOML configuration,
//! certificate and solution output, and named validation suites.

pub mod commands;
pub mod config;
pub mod suites;

pub use commands::{run_certify, run_solve, run_validate, OracleKind, Outcome};
pub use config::{parse_config, ConfigError, Problem, RunConfig};
pub use suites::Suite;

/// Sizes the global rayon pool from `SOLVER_THREADS`, when set.
pub fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("SOLVER_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("SOLVER_THREADS must be a positive integer, got {raw:?}"))?;
    anyhow::ensure!(threads > 0, "SOLVER_THREADS must be a positive integer, got 0");
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}
