//! The `certify`, `solve` and `validate` subcommands.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use biharm::catalog::Reaction;
use biharm::oracles::{self, OracleResult};
use biharm::picard::{picard_solve, solve_global};
use biharm::{ContractionCertificate, Error, SolveReport, SpaceTimeField};
use serde::Serialize;

use crate::config::{Problem, RunConfig};
use crate::suites::{self, Suite};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_UNCERTIFIED: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_VALIDATION_FAILED: u8 = 4;

/// Exit status plus a line for stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub message: String,
}

impl Outcome {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn describe_horizon(t_max: Option<f64>) -> String {
    match t_max {
        Some(t) => format!("T_max = {t:.12e}"),
        None => "no horizon is certifiable (g·l·√2 ≥ 1), T_max = none".into(),
    }
}

pub fn run_certify(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let problem = cfg.resolve()?;
    let cert = ContractionCertificate::evaluate(&problem.model, cfg.window_horizon(), cfg.certify.eps)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_json(&out.join("certificate.json"), &cert)?;
    if cert.certified {
        Ok(Outcome::new(
            EXIT_OK,
            format!("certified: q = {:.12e} < 1 on T = {}", cert.q, cert.horizon),
        ))
    } else {
        Ok(Outcome::new(
            EXIT_UNCERTIFIED,
            format!(
                "not certified: q = {:.12e} ≥ 1 on T = {}; {}",
                cert.q,
                cert.horizon,
                describe_horizon(cert.t_max)
            ),
        ))
    }
}

/// Reference solution a `solve` run is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleKind {
    /// Closed form for `F(u) = κu` without offset.
    Linear,
    /// Closed form for `F(u, x) = h(x)`.
    Forcing,
    /// Integrating-factor RK4 with four substeps per interval.
    Stepper,
}

pub const LINEAR_ORACLE_TOLERANCE: f64 = 1e-6;
pub const FORCING_ORACLE_TOLERANCE: f64 = 1e-8;
pub const STEPPER_ORACLE_TOLERANCE: f64 = 1e-5;
const STEPPER_SUBSTEPS: usize = 4;

fn run_oracle(kind: OracleKind, problem: &Problem, field: &SpaceTimeField) -> Result<OracleResult> {
    let tg = *field.timegrid();
    let model = &problem.model;
    let result = match kind {
        OracleKind::Linear => {
            let Reaction::Linear { kappa } = model.nonlinearity.reaction() else {
                anyhow::bail!("the linear oracle needs a linear nonlinearity");
            };
            anyhow::ensure!(
                model.nonlinearity.offset().max_abs() == 0.0,
                "the linear oracle needs a zero offset"
            );
            let exact = oracles::exact_linear_solution(&problem.u0, &model.params, &model.kernel, kappa, tg)?;
            oracles::compare_fields("linear", field, &exact, LINEAR_ORACLE_TOLERANCE)?
        }
        OracleKind::Forcing => {
            anyhow::ensure!(
                model.nonlinearity.reaction() == Reaction::Forcing,
                "the forcing oracle needs the forcing nonlinearity"
            );
            let exact = oracles::exact_forcing_solution(
                &problem.u0,
                &model.params,
                &model.kernel,
                model.nonlinearity.offset(),
                tg,
            )?;
            oracles::compare_fields("forcing", field, &exact, FORCING_ORACLE_TOLERANCE)?
        }
        OracleKind::Stepper => {
            let reference = oracles::if_stepper_solve(&problem.u0, model, tg, STEPPER_SUBSTEPS)?;
            let tolerance = STEPPER_ORACLE_TOLERANCE.max(10.0 * problem.options.tol);
            oracles::compare_fields("stepper", field, &reference, tolerance)?
        }
    };
    Ok(result)
}

#[derive(Debug, Serialize)]
struct Summary {
    iterations: usize,
    residual_history: Vec<f64>,
    measured_ratio_max: Option<f64>,
    certified_q: f64,
    final_w142_norm: f64,
    wall_time_s: f64,
    converged: bool,
    windows: usize,
    seam_jumps: Vec<f64>,
    oracles: Vec<OracleResult>,
}

impl Summary {
    fn from_reports(reports: &[SolveReport], seam_jumps: Vec<f64>, wall_time_s: f64) -> Self {
        let last = reports.last().expect("at least one window report");
        Self {
            iterations: reports.iter().map(|r| r.iterations).sum(),
            residual_history: reports.iter().flat_map(|r| r.residual_history.iter().copied()).collect(),
            measured_ratio_max: reports.iter().filter_map(SolveReport::measured_ratio_max).reduce(f64::max),
            certified_q: last.certified_q,
            final_w142_norm: last.final_w142_norm,
            wall_time_s,
            converged: reports.iter().all(|r| r.converged),
            windows: reports.len(),
            seam_jumps,
            oracles: Vec::new(),
        }
    }
}

/// Writes `x,t,u` rows ordered by `t`, then `x`, in 17 significant digits.
pub fn write_field_csv(path: &Path, field: &SpaceTimeField) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "x,t,u")?;
    let xs = field.grid().nodes();
    for (t, frame) in field.timegrid().nodes().iter().zip(field.frames()) {
        for (x, u) in xs.iter().zip(frame.values()) {
            writeln!(w, "{x:.16e},{t:.16e},{u:.16e}")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run_solve(cfg: &RunConfig, out: &Path, oracle: Option<OracleKind>) -> Result<Outcome> {
    let problem = cfg.resolve()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let started = Instant::now();
    let solved = if problem.windows == 1 {
        picard_solve(&problem.u0, &problem.model, problem.window, &problem.options)
            .map(|(field, report)| (field, vec![report], Vec::new()))
    } else {
        solve_global(
            &problem.u0,
            &problem.model,
            cfg.time.horizon,
            cfg.window_horizon(),
            cfg.time.steps,
            &problem.options,
        )
        .map(|g| (g.field, g.reports, g.seam_jumps))
    };
    let (field, reports, seams) = match solved {
        Ok(v) => v,
        Err(e) => return refusal(e, cfg, out, started),
    };
    let mut summary = Summary::from_reports(&reports, seams, started.elapsed().as_secs_f64());
    if let Some(kind) = oracle {
        summary.oracles.push(run_oracle(kind, &problem, &field)?);
    }
    if cfg.output.csv {
        write_field_csv(&out.join("field.csv"), &field)?;
    }
    if cfg.output.summary {
        write_json(&out.join("summary.json"), &summary)?;
    }
    if summary.oracles.iter().any(|o| !o.passed) {
        return Ok(Outcome::new(
            EXIT_VALIDATION_FAILED,
            format!("converged in {} iterations, but the oracle check failed", summary.iterations),
        ));
    }
    Ok(Outcome::new(
        EXIT_OK,
        format!(
            "converged in {} iterations, residual {:.3e}",
            summary.iterations,
            summary.residual_history.last().copied().unwrap_or(0.0)
        ),
    ))
}

fn refusal(err: Error, cfg: &RunConfig, out: &Path, started: Instant) -> Result<Outcome> {
    let err = match err {
        Error::WindowFailed { source, .. } => *source,
        other => other,
    };
    match err {
        Error::Uncertified { q, t_max } => Ok(Outcome::new(
            EXIT_UNCERTIFIED,
            format!(
                "refusing to iterate: q = {q:.12e} ≥ 1 on T = {}; {}; set solver.override_uncertified to proceed",
                cfg.window_horizon(),
                describe_horizon(t_max)
            ),
        )),
        Error::NotConverged { report } => {
            if cfg.output.summary {
                let summary = Summary::from_reports(
                    std::slice::from_ref(&*report),
                    Vec::new(),
                    started.elapsed().as_secs_f64(),
                );
                write_json(&out.join("summary.json"), &summary)?;
            }
            Ok(Outcome::new(
                EXIT_NOT_CONVERGED,
                format!(
                    "no convergence within {} iterations, last residual {:.3e}",
                    report.iterations,
                    report.residual_history.last().copied().unwrap_or(f64::NAN)
                ),
            ))
        }
        other => Err(other.into()),
    }
}

pub fn run_validate(suite: Suite, seed: u64, sink: &mut impl Write) -> Result<Outcome> {
    let report = suites::run(suite, seed)?;
    serde_json::to_writer_pretty(&mut *sink, &report)?;
    writeln!(sink)?;
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(Outcome::new(EXIT_OK, format!("{} checks passed", report.checks.len())))
    } else {
        Ok(Outcome::new(
            EXIT_VALIDATION_FAILED,
            format!("failed: {}", failed.join(", ")),
        ))
    }
}
