use thiserror::Error;

use crate::picard::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("spectrum is not conjugate-symmetric (relative deviation {deviation:.3e})")]
    NotConjugateSymmetric { deviation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel is numerically zero (L1 norm {0:.3e})")]
    TrivialKernel(f64),

    #[error("profile does not decay at the boundary: |G(±L)| = {0:.3e}")]
    NotDecayed(f64),

    #[error("kernel L1 norms did not converge under refinement (last relative change {0:.3e})")]
    RefinementFailed(f64),

    #[error("assumption violated at u1 = {u1}, u2 = {u2}, x = {x}: {what}")]
    AssumptionViolated {
        what: String,
        u1: f64,
        u2: f64,
        x: f64,
    },

    #[error("cannot parse {what} `{input}`: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("contraction not certified: q = {q:.6} >= 1{}", t_max.map(|t| format!(" (largest certified horizon T_max = {t:.6})")).unwrap_or_default())]
    Uncertified { q: f64, t_max: Option<f64> },

    #[error("Picard iteration did not converge after {} iterations", report.iterations)]
    NotConverged { report: Box<SolveReport> },

    #[error("window {window} failed: {source}")]
    WindowFailed {
        window: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("integrating-factor stepper became unstable at t = {t} (norm ratio {ratio:.3e})")]
    Unstable { t: f64, ratio: f64 },

    #[error("inputs are indistinguishable (W^{{1,(4,2)}} distance {0:.3e})")]
    Indistinguishable(f64),
}
