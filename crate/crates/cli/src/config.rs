//! TOML run configuration.
//!
//! ```toml
//! seed = 7                     # optional, feeds probe-based checks
//!
//! [grid]
//! L = 40.0
//! N = 512
//!
//! [time]
//! T = 1.0                      # total horizon
//! M = 256                      # steps per window
//! windows = 1                  # optional; windows of length T/windows
//!
//! [params]
//! a = 0.0
//! b = 0.0
//!
//! [model]
//! kernel = "gaussian(sigma=1.0,amp=1.0)"
//! nonlinearity = "tanh(s=0.05)+h:gaussian(sigma=2.0,amp=0.1)"
//! initial = "gaussian(sigma=1.0,amp=1.0)"   # optional, default "zero"
//!
//! [solver]
//! tol = 1e-10
//! max_iter = 50
//! override_uncertified = false  # optional
//!
//! [output]                      # optional
//! directory = "out"
//! csv = true
//! summary = true
//!
//! [certify]                     # optional
//! eps = 1e-8
//! ```

use std::path::PathBuf;

use biharm::catalog::Profile;
use biharm::{
    Field, GridSpec, KernelSpec, Model, NonlinearitySpec, ProblemParams, SolveOptions, TimeGrid,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("config key `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSection,
    pub time: TimeSection,
    pub params: ParamsSection,
    pub model: ModelSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub certify: CertifySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "M")]
    pub steps: usize,
    #[serde(default = "one")]
    pub windows: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kernel: String,
    pub nonlinearity: String,
    #[serde(default = "zero_profile")]
    pub initial: String,
}

fn zero_profile() -> String {
    "zero".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub override_uncertified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub summary: bool,
}

fn default_directory() -> PathBuf {
    PathBuf::from(".")
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            csv: true,
            summary: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    biharm::certify::DEFAULT_SUPPORT_EPS
}

impl Default for CertifySection {
    fn default() -> Self {
        Self { eps: default_eps() }
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Everything a run needs, resolved from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: GridSpec,
    /// Time grid of one window.
    pub window: TimeGrid,
    pub windows: usize,
    pub model: Model,
    pub u0: Field,
    pub options: SolveOptions,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = GridSpec::new(self.grid.half_width, self.grid.points)
            .map_err(|e| invalid("grid", e.to_string()))?;
        if !(self.time.horizon.is_finite() && self.time.horizon > 0.0) {
            return Err(invalid("time.T", "must satisfy T > 0"));
        }
        if self.time.steps < 2 {
            return Err(invalid("time.M", "must satisfy M ≥ 2"));
        }
        if self.time.windows < 1 {
            return Err(invalid("time.windows", "must be at least 1"));
        }
        if !self.params.a.is_finite() || self.params.a < 0.0 {
            return Err(invalid("params.a", format!("must satisfy a ≥ 0, got {}", self.params.a)));
        }
        if !self.params.b.is_finite() {
            return Err(invalid("params.b", "must be finite"));
        }
        Profile::parse(&self.model.kernel).map_err(|e| invalid("model.kernel", e.to_string()))?;
        Profile::parse(&self.model.initial).map_err(|e| invalid("model.initial", e.to_string()))?;
        NonlinearitySpec::parse(&self.model.nonlinearity, &grid)
            .map_err(|e| invalid("model.nonlinearity", e.to_string()))?;
        if !(self.solver.tol.is_finite() && self.solver.tol > 0.0) {
            return Err(invalid("solver.tol", "must satisfy tol > 0"));
        }
        if self.solver.max_iter < 1 {
            return Err(invalid("solver.max_iter", "must be at least 1"));
        }
        if !(self.certify.eps.is_finite() && self.certify.eps > 0.0) {
            return Err(invalid("certify.eps", "must satisfy eps > 0"));
        }
        Ok(())
    }

    /// Window length `T / windows`.
    pub fn window_horizon(&self) -> f64 {
        self.time.horizon / self.time.windows as f64
    }

    /// Builds the model; computes the kernel constants.
    pub fn resolve(&self) -> Result<Problem, ConfigError> {
        self.validate()?;
        let grid = GridSpec::new(self.grid.half_width, self.grid.points)
            .map_err(|e| invalid("grid", e.to_string()))?;
        let window = TimeGrid::new(self.window_horizon(), self.time.steps)
            .map_err(|e| invalid("time", e.to_string()))?;
        let params = ProblemParams::new(self.params.a, self.params.b)
            .map_err(|e| invalid("params", e.to_string()))?;
        let kernel = KernelSpec::parse(&self.model.kernel, &grid)
            .map_err(|e| invalid("model.kernel", e.to_string()))?;
        let nonlinearity = NonlinearitySpec::parse(&self.model.nonlinearity, &grid)
            .map_err(|e| invalid("model.nonlinearity", e.to_string()))?;
        let u0 = Profile::parse(&self.model.initial)
            .and_then(|p| p.sample(&grid))
            .map_err(|e| invalid("model.initial", e.to_string()))?;
        Ok(Problem {
            grid,
            window,
            windows: self.time.windows,
            model: Model::new(params, kernel, nonlinearity),
            u0,
            options: SolveOptions {
                tol: self.solver.tol,
                max_iter: self.solver.max_iter,
                override_uncertified: self.solver.override_uncertified,
            },
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }
}
