//! Named self-checks behind `biharm validate --suite <label>`.

use anyhow::Result;
use biharm::catalog::{reference_kernels, KernelSpec, NonlinearitySpec, Profile, Reaction};
use biharm::certify::{contraction_constant, max_horizon};
use biharm::duhamel::apply_tau;
use biharm::oracles::{self, random_smooth_field};
use biharm::picard::{measure_contraction_ratio, picard_solve, Q_SLACK};
use biharm::spectral::{forward_ft, fourth_derivative, inverse_ft, l2_norm};
use biharm::{Field, GridSpec, Model, ProblemParams, SolveOptions, TimeGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Fourier,
    Bounds,
    Contraction,
    Oracles,
    All,
}

impl Suite {
    fn label(self) -> &'static str {
        match self {
            Suite::Fourier => "fourier",
            Suite::Bounds => "bounds",
            Suite::Contraction => "contraction",
            Suite::Oracles => "oracles",
            Suite::All => "all",
        }
    }
}

/// One measured quantity against its threshold; passes when `value ≤ threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn run(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Fourier | Suite::All) {
        checks.extend(fourier(seed)?);
    }
    if matches!(suite, Suite::Bounds | Suite::All) {
        checks.extend(bounds()?);
    }
    if matches!(suite, Suite::Contraction | Suite::All) {
        checks.extend(contraction(seed)?);
    }
    if matches!(suite, Suite::Oracles | Suite::All) {
        checks.extend(oracle_checks()?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        suite: suite.label(),
        seed,
        checks,
        passed,
    })
}

fn spectral_l2(f: &Field) -> f64 {
    let spectrum = forward_ft(f);
    let sum: f64 = spectrum.coeffs().iter().map(|c| c.norm_sqr()).sum();
    (sum * f.grid().dp()).sqrt()
}

fn fourier(seed: u64) -> Result<Vec<Check>> {
    let grid = GridSpec::new(40.0, 1024)?;
    let gauss = grid.sample(|x| (-0.5 * x * x).exp())?;
    let spectrum = forward_ft(&gauss);
    let transform_error = spectrum
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let p = grid.frequency(j);
            (c - (-0.5 * p * p).exp()).norm()
        })
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = TimeGrid::new(1.0, 4)?;
    let (mut parseval, mut round_trip) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let field = random_smooth_field(grid, tg, &mut rng)?;
        for f in field.frames() {
            let norm = l2_norm(f);
            parseval = parseval.max((norm * norm - spectral_l2(f).powi(2)).abs() / (norm * norm));
            let back = inverse_ft(&forward_ft(f))?;
            round_trip = round_trip.max(l2_norm(&back.sub(f)?) / norm);
        }
    }

    let exact = grid.sample(|x| (x.powi(4) - 6.0 * x * x + 3.0) * (-0.5 * x * x).exp())?;
    let fourth_error = fourth_derivative(&gauss).sub(&exact)?.max_abs();

    Ok(vec![
        Check::at_most("fourier.gaussian_transform", transform_error, 1e-10),
        Check::at_most("fourier.parseval", parseval, 1e-10),
        Check::at_most("fourier.round_trip", round_trip, 1e-12),
        Check::at_most("fourier.fourth_derivative", fourth_error, 1e-8),
    ])
}

fn bounds() -> Result<Vec<Check>> {
    let grid = GridSpec::new(40.0, 1024)?;
    let mut checks = Vec::new();
    for profile in reference_kernels() {
        let kernel = KernelSpec::new(profile, &grid)?;
        let report = oracles::check_fourier_bounds(&kernel, &grid)?;
        checks.push(Check::at_most(
            format!("bounds.{profile}"),
            -report.slack(),
            oracles::BOUND_SLACK,
        ));
    }
    let kernel = KernelSpec::new(Profile::Gaussian { sigma: 1.0, amp: 1.0 }, &grid)?;
    let gap = oracles::check_fourier_bounds(&kernel, &grid)?.first_bound_gap();
    checks.push(Check::at_most("bounds.gaussian_saturation", gap.abs(), oracles::BOUND_SLACK));
    Ok(checks)
}

/// Gaussian kernel and linear reaction with `g·l = gl`, `a = b = 0`.
pub fn linear_model(grid: &GridSpec, gl: f64) -> Result<Model> {
    let kernel = KernelSpec::new(Profile::Gaussian { sigma: 1.0, amp: 1.0 }, grid)?;
    let kappa = gl / kernel.g_constant();
    let nonlinearity = NonlinearitySpec::without_offset(Reaction::Linear { kappa }, grid)?;
    Ok(Model::new(ProblemParams::new(0.0, 0.0)?, kernel, nonlinearity))
}

const CONTRACTION_PAIRS: usize = 100;

/// Counts lattice points where raising one of `T, g, l, a, |b|` fails to
/// raise `q` strictly. The lattice has five levels per parameter.
pub fn monotonicity_breaks() -> Result<usize> {
    let levels = [0.0, 0.25, 0.5, 1.0, 2.0];
    let positive = [0.1, 0.3, 0.6, 1.0, 1.5];
    let mut breaks = 0;
    for &t in &positive {
        for &g in &positive {
            for &l in &positive {
                for &a in &levels {
                    for &b in &levels {
                        let base = contraction_constant(g, l, a, b, t)?;
                        let raised = [
                            contraction_constant(g, l, a, b, t * 1.5)?,
                            contraction_constant(g * 1.5, l, a, b, t)?,
                            contraction_constant(g, l * 1.5, a, b, t)?,
                            contraction_constant(g, l, a + 0.25, b, t)?,
                            contraction_constant(g, l, a, b + 0.25, t)?,
                            contraction_constant(g, l, a, -(b + 0.25), t)?,
                        ];
                        breaks += raised.iter().filter(|&&q| q <= base).count();
                    }
                }
            }
        }
    }
    Ok(breaks)
}

fn contraction(seed: u64) -> Result<Vec<Check>> {
    let grid = GridSpec::new(40.0, 256)?;
    let tg = TimeGrid::new(1.0, 64)?;
    let model = linear_model(&grid, 0.1)?;
    let q = model.contraction_constant(1.0)?;
    let u0 = grid.sample(|x| (-0.5 * x * x).exp())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..CONTRACTION_PAIRS {
        let v1 = random_smooth_field(grid, tg, &mut rng)?;
        let v2 = random_smooth_field(grid, tg, &mut rng)?;
        worst = worst.max(measure_contraction_ratio(&v1, &v2, &u0, &model)?);
    }

    let t1 = max_horizon(1.0, 0.1, 0.0, 0.0)?.unwrap_or(f64::NAN);
    let t2 = max_horizon(1.0, 0.1, 0.0, 1.0)?.unwrap_or(f64::NAN);
    let horizon_error = ((t1 - (98.0f64 / 3.0).sqrt()) / t1)
        .abs()
        .max(((t2 - (98.0f64 / 9.0).sqrt()) / t2).abs());

    let monotonicity_breaks = monotonicity_breaks()?;

    Ok(vec![
        Check::at_most("contraction.measured_ratio", worst, q * Q_SLACK),
        Check::at_most("contraction.max_horizon", horizon_error, 1e-8),
        Check::at_most("contraction.monotonicity_breaks", monotonicity_breaks as f64, 0.0),
    ])
}

fn oracle_checks() -> Result<Vec<Check>> {
    let grid = GridSpec::new(40.0, 256)?;
    let tg = TimeGrid::new(1.0, 256)?;
    let u0 = grid.sample(|x| (-0.5 * x * x).exp())?;
    let params = ProblemParams::new(0.0, 0.5)?;
    let kernel = KernelSpec::new(Profile::Gaussian { sigma: 1.0, amp: 1.0 }, &grid)?;

    let h = Profile::Gaussian { sigma: 2.0, amp: 0.5 }.sample(&grid)?;
    let forcing = Model::new(params, kernel.clone(), NonlinearitySpec::new(Reaction::Forcing, h.clone())?);
    let v = biharm::SpaceTimeField::constant_in_time(&u0, tg);
    let mapped = apply_tau(&v, &u0, &forcing)?;
    let exact = oracles::exact_forcing_solution(&u0, &params, &kernel, &h, tg)?;
    let forcing_error = oracles::relative_l2_error(&mapped, &exact)?;

    let linear = linear_model(&grid, 0.1)?;
    let opts = SolveOptions::default();
    let (solution, _) = picard_solve(&u0, &linear, tg, &opts)?;
    let Reaction::Linear { kappa } = linear.nonlinearity.reaction() else {
        unreachable!("linear_model builds a linear reaction")
    };
    let exact = oracles::exact_linear_solution(&u0, &linear.params, &linear.kernel, kappa, tg)?;
    let linear_error = oracles::relative_l2_error(&solution, &exact)?;

    let tanh = NonlinearitySpec::parse("tanh(s=0.05)+h:gaussian(sigma=2.0,amp=0.1)", &grid)?;
    let tanh_model = Model::new(params, kernel, tanh);
    let (solution, _) = picard_solve(&u0, &tanh_model, tg, &opts)?;
    let stepped = oracles::if_stepper_solve(&u0, &tanh_model, tg, 4)?;
    let stepper_error = oracles::relative_l2_error(&solution, &stepped)?;

    Ok(vec![
        Check::at_most("oracles.forcing_closed_form", forcing_error, 1e-8),
        Check::at_most("oracles.linear_closed_form", linear_error, 1e-6),
        Check::at_most("oracles.stepper_tanh", stepper_error, 1e-5f64.max(10.0 * opts.tol)),
    ])
}
