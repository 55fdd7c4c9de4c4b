//! Picard iteration of the Duhamel map and its instrumentation.
//!
//! Convergence is measured in the `W^{1,(4,2)}` space-time norm, the norm in
//! which the contraction estimate is stated. The zeroth iterate is the
//! semigroup evolution of `u0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify;
use crate::duhamel::{apply_semigroup, apply_tau, Model};
use crate::error::{Error, Result};
use crate::spectral::{l2_norm, space_time_l2_norm, w142_norm, Field, SpaceTimeField, TimeGrid};

/// Multiplicative slack applied to every comparison against the certified constant.
pub const Q_SLACK: f64 = 1.1;

/// Smallest `W^{1,(4,2)}` distance accepted by [`measure_contraction_ratio`].
pub const MIN_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Iterate even when the certificate fails (`q ≥ 1`).
    pub override_uncertified: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            override_uncertified: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖u⁽ⁿ⁺¹⁾ - u⁽ⁿ⁾‖` in `W^{1,(4,2)}`, one entry per iteration.
    pub residual_history: Vec<f64>,
    /// The same differences in `L²(x,t)`, for diagnostics.
    pub l2_history: Vec<f64>,
    /// `residual_history[n+1] / residual_history[n]`.
    pub measured_ratios: Vec<f64>,
    pub certified_q: f64,
    pub converged: bool,
    pub final_w142_norm: f64,
}

impl SolveReport {
    pub fn measured_ratio_max(&self) -> Option<f64> {
        self.measured_ratios.iter().copied().reduce(f64::max)
    }
}

fn gate(model: &Model, horizon: f64, opts: &SolveOptions) -> Result<f64> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol > 0 required, got {}", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let q = model.contraction_constant(horizon)?;
    if q >= 1.0 && !opts.override_uncertified {
        let l = model.nonlinearity.lipschitz_constant();
        let t_max = certify::max_horizon(model.kernel.g_constant(), l, model.params.a(), model.params.b())?;
        return Err(Error::Uncertified { q, t_max });
    }
    Ok(q)
}

/// `e^{tλ} u0` at every node: the zeroth Picard iterate.
pub fn semigroup_evolution(u0: &Field, model: &Model, timegrid: TimeGrid) -> Result<SpaceTimeField> {
    let frames = timegrid
        .nodes()
        .par_iter()
        .map(|&t| apply_semigroup(u0, t, &model.params))
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(*u0.grid(), timegrid, frames)
}

/// Iterates `u⁽ⁿ⁺¹⁾ = τ(u⁽ⁿ⁾)` from the semigroup evolution of `u0` until
/// the `W^{1,(4,2)}` step falls below `opts.tol`.
pub fn picard_solve(
    u0: &Field,
    model: &Model,
    timegrid: TimeGrid,
    opts: &SolveOptions,
) -> Result<(SpaceTimeField, SolveReport)> {
    gate(model, timegrid.horizon(), opts)?;
    let initial = semigroup_evolution(u0, model, timegrid)?;
    picard_solve_from(initial, u0, model, opts)
}

/// As [`picard_solve`], starting from an arbitrary first iterate.
pub fn picard_solve_from(
    initial: SpaceTimeField,
    u0: &Field,
    model: &Model,
    opts: &SolveOptions,
) -> Result<(SpaceTimeField, SolveReport)> {
    let certified_q = gate(model, initial.timegrid().horizon(), opts)?;
    let mut report = SolveReport {
        iterations: 0,
        residual_history: Vec::new(),
        l2_history: Vec::new(),
        measured_ratios: Vec::new(),
        certified_q,
        converged: false,
        final_w142_norm: f64::NAN,
    };
    let mut current = initial;
    while report.iterations < opts.max_iter {
        let next = apply_tau(&current, u0, model)?;
        let diff = next.sub(&current)?;
        let residual = w142_norm(&diff)?;
        report.iterations += 1;
        if let Some(&prev) = report.residual_history.last() {
            report.measured_ratios.push(residual / prev);
        }
        report.residual_history.push(residual);
        report.l2_history.push(space_time_l2_norm(&diff));
        current = next;
        if !residual.is_finite() {
            break;
        }
        if residual <= opts.tol {
            report.converged = true;
            break;
        }
    }
    report.final_w142_norm = w142_norm(&current)?;
    if report.converged {
        Ok((current, report))
    } else {
        Err(Error::NotConverged {
            report: Box::new(report),
        })
    }
}

/// `‖τ(v₁) - τ(v₂)‖ / ‖v₁ - v₂‖` in `W^{1,(4,2)}`.
pub fn measure_contraction_ratio(
    v1: &SpaceTimeField,
    v2: &SpaceTimeField,
    u0: &Field,
    model: &Model,
) -> Result<f64> {
    let distance = w142_norm(&v1.sub(v2)?)?;
    if distance.is_nan() || distance <= MIN_DISTANCE {
        return Err(Error::Indistinguishable(distance));
    }
    let u1 = apply_tau(v1, u0, model)?;
    let u2 = apply_tau(v2, u0, model)?;
    Ok(w142_norm(&u1.sub(&u2)?)? / distance)
}

/// Window-chained solution on `[0, n·window]`.
#[derive(Debug, Clone)]
pub struct GlobalSolution {
    pub field: SpaceTimeField,
    pub reports: Vec<SolveReport>,
    /// `‖end of window k - start of window k+1‖_{L²}` per seam.
    pub seam_jumps: Vec<f64>,
    /// `‖u(end of window k) - u(start of window k)‖_{L²}` per window.
    pub window_increments: Vec<f64>,
}

/// Chains [`picard_solve`] over windows of length `window`, each started
/// from the previous window's final frame.
pub fn solve_global(
    u0: &Field,
    model: &Model,
    total: f64,
    window: f64,
    steps_per_window: usize,
    opts: &SolveOptions,
) -> Result<GlobalSolution> {
    let window_grid = TimeGrid::new(window, steps_per_window)?;
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::InvalidArgument(format!("total horizon must be positive, got {total}")));
    }
    let count = (total / window).round();
    if count < 1.0 || (count * window - total).abs() > window_grid.dt() {
        return Err(Error::InvalidArgument(format!(
            "window {window} does not divide total horizon {total}"
        )));
    }
    let count = count as usize;
    gate(model, window, opts)?;

    let mut frames: Vec<Field> = Vec::with_capacity(count * steps_per_window + 1);
    let mut reports = Vec::with_capacity(count);
    let mut seam_jumps = Vec::new();
    let mut window_increments = Vec::with_capacity(count);
    let mut start = u0.clone();
    for k in 0..count {
        let (w, report) = picard_solve(&start, model, window_grid, opts).map_err(|e| {
            Error::WindowFailed {
                window: k,
                source: Box::new(e),
            }
        })?;
        if k > 0 {
            seam_jumps.push(l2_norm(&w.frame(0).sub(&start)?));
        }
        window_increments.push(l2_norm(&w.last_frame().sub(w.frame(0))?));
        start = w.last_frame().clone();
        let skip = usize::from(k > 0);
        frames.extend(w.into_frames().into_iter().skip(skip));
        reports.push(report);
    }
    let timegrid = if count == 1 {
        window_grid
    } else {
        TimeGrid::new(count as f64 * window, count * steps_per_window)?
    };
    Ok(GlobalSolution {
        field: SpaceTimeField::new(*u0.grid(), timegrid, frames)?,
        reports,
        seam_jumps,
        window_increments,
    })
}
