//! Fourier-side semigroup and the Duhamel map `τ`.
//!
//! Per mode the transformed equation reads `û' = λ(p)û + ψ(p, t)` with
//! `λ(p) = -p⁴ + ibp + a` and `ψ = √(2π) Ĝ(p) f̂(p, t)`. The map `τ` takes a
//! space-time field `v`, forms `ψ` from `F(v, x)`, and returns
//!
//! ```text
//! û(p, t) = e^{tλ} û₀(p) + ∫₀ᵗ e^{(t-s)λ} ψ(p, s) ds.
//! ```
//!
//! Between time nodes `ψ` is taken linear in `s` and the integral is done
//! exactly with the exponential-integrator functions `φ₁`, `φ₂`, advancing
//! node to node: `û_{m+1} = e^{dtλ} û_m + dt[(φ₁ - φ₂) ψ_m + φ₂ ψ_{m+1}]`.
//!
//! The drift symbol `ibp` is odd; it is set to zero on the Nyquist mode,
//! which has no partner frequency, so that outputs stay real.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::catalog::{KernelSpec, NonlinearitySpec};
use crate::certify;
use crate::error::{Error, Result};
use crate::spectral::{
    forward_ft, inverse_ft, inverse_ft_with_residue, Field, GridSpec, SpaceTimeField, SpectralField,
};

/// Below this `|z|` the `φ` functions are evaluated by Taylor series.
pub const PHI_SERIES_THRESHOLD: f64 = 1e-4;

/// Growth rate `a ≥ 0` and drift speed `b` of the model equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    a: f64,
    b: f64,
}

impl ProblemParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "a and b must be finite, got a = {a}, b = {b}"
            )));
        }
        if a < 0.0 {
            return Err(Error::InvalidArgument(format!("a ≥ 0 required, got a = {a}")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Everything on the right-hand side of the equation.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ProblemParams,
    pub kernel: KernelSpec,
    pub nonlinearity: NonlinearitySpec,
}

impl Model {
    pub fn new(params: ProblemParams, kernel: KernelSpec, nonlinearity: NonlinearitySpec) -> Self {
        Self {
            params,
            kernel,
            nonlinearity,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.nonlinearity.grid()
    }

    /// Contraction constant of `τ` on `[0, horizon]`.
    pub fn contraction_constant(&self, horizon: f64) -> Result<f64> {
        certify::contraction_constant(
            self.kernel.g_constant(),
            self.nonlinearity.lipschitz_constant(),
            self.params.a,
            self.params.b,
            horizon,
        )
    }
}

/// `λ(p) = -p⁴ + ibp + a`, without drift on the Nyquist mode.
pub fn mode_rate(grid: &GridSpec, j: usize, params: &ProblemParams) -> Complex64 {
    let p = grid.frequency(j);
    let drift = if j == grid.nyquist_index() { 0.0 } else { params.b * p };
    Complex64::new(params.a - p.powi(4), drift)
}

pub fn mode_rates(grid: &GridSpec, params: &ProblemParams) -> Vec<Complex64> {
    (0..grid.points()).map(|j| mode_rate(grid, j, params)).collect()
}

/// `exp(t·λ(p))` for a single frequency.
pub fn semigroup_multiplier(p: f64, t: f64, params: &ProblemParams) -> Result<Complex64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidArgument(format!("t ≥ 0 required, got {t}")));
    }
    let rate = Complex64::new(params.a - p.powi(4), params.b * p);
    Ok((rate * t).exp())
}

/// `inverse_ft(e^{tλ} û₀)`.
pub fn apply_semigroup(u0: &Field, t: f64, params: &ProblemParams) -> Result<Field> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidArgument(format!("t ≥ 0 required, got {t}")));
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let grid = *u0.grid();
    let spectrum = forward_ft(u0).multiplied(|_, j| (mode_rate(&grid, j, params) * t).exp());
    inverse_ft(&spectrum)
}

/// `e^z - 1` without cancellation for small `|z|`.
fn expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let em1 = z.re.exp_m1();
    Complex64::new(em1 * c - 2.0 * half * half, z.re.exp() * s)
}

/// `(φ₁(z), φ₂(z))` with `φ₁ = (e^z - 1)/z`, `φ₂ = (e^z - 1 - z)/z²`.
pub fn phi_functions(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < PHI_SERIES_THRESHOLD {
        let z2 = z * z;
        let z3 = z2 * z;
        let phi1 = 1.0 + z / 2.0 + z2 / 6.0 + z3 / 24.0;
        let phi2 = 0.5 + z / 6.0 + z2 / 24.0 + z3 / 120.0;
        (phi1, phi2)
    } else {
        let em1 = expm1(z);
        (em1 / z, (em1 - z) / (z * z))
    }
}

/// Per-mode weights of one exponential-integrator step of length `dt`.
struct StepWeights {
    propagator: Vec<Complex64>,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

impl StepWeights {
    fn new(rates: &[Complex64], dt: f64) -> Self {
        let mut propagator = Vec::with_capacity(rates.len());
        let mut left = Vec::with_capacity(rates.len());
        let mut right = Vec::with_capacity(rates.len());
        for &rate in rates {
            let z = rate * dt;
            let (phi1, phi2) = phi_functions(z);
            propagator.push(z.exp());
            left.push((phi1 - phi2) * dt);
            right.push(phi2 * dt);
        }
        Self {
            propagator,
            left,
            right,
        }
    }
}

fn ensure_model_grid(model: &Model, grid: &GridSpec) -> Result<()> {
    model.grid().ensure_same(grid)
}

/// `√(2π) Ĝ f̂_v` at every time node.
fn forcing_spectra(v: &SpaceTimeField, model: &Model) -> Result<Vec<Vec<Complex64>>> {
    let coupling = model.kernel.coupling(v.grid())?;
    v.frames()
        .par_iter()
        .map(|frame| {
            let f = model.nonlinearity.eval(frame)?;
            Ok(forward_ft(&f)
                .coeffs()
                .iter()
                .zip(&coupling)
                .map(|(c, k)| c * k)
                .collect())
        })
        .collect()
}

/// The Duhamel map `τ(v)` together with the largest relative imaginary
/// residue discarded by the inverse transforms.
pub fn apply_tau_with_residue(
    v: &SpaceTimeField,
    u0: &Field,
    model: &Model,
) -> Result<(SpaceTimeField, f64)> {
    let grid = *u0.grid();
    grid.ensure_same(v.grid())?;
    ensure_model_grid(model, &grid)?;
    let timegrid = *v.timegrid();

    let forcing = forcing_spectra(v, model)?;
    let rates = mode_rates(&grid, &model.params);
    let weights = StepWeights::new(&rates, timegrid.dt());

    let mut current = forward_ft(u0).into_coeffs();
    let mut spectra = Vec::with_capacity(timegrid.steps());
    for m in 0..timegrid.steps() {
        let (now, next) = (&forcing[m], &forcing[m + 1]);
        for (j, c) in current.iter_mut().enumerate() {
            *c = weights.propagator[j] * *c + weights.left[j] * now[j] + weights.right[j] * next[j];
        }
        spectra.push(SpectralField::new(grid, current.clone())?);
    }

    let inverted: Vec<(Field, f64)> = spectra
        .par_iter()
        .map(inverse_ft_with_residue)
        .collect::<Result<_>>()?;
    let mut residue = 0.0f64;
    let mut frames = Vec::with_capacity(timegrid.steps() + 1);
    frames.push(u0.clone());
    for (frame, r) in inverted {
        residue = residue.max(r);
        frames.push(frame);
    }
    Ok((SpaceTimeField::new(grid, timegrid, frames)?, residue))
}

/// The Duhamel map `u = τ(v)` on the time grid of `v`. Frame 0 is `u0`.
pub fn apply_tau(v: &SpaceTimeField, u0: &Field, model: &Model) -> Result<SpaceTimeField> {
    apply_tau_with_residue(v, u0, model).map(|(u, _)| u)
}

/// `∂u/∂t` from the transformed equation, `λû + √(2π) Ĝ f̂_v`, at each node.
pub fn rhs_time_derivative(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    model: &Model,
) -> Result<SpaceTimeField> {
    u.ensure_compatible(v)?;
    let grid = *u.grid();
    ensure_model_grid(model, &grid)?;
    let forcing = forcing_spectra(v, model)?;
    let rates = mode_rates(&grid, &model.params);
    let frames = u
        .frames()
        .par_iter()
        .zip(forcing.par_iter())
        .map(|(frame, psi)| {
            let coeffs = forward_ft(frame)
                .coeffs()
                .iter()
                .enumerate()
                .map(|(j, c)| rates[j] * c + psi[j])
                .collect();
            inverse_ft(&SpectralField::new(grid, coeffs)?)
        })
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(grid, *u.timegrid(), frames)
}
