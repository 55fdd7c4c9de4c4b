//! The explicit contraction constant of the Duhamel map,
//!
//! ```text
//! q(T) = g·l·√(T² e^{2aT} (1 + 2[a + |b| + 1]²) + 2),
//! ```
//!
//! its inversion in `T`, and the Fourier-support overlap check that flags
//! configurations whose solution cannot vanish identically.

use serde::{Deserialize, Serialize};

use crate::catalog::{KernelSpec, NonlinearitySpec};
use crate::duhamel::Model;
use crate::error::{Error, Result};
use crate::spectral::{forward_ft, GridSpec};

/// Default magnitude threshold for the support overlap check.
pub const DEFAULT_SUPPORT_EPS: f64 = 1e-8;

/// Relative bracket width at which [`max_horizon`] stops bisecting.
const HORIZON_REL_TOL: f64 = 1e-14;

fn check_domain(g: f64, l: f64, a: f64, b: f64) -> Result<()> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidArgument(format!("g > 0 required, got {g}")));
    }
    if !(l.is_finite() && l >= 0.0) {
        return Err(Error::InvalidArgument(format!("l ≥ 0 required, got {l}")));
    }
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::InvalidArgument(format!("a ≥ 0 required, got {a}")));
    }
    if !b.is_finite() {
        return Err(Error::InvalidArgument(format!("b must be finite, got {b}")));
    }
    Ok(())
}

fn q_unchecked(g: f64, l: f64, a: f64, b: f64, horizon: f64) -> f64 {
    let drift = a + b.abs() + 1.0;
    let growth = horizon * horizon * (2.0 * a * horizon).exp();
    g * l * (growth * (1.0 + 2.0 * drift * drift) + 2.0).sqrt()
}

pub fn contraction_constant(g: f64, l: f64, a: f64, b: f64, horizon: f64) -> Result<f64> {
    check_domain(g, l, a, b)?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("T > 0 required, got {horizon}")));
    }
    Ok(q_unchecked(g, l, a, b, horizon))
}

/// Largest `T` with `q(T) < 1`, or `None` when already `g·l·√2 ≥ 1`.
pub fn max_horizon(g: f64, l: f64, a: f64, b: f64) -> Result<Option<f64>> {
    check_domain(g, l, a, b)?;
    if l <= 0.0 {
        return Err(Error::InvalidArgument(
            "l > 0 required; with l = 0 every horizon is certified".into(),
        ));
    }
    if g * l * 2f64.sqrt() >= 1.0 {
        return Ok(None);
    }
    let mut hi = 1.0;
    while q_unchecked(g, l, a, b, hi) < 1.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > HORIZON_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q_unchecked(g, l, a, b, mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// Outcome of [`nontriviality_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportOverlap {
    /// `dp · #{p : |F̂(0,·)(p)| > eps and |Ĝ(p)| > eps}`.
    pub measure: f64,
    pub eps: f64,
}

impl SupportOverlap {
    /// True when the overlap is empty, so `u0 = 0` may yield the zero solution.
    pub fn trivial_solution_possible(&self) -> bool {
        self.measure == 0.0
    }
}

/// Discrete proxy for the measure of `supp F̂(0,·) ∩ supp Ĝ`.
pub fn nontriviality_check(
    kernel: &KernelSpec,
    nonlinearity: &NonlinearitySpec,
    grid: &GridSpec,
    eps: f64,
) -> Result<SupportOverlap> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps > 0 required, got {eps}")));
    }
    nonlinearity.grid().ensure_same(grid)?;
    let f0 = forward_ft(&nonlinearity.at_zero_state());
    let ghat = kernel.spectrum(grid)?;
    let count = f0
        .coeffs()
        .iter()
        .zip(ghat.coeffs())
        .filter(|(f, g)| f.norm() > eps && g.norm() > eps)
        .count();
    Ok(SupportOverlap {
        measure: count as f64 * grid.dp(),
        eps,
    })
}

/// Serialized certificate. Field names are part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub g: f64,
    pub l: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub q: f64,
    pub certified: bool,
    #[serde(rename = "T_max")]
    pub t_max: Option<f64>,
    pub support_measure: f64,
    pub eps: f64,
}

impl ContractionCertificate {
    pub fn evaluate(model: &Model, horizon: f64, eps: f64) -> Result<Self> {
        let g = model.kernel.g_constant();
        let l = model.nonlinearity.lipschitz_constant();
        let (a, b) = (model.params.a(), model.params.b());
        let q = contraction_constant(g, l, a, b, horizon)?;
        let t_max = if l > 0.0 { max_horizon(g, l, a, b)? } else { None };
        let overlap = nontriviality_check(&model.kernel, &model.nonlinearity, model.grid(), eps)?;
        Ok(Self {
            g,
            l,
            a,
            b,
            horizon,
            q,
            certified: q < 1.0,
            t_max,
            support_measure: overlap.measure,
            eps,
        })
    }
}
