//! Periodic truncation of the line, the Fourier transform pair, spectral
//! differentiation and the norms used by the solver.
//!
//! A [`GridSpec`] covers `[-L, L)` with `N` equispaced nodes
//! `x_k = -L + k·dx`. Spectra are stored in transform-native order: index
//! `j < N/2` holds frequency `p_j = (π/L)·j`, index `j ≥ N/2` holds
//! `(π/L)·(j - N)`. Index `N/2` is the Nyquist mode `-(π/L)·N/2`, which has
//! no partner. [`GridSpec::monotone_order`] gives the permutation to
//! ascending frequencies.
//!
//! The discrete transform is scaled by `dx/√(2π)` so that coefficients
//! approximate `φ̂(p_j)` pointwise, not the unitary DFT.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative tolerance on conjugate symmetry accepted by [`inverse_ft`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Truncated spatial domain `[-L, L)` with `N` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width L must be positive and finite, got {half_width}"
            )));
        }
        if points < 8 || !points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "point count N must be even and at least 8, got {points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Frequency spacing `π/L`.
    pub fn dp(&self) -> f64 {
        PI / self.half_width
    }

    pub fn x(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.x(k)).collect()
    }

    /// Signed integer wavenumber of native index `j`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn frequency(&self, j: usize) -> f64 {
        self.dp() * self.wavenumber(j) as f64
    }

    /// Frequencies in transform-native order.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.frequency(j)).collect()
    }

    pub fn nyquist_index(&self) -> usize {
        self.points / 2
    }

    /// Native index of the partner mode `-p_j`. The zero and Nyquist modes
    /// are their own partners.
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.points - j) % self.points
    }

    /// `order[i]` is the native index of the `i`-th smallest frequency.
    pub fn monotone_order(&self) -> Vec<usize> {
        let half = self.points / 2;
        (0..self.points).map(|i| (i + half) % self.points).collect()
    }

    pub fn monotone_frequencies(&self) -> Vec<f64> {
        self.monotone_order()
            .into_iter()
            .map(|j| self.frequency(j))
            .collect()
    }

    /// Samples `f` at the grid nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(*self, (0..self.points).map(|k| f(self.x(k))).collect())
    }

    pub fn zeros(&self) -> Field {
        Field {
            grid: *self,
            values: vec![0.0; self.points],
        }
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(L={}, N={}) vs (L={}, N={})",
                self.half_width, self.points, other.half_width, other.points
            )))
        }
    }
}

/// Real samples `φ(x_k)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "field has {} samples, grid has {}",
                values.len(),
                grid.points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field samples"));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise `self - other`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Complex coefficients approximating `φ̂(p_j)`, native order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "spectrum has {} coefficients, grid has {}",
                coeffs.len(),
                grid.points()
            )));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("spectral coefficients"));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `max_j |c(-p_j) - conj c(p_j)| / max_j |c(p_j)|`; zero for the zero spectrum.
    pub fn symmetry_deviation(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..self.coeffs.len())
            .map(|j| {
                let m = self.grid.mirror_index(j);
                (self.coeffs[m] - self.coeffs[j].conj()).norm()
            })
            .fold(0.0, f64::max);
        worst / scale
    }

    /// Multiplies every coefficient by `m(p_j, j)`.
    pub fn multiplied(&self, m: impl Fn(f64, usize) -> Complex64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| c * m(self.grid.frequency(j), j))
                .collect(),
        }
    }
}

/// Uniform time grid on `[0, T]` with `M` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidTimeGrid(format!(
                "horizon T must be positive and finite, got {horizon}"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidTimeGrid(format!(
                "step count M must be at least 2, got {steps}"
            )));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// `t_m = m·dt`, with the last node pinned to `T`.
    pub fn node(&self, m: usize) -> f64 {
        if m == self.steps {
            self.horizon
        } else {
            m as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|m| self.node(m)).collect()
    }
}

/// One [`Field`] per node of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: GridSpec,
    timegrid: TimeGrid,
    frames: Vec<Field>,
}

impl SpaceTimeField {
    pub fn new(grid: GridSpec, timegrid: TimeGrid, frames: Vec<Field>) -> Result<Self> {
        if frames.len() != timegrid.steps() + 1 {
            return Err(Error::InvalidTimeGrid(format!(
                "expected {} frames, got {}",
                timegrid.steps() + 1,
                frames.len()
            )));
        }
        for f in &frames {
            grid.ensure_same(f.grid())?;
        }
        Ok(Self {
            grid,
            timegrid,
            frames,
        })
    }

    /// Samples `f(x, t)` on every node.
    pub fn sample(
        grid: GridSpec,
        timegrid: TimeGrid,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let frames = timegrid
            .nodes()
            .into_iter()
            .map(|t| grid.sample(|x| f(x, t)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, timegrid, frames)
    }

    /// The same field at every node.
    pub fn constant_in_time(frame: &Field, timegrid: TimeGrid) -> Self {
        Self {
            grid: *frame.grid(),
            timegrid,
            frames: vec![frame.clone(); timegrid.steps() + 1],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn timegrid(&self) -> &TimeGrid {
        &self.timegrid
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn frame(&self, m: usize) -> &Field {
        &self.frames[m]
    }

    pub fn last_frame(&self) -> &Field {
        self.frames.last().expect("at least three frames")
    }

    pub fn into_frames(self) -> Vec<Field> {
        self.frames
    }

    pub fn sub(&self, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.ensure_compatible(other)?;
        let frames = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpaceTimeField {
            grid: self.grid,
            timegrid: self.timegrid,
            frames,
        })
    }

    pub(crate) fn ensure_compatible(&self, other: &SpaceTimeField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.timegrid != other.timegrid {
            return Err(Error::GridMismatch(format!(
                "time grids differ: (T={}, M={}) vs (T={}, M={})",
                self.timegrid.horizon(),
                self.timegrid.steps(),
                other.timegrid.horizon(),
                other.timegrid.steps()
            )));
        }
        Ok(())
    }
}

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);
type PlanCache = Mutex<(FftPlanner<f64>, HashMap<usize, Plans>)>;

fn fft_plans(n: usize) -> Plans {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, plans) = &mut *guard;
    plans
        .entry(n)
        .or_insert_with(|| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n)))
        .clone()
}

/// `(-1)^j`; the phase `e^{i p_j L}` produced by starting the grid at `-L`.
fn alternating(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `coeffs[j] = (2π)^{-1/2} Σ_k f(x_k) e^{-i p_j x_k} dx`.
pub fn forward_ft(f: &Field) -> SpectralField {
    let grid = *f.grid();
    let (forward, _) = fft_plans(grid.points());
    let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);
    let scale = grid.dx() / SQRT_2PI;
    for (j, c) in buf.iter_mut().enumerate() {
        *c *= scale * alternating(j);
    }
    SpectralField { grid, coeffs: buf }
}

/// Inverse transform; also returns the largest imaginary part relative to
/// the largest real part before it is discarded.
pub fn inverse_ft_with_residue(spectrum: &SpectralField) -> Result<(Field, f64)> {
    let deviation = spectrum.symmetry_deviation();
    if deviation > SYMMETRY_TOLERANCE {
        return Err(Error::NotConjugateSymmetric { deviation });
    }
    inverse_unchecked(spectrum)
}

fn inverse_unchecked(spectrum: &SpectralField) -> Result<(Field, f64)> {
    let grid = *spectrum.grid();
    let (_, inverse) = fft_plans(grid.points());
    let mut buf: Vec<Complex64> = spectrum
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, &c)| c * alternating(j))
        .collect();
    inverse.process(&mut buf);
    let scale = grid.dp() / SQRT_2PI;
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    let values: Vec<f64> = buf
        .iter()
        .map(|c| {
            max_re = max_re.max((c.re * scale).abs());
            max_im = max_im.max((c.im * scale).abs());
            c.re * scale
        })
        .collect();
    let residue = if max_re > 0.0 { max_im / max_re } else { max_im };
    Ok((Field::new(grid, values)?, residue))
}

/// `f(x_k) = (2π)^{-1/2} Σ_j c_j e^{i p_j x_k} dp`, rejecting spectra that
/// do not represent a real field.
pub fn inverse_ft(spectrum: &SpectralField) -> Result<Field> {
    inverse_ft_with_residue(spectrum).map(|(f, _)| f)
}

/// Forward transforms of many fields. Each frame is independent, so the
/// result does not depend on the thread count.
pub fn forward_ft_all(fields: &[Field]) -> Vec<SpectralField> {
    fields.par_iter().map(forward_ft).collect()
}

pub fn inverse_ft_all(spectra: &[SpectralField]) -> Result<Vec<Field>> {
    spectra.par_iter().map(inverse_ft).collect()
}

/// `inverse_ft(p⁴ · forward_ft(f))`. The Nyquist mode is kept, the symbol
/// being even. A real even multiplier keeps the spectrum of a real field
/// symmetric, but `p⁴` amplifies round-off at high `|p|` past the symmetry
/// tolerance, so the check is skipped here.
pub fn fourth_derivative(f: &Field) -> Field {
    let spectrum = forward_ft(f).multiplied(|p, _| Complex64::new(p.powi(4), 0.0));
    inverse_unchecked(&spectrum)
        .map(|(field, _)| field)
        .expect("finite input gives a finite derivative")
}

/// `√(Σ |f_k|² dx)`.
pub fn l2_norm(f: &Field) -> f64 {
    (f.values().iter().map(|v| v * v).sum::<f64>() * f.grid().dx()).sqrt()
}

/// `Σ |f_k| dx`.
pub fn l1_norm(f: &Field) -> f64 {
    f.values().iter().map(|v| v.abs()).sum::<f64>() * f.grid().dx()
}

pub fn h4_norm(f: &Field) -> f64 {
    let base = l2_norm(f);
    let fourth = l2_norm(&fourth_derivative(f));
    base.hypot(fourth)
}

/// Trapezoid weights on a uniform time grid.
fn trapezoid(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    dt * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// `‖u‖_{L²(x,t)}`: rectangle rule in space, trapezoid in time.
pub fn space_time_l2_norm(u: &SpaceTimeField) -> f64 {
    let per_frame: Vec<f64> = u.frames().iter().map(|f| l2_norm(f).powi(2)).collect();
    trapezoid(&per_frame, u.timegrid().dt()).sqrt()
}

/// Second-order finite-difference time derivative: centered inside,
/// one-sided three-point stencils at `t = 0` and `t = T`.
pub fn time_derivative_fd(u: &SpaceTimeField) -> Result<SpaceTimeField> {
    let frames = u.frames();
    let m = frames.len() - 1;
    if frames.len() < 3 {
        return Err(Error::InvalidTimeGrid(format!(
            "need at least 3 frames, got {}",
            frames.len()
        )));
    }
    let inv = 1.0 / (2.0 * u.timegrid().dt());
    let n = u.grid().points();
    let out = (0..=m)
        .map(|i| {
            let values = (0..n)
                .map(|k| {
                    let at = |j: usize| frames[j].values()[k];
                    if i == 0 {
                        (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv
                    } else if i == m {
                        (3.0 * at(m) - 4.0 * at(m - 1) + at(m - 2)) * inv
                    } else {
                        (at(i + 1) - at(i - 1)) * inv
                    }
                })
                .collect();
            Field::new(*u.grid(), values)
        })
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(*u.grid(), *u.timegrid(), out)
}

/// Space-time norm combining `u`, `∂⁴u/∂x⁴` and `∂u/∂t`.
pub fn w142_norm(u: &SpaceTimeField) -> Result<f64> {
    let dudt = time_derivative_fd(u)?;
    let fourth: Vec<Field> = u.frames().par_iter().map(fourth_derivative).collect();
    let fourth = SpaceTimeField::new(*u.grid(), *u.timegrid(), fourth)?;
    let sq = space_time_l2_norm(&dudt).powi(2)
        + space_time_l2_norm(&fourth).powi(2)
        + space_time_l2_norm(u).powi(2);
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(x: f64) -> f64 {
        (-0.5 * x * x).exp()
    }

    /// O(N²) direct evaluation of the transform sum, independent of the FFT path.
    fn direct_transform(f: &Field, p: f64) -> Complex64 {
        let grid = f.grid();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &v) in f.values().iter().enumerate() {
            acc += v * Complex64::from_polar(1.0, -p * grid.x(k));
        }
        acc * grid.dx() / (2.0 * PI).sqrt()
    }

    #[test]
    fn grid_with_unit_frequency_spacing() {
        let g = GridSpec::new(PI, 8).unwrap();
        assert!((g.dx() - PI / 4.0).abs() < 1e-15);
        let mono = g.monotone_frequencies();
        let expected: Vec<f64> = (-4..4).map(|k| k as f64).collect();
        for (a, b) in mono.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14, "{mono:?}");
        }
    }

    #[test]
    fn grid_spacing_and_rejections() {
        let g = GridSpec::new(40.0, 512).unwrap();
        assert_eq!(g.dx(), 0.15625);
        assert!((g.dx() * g.points() as f64 - 80.0).abs() < 1e-12);
        assert!(matches!(GridSpec::new(10.0, 7), Err(Error::InvalidGrid(_))));
        assert!(GridSpec::new(10.0, 6).is_err());
        assert!(GridSpec::new(0.0, 16).is_err());
        assert!(GridSpec::new(-1.0, 16).is_err());
    }

    #[test]
    fn frequency_set_is_symmetric_except_nyquist() {
        let g = GridSpec::new(3.0, 16).unwrap();
        for j in 0..16 {
            let m = g.mirror_index(j);
            if j == g.nyquist_index() {
                assert_eq!(m, j);
                assert!(g.frequency(j) < 0.0);
            } else {
                assert!((g.frequency(j) + g.frequency(m)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = GridSpec::new(40.0, 1024).unwrap();
        let f = g.sample(gaussian).unwrap();
        let spec = forward_ft(&f);
        let worst = spec
            .coeffs()
            .iter()
            .enumerate()
            .map(|(j, c)| (c - Complex64::new(gaussian(g.frequency(j)), 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn fft_agrees_with_direct_summation() {
        let g = GridSpec::new(5.0, 32).unwrap();
        let f = g.sample(|x| (x * 0.7).sin() * gaussian(x) + 0.1 * x).unwrap();
        let spec = forward_ft(&f);
        for j in 0..32 {
            let d = direct_transform(&f, g.frequency(j));
            assert!((spec.coeffs()[j] - d).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let g = GridSpec::new(4.0, 16).unwrap();
        let spec = forward_ft(&g.zeros());
        assert!(spec.coeffs().iter().all(|c| c.norm() == 0.0));
        let back = inverse_ft(&spec).unwrap();
        assert!(back.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cosine_concentrates_on_unit_frequencies() {
        for k in [1usize, 2, 4] {
            let g = GridSpec::new(PI * k as f64, 64 * k).unwrap();
            let f = g.sample(f64::cos).unwrap();
            let spec = forward_ft(&f);
            let expected = (PI / 2.0).sqrt();
            for (j, c) in spec.coeffs().iter().enumerate() {
                let p = g.frequency(j);
                let oracle = direct_transform(&f, p);
                assert!((c - oracle).norm() < 1e-12);
                if (p.abs() - 1.0).abs() < 1e-12 {
                    assert!((c.re * g.dp() - expected).abs() < 1e-12);
                    assert!(c.im.abs() < 1e-12);
                } else {
                    assert!(c.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn inverse_rejects_asymmetric_spectrum() {
        let g = GridSpec::new(4.0, 16).unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 16];
        coeffs[1] = Complex64::new(1.0, 0.0);
        let spec = SpectralField::new(g, coeffs).unwrap();
        assert!(matches!(
            inverse_ft(&spec),
            Err(Error::NotConjugateSymmetric { .. })
        ));
    }

    #[test]
    fn inverse_is_linear_in_the_spectrum() {
        let g = GridSpec::new(40.0, 1024).unwrap();
        let f = g.sample(gaussian).unwrap();
        let doubled = forward_ft(&f).multiplied(|_, _| Complex64::new(2.0, 0.0));
        let back = inverse_ft(&doubled).unwrap();
        for (k, v) in back.values().iter().enumerate() {
            assert!((v - 2.0 * gaussian(g.x(k))).abs() < 1e-13);
        }
    }

    #[test]
    fn fourth_derivative_of_gaussian() {
        let g = GridSpec::new(40.0, 1024).unwrap();
        let d4 = fourth_derivative(&g.sample(gaussian).unwrap());
        let worst = d4
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let x = g.x(k);
                (v - (x.powi(4) - 6.0 * x * x + 3.0) * gaussian(x)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn fourth_derivative_of_cosine_and_constant() {
        let g = GridSpec::new(PI, 32).unwrap();
        let c = g.sample(f64::cos).unwrap();
        let d4 = fourth_derivative(&c);
        // Round-off grows like ε·p_max⁴ = ε·16⁴.
        for (a, b) in d4.values().iter().zip(c.values()) {
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
        let k = g.sample(|_| 3.5).unwrap();
        assert!(fourth_derivative(&k).max_abs() < 1e-12);
    }

    #[test]
    fn norms_of_gaussians() {
        let g = GridSpec::new(40.0, 1024).unwrap();
        let f = g.sample(gaussian).unwrap();
        assert!((l2_norm(&f) - PI.powf(0.25)).abs() < 1e-12);
        let density = g.sample(|x| gaussian(x) / (2.0 * PI).sqrt()).unwrap();
        assert!((l1_norm(&density) - 1.0).abs() < 1e-10);
        let z = g.zeros();
        assert_eq!(l2_norm(&z), 0.0);
        assert_eq!(l1_norm(&z), 0.0);
        assert_eq!(h4_norm(&z), 0.0);
    }

    #[test]
    fn h4_norm_of_gaussian_uses_moment_identity() {
        let g = GridSpec::new(40.0, 1024).unwrap();
        let f = g.sample(gaussian).unwrap();
        let sqrt_pi = PI.sqrt();
        let expected = (sqrt_pi + 105.0 / 16.0 * sqrt_pi).sqrt();
        assert!((h4_norm(&f) - expected).abs() < 1e-9);
        assert!((expected - 3.66117).abs() < 1e-5);
    }

    #[test]
    fn h4_norm_of_cosine() {
        let g = GridSpec::new(PI, 64).unwrap();
        let c = g.sample(f64::cos).unwrap();
        assert!((h4_norm(&c) - 2f64.sqrt() * l2_norm(&c)).abs() < 1e-12);
    }

    #[test]
    fn w142_norm_examples() {
        let g = GridSpec::new(40.0, 512).unwrap();
        let tg = TimeGrid::new(1.0, 256).unwrap();
        let zero = SpaceTimeField::constant_in_time(&g.zeros(), tg);
        assert_eq!(w142_norm(&zero).unwrap(), 0.0);

        let sqrt_pi = PI.sqrt();
        let f = g.sample(gaussian).unwrap();
        let steady = SpaceTimeField::constant_in_time(&f, tg);
        let expected = (105.0 / 16.0 * sqrt_pi + sqrt_pi).sqrt();
        assert!((w142_norm(&steady).unwrap() - expected).abs() < 1e-9);
        assert!((w142_norm(&steady).unwrap() - h4_norm(&f)).abs() < 1e-12);

        // ∫₀¹ t² dt = 1/3; the trapezoid rule contributes dt²/6 to that integral.
        let ramp = SpaceTimeField::sample(g, tg, |x, t| t * gaussian(x)).unwrap();
        let expected = (sqrt_pi + (sqrt_pi + 105.0 / 16.0 * sqrt_pi) / 3.0).sqrt();
        assert!((expected - 2.498102).abs() < 1e-6);
        let got = w142_norm(&ramp).unwrap();
        assert!((got - expected).abs() / expected < 1e-5, "{got} vs {expected}");
    }

    #[test]
    fn w142_rejects_short_time_grids() {
        let g = GridSpec::new(4.0, 16).unwrap();
        let tg = TimeGrid::new(1.0, 2).unwrap();
        let u = SpaceTimeField::constant_in_time(&g.zeros(), tg);
        assert!(w142_norm(&u).is_ok());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(SpaceTimeField::new(g, tg, vec![g.zeros(); 2]).is_err());
    }

    #[test]
    fn finite_difference_time_derivative_is_exact_for_quadratics() {
        let g = GridSpec::new(4.0, 16).unwrap();
        let tg = TimeGrid::new(2.0, 10).unwrap();
        let u = SpaceTimeField::sample(g, tg, |x, t| t * t * (1.0 + x * x)).unwrap();
        let du = time_derivative_fd(&u).unwrap();
        for (m, frame) in du.frames().iter().enumerate() {
            let t = tg.node(m);
            for (k, v) in frame.values().iter().enumerate() {
                let x = g.x(k);
                assert!((v - 2.0 * t * (1.0 + x * x)).abs() < 1e-11);
            }
        }
    }
}
