//! Kernels `G` and reaction terms `F` with the constants the contraction
//! estimate needs.
//!
//! Kernel constants are `‖G‖_{L¹}`, `‖G''''‖_{L¹}` and
//! `g = √(‖G‖²_{L¹} + ‖G''''‖²_{L¹})`. For analytic profiles both norms are
//! refined by doubling the point count until successive values agree to
//! [`L1_REFINEMENT_TOLERANCE`]. Reaction constants `k` (growth) and `l`
//! (Lipschitz) are declared per family and checked by random probes in
//! [`NonlinearitySpec::verify_assumptions`].
//!
//! Text forms, as used in run configs:
//!
//! ```text
//! gaussian(sigma=1.0,amp=1.0)      amp/(σ√(2π)) · exp(-x²/(2σ²))
//! bump(width=4.0,amp=1.0)          amp · exp(1 - 1/(1 - (x/w)²)) on |x| < w, 0 outside
//! dipole(sigma=0.7071,amp=1.0)     amp · x · exp(-x²/(2σ²))
//! zero
//!
//! linear(kappa=2.0)                F(u, x) = κu + h(x)
//! tanh(s=0.05)+h:gaussian(sigma=2.0,amp=0.1)
//! forcing+h:gaussian(sigma=2.0,amp=0.1)   (also written h:gaussian(...))
//! ```

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{forward_ft, fourth_derivative, inverse_ft, Field, GridSpec, SpectralField};

/// Relative agreement required between successive refinements of the kernel L¹ norms.
pub const L1_REFINEMENT_TOLERANCE: f64 = 1e-8;

/// Kernels with `‖G‖_{L¹}` below this are rejected as trivial.
pub const TRIVIAL_KERNEL_L1: f64 = 1e-14;

/// Largest admissible `|G|` at `x = ±L`.
pub const BOUNDARY_DECAY: f64 = 1e-12;

const MAX_REFINED_POINTS: usize = 1 << 22;

/// Closed-form profiles used for kernels, offsets `h` and initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Zero,
    /// `amp` is the total mass.
    Gaussian { sigma: f64, amp: f64 },
    /// Compactly supported `C^∞` bump with peak value `amp`.
    Bump { width: f64, amp: f64 },
    /// Odd, sign-changing `amp · x · exp(-x²/(2σ²))`.
    Dipole { sigma: f64, amp: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian { sigma, amp } => {
                let z = x / sigma;
                amp / (sigma * (2.0 * PI).sqrt()) * (-0.5 * z * z).exp()
            }
            Profile::Bump { width, amp } => {
                let y = x / width;
                if y.abs() < 1.0 {
                    amp * (1.0 - 1.0 / (1.0 - y * y)).exp()
                } else {
                    0.0
                }
            }
            Profile::Dipole { sigma, amp } => {
                let z = x / sigma;
                amp * x * (-0.5 * z * z).exp()
            }
        }
    }

    /// Closed-form fourth derivative in `x`.
    pub fn eval_fourth(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian { sigma, .. } => {
                let z = x / sigma;
                let z2 = z * z;
                self.eval(x) * (z2 * z2 - 6.0 * z2 + 3.0) / sigma.powi(4)
            }
            Profile::Bump { width, .. } => {
                let y = x / width;
                if y.abs() >= 1.0 {
                    return 0.0;
                }
                // f = amp·e^h with h = 1 - 1/(1 - y²); h⁽ⁿ⁾ = -r⁽ⁿ⁾ where
                // r⁽ⁿ⁾ = n!/2 [(1 - y)^{-n-1} + (-1)ⁿ (1 + y)^{-n-1}].
                let (m, p) = (1.0 / (1.0 - y), 1.0 / (1.0 + y));
                let h1 = -0.5 * (m * m - p * p);
                let h2 = -(m.powi(3) + p.powi(3));
                let h3 = -3.0 * (m.powi(4) - p.powi(4));
                let h4 = -12.0 * (m.powi(5) + p.powi(5));
                let poly = h4 + 4.0 * h1 * h3 + 3.0 * h2 * h2 + 6.0 * h1 * h1 * h2 + h1.powi(4);
                self.eval(x) * poly / width.powi(4)
            }
            Profile::Dipole { sigma, amp } => {
                // x·e^{-z²/2} = σ·z·e^{-z²/2}, whose fourth z-derivative is He₅(z)·e^{-z²/2}.
                let z = x / sigma;
                let z2 = z * z;
                amp * z * (z2 * z2 - 10.0 * z2 + 15.0) * (-0.5 * z2).exp() / sigma.powi(3)
            }
        }
    }

    pub fn sample(&self, grid: &GridSpec) -> Result<Field> {
        grid.sample(|x| self.eval(x))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let call = Call::parse("profile", text)?;
        let profile = match call.name.as_str() {
            "zero" => {
                call.expect_keys(&[])?;
                Profile::Zero
            }
            "gaussian" => {
                call.expect_keys(&["sigma", "amp"])?;
                Profile::Gaussian {
                    sigma: call.positive("sigma")?,
                    amp: call.get("amp")?,
                }
            }
            "bump" => {
                call.expect_keys(&["width", "amp"])?;
                Profile::Bump {
                    width: call.positive("width")?,
                    amp: call.get("amp")?,
                }
            }
            "dipole" => {
                call.expect_keys(&["sigma", "amp"])?;
                Profile::Dipole {
                    sigma: call.positive("sigma")?,
                    amp: call.get("amp")?,
                }
            }
            other => return Err(call.error(format!("unknown profile family `{other}`"))),
        };
        Ok(profile)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "zero"),
            Profile::Gaussian { sigma, amp } => write!(f, "gaussian(sigma={sigma:?},amp={amp:?})"),
            Profile::Bump { width, amp } => write!(f, "bump(width={width:?},amp={amp:?})"),
            Profile::Dipole { sigma, amp } => write!(f, "dipole(sigma={sigma:?},amp={amp:?})"),
        }
    }
}

/// One representative of each analytic kernel family.
pub fn reference_kernels() -> Vec<Profile> {
    vec![
        Profile::Gaussian { sigma: 1.0, amp: 1.0 },
        Profile::Gaussian { sigma: 0.5, amp: 2.0 },
        Profile::Bump { width: 3.0, amp: 1.0 },
        Profile::Dipole { sigma: std::f64::consts::FRAC_1_SQRT_2, amp: 1.0 },
    ]
}

/// `name(key=value,...)` with numeric values.
struct Call {
    text: String,
    name: String,
    args: Vec<(String, f64)>,
    what: &'static str,
}

impl Call {
    fn parse(what: &'static str, text: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse {
            what,
            input: text.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = text.trim();
        let (name, body) = match trimmed.find('(') {
            None => (trimmed, ""),
            Some(open) => {
                let body = trimmed[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| err("missing closing parenthesis"))?;
                (&trimmed[..open], body)
            }
        };
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(err("expected a family name"));
        }
        let mut args: Vec<(String, f64)> = Vec::new();
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| err(&format!("expected key=value, got `{part}`")))?;
            let key = key.trim().to_string();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| err(&format!("`{}` is not a number", value.trim())))?;
            if !value.is_finite() {
                return Err(err(&format!("`{key}` must be finite")));
            }
            if args.iter().any(|(k, _)| *k == key) {
                return Err(err(&format!("duplicate parameter `{key}`")));
            }
            args.push((key, value));
        }
        Ok(Self {
            text: text.to_string(),
            name: name.to_string(),
            args,
            what,
        })
    }

    fn error(&self, reason: String) -> Error {
        Error::Parse {
            what: self.what,
            input: self.text.clone(),
            reason,
        }
    }

    fn expect_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.args {
            if !allowed.contains(&k.as_str()) {
                return Err(self.error(format!("unknown parameter `{k}`")));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Result<f64> {
        self.args
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| self.error(format!("missing parameter `{key}`")))
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.get(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.error(format!("`{key}` must be positive, got {v}")))
        }
    }
}

/// `∫₀¹ |p(s)| ds` for the cubic through `(-1, f0), (0, f1), (1, f2), (2, f3)`,
/// split at the roots of `p` inside the cell.
fn abs_cubic_cell(f0: f64, f1: f64, f2: f64, f3: f64) -> f64 {
    let c = [
        f1,
        -f0 / 3.0 - f1 / 2.0 + f2 - f3 / 6.0,
        f0 / 2.0 - f1 + f2 / 2.0,
        -f0 / 6.0 + f1 / 2.0 - f2 / 2.0 + f3 / 6.0,
    ];
    let p = |s: f64| c[0] + s * (c[1] + s * (c[2] + s * c[3]));
    let antiderivative = |s: f64| s * (c[0] + s * (c[1] / 2.0 + s * (c[2] / 3.0 + s * c[3] / 4.0)));

    // Critical points split [0, 1] into monotone pieces, each with at most one root.
    let mut breaks = vec![0.0, 1.0];
    let (qa, qb, qc) = (3.0 * c[3], 2.0 * c[2], c[1]);
    if qa.abs() > 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let r = disc.sqrt();
            breaks.push((-qb - r) / (2.0 * qa));
            breaks.push((-qb + r) / (2.0 * qa));
        }
    } else if qb.abs() > 0.0 {
        breaks.push(-qc / qb);
    }
    breaks.retain(|s| (0.0..=1.0).contains(s));
    breaks.sort_by(f64::total_cmp);

    let mut nodes = vec![0.0];
    for w in breaks.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (plo, phi) = (p(lo), p(hi));
        if plo * phi < 0.0 {
            let rising = phi > plo;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (p(mid) > 0.0) == rising {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            nodes.push(0.5 * (lo + hi));
        }
    }
    nodes.push(1.0);
    nodes
        .windows(2)
        .map(|w| (antiderivative(w[1]) - antiderivative(w[0])).abs())
        .sum()
}

/// L¹ norm of the periodic cubic interpolant of the samples, integrated
/// exactly cell by cell. Sign changes are located on the interpolant, so
/// the kinks of `|f|` do not degrade the `O(dx⁴)` accuracy.
pub fn l1_norm_kink_corrected(f: &Field) -> f64 {
    let v = f.values();
    let n = v.len();
    let at = |k: usize| v[k % n];
    let mut acc = 0.0;
    for k in 0..n {
        let (a, b, c, d) = (at(k + n - 1), at(k), at(k + 1), at(k + 2));
        acc += if a * b > 0.0 && b * c > 0.0 && c * d > 0.0 {
            // Same sign throughout: the cubic's integral in closed form.
            ((-a + 13.0 * b + 13.0 * c - d) / 24.0).abs()
        } else {
            abs_cubic_cell(a, b, c, d)
        };
    }
    acc * f.grid().dx()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub l1: f64,
    pub l1_fourth: f64,
    pub g: f64,
}

impl KernelConstants {
    fn from_norms(l1: f64, l1_fourth: f64) -> Self {
        Self {
            l1,
            l1_fourth,
            g: l1.hypot(l1_fourth),
        }
    }
}

fn norms_on(profile: &Profile, grid: &GridSpec) -> Result<(f64, f64)> {
    Ok((
        l1_norm_kink_corrected(&profile.sample(grid)?),
        l1_norm_kink_corrected(&grid.sample(|x| profile.eval_fourth(x))?),
    ))
}

fn check_decay(left: f64, right: f64) -> Result<()> {
    let edge = left.abs().max(right.abs());
    if edge > BOUNDARY_DECAY {
        Err(Error::NotDecayed(edge))
    } else {
        Ok(())
    }
}

/// `g = √(‖G‖²_{L¹} + ‖G''''‖²_{L¹})` for an analytic profile on `[-L, L)`,
/// refining from `grid.points()` until both norms settle.
pub fn kernel_g_constant(profile: &Profile, grid: &GridSpec) -> Result<KernelConstants> {
    let half = grid.half_width();
    check_decay(profile.eval(-half), profile.eval(half))?;
    let mut points = grid.points();
    let mut prev: Option<(f64, f64)> = None;
    let mut change = f64::INFINITY;
    while points <= MAX_REFINED_POINTS {
        let level = GridSpec::new(half, points)?;
        let (l1, l1_fourth) = norms_on(profile, &level)?;
        if l1 < TRIVIAL_KERNEL_L1 {
            return Err(Error::TrivialKernel(l1));
        }
        if let Some((p1, p4)) = prev {
            change = ((l1 - p1).abs() / l1).max((l1_fourth - p4).abs() / l1_fourth.max(f64::MIN_POSITIVE));
            if change < L1_REFINEMENT_TOLERANCE {
                return Ok(KernelConstants::from_norms(l1, l1_fourth));
            }
        }
        prev = Some((l1, l1_fourth));
        points *= 2;
    }
    Err(Error::RefinementFailed(change))
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelShape {
    Analytic(Profile),
    /// Samples on a fixed grid; constants are computed on that grid only.
    Sampled(Field),
}

/// A kernel `G` with its cached constants.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    shape: KernelShape,
    constants: KernelConstants,
}

impl KernelSpec {
    pub fn new(profile: Profile, grid: &GridSpec) -> Result<Self> {
        let constants = kernel_g_constant(&profile, grid)?;
        Ok(Self {
            shape: KernelShape::Analytic(profile),
            constants,
        })
    }

    pub fn sampled(samples: Field) -> Result<Self> {
        let v = samples.values();
        check_decay(v[0], v[v.len() - 1])?;
        let l1 = l1_norm_kink_corrected(&samples);
        let l1_fourth = l1_norm_kink_corrected(&fourth_derivative(&samples));
        if l1 < TRIVIAL_KERNEL_L1 {
            return Err(Error::TrivialKernel(l1));
        }
        Ok(Self {
            shape: KernelShape::Sampled(samples),
            constants: KernelConstants::from_norms(l1, l1_fourth),
        })
    }

    pub fn parse(text: &str, grid: &GridSpec) -> Result<Self> {
        Self::new(Profile::parse(text)?, grid)
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    pub fn constants(&self) -> KernelConstants {
        self.constants
    }

    pub fn g_constant(&self) -> f64 {
        self.constants.g
    }

    pub fn samples(&self, grid: &GridSpec) -> Result<Field> {
        match &self.shape {
            KernelShape::Analytic(p) => p.sample(grid),
            KernelShape::Sampled(f) => {
                f.grid().ensure_same(grid)?;
                Ok(f.clone())
            }
        }
    }

    pub fn spectrum(&self, grid: &GridSpec) -> Result<SpectralField> {
        Ok(forward_ft(&self.samples(grid)?))
    }

    /// `√(2π)·Ĝ(p_j)`, the factor multiplying `f̂` in the transformed equation.
    pub fn coupling(&self, grid: &GridSpec) -> Result<Vec<Complex64>> {
        let scale = (2.0 * PI).sqrt();
        Ok(self
            .spectrum(grid)?
            .into_coeffs()
            .into_iter()
            .map(|c| c * scale)
            .collect())
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            KernelShape::Analytic(p) => write!(f, "{p}"),
            KernelShape::Sampled(s) => write!(f, "sampled(N={})", s.grid().points()),
        }
    }
}

/// `∫ G(x - y) f(y) dy`, evaluated spectrally as `inverse_ft(√(2π) Ĝ f̂)`.
pub fn convolve_with_kernel(kernel: &KernelSpec, f: &Field) -> Result<Field> {
    let grid = *f.grid();
    let coupling = kernel.coupling(&grid)?;
    let spectrum = forward_ft(f).multiplied(|_, j| coupling[j]);
    inverse_ft(&spectrum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reaction {
    /// `κu`
    Linear { kappa: f64 },
    /// `s·tanh(u)`
    Tanh { s: f64 },
    /// No dependence on `u`; only the offset `h(x)` remains.
    Forcing,
}

impl Reaction {
    fn eval(&self, u: f64) -> f64 {
        match *self {
            Reaction::Linear { kappa } => kappa * u,
            Reaction::Tanh { s } => s * u.tanh(),
            Reaction::Forcing => 0.0,
        }
    }

    /// Declared `(k, l)`: growth and Lipschitz constants.
    pub fn constants(&self) -> (f64, f64) {
        match *self {
            Reaction::Linear { kappa } => (kappa.abs(), kappa.abs()),
            Reaction::Tanh { s } => (s.abs(), s.abs()),
            Reaction::Forcing => (0.0, 0.0),
        }
    }
}

impl fmt::Display for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reaction::Linear { kappa } => write!(f, "linear(kappa={kappa:?})"),
            Reaction::Tanh { s } => write!(f, "tanh(s={s:?})"),
            Reaction::Forcing => write!(f, "forcing"),
        }
    }
}

/// `F(u, x) = reaction(u) + h(x)` with declared constants `k`, `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    reaction: Reaction,
    offset: Field,
    growth: f64,
    lipschitz: f64,
}

impl NonlinearitySpec {
    /// Uses the family's analytic constants.
    pub fn new(reaction: Reaction, offset: Field) -> Result<Self> {
        let (k, l) = reaction.constants();
        Self::with_constants(reaction, offset, k, l)
    }

    pub fn without_offset(reaction: Reaction, grid: &GridSpec) -> Result<Self> {
        Self::new(reaction, grid.zeros())
    }

    /// Declares `k` and `l` explicitly. Nothing is verified here; see
    /// [`NonlinearitySpec::verify_assumptions`].
    pub fn with_constants(reaction: Reaction, offset: Field, k: f64, l: f64) -> Result<Self> {
        if let Some(neg) = offset.values().iter().find(|&&h| h < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "offset h must be nonnegative, found {neg}"
            )));
        }
        for (name, v) in [("k", k), ("l", l)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "constant {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(Self {
            reaction,
            offset,
            growth: k,
            lipschitz: l,
        })
    }

    pub fn parse(text: &str, grid: &GridSpec) -> Result<Self> {
        let trimmed = text.trim();
        let (family, offset) = if let Some(rest) = trimmed.strip_prefix("h:") {
            ("forcing", Some(rest))
        } else {
            match trimmed.split_once("+h:") {
                Some((fam, off)) => (fam, Some(off)),
                None => (trimmed, None),
            }
        };
        let call = Call::parse("nonlinearity", family)?;
        let reaction = match call.name.as_str() {
            "linear" => {
                call.expect_keys(&["kappa"])?;
                Reaction::Linear {
                    kappa: call.get("kappa")?,
                }
            }
            "tanh" => {
                call.expect_keys(&["s"])?;
                Reaction::Tanh { s: call.get("s")? }
            }
            "forcing" => {
                call.expect_keys(&[])?;
                Reaction::Forcing
            }
            other => return Err(call.error(format!("unknown nonlinearity family `{other}`"))),
        };
        let offset = match offset {
            Some(p) => Profile::parse(p)?.sample(grid)?,
            None => grid.zeros(),
        };
        Self::new(reaction, offset)
    }

    pub fn reaction(&self) -> Reaction {
        self.reaction
    }

    pub fn offset(&self) -> &Field {
        &self.offset
    }

    pub fn growth_constant(&self) -> f64 {
        self.growth
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    pub fn grid(&self) -> &GridSpec {
        self.offset.grid()
    }

    /// `F(u, x_j)`.
    pub fn eval_at(&self, u: f64, j: usize) -> f64 {
        self.reaction.eval(u) + self.offset.values()[j]
    }

    /// Pointwise `F(u(x_j), x_j)`.
    pub fn eval(&self, u: &Field) -> Result<Field> {
        self.grid().ensure_same(u.grid())?;
        let values = u
            .values()
            .iter()
            .enumerate()
            .map(|(j, &v)| self.eval_at(v, j))
            .collect();
        Field::new(*u.grid(), values)
    }

    /// `x ↦ F(0, x)`.
    pub fn at_zero_state(&self) -> Field {
        self.eval(&self.grid().zeros())
            .expect("offset grid matches itself")
    }

    /// Random-probe check of `|F(u,x)| ≤ k|u| + h(x)` and
    /// `|F(u₁,x) - F(u₂,x)| ≤ l|u₁ - u₂|`. Probes mix wide draws, pairs
    /// clustered near zero and nearly coincident pairs.
    pub fn verify_assumptions(&self, probes: usize, seed: u64) -> Result<AssumptionReport> {
        if probes < 100 {
            return Err(Error::InvalidArgument(format!(
                "at least 100 probes required, got {probes}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.grid().points();
        let (k, l) = (self.growth, self.lipschitz);
        let mut report = AssumptionReport {
            probes,
            worst_growth_slack: f64::INFINITY,
            worst_lipschitz_ratio: 0.0,
            lipschitz_slack: l,
        };
        for i in 0..probes {
            let j = rng.gen_range(0..n);
            let x = self.grid().x(j);
            let (u1, u2) = match i % 3 {
                0 => (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)),
                1 => {
                    let u1: f64 = rng.gen_range(-1e-3..1e-3);
                    (u1, u1 + rng.gen_range(-1e-4..1e-4))
                }
                _ => {
                    let u1: f64 = rng.gen_range(-10.0..10.0);
                    let delta = 10f64.powf(-rng.gen_range(1.0..6.0));
                    (u1, u1 + if rng.gen_bool(0.5) { delta } else { -delta })
                }
            };
            let h = self.offset.values()[j];
            for u in [u1, u2] {
                let f = self.eval_at(u, j).abs();
                let bound = k * u.abs() + h;
                if f > bound + 4.0 * f64::EPSILON * bound.max(f) {
                    return Err(Error::AssumptionViolated {
                        what: format!("growth bound |F| = {f:e} > k|u| + h = {bound:e}"),
                        u1: u,
                        u2: u,
                        x,
                    });
                }
                report.worst_growth_slack = report.worst_growth_slack.min(bound - f);
            }
            let du = (u1 - u2).abs();
            if du == 0.0 {
                continue;
            }
            let (f1, f2) = (self.eval_at(u1, j), self.eval_at(u2, j));
            let df = (f1 - f2).abs();
            if df > l * du + 4.0 * f64::EPSILON * (f1.abs() + f2.abs()) {
                return Err(Error::AssumptionViolated {
                    what: format!("Lipschitz ratio {:e} exceeds l = {l:e}", df / du),
                    u1,
                    u2,
                    x,
                });
            }
            report.worst_lipschitz_ratio = report.worst_lipschitz_ratio.max(df / du);
        }
        report.lipschitz_slack = l - report.worst_lipschitz_ratio;
        Ok(report)
    }
}

impl fmt::Display for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.reaction)?;
        if self.offset.max_abs() > 0.0 {
            write!(f, "+h:sampled")?;
        }
        Ok(())
    }
}

/// Outcome of [`NonlinearitySpec::verify_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionReport {
    pub probes: usize,
    /// Smallest `k|u| + h(x) - |F(u,x)|` seen.
    pub worst_growth_slack: f64,
    /// Largest `|F(u₁,x) - F(u₂,x)| / |u₁ - u₂|` seen.
    pub worst_lipschitz_ratio: f64,
    /// `l - worst_lipschitz_ratio`.
    pub lipschitz_slack: f64,
}
