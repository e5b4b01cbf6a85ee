//! Stationary covariance kernels for the one-dimensional components.
//!
//! Two families are supported, both with nonnegative spectral densities:
//!
//! * `Gaussian`: `K(x) = v·exp(-(x/a)²)`
//! * `DampedCosine`: `K(x) = v·cos(ωx)·exp(-(x/a)²)`
//!
//! Besides evaluation, this module provides the second spectral moment
//! `λ₂ = -K''(0)`, a finite-mesh check of the `K(x)·log x → 0` decay
//! condition, and the circulant-embedding spectrum consumed by the sampler.

use std::fmt;
use std::str::FromStr;

use realfft::RealFftPlanner;

use crate::error::{Error, Result};

/// Relative negative-eigenvalue mass above which an embedding is rejected.
pub const EMBEDDING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Gaussian,
    DampedCosine,
}

impl KernelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::DampedCosine => "damped_cosine",
        }
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" => Ok(KernelFamily::Gaussian),
            "damped_cosine" => Ok(KernelFamily::DampedCosine),
            other => Err(Error::InvalidKernel(format!("unknown family `{other}`"))),
        }
    }
}

/// A parametric stationary covariance kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    variance: f64,
    scale: f64,
    omega: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, variance: f64, scale: f64, omega: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::InvalidKernel(format!("variance must be > 0, got {variance}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidKernel(format!("scale must be > 0, got {scale}")));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidKernel(format!("omega must be >= 0, got {omega}")));
        }
        if family == KernelFamily::Gaussian && omega != 0.0 {
            return Err(Error::InvalidKernel("omega is only meaningful for damped_cosine".into()));
        }
        Ok(Self {
            family,
            variance,
            scale,
            omega,
        })
    }

    pub fn gaussian(variance: f64, scale: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, variance, scale, 0.0)
    }

    pub fn damped_cosine(variance: f64, scale: f64, omega: f64) -> Result<Self> {
        Self::new(KernelFamily::DampedCosine, variance, scale, omega)
    }

    /// Unit-variance, unit-scale Gaussian kernel `e^{-x²}`.
    pub fn standard_gaussian() -> Self {
        Self {
            family: KernelFamily::Gaussian,
            variance: 1.0,
            scale: 1.0,
            omega: 0.0,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// `K(0)`.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Evaluates `K(x)`. Even in `x` bit-for-bit since only `|x|` is used.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        let r = x / self.scale;
        let envelope = self.variance * (-r * r).exp();
        match self.family {
            KernelFamily::Gaussian => envelope,
            KernelFamily::DampedCosine => envelope * (self.omega * x).cos(),
        }
    }

    /// Second spectral moment `λ₂ = E[g'(0)²] = -K''(0)`, in closed form.
    pub fn lambda2(&self) -> f64 {
        let a2 = self.scale * self.scale;
        match self.family {
            KernelFamily::Gaussian => 2.0 * self.variance / a2,
            KernelFamily::DampedCosine => self.variance * (self.omega * self.omega + 2.0 / a2),
        }
    }

    /// Largest `|K(x)·ln x|` over the geometric mesh `x_min·2^{k/8}`, `k = 0..=64`.
    ///
    /// A finite stand-in for the decay condition `K(x)·log|x| → 0` at the
    /// scales actually simulated.
    pub fn breman_margin(&self, x_min: f64) -> Result<f64> {
        if !(x_min > 1.0) {
            return Err(Error::Domain(format!("x_min must exceed 1, got {x_min}")));
        }
        let margin = (0..=64)
            .map(|k| {
                let x = x_min * (k as f64 / 8.0).exp2();
                (self.eval(x) * x.ln()).abs()
            })
            .fold(0.0, f64::max);
        Ok(margin)
    }

    /// Short single-token descriptor, safe to embed in a CSV field.
    pub fn descriptor(&self) -> String {
        match self.family {
            KernelFamily::Gaussian => {
                format!("gaussian:var={}:scale={}", self.variance, self.scale)
            }
            KernelFamily::DampedCosine => format!(
                "damped_cosine:var={}:scale={}:omega={}",
                self.variance, self.scale, self.omega
            ),
        }
    }

    /// Serializes as `key=value` lines.
    pub fn to_kv_lines(&self) -> String {
        format!(
            "family={}\nvariance={}\nscale={}\nomega={}\n",
            self.family.as_str(),
            self.variance,
            self.scale,
            self.omega
        )
    }

    /// Parses `key=value` lines. Blank lines and `#` comments are skipped;
    /// unknown keys are errors. Missing keys default to the standard Gaussian.
    pub fn from_kv_lines(text: &str) -> Result<Self> {
        let mut builder = KernelBuilder::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidKernel(format!("expected key=value, got `{line}`")))?;
            builder.set(key.trim(), value.trim())?;
        }
        builder.build()
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::standard_gaussian()
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// Accumulates kernel keys one at a time; shared by the kernel and config parsers.
#[derive(Debug, Clone, Default)]
pub struct KernelBuilder {
    family: Option<KernelFamily>,
    variance: Option<f64>,
    scale: Option<f64>,
    omega: Option<f64>,
}

impl KernelBuilder {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let parse = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidKernel(format!("`{key}`: not a number: `{v}`")))
        };
        match key {
            "family" => self.family = Some(value.parse()?),
            "variance" => self.variance = Some(parse(value)?),
            "scale" => self.scale = Some(parse(value)?),
            "omega" => self.omega = Some(parse(value)?),
            other => return Err(Error::InvalidKernel(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn build(&self) -> Result<KernelSpec> {
        KernelSpec::new(
            self.family.unwrap_or(KernelFamily::Gaussian),
            self.variance.unwrap_or(1.0),
            self.scale.unwrap_or(1.0),
            self.omega.unwrap_or(0.0),
        )
    }
}

/// A uniform one-dimensional grid `origin + i·eps`, `0 ≤ i < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    origin: f64,
    eps: f64,
    count: usize,
}

impl Grid1D {
    pub fn new(origin: f64, eps: f64, count: usize) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::InvalidGrid(format!("origin must be finite, got {origin}")));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidGrid(format!("eps must be > 0, got {eps}")));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!("count must be >= 2, got {count}")));
        }
        Ok(Self { origin, eps, count })
    }

    /// Smallest grid starting at `lo` with spacing `eps` that reaches `hi`.
    pub fn covering(lo: f64, hi: f64, eps: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidGrid(format!("empty interval [{lo}, {hi}]")));
        }
        let steps = ((hi - lo) / eps - 1e-9).ceil().max(1.0) as usize;
        Self::new(lo, eps, steps + 1)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn point(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.eps
    }

    pub fn length(&self) -> f64 {
        self.eps * (self.count - 1) as f64
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    /// Nearest grid index to `x`, rounding exact halves toward −∞.
    /// May lie outside `0..count`.
    pub fn nearest_index(&self, x: f64) -> i64 {
        ((x - self.origin) / self.eps - 0.5).ceil() as i64
    }

    /// Index range `lo..=hi` of the grid-rounded interval `[a, b]`.
    pub fn index_range(&self, a: f64, b: f64) -> Result<(usize, usize)> {
        let lo = self.nearest_index(a);
        let hi = self.nearest_index(b);
        if a > b || lo < 0 || hi >= self.count as i64 {
            return Err(Error::IntervalOutOfRange {
                lo: a,
                hi: b,
                grid_lo: self.origin,
                grid_hi: self.end(),
            });
        }
        Ok((lo as usize, hi as usize))
    }
}

/// Minimal circulant embedding length for a grid of `count` points.
pub fn embedding_len(count: usize) -> usize {
    (2 * count).next_power_of_two()
}

/// Largest factor by which an embedding is padded beyond [`embedding_len`].
pub const MAX_PADDING: usize = 1 << 10;

fn embedding_eigenvalues(spec: &KernelSpec, eps: f64, m: usize) -> Vec<f64> {
    let half = m / 2;
    let mut row: Vec<f64> = (0..m).map(|j| spec.eval(j.min(m - j) as f64 * eps)).collect();
    let r2c = RealFftPlanner::<f64>::new().plan_fft_forward(m);
    let mut spectrum = r2c.make_output_vec();
    r2c.process(&mut row, &mut spectrum)
        .expect("buffer sizes come from the plan");

    let max_abs = spectrum.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    debug_assert!(spectrum
        .iter()
        .all(|c| c.im.abs() <= 1e-9 * max_abs.max(f64::MIN_POSITIVE) + 1e-12));

    (0..m).map(|k| spectrum[k.min(m - k).min(half)].re).collect()
}

/// Eigenvalues of the even circulant extension of `K` on `grid`.
///
/// The first row is `K(min(j, M−j)·ε)` for `j < M`. `M` starts at the next
/// power of two at or above `2·count` and doubles, at most up to
/// [`MAX_PADDING`] times that, until no eigenvalue is negative beyond rounding
/// noise; short grids with long correlation need the padding. Returns all `M`
/// eigenvalues (real by symmetry). Fails with [`Error::NonEmbeddable`] when
/// the negative eigenvalue mass at the final `M` exceeds
/// [`EMBEDDING_TOLERANCE`] of the total absolute mass.
pub fn circulant_eigenvalues(spec: &KernelSpec, grid: &Grid1D) -> Result<Vec<f64>> {
    let minimal = embedding_len(grid.count());
    let mut m = minimal;
    let eigenvalues = loop {
        let eigenvalues = embedding_eigenvalues(spec, grid.eps(), m);
        if negative_mass(&eigenvalues) == 0.0 || m >= minimal * MAX_PADDING {
            break eigenvalues;
        }
        m *= 2;
    };

    let negative_mass = negative_mass(&eigenvalues);
    let total: f64 = eigenvalues.iter().map(|v| v.abs()).sum();
    let limit = EMBEDDING_TOLERANCE * total;
    if negative_mass > limit {
        return Err(Error::NonEmbeddable {
            negative_mass,
            limit,
        });
    }
    Ok(eigenvalues)
}

/// Threshold below which a negative eigenvalue is treated as rounding noise.
pub(crate) fn roundoff_floor(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    1e-12 * max
}

/// `Σ max(0, −λ_k)` over eigenvalues below the roundoff floor.
pub(crate) fn negative_mass(eigenvalues: &[f64]) -> f64 {
    let floor = roundoff_floor(eigenvalues);
    eigenvalues
        .iter()
        .filter(|&&v| v < -floor)
        .map(|&v| -v)
        .sum()
}
