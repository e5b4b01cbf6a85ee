//! Extreme-value limits for smooth stationary Gaussian processes.
//!
//! With `L_T = √(2 log T)`, the rescaled supremum `L_T(sup_{[0,T]} g − L_T)`
//! converges to a Gumbel law shifted by `log √λ₂ − log 2π`, and the rescaled
//! local maxima and minima converge to independent Poisson processes with
//! intensity `(√λ₂/2π) dx ⊗ e^{−y} dy`. The closed-form limit probabilities
//! used as Monte Carlo references all reduce to Gumbel CDF evaluations.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::Grid1D;
use crate::sampler::ProcessPath;
use crate::stats::CompensatedSum;

/// Sup/inf and strict local extrema of a path at grid resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeSummary {
    pub grid: Grid1D,
    pub sup: f64,
    pub inf: f64,
    pub argmax_index: usize,
    pub argmin_index: usize,
    /// Interior points strictly above both neighbours.
    pub local_maxima: Vec<(usize, f64)>,
    /// Interior points strictly below both neighbours.
    pub local_minima: Vec<(usize, f64)>,
}

impl ExtremeSummary {
    pub fn from_path(path: &ProcessPath) -> Self {
        Self::from_values(*path.grid(), path.values())
    }

    pub fn from_values(grid: Grid1D, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.count(), "values must match the grid");
        let (mut argmax_index, mut argmin_index) = (0, 0);
        for (i, &v) in values.iter().enumerate() {
            if v > values[argmax_index] {
                argmax_index = i;
            }
            if v < values[argmin_index] {
                argmin_index = i;
            }
        }
        let mut local_maxima = Vec::new();
        let mut local_minima = Vec::new();
        for (i, w) in values.windows(3).enumerate() {
            if w[1] > w[0] && w[1] > w[2] {
                local_maxima.push((i + 1, w[1]));
            } else if w[1] < w[0] && w[1] < w[2] {
                local_minima.push((i + 1, w[1]));
            }
        }
        Self {
            grid,
            sup: values[argmax_index],
            inf: values[argmin_index],
            argmax_index,
            argmin_index,
            local_maxima,
            local_minima,
        }
    }
}

/// Limiting shift of the rescaled supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelRef {
    pub lambda2: f64,
    pub shift: f64,
}

impl GumbelRef {
    pub fn new(lambda2: f64) -> Result<Self> {
        Ok(Self {
            lambda2,
            shift: gumbel_shift(lambda2)?,
        })
    }

    /// CDF of `𝒢 + shift`.
    pub fn cdf(&self, x: f64) -> f64 {
        gumbel_cdf(x - self.shift)
    }
}

/// `√(2·variance·log T)`.
pub fn l_t(t: f64, variance: f64) -> Result<f64> {
    if !(t > 1.0) {
        return Err(Error::Domain(format!("T must exceed 1, got {t}")));
    }
    if !(variance > 0.0) {
        return Err(Error::Domain(format!("variance must be positive, got {variance}")));
    }
    Ok((2.0 * variance * t.ln()).sqrt())
}

/// Standard Gumbel CDF `e^{−e^{−x}}`, saturating outside `|x| > 40`.
pub fn gumbel_cdf(x: f64) -> f64 {
    if x > 40.0 {
        1.0
    } else if x < -40.0 {
        0.0
    } else {
        (-(-x).exp()).exp()
    }
}

/// `P(𝒢 > x)`, accurate in the upper tail.
pub fn gumbel_sf(x: f64) -> f64 {
    if x < -40.0 {
        1.0
    } else {
        -(-(-x).exp()).exp_m1()
    }
}

/// `log √λ₂ − log 2π`.
pub fn gumbel_shift(lambda2: f64) -> Result<f64> {
    if !(lambda2 > 0.0 && lambda2.is_finite()) {
        return Err(Error::Domain(format!("lambda2 must be positive, got {lambda2}")));
    }
    Ok(0.5 * lambda2.ln() - (2.0 * PI).ln())
}

/// `L_T·(sup − L_T)`.
pub fn rescaled_sup(summary: &ExtremeSummary, t: f64, variance: f64) -> Result<f64> {
    let l = l_t(t, variance)?;
    Ok(l * (summary.sup - l))
}

/// Rescaled local maxima `(m_i/T, L_T(g(m_i) − L_T))`.
pub fn local_extrema_ppp(summary: &ExtremeSummary, t: f64, variance: f64) -> Result<Vec<(f64, f64)>> {
    let l = l_t(t, variance)?;
    Ok(summary
        .local_maxima
        .iter()
        .map(|&(i, v)| (summary.grid.point(i) / t, l * (v - l)))
        .collect())
}

/// Rescaled local minima `(n_i/T, L_T(−g(n_i) − L_T))`.
pub fn local_minima_ppp(summary: &ExtremeSummary, t: f64, variance: f64) -> Result<Vec<(f64, f64)>> {
    let l = l_t(t, variance)?;
    Ok(summary
        .local_minima
        .iter()
        .map(|&(i, v)| (summary.grid.point(i) / t, l * (-v - l)))
        .collect())
}

/// Expected number of limiting points on `[0,1] × (y, ∞]`: `(√λ₂/2π)·e^{−y}`.
pub fn ppp_expected_count(lambda2: f64, y: f64) -> Result<f64> {
    if !(lambda2 > 0.0) {
        return Err(Error::Domain(format!("lambda2 must be positive, got {lambda2}")));
    }
    Ok(lambda2.sqrt() / (2.0 * PI) * (-y).exp())
}

/// `P(𝒢 > c)² · P(𝒢 < c − log 4)` with `c = −gumbel_shift(λ₂)`: the limit
/// probability that the sup exceeds `L_T` on both `[−2T, −T]` and `[T, 2T]`
/// while the inf stays above `−L_T` on `[−2T, 2T]`.
pub fn limit_supinf(lambda2: f64) -> Result<f64> {
    let c = -gumbel_shift(lambda2)?;
    Ok(gumbel_sf(c).powi(2) * gumbel_cdf(c - 4f64.ln()))
}

/// `∏_i P(𝒢 > c_i) P(𝒢 < c_i)`: limit probability of the square-blocking
/// event, hence `limit_at ≤ liminf P(Cross₀) ≤ limsup P(Cross₀) ≤ 1 − limit_at`.
pub fn limit_at(lambda2_1: f64, lambda2_2: f64) -> Result<f64> {
    let c1 = -gumbel_shift(lambda2_1)?;
    let c2 = -gumbel_shift(lambda2_2)?;
    Ok(gumbel_sf(c1) * gumbel_cdf(c1) * gumbel_sf(c2) * gumbel_cdf(c2))
}

/// Asymptotic bounds on `P(Cross_{2h/√log T}(T, T))`.
///
/// `lower = P(𝒢 > c₂ − √2h) P(𝒢 < c₁ + √2h)` and
/// `upper = 1 − P(𝒢 > c₁ + √2h) P(𝒢 < c₂ − √2h)`, with `c_i = −gumbel_shift(λ₂;ᵢ)`.
pub fn cw_bounds(h: f64, lambda2_1: f64, lambda2_2: f64) -> Result<(f64, f64)> {
    let c1 = -gumbel_shift(lambda2_1)?;
    let c2 = -gumbel_shift(lambda2_2)?;
    let a = std::f64::consts::SQRT_2 * h;
    let lower = gumbel_sf(c2 - a) * gumbel_cdf(c1 + a);
    let upper = 1.0 - gumbel_sf(c1 + a) * gumbel_cdf(c2 - a);
    Ok((lower, upper))
}

/// One row of [`tail_decay`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub x: f64,
    /// Empirical `P(|sup − L_T| > x/L_T)`.
    pub frequency: f64,
    /// Classical bound `2e^{−u²/2}` at the unscaled deviation `u = x/L_T`.
    pub gaussian_bound: f64,
}

pub fn tail_decay(sups: &[f64], t: f64, xs: &[f64]) -> Result<Vec<TailPoint>> {
    if sups.is_empty() {
        return Err(Error::EmptySamples);
    }
    let l = l_t(t, 1.0)?;
    Ok(xs
        .iter()
        .map(|&x| {
            let u = x / l;
            let hits = sups.iter().filter(|&&s| (s - l).abs() > u).count();
            TailPoint {
                x,
                frequency: hits as f64 / sups.len() as f64,
                gaussian_bound: 2.0 * (-u * u / 2.0).exp(),
            }
        })
        .collect())
}

/// Limit of the tail frequency: `P(|𝒢 + shift| > x)`.
pub fn gumbel_two_sided_tail(x: f64, shift: f64) -> f64 {
    gumbel_sf(x - shift) + gumbel_cdf(-x - shift)
}

/// `Var[e^{θS}]·log T / (θ²·E[e^{2θS}])` from replicate suprema.
///
/// Exponentials are shifted by `max θS` before summing; the shift cancels in
/// the ratio.
pub fn exp_variance_ratio(sups: &[f64], theta: f64, t: f64) -> Result<f64> {
    if sups.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(t > 1.0) {
        return Err(Error::Domain(format!("T must exceed 1, got {t}")));
    }
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::Domain(format!("theta must be finite and nonzero, got {theta}")));
    }
    let top = sups.iter().map(|s| theta * s).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = sups.iter().map(|s| (theta * s - top).exp()).collect();
    let n = weights.len() as f64;
    let mean = weights.iter().copied().collect::<CompensatedSum>().value() / n;
    let second = weights.iter().map(|w| w * w).collect::<CompensatedSum>().value() / n;
    let var = weights
        .iter()
        .map(|w| (w - mean) * (w - mean))
        .collect::<CompensatedSum>()
        .value()
        / n;
    Ok(var * t.ln() / (theta * theta * second))
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max))
}
