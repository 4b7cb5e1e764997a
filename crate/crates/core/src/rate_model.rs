//! Deterministic-equivalent ergodic rate of one (user, channel) pair.
//!
//! With per-BS SNR terms `a_n = p_n g_n / D`, the rate is
//!
//! ```text
//! Υ = Σ_n log2(1 + a_n M / χ) + M log2(1 + Σ_n a_n χ / (χ + a_n M))
//!     - M log2(e) Σ_n a_n / (χ + a_n M)
//! ```
//!
//! where `χ ≥ 1` solves `χ = 1 + Σ_n a_n χ / (χ + a_n M)`. Substituting
//! `x = ln χ` gives the convex function
//!
//! ```text
//! y(x) = Σ_n log2(1 + a_n M e^-x) + M log2(e) (x + e^-x)
//! ```
//!
//! whose minimizer over `x ≥ 0` is exactly `ln χ`, so `Υ = min_x y - M log2(e)`.
//! The power solver maximizes that inner minimum over `p`.

use std::f64::consts::LOG2_E;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RateModelError {
    #[error("power gains must be positive and finite")]
    BadGain,
    #[error("interference-plus-noise must be positive and finite, got {0}")]
    BadDenominator(f64),
    #[error("at least one receive antenna is required")]
    NoAntennas,
    #[error("powers must be finite and nonnegative")]
    BadPower,
}

/// Channel data for one (user, channel) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairContext {
    /// Squared large-scale amplitude per BS.
    pub gains_sq: Vec<f64>,
    /// Satellite interference plus noise, mW.
    pub denom: f64,
    pub n_antennas: usize,
}

impl PairContext {
    pub fn new(gains_sq: Vec<f64>, denom: f64, n_antennas: usize) -> Result<Self, RateModelError> {
        if gains_sq.iter().any(|&g| !(g >= 0.0 && g.is_finite())) {
            return Err(RateModelError::BadGain);
        }
        if !(denom > 0.0 && denom.is_finite()) {
            return Err(RateModelError::BadDenominator(denom));
        }
        if n_antennas == 0 {
            return Err(RateModelError::NoAntennas);
        }
        Ok(Self { gains_sq, denom, n_antennas })
    }

    pub fn n_bs(&self) -> usize {
        self.gains_sq.len()
    }

    fn m(&self) -> f64 {
        self.n_antennas as f64
    }

    /// Per-BS SNR terms `p_n g_n / D`.
    fn snr<'a>(&'a self, p: &'a [f64]) -> impl Iterator<Item = f64> + Clone + 'a {
        debug_assert_eq!(p.len(), self.gains_sq.len());
        p.iter().zip(&self.gains_sq).map(move |(p, g)| p * g / self.denom)
    }
}

/// Per-BS transmit powers of one pair, mW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerAllocation(Vec<f64>);

impl PowerAllocation {
    pub fn new(p: Vec<f64>) -> Result<Self, RateModelError> {
        if p.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(RateModelError::BadPower);
        }
        Ok(Self(p))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PowerAllocation {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSolution {
    pub chi: f64,
    /// `chi - 1`, kept separately for precision when the SNR is tiny.
    pub excess: f64,
    pub residual: f64,
}

impl ChiSolution {
    /// `x = ln χ`.
    pub fn x(&self) -> f64 {
        self.excess.ln_1p()
    }
}

/// `χ - 1 - Σ a_n χ / (χ + a_n M)`; zero exactly at the fixed point.
pub fn chi_residual(ctx: &PairContext, p: &[f64], chi: f64) -> f64 {
    let m = ctx.m();
    chi - 1.0 - ctx.snr(p).map(|a| a * chi / (chi + a * m)).sum::<f64>()
}

/// Unique root of the fixed-point equation.
///
/// Bisection on `u = χ - 1` over `[0, Σ a_n]`. The scaled residual
/// `u/(1+u) - Σ a_n / (1 + u + a_n M)` is strictly increasing, negative at 0
/// and positive at `Σ a_n`, so the bracket always holds the single root.
pub fn solve_chi(ctx: &PairContext, p: &[f64]) -> ChiSolution {
    let m = ctx.m();
    let snr = ctx.snr(p);
    let total: f64 = snr.clone().sum();
    if total == 0.0 {
        return ChiSolution { chi: 1.0, excess: 0.0, residual: 0.0 };
    }
    let scaled = |u: f64| u / (1.0 + u) - snr.clone().map(|a| a / (1.0 + u + a * m)).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, total);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= (1e-15 * hi).min(1e-12) {
            break;
        }
        if scaled(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let excess = 0.5 * (lo + hi);
    let chi = 1.0 + excess;
    ChiSolution { chi, excess, residual: chi_residual(ctx, p, chi) }
}

/// `y(x) = Σ_n log2(1 + a_n M e^-x) + M log2(e) (x + e^-x)`, bit/s/Hz.
pub fn y_value(ctx: &PairContext, p: &[f64], x: f64) -> f64 {
    let m = ctx.m();
    let decay = (-x).exp();
    let logs: f64 = ctx.snr(p).map(|a| (a * m * decay).ln_1p()).sum();
    LOG2_E * (logs + m * (x + decay))
}

pub fn dy_dx(ctx: &PairContext, p: &[f64], x: f64) -> f64 {
    let m = ctx.m();
    let grow = x.exp();
    let sum: f64 = ctx.snr(p).map(|a| a / (grow + a * m)).sum();
    m * LOG2_E * (-(-x).exp_m1() - sum)
}

pub fn d2y_dx2(ctx: &PairContext, p: &[f64], x: f64) -> f64 {
    let m = ctx.m();
    let grow = x.exp();
    let sum: f64 = ctx.snr(p).map(|a| a * grow / (grow + a * m).powi(2)).sum();
    m * LOG2_E * ((-x).exp() + sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerMin {
    pub x_star: f64,
    pub y_min: f64,
    pub chi: ChiSolution,
}

/// Minimizes `y` over `x ≥ 0`: the minimizer is `ln χ`.
pub fn inner_min_x(ctx: &PairContext, p: &[f64]) -> InnerMin {
    let chi = solve_chi(ctx, p);
    let x_star = chi.x();
    InnerMin { x_star, y_min: y_value(ctx, p, x_star), chi }
}

/// Deterministic-equivalent rate `Υ = min_x y - M log2(e)`, bit/s/Hz.
pub fn upsilon(ctx: &PairContext, p: &[f64]) -> f64 {
    upsilon_at(ctx, p, solve_chi(ctx, p).x())
}

/// `y(x) - M log2(e)` with the constant folded in before summing, so small
/// rates do not lose digits to cancellation.
pub(crate) fn upsilon_at(ctx: &PairContext, p: &[f64], x: f64) -> f64 {
    let m = ctx.m();
    let decay = (-x).exp();
    let logs: f64 = ctx.snr(p).map(|a| (a * m * decay).ln_1p()).sum();
    LOG2_E * (logs + m * (x + (-x).exp_m1()))
}

/// The three-term closed form evaluated at a given `χ`.
pub fn upsilon_closed_form(ctx: &PairContext, p: &[f64], chi: f64) -> f64 {
    let m = ctx.m();
    let first: f64 = ctx.snr(p).map(|a| (a * m / chi).ln_1p()).sum();
    let inner: f64 = ctx.snr(p).map(|a| a * chi / (chi + a * m)).sum();
    let last: f64 = ctx.snr(p).map(|a| a / (chi + a * m)).sum();
    LOG2_E * (first + m * inner.ln_1p() - m * last)
}

/// `∂y/∂p_n` at fixed `x`. Evaluated at `x = ln χ(p)` this is the gradient of
/// `Υ` itself (envelope theorem).
pub fn rate_gradient(ctx: &PairContext, p: &[f64], x: f64) -> Vec<f64> {
    let m = ctx.m();
    let grow = x.exp();
    ctx.snr(p).zip(&ctx.gains_sq).map(|(a, g)| LOG2_E * (g * m / ctx.denom) / (grow + a * m)).collect()
}
