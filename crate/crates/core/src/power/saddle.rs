//! Saddle point of `y(p, x)` through its min-max form.
//!
//! For fixed `x`, `y` is a sum of `log2(1 + p_n / h_n)` terms with
//! `h_n = D e^x / (g_n M)`, so the best power vector under the sum-power and
//! leakage constraints has the KKT form `p_n = [1 / (λ + μ c_n) - h_n]⁺`.
//! The multipliers are found in closed form when only one constraint binds,
//! and by nested bisection when both do.

use super::PowerConstraints;
use crate::rate_model::{dy_dx, PairContext};

const MAX_BISECTIONS: usize = 200;

/// Water level `w` with `Σ [w - level]⁺ = amount` over finite levels.
pub(crate) fn water_level(levels: &[f64], amount: f64) -> f64 {
    let mut sorted: Vec<f64> = levels.iter().copied().filter(|l| l.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut filled = 0.0;
    for (k, &level) in sorted.iter().enumerate() {
        filled += level;
        let w = (amount + filled) / (k + 1) as f64;
        if w <= sorted.get(k + 1).copied().unwrap_or(f64::INFINITY) {
            return w;
        }
    }
    f64::NAN
}

/// Bisection on a monotone predicate: returns the smallest `t` in `[lo, hi]`
/// (to float resolution) for which `above(t)` holds, assuming `above(hi)`.
fn bisect(mut lo: f64, mut hi: f64, above: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn allocate(h: &[f64], c: &PowerConstraints, lambda: f64, mu: f64) -> Vec<f64> {
    h.iter()
        .zip(&c.leak_coeff)
        .map(|(&h, &cn)| if h.is_finite() { (1.0 / (lambda + mu * cn) - h).max(0.0) } else { 0.0 })
        .collect()
}

fn leak(p: &[f64], c: &PowerConstraints) -> f64 {
    super::leakage(p, c)
}

/// Best power vector against a fixed `x`, given the inverse slopes
/// `h_n = D e^x / (g_n M)` (infinite for BSs that must stay silent).
pub fn best_response(h: &[f64], c: &PowerConstraints) -> Vec<f64> {
    let active = || h.iter().zip(&c.leak_coeff).filter(|(h, _)| h.is_finite());
    if active().count() == 0 || c.budget == 0.0 || c.leak_threshold == 0.0 {
        return vec![0.0; h.len()];
    }

    // budget alone
    let w = water_level(h, c.budget);
    let p: Vec<f64> = h.iter().map(|&h| if h.is_finite() { (w - h).max(0.0) } else { 0.0 }).collect();
    if leak(&p, c) <= c.leak_threshold {
        return p;
    }

    // leakage alone, possible only if every active BS leaks
    let leak_only = active().all(|(_, &cn)| cn > 0.0);
    let mut mu_hi = f64::NAN;
    if leak_only {
        let levels: Vec<f64> = h.iter().zip(&c.leak_coeff).map(|(&h, &cn)| cn * h).collect();
        let w = water_level(&levels, c.leak_threshold);
        let p: Vec<f64> = h
            .iter()
            .zip(&c.leak_coeff)
            .map(|(&h, &cn)| if h.is_finite() { ((w - cn * h) / cn).max(0.0) } else { 0.0 })
            .collect();
        if p.iter().sum::<f64>() <= c.budget {
            return p;
        }
        mu_hi = 1.0 / w;
    }

    // both constraints tight
    let lambda_for = |mu: f64| -> f64 {
        let total = |lambda: f64| allocate(h, c, lambda, mu).iter().sum::<f64>();
        if mu > 0.0 && leak_only && total(0.0) <= c.budget {
            return 0.0;
        }
        let lambda_hi = h.iter().filter(|h| h.is_finite()).map(|h| 1.0 / h).fold(0.0, f64::max);
        bisect(0.0, lambda_hi, |lambda| total(lambda) <= c.budget)
    };
    let leak_at = |mu: f64| leak(&allocate(h, c, lambda_for(mu), mu), c);
    if !mu_hi.is_finite() {
        // silent-to-satellite BSs exist; grow μ until leakage fits
        mu_hi = 1.0 / c.leak_threshold;
        while leak_at(mu_hi) > c.leak_threshold {
            mu_hi *= 2.0;
        }
    }
    let mu = bisect(0.0, mu_hi, |mu| leak_at(mu) <= c.leak_threshold);
    let mut p = allocate(h, c, lambda_for(mu), mu);
    // bisection ends on the feasible side; trim any rounding excess
    let scale = (c.budget / p.iter().sum::<f64>()).min(c.leak_threshold / leak(&p, c)).min(1.0);
    p.iter_mut().for_each(|v| *v *= scale);
    p
}

fn inverse_slopes(ctx: &PairContext, x: f64) -> Vec<f64> {
    let m = ctx.n_antennas as f64;
    ctx.gains_sq.iter().map(|&g| if g > 0.0 { ctx.denom * x.exp() / (g * m) } else { f64::INFINITY }).collect()
}

/// Power vector of the saddle point of `y` over the feasible polytope.
pub fn saddle_power(ctx: &PairContext, c: &PowerConstraints) -> Vec<f64> {
    let response = |x: f64| best_response(&inverse_slopes(ctx, x), c);
    // φ'(x) = ∂y/∂x at the best response; increasing in x
    let slope = |x: f64| dy_dx(ctx, &response(x), x);
    let snr_cap: f64 = (0..ctx.n_bs()).map(|n| c.single_cap(n) * ctx.gains_sq[n] / ctx.denom).sum();
    let x_hi = snr_cap.ln_1p();
    if x_hi == 0.0 || slope(0.0) >= 0.0 {
        return response(0.0);
    }
    let x = bisect(0.0, x_hi, |x| slope(x) >= 0.0);
    response(x)
}
