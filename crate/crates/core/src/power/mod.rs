//! Per-pair power allocation.
//!
//! [`solve_pair`] maximizes the deterministic-equivalent rate over the
//! polytope `{p ≥ 0, Σ p_n ≤ P, Σ c_n p_n ≤ I}`. The objective
//! `g(p) = min_x y(p, x)` is concave, and its gradient is `∂y/∂p` at the inner
//! minimizer, so a conditional-gradient method applies directly. Linear
//! subproblems are solved by enumerating the polytope's vertices, which have
//! at most two nonzero coordinates; they also give the duality gap that
//! certifies every returned solution.

mod baseline;
mod grid;
pub mod saddle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rate_model::{rate_gradient, solve_chi, upsilon_at, PairContext, PowerAllocation};

pub use baseline::{equal_power_baseline, waterfilling_baseline};
pub use grid::grid_oracle;

/// Cap on conditional-gradient polishing steps.
pub const MAX_FW_ITERATIONS: usize = 64;
const LINE_SEARCH_STEPS: usize = 80;

#[derive(Debug, Error, PartialEq)]
pub enum PowerError {
    #[error("grid oracle supports at most 3 BSs, got {0}")]
    TooManyBs(usize),
    #[error("grid resolution {0} is below the minimum of 2 points per axis")]
    ResolutionTooCoarse(usize),
    #[error("constraint data must be finite and nonnegative")]
    BadConstraints,
    #[error("context has {ctx} BSs but constraints have {constraints}")]
    DimensionMismatch { ctx: usize, constraints: usize },
}

/// Transmit-power and leakage limits for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConstraints {
    /// Sum-power budget of the user, mW.
    pub budget: f64,
    /// Maximum expected interference at the channel's satellite MT, mW.
    pub leak_threshold: f64,
    /// Per-BS leakage power gain, suppression included.
    pub leak_coeff: Vec<f64>,
}

impl PowerConstraints {
    pub fn validate(&self, n_bs: usize) -> Result<(), PowerError> {
        if self.leak_coeff.len() != n_bs {
            return Err(PowerError::DimensionMismatch { ctx: n_bs, constraints: self.leak_coeff.len() });
        }
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !ok(self.budget) || !ok(self.leak_threshold) || !self.leak_coeff.iter().all(|&c| ok(c)) {
            return Err(PowerError::BadConstraints);
        }
        Ok(())
    }

    /// Largest power BS `n` can use on its own.
    fn single_cap(&self, n: usize) -> f64 {
        let c = self.leak_coeff[n];
        if c > 0.0 {
            self.budget.min(self.leak_threshold / c)
        } else {
            self.budget
        }
    }

    pub fn is_feasible(&self, p: &[f64], rel_tol: f64) -> bool {
        let total: f64 = p.iter().sum();
        p.iter().all(|&v| v >= 0.0)
            && total <= self.budget * (1.0 + rel_tol)
            && leakage(p, self) <= self.leak_threshold * (1.0 + rel_tol)
    }
}

/// Per-axis upper bounds of the feasible set.
pub(crate) fn single_cap_box(c: &PowerConstraints) -> Vec<f64> {
    (0..c.leak_coeff.len()).map(|n| c.single_cap(n)).collect()
}

/// Expected leakage at the satellite MT, `Σ_n p_n c_n`, mW.
pub fn leakage(p: &[f64], c: &PowerConstraints) -> f64 {
    p.iter().zip(&c.leak_coeff).map(|(p, c)| p * c).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSolution {
    pub p_star: PowerAllocation,
    /// Deterministic-equivalent rate at `p_star`, bit/s/Hz.
    pub rate: f64,
    /// `ln χ` at `p_star`.
    pub x_star: f64,
    /// Final duality gap; zero for the closed-form baselines.
    pub fw_gap: f64,
    pub iterations: usize,
}

impl PairSolution {
    pub(crate) fn evaluate(ctx: &PairContext, p: Vec<f64>, fw_gap: f64, iterations: usize) -> Self {
        let x_star = solve_chi(ctx, &p).x();
        let rate = upsilon_at(ctx, &p, x_star);
        let p_star = PowerAllocation::new(p).expect("solver keeps powers nonnegative");
        Self { p_star, rate, x_star, fw_gap, iterations }
    }
}

/// Stopping tolerance on the duality gap for an objective value.
pub fn gap_tolerance(value: f64) -> f64 {
    (1e-6 * value.abs()).max(1e-9)
}

/// Vertices of the feasible polytope restricted to `active` coordinates, in a
/// fixed order: the origin, single-BS caps by index, then two-BS vertices
/// where both constraints are tight.
pub fn polytope_vertices(c: &PowerConstraints, active: &[bool]) -> Vec<Vec<f64>> {
    let n = c.leak_coeff.len();
    let mut out = vec![vec![0.0; n]];
    for i in (0..n).filter(|&i| active[i]) {
        let mut v = vec![0.0; n];
        v[i] = c.single_cap(i);
        out.push(v);
    }
    let (budget, thr) = (c.budget, c.leak_threshold);
    for i in (0..n).filter(|&i| active[i]) {
        for j in (i + 1..n).filter(|&j| active[j]) {
            let (ci, cj) = (c.leak_coeff[i], c.leak_coeff[j]);
            if ci == cj {
                continue;
            }
            let pi = (thr - cj * budget) / (ci - cj);
            let pj = budget - pi;
            if pi > 0.0 && pj > 0.0 {
                let mut v = vec![0.0; n];
                v[i] = pi;
                v[j] = pj;
                out.push(v);
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Index of the first maximum.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Solves the per-pair max-min power problem.
///
/// The saddle point is found from the min-max side: for fixed `x` the best
/// power vector is a two-constraint waterfilling ([`saddle::best_response`]),
/// and `φ(x) = max_p y(p, x)` is convex, so its stationary point is found by
/// bisection on `φ'`. The Frank-Wolfe duality gap at the resulting `p` is the
/// optimality certificate; a few conditional-gradient steps polish the
/// solution if the gap is still above tolerance.
pub fn solve_pair(ctx: &PairContext, c: &PowerConstraints) -> Result<PairSolution, PowerError> {
    let n = ctx.n_bs();
    c.validate(n)?;
    let active: Vec<bool> = ctx.gains_sq.iter().map(|&g| g > 0.0).collect();
    if c.budget == 0.0 || c.leak_threshold == 0.0 || !active.contains(&true) {
        return Ok(PairSolution::evaluate(ctx, vec![0.0; n], 0.0, 0));
    }

    let vertices = polytope_vertices(c, &active);
    let certify = |p: &[f64]| {
        let x = solve_chi(ctx, p).x();
        let value = upsilon_at(ctx, p, x);
        let grad = rate_gradient(ctx, p, x);
        let scores: Vec<f64> = vertices.iter().map(|v| dot(&grad, v)).collect();
        let toward = argmax(scores.iter().copied());
        (value, scores[toward] - dot(&grad, p), toward)
    };

    let mut p = saddle::saddle_power(ctx, c);
    let mut iterations = 0;
    let (mut value, mut gap, mut toward) = certify(&p);
    while gap > gap_tolerance(value) && iterations < MAX_FW_ITERATIONS {
        let direction: Vec<f64> = vertices[toward].iter().zip(&p).map(|(v, p)| v - p).collect();
        let step = line_search(ctx, &p, &direction, 1.0);
        if step == 0.0 {
            break;
        }
        p = p.iter().zip(&direction).map(|(p, d)| (p + step * d).max(0.0)).collect();
        iterations += 1;
        (value, gap, toward) = certify(&p);
    }

    // When a baseline lands on the same point up to rounding, keep whichever
    // evaluates higher so the returned rate never trails it.
    for q in [baseline::waterfilling_power(ctx, c), baseline::equal_power(ctx, c)] {
        let (v, g, _) = certify(&q);
        if v > value {
            (p, value, gap) = (q, v, g);
        }
    }
    Ok(PairSolution::evaluate(ctx, p, gap.max(0.0), iterations))
}

/// Maximizer of the concave rate along `p + t d`, `t ∈ [0, max_step]`,
/// by bisection on the exact directional derivative.
fn line_search(ctx: &PairContext, p: &[f64], direction: &[f64], max_step: f64) -> f64 {
    let slope = |t: f64| {
        let q: Vec<f64> = p.iter().zip(direction).map(|(p, d)| (p + t * d).max(0.0)).collect();
        let x = solve_chi(ctx, &q).x();
        dot(&rate_gradient(ctx, &q, x), direction)
    };
    if slope(max_step) >= 0.0 {
        return max_step;
    }
    if slope(0.0) <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, max_step);
    for _ in 0..LINE_SEARCH_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
