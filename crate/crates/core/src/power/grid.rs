use super::{single_cap_box, PowerConstraints, PowerError};
use crate::rate_model::{upsilon, PairContext};

const FEASIBILITY_SLACK: f64 = 1e-12;

/// Brute-force maximum of the rate over a uniform grid with `resolution`
/// points per axis on the box `[0, min(P, I / c_n)]`, keeping only feasible
/// points. Refining `r` to `2r - 1` only adds points.
pub fn grid_oracle(ctx: &PairContext, c: &PowerConstraints, resolution: usize) -> Result<f64, PowerError> {
    let n = ctx.n_bs();
    if n > 3 {
        return Err(PowerError::TooManyBs(n));
    }
    if resolution < 2 {
        return Err(PowerError::ResolutionTooCoarse(resolution));
    }
    c.validate(n)?;
    let caps = single_cap_box(c);
    let steps = (resolution - 1) as f64;
    let mut idx = vec![0usize; n];
    let mut p = vec![0.0; n];
    let mut best = 0.0f64;
    loop {
        for ((pi, &k), &cap) in p.iter_mut().zip(&idx).zip(&caps) {
            *pi = cap * k as f64 / steps;
        }
        if c.is_feasible(&p, FEASIBILITY_SLACK) {
            best = best.max(upsilon(ctx, &p));
        }
        // odometer increment
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(best);
            }
            idx[axis] += 1;
            if idx[axis] < resolution {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}
