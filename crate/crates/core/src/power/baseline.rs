//! Reference schemes that ignore leakage while allocating, then scale the
//! whole vector down if the leakage threshold is exceeded.

use super::saddle::water_level;
use super::{leakage, PairSolution, PowerConstraints, PowerError};
use crate::rate_model::PairContext;

/// Classic waterfilling over the BSs with noise levels `D / (g_n M)`.
pub fn waterfilling_baseline(ctx: &PairContext, c: &PowerConstraints) -> Result<PairSolution, PowerError> {
    c.validate(ctx.n_bs())?;
    Ok(PairSolution::evaluate(ctx, waterfilling_power(ctx, c), 0.0, 0))
}

pub(crate) fn waterfilling_power(ctx: &PairContext, c: &PowerConstraints) -> Vec<f64> {
    let n = ctx.n_bs();
    let m = ctx.n_antennas as f64;
    let levels: Vec<f64> =
        ctx.gains_sq.iter().map(|&g| if g > 0.0 { ctx.denom / (g * m) } else { f64::INFINITY }).collect();
    let mut p = vec![0.0; n];
    if c.budget > 0.0 && levels.iter().any(|l| l.is_finite()) {
        let water = water_level(&levels, c.budget);
        for (pi, level) in p.iter_mut().zip(&levels) {
            *pi = (water - level).max(0.0);
        }
    }
    scale_to_threshold(&mut p, c);
    p
}

/// `P / N` on every BS.
pub fn equal_power_baseline(ctx: &PairContext, c: &PowerConstraints) -> Result<PairSolution, PowerError> {
    c.validate(ctx.n_bs())?;
    Ok(PairSolution::evaluate(ctx, equal_power(ctx, c), 0.0, 0))
}

pub(crate) fn equal_power(ctx: &PairContext, c: &PowerConstraints) -> Vec<f64> {
    let n = ctx.n_bs();
    let mut p = vec![c.budget / n as f64; n];
    scale_to_threshold(&mut p, c);
    p
}

fn scale_to_threshold(p: &mut [f64], c: &PowerConstraints) {
    let leak = leakage(p, c);
    if leak > c.leak_threshold {
        let factor = c.leak_threshold / leak;
        p.iter_mut().for_each(|v| *v *= factor);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slack(n: usize, budget: f64) -> PowerConstraints {
        PowerConstraints { budget, leak_threshold: 1e9, leak_coeff: vec![1.0; n] }
    }

    #[test]
    fn waterfilling_symmetric_gains_split_evenly() {
        let ctx = PairContext::new(vec![2.0; 4], 1.0, 3).unwrap();
        let s = waterfilling_baseline(&ctx, &slack(4, 2.0)).unwrap();
        for &v in s.p_star.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn waterfilling_two_level_example() {
        // g/D = (1, 0.5) with M = 2: levels 0.5 and 1, water level 1.25
        let ctx = PairContext::new(vec![1.0, 0.5], 1.0, 2).unwrap();
        let s = waterfilling_baseline(&ctx, &slack(2, 1.0)).unwrap();
        assert!((s.p_star[0] - 0.75).abs() < 1e-15, "{:?}", s.p_star);
        assert!((s.p_star[1] - 0.25).abs() < 1e-15, "{:?}", s.p_star);
    }

    #[test]
    fn waterfilling_drops_weak_bs() {
        let ctx = PairContext::new(vec![1.0, 0.01], 1.0, 1).unwrap();
        let s = waterfilling_baseline(&ctx, &slack(2, 1.0)).unwrap();
        assert_eq!(&*s.p_star, &[1.0, 0.0]);
    }

    #[test]
    fn waterfilling_rescales_to_threshold() {
        let ctx = PairContext::new(vec![1.0, 1.0], 1.0, 1).unwrap();
        let free = waterfilling_baseline(&ctx, &slack(2, 2.0)).unwrap();
        let leak_free = leakage(&free.p_star, &slack(2, 2.0));
        let c = PowerConstraints { budget: 2.0, leak_threshold: leak_free / 2.0, leak_coeff: vec![1.0; 2] };
        let s = waterfilling_baseline(&ctx, &c).unwrap();
        for (a, b) in s.p_star.iter().zip(free.p_star.iter()) {
            assert!((a - b / 2.0).abs() < 1e-15);
        }
        assert!((leakage(&s.p_star, &c) - c.leak_threshold).abs() < 1e-15);
    }

    #[test]
    fn equal_power_examples() {
        let ctx = PairContext::new(vec![1.0; 4], 1.0, 4).unwrap();
        let s = equal_power_baseline(&ctx, &slack(4, 4.0)).unwrap();
        assert_eq!(&*s.p_star, &[1.0; 4]);

        let c = PowerConstraints { budget: 4.0, leak_threshold: 1.0, leak_coeff: vec![1.0; 4] };
        let s = equal_power_baseline(&ctx, &c).unwrap();
        for &v in s.p_star.iter() {
            assert!((v - 4.0 / 16.0).abs() < 1e-15);
        }
    }
}
