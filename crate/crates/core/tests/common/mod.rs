#![allow(dead_code)]

use hstn_core::rng::Rng;
use hstn_core::{PairContext, PowerConstraints};
use proptest::prelude::*;
use rand::Rng as _;

pub fn log_uniform(rng: &mut Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..hi_exp))
}

/// Gains and powers spread over several decades of per-BS SNR.
pub fn random_case(rng: &mut Rng, n: usize, m: usize) -> (PairContext, Vec<f64>) {
    let gains = (0..n).map(|_| log_uniform(rng, -2.0, 2.0)).collect();
    let ctx = PairContext::new(gains, log_uniform(rng, -2.0, 0.0), m).unwrap();
    let p = (0..n).map(|_| log_uniform(rng, -2.0, 1.0)).collect();
    (ctx, p)
}

pub fn random_constraints(rng: &mut Rng, n: usize) -> PowerConstraints {
    PowerConstraints {
        budget: log_uniform(rng, -1.0, 2.0),
        leak_threshold: log_uniform(rng, -1.0, 1.0),
        leak_coeff: (0..n).map(|_| log_uniform(rng, -2.0, 1.0)).collect(),
    }
}

/// Strategy for `(ctx, p)` with `n ≤ 4` BSs and `m ≤ 8` antennas.
pub fn arb_case() -> impl Strategy<Value = (PairContext, Vec<f64>)> {
    (1usize..=4, 1usize..=8, -2.0f64..0.0).prop_flat_map(|(n, m, d)| {
        (
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(prop_oneof![1 => Just(f64::NEG_INFINITY), 6 => -3.0f64..1.5], n),
        )
            .prop_map(move |(g, p)| {
                let gains = g.iter().map(|e| 10f64.powf(*e)).collect();
                let ctx = PairContext::new(gains, 10f64.powf(d), m).unwrap();
                (ctx, p.iter().map(|e| 10f64.powf(*e)).collect())
            })
    })
}

pub fn arb_constraints(n: usize) -> impl Strategy<Value = PowerConstraints> {
    (-1.0f64..2.0, -1.0f64..1.0, prop::collection::vec(-2.0f64..1.0, n)).prop_map(|(b, t, c)| PowerConstraints {
        budget: 10f64.powf(b),
        leak_threshold: 10f64.powf(t),
        leak_coeff: c.iter().map(|e| 10f64.powf(*e)).collect(),
    })
}

pub fn arb_pair_problem() -> impl Strategy<Value = (PairContext, PowerConstraints)> {
    arb_case().prop_flat_map(|(ctx, _)| {
        let n = ctx.n_bs();
        (Just(ctx), arb_constraints(n))
    })
}
