mod common;

use common::random_case;
use hstn_core::mc::{
    ergodic_leakage_mc, ergodic_rate_mc, ergodic_rate_mc_sharded, instantaneous_rate, logdet2_hermitian,
    sample_small_scale, ComplexMatrix,
};
use hstn_core::rng::stream;
use hstn_core::{upsilon, PairContext, PowerConstraints};
use num_complex::Complex64;
use rand::Rng as _;
use std::f64::consts::LOG2_E;

/// `E₁(x)` by its convergent series, fine for moderate `x`.
fn exp_integral_e1(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        term *= -x / k as f64;
        sum += term / k as f64;
    }
    -EULER_GAMMA - x.ln() - sum
}

fn random_hpd(n: usize, seed: u64) -> ComplexMatrix {
    let s = sample_small_scale(n, n + 2, &mut stream(seed, 0));
    let mut a = ComplexMatrix::identity(n);
    for r in 0..n {
        for c in 0..n {
            let v: Complex64 = (0..n + 2).map(|k| s[(r, k)] * s[(c, k)].conj()).sum();
            a[(r, c)] += v;
        }
    }
    a
}

#[test]
fn sample_moments() {
    let s = sample_small_scale(100, 1000, &mut stream(11, 0));
    let n = s.entries().len() as f64;
    let power: f64 = s.entries().iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
    let mean: Complex64 = s.entries().iter().sum::<Complex64>() / n;
    assert!((power - 1.0).abs() < 0.01, "{power}");
    assert!(mean.re.abs() < 0.01 && mean.im.abs() < 0.01, "{mean}");
    assert_eq!(s, sample_small_scale(100, 1000, &mut stream(11, 0)));
}

#[test]
fn logdet_is_additive_over_blocks() {
    for seed in 0..20 {
        let a = random_hpd(3, seed);
        let b = random_hpd(2, seed + 100);
        let sum = logdet2_hermitian(&a).unwrap() + logdet2_hermitian(&b).unwrap();
        assert!((logdet2_hermitian(&a.block_diag(&b)).unwrap() - sum).abs() < 1e-10);
    }
}

#[test]
fn rate_is_invariant_under_unit_modulus_rotation() {
    let mut rng = stream(5, 0);
    let (ctx, p) = random_case(&mut rng, 3, 4);
    let s = sample_small_scale(4, 3, &mut rng);
    let mut rotated = s.clone();
    for r in 0..4 {
        let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        for c in 0..3 {
            rotated[(r, c)] *= phase;
        }
    }
    let a = instantaneous_rate(&s, &ctx, &p).unwrap();
    let b = instantaneous_rate(&rotated, &ctx, &p).unwrap();
    assert!((a - b).abs() < 1e-12 * a.max(1.0));
}

#[test]
fn scalar_rate_matches_exponential_integral() {
    let ctx = PairContext::new(vec![1.0], 1.0, 1).unwrap();
    // E log2(1 + |s|²) = log2(e) e E₁(1)
    let exact = LOG2_E * 1f64.exp() * exp_integral_e1(1.0);
    assert!((exp_integral_e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-15);
    assert!((exact - 0.860_347_4).abs() < 1e-7, "{exact}");
    let est = ergodic_rate_mc(&ctx, &[1.0], 100_000, &mut stream(3, 0));
    assert!((est.mean - exact).abs() <= 3.0 * est.std_error, "{est:?} vs {exact}");
    // the deterministic equivalent sits about 2.7% below
    let gap = (exact - upsilon(&ctx, &[1.0])) / exact;
    assert!((gap - 0.027).abs() < 1e-3, "{gap}");
}

#[test]
fn std_error_scales_as_inverse_sqrt() {
    let mut rng = stream(8, 0);
    let (ctx, p) = random_case(&mut rng, 2, 2);
    let small = ergodic_rate_mc(&ctx, &p, 5_000, &mut stream(8, 1));
    let large = ergodic_rate_mc(&ctx, &p, 20_000, &mut stream(8, 2));
    let ratio = small.std_error / large.std_error;
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn zero_power_and_determinism() {
    let mut rng = stream(2, 0);
    let (ctx, p) = random_case(&mut rng, 3, 2);
    let zero = ergodic_rate_mc(&ctx, &[0.0; 3], 100, &mut stream(1, 0));
    assert_eq!((zero.mean, zero.std_error), (0.0, 0.0));
    assert_eq!(ergodic_rate_mc(&ctx, &p, 500, &mut stream(1, 0)), ergodic_rate_mc(&ctx, &p, 500, &mut stream(1, 0)));
    let a = ergodic_rate_mc_sharded(&ctx, &p, 4_000, 6, 4);
    let b = ergodic_rate_mc_sharded(&ctx, &p, 4_000, 6, 4);
    assert_eq!(a, b);
    let single = ergodic_rate_mc(&ctx, &p, 4_000, &mut stream(7, 0));
    assert!((a.mean - single.mean).abs() <= 3.0 * (a.std_error.powi(2) + single.std_error.powi(2)).sqrt());
}

#[test]
fn leakage_estimate_is_linear_in_power() {
    let c = PowerConstraints { budget: 1.0, leak_threshold: 1.0, leak_coeff: vec![0.3, 0.01, 2.0] };
    let p = [0.5, 1.0, 0.1];
    let doubled = [1.0, 2.0, 0.2];
    let a = ergodic_leakage_mc(&c, &p, 1_000, &mut stream(4, 0));
    let b = ergodic_leakage_mc(&c, &doubled, 1_000, &mut stream(4, 0));
    assert!((b.mean - 2.0 * a.mean).abs() < 1e-12);
    assert_eq!(ergodic_leakage_mc(&c, &[0.0; 3], 10, &mut stream(4, 0)).mean, 0.0);
}
