mod common;

use common::arb_case;
use hstn_core::rate_model::{
    chi_residual, d2y_dx2, dy_dx, inner_min_x, solve_chi, upsilon, upsilon_closed_form, y_value,
};
use hstn_core::PairContext;
use proptest::prelude::*;
use std::f64::consts::LOG2_E;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn chi_is_bracketed((ctx, p) in arb_case()) {
        // each summand is below a_n, so χ ≤ 1 + Σ a_n
        let upper = 1.0 + ctx.gains_sq.iter().zip(&p).map(|(g, p)| p * g / ctx.denom).sum::<f64>();
        prop_assert!(chi_residual(&ctx, &p, 1.0) <= 0.0);
        prop_assert!(chi_residual(&ctx, &p, upper) >= 0.0);
        let s = solve_chi(&ctx, &p);
        prop_assert!(s.chi >= 1.0 && s.chi <= upper);
        prop_assert!(s.residual.abs() <= 1e-10);
    }

    #[test]
    fn y_is_convex_in_x((ctx, p) in arb_case(), x in 0.0f64..8.0) {
        prop_assert!(d2y_dx2(&ctx, &p, x) > 0.0);
    }

    #[test]
    fn stationary_at_log_chi((ctx, p) in arb_case()) {
        let x = solve_chi(&ctx, &p).chi.ln();
        let scale = ctx.n_antennas as f64 * LOG2_E;
        prop_assert!(dy_dx(&ctx, &p, x).abs() <= 1e-8 * scale, "{}", dy_dx(&ctx, &p, x));
    }

    #[test]
    fn inner_min_beats_grid((ctx, p) in arb_case()) {
        let m = inner_min_x(&ctx, &p);
        for k in 0..1000 {
            let x = 10.0 * k as f64 / 999.0;
            prop_assert!(y_value(&ctx, &p, x) >= m.y_min - 1e-9 * m.y_min.abs());
        }
    }

    #[test]
    fn y_is_midpoint_concave_in_p((ctx, p) in arb_case(), (_, q) in arb_case(), x in 0.0f64..5.0) {
        let q: Vec<f64> = (0..ctx.n_bs()).map(|n| q.get(n).copied().unwrap_or(0.0)).collect();
        let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
        let lhs = y_value(&ctx, &mid, x);
        let rhs = 0.5 * (y_value(&ctx, &p, x) + y_value(&ctx, &q, x));
        prop_assert!(lhs >= rhs - 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn y_form_matches_closed_form((ctx, p) in arb_case()) {
        let chi = solve_chi(&ctx, &p).chi;
        let a = upsilon(&ctx, &p);
        let b = upsilon_closed_form(&ctx, &p, chi);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-3), "{a} vs {b}");
    }

    #[test]
    fn upsilon_monotone_per_coordinate((ctx, p) in arb_case(), n in 0usize..4, bump in 0.0f64..10.0) {
        let n = n % ctx.n_bs();
        let mut q = p.clone();
        q[n] += bump;
        let (a, b) = (upsilon(&ctx, &p), upsilon(&ctx, &q));
        prop_assert!(b >= a - 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn depends_only_on_snr_ratios((ctx, p) in arb_case(), e in -3.0f64..3.0) {
        let s = 10f64.powf(e);
        let scaled = PairContext::new(ctx.gains_sq.iter().map(|g| g * s).collect(), ctx.denom * s, ctx.n_antennas).unwrap();
        let (c1, c2) = (solve_chi(&ctx, &p).chi, solve_chi(&scaled, &p).chi);
        prop_assert!((c1 - c2).abs() <= 1e-11 * c1);
        let (u1, u2) = (upsilon(&ctx, &p), upsilon(&scaled, &p));
        prop_assert!((u1 - u2).abs() <= 1e-10 * u1.max(1e-6));
    }
}

#[test]
fn trivial_values() {
    let ctx = PairContext::new(vec![1.0, 2.0], 1.0, 3).unwrap();
    let zero = [0.0, 0.0];
    let m = 3.0 * LOG2_E;
    assert_eq!(chi_residual(&ctx, &zero, 1.0), 0.0);
    assert_eq!(chi_residual(&ctx, &zero, 2.0), 1.0);
    assert_eq!(solve_chi(&ctx, &zero).chi, 1.0);
    assert!((y_value(&ctx, &zero, 0.0) - m).abs() < 1e-15);
    assert!((y_value(&ctx, &zero, 1.0) - m * (1.0 + (-1f64).exp())).abs() < 1e-14);
    assert_eq!(dy_dx(&ctx, &zero, 0.0), 0.0);
    let im = inner_min_x(&ctx, &zero);
    assert_eq!(im.x_star, 0.0);
    assert!((im.y_min - m).abs() < 1e-15);
    assert_eq!(upsilon(&ctx, &zero), 0.0);
}

#[test]
fn chi_can_exceed_one_plus_n() {
    // N = M = 1, a = 100 reduces to χ² - χ - 100 = 0
    let ctx = PairContext::new(vec![100.0], 1.0, 1).unwrap();
    let chi = solve_chi(&ctx, &[1.0]).chi;
    assert!((chi - (1.0 + 401f64.sqrt()) / 2.0).abs() < 1e-10);
    assert!(chi > 2.0);
}

#[test]
fn golden_ratio_case() {
    // χ² - χ - 1 = 0
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let ctx = PairContext::new(vec![1.0], 1.0, 1).unwrap();
    let p = [1.0];
    assert!(chi_residual(&ctx, &p, phi).abs() < 1e-12);
    assert!((solve_chi(&ctx, &p).chi - phi).abs() < 1e-12);
    let im = inner_min_x(&ctx, &p);
    assert!((im.x_star - phi.ln()).abs() < 1e-12);
    assert!((im.x_star - 0.4812).abs() < 5e-5);
    // log2(1 + 1/φ) + log2(e)(ln φ + 1/φ)
    let y = (1.0 + 1.0 / phi).log2() + LOG2_E * (phi.ln() + 1.0 / phi);
    assert!((y_value(&ctx, &p, phi.ln()) - y).abs() < 1e-14);
    assert!((y - 2.2801).abs() < 5e-5);
    assert!((upsilon(&ctx, &p) - (y - LOG2_E)).abs() < 1e-14);
    assert!((upsilon(&ctx, &p) - 0.83742).abs() < 5e-6);
}
