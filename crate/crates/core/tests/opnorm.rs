use kato_core::grid::Grid;
use kato_core::norms::{Exponent, Order};
use kato_core::opnorm::*;
use kato_core::{Complex64, Symbol64};
use proptest::prelude::*;

fn schrodinger() -> Symbol64 {
    Symbol64::schrodinger(1)
}

#[test]
fn fit_examples() {
    let rs = [8.0, 16.0, 32.0];
    let f = fit_exponent(&rs, &rs.map(|r: f64| 3.0 * r.sqrt())).unwrap();
    assert!((f.slope - 0.5).abs() <= 1e-12);
    assert!((f.intercept - 3f64.ln()).abs() <= 1e-12);
    assert!(fit_exponent(&rs, &[2.0; 3]).unwrap().slope.abs() <= 1e-15);
    assert!(fit_exponent(&rs, &[1.0, 0.0, 2.0]).is_err());
    assert!(fit_exponent(&[8.0, 16.0], &[1.0, 2.0]).is_err());
}

#[test]
fn multiplier_norm_is_its_supremum() {
    let grid = Grid::new(1, 64, 20.0).unwrap();
    let m = FrequencyMultiplier::new(grid, |xi: &[f64]| Complex64::new((xi[0] * 0.7).cos() * 3.0, xi[0].sin()));
    let est = power_iteration(&m, &PowerConfig { tol: 1e-12, max_iter: 2000, ..PowerConfig::default() }, &[]).unwrap();
    assert!((est.norm - m.sup()).abs() <= 1e-4 * m.sup(), "{} {}", est.norm, m.sup());
}

#[test]
fn window_enlargement_does_not_decrease_the_norm() {
    for scale in [4.0, 8.0] {
        let spec = SmoothingOperatorSpec::l2_local(schrodinger(), 0.5, scale).unwrap();
        let (local, global) = window_monotonicity(&spec, 8.0 * scale * scale, &PowerConfig::default()).unwrap();
        assert!(global.norm >= local.norm - 1e-10, "{} {}", global.norm, local.norm);
    }
}

#[test]
fn power_iteration_is_stable_across_seeds() {
    let spec = SmoothingOperatorSpec::l2_local(schrodinger(), 0.5, 8.0).unwrap();
    let norms: Vec<f64> = (0..3)
        .map(|seed| operator_norm_l2(&spec, &PowerConfig { seed, ..PowerConfig::default() }).unwrap().norm)
        .collect();
    for n in &norms {
        assert!((n - norms[0]).abs() <= 1e-3 * norms[0], "{norms:?}");
    }
}

#[test]
fn mixed_norm_is_homogeneous() {
    let spec =
        SmoothingOperatorSpec::new(schrodinger(), 0.5, Exponent::Finite(3.0), Exponent::Infinity, Order::TX, 4.0, Window::Local)
            .unwrap();
    let op = CurveOperator::new(&spec).unwrap();
    let v: Vec<Complex64> = (0..op.inputs()).map(|k| Complex64::from_polar(1.0, k as f64 * 0.37)).collect();
    let w: Vec<Complex64> = v.iter().map(|z| z * 2.0).collect();
    let (a, b) = (op.mixed_norm(&v), op.mixed_norm(&w));
    assert!((b - 2.0 * a).abs() <= 1e-12 * b);
}

#[test]
fn maximal_bound_improves_on_candidates() {
    let spec =
        SmoothingOperatorSpec::new(schrodinger(), -0.25, Exponent::Finite(2.0), Exponent::Infinity, Order::XT, 8.0, Window::Local)
            .unwrap();
    let b = lower_bound_mixed(&spec, &MixedConfig::default()).unwrap();
    assert!(b.value >= b.initial && b.initial > 0.0);
    let l2 = b.l2.as_ref().unwrap();
    assert!(l2.norm > 0.0 && !b.candidate.is_empty());
}

#[test]
fn transfer_requires_finite_exponents_at_least_two() {
    let spec = SmoothingOperatorSpec::new(
        schrodinger(),
        0.5,
        Exponent::Finite(1.5),
        Exponent::Finite(2.0),
        Order::XT,
        8.0,
        Window::Local,
    )
    .unwrap();
    assert!(spec.check_transfer_exponents().is_err());
    assert!(SmoothingOperatorSpec::l2_local(schrodinger(), 0.5, 8.0).unwrap().check_transfer_exponents().is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_recovers_power_laws(slope in -2.0f64..2.0, c in 0.1f64..10.0, k in 3usize..7) {
        let rs: Vec<f64> = (0..k).map(|i| 2f64.powi(i as i32 + 1)).collect();
        let vs: Vec<f64> = rs.iter().map(|r| c * r.powf(slope)).collect();
        let f = fit_exponent(&rs, &vs).unwrap();
        prop_assert!((f.slope - slope).abs() <= 1e-10);
        prop_assert!((f.intercept - c.ln()).abs() <= 1e-9);
        prop_assert!(f.stderr <= 1e-9);
    }

    #[test]
    fn predicted_exponent_is_affine_in_alpha(alpha in -2.0f64..2.0, h in -1.0f64..1.0, q in 1.0f64..10.0, r in 1.0f64..10.0) {
        let (q, r) = (Exponent::Finite(q), Exponent::Finite(r));
        let a = predicted_exponent(1, 2.0, q, r, alpha);
        let b = predicted_exponent(1, 2.0, q, r, alpha + h);
        prop_assert!((a - b - h).abs() <= 1e-12);
    }

    #[test]
    fn transfer_loss_is_between_zero_and_n_over_r(n in 1usize..4, r in 2.0f64..20.0, extra in 1e-3f64..50.0, alpha in -1.0f64..1.0) {
        let (delta, global) = transfer_exponent(n, r, r + extra, alpha).unwrap();
        prop_assert!(delta > 0.0 && delta < n as f64 / r + 1e-15);
        prop_assert!((global + delta - alpha).abs() <= 1e-12);
    }
}
