use kato_core::propagator::apply_u;
use kato_core::sparse::*;
use kato_core::*;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_set(rng: &mut ChaCha8Rng, n: usize, width: i64) -> CubeSet {
    let mut pts = std::collections::BTreeSet::new();
    while pts.len() < n {
        pts.insert(vec![rng.gen_range(0..width), rng.gen_range(0..width)]);
    }
    CubeSet::new(2, pts.into_iter().collect()).unwrap()
}

#[test]
fn random_sixty_four_cubes_audit() {
    let g = gamma(1, surface_decay_rate(1)).unwrap();
    assert_eq!(g, Ratio::from_integer(2));
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let e = random_set(&mut rng, 64, 1_000_000);
    let d = sparse_decompose(&e, 3, g).unwrap();
    let a = audit(&e, &d);
    assert!(a.partition && a.cover && a.sparse);
    assert!(a.max_family_ratio <= COVER_CONSTANT);
    let json: serde_json::Value = serde_json::from_str(&d.to_json(&a).unwrap()).unwrap();
    assert_eq!(json["levels"].as_array().unwrap().len(), 3);
    assert_eq!(json["audit"]["partition"], true);
    assert!(json["levels"][2]["scale"].as_str().unwrap().parse::<num_bigint::BigUint>().is_ok());
}

#[test]
fn single_cube_and_single_level() {
    let g = Ratio::from_integer(2);
    let e = CubeSet::new(3, vec![vec![1, 2, 3]]).unwrap();
    let d = sparse_decompose(&e, 4, g).unwrap();
    assert_eq!(d.levels[0].members, e.points());
    assert_eq!(d.levels[0].families.len(), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let e = random_set(&mut rng, 40, 50);
    let d = sparse_decompose(&e, 1, g).unwrap();
    assert_eq!(d.levels[0].members, e.points());
    assert!(audit(&e, &d).exact_ok());
}

#[test]
fn columns_partition_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let e = random_set(&mut rng, 100, 12);
        let cols = columns_by_height(&e, 0).unwrap();
        let mut total = 0;
        for (&h, cs) in &cols {
            for c in cs {
                assert!(c.cubes.len() as u64 >= h && (c.cubes.len() as u64) < 2 * h);
                total += c.cubes.len();
            }
        }
        assert_eq!(total, e.len());
    }
}

#[test]
fn cube_set_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let e = random_set(&mut rng, 30, 1000);
    e.save(&path).unwrap();
    assert_eq!(CubeSet::load(&path).unwrap(), e);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_always_audits(seed in 0u64..10_000, n in 1usize..60, k in 1usize..4, spread in 1i64..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let width = 10i64.pow(spread as u32);
        let n = n.min((width * width) as usize);
        let e = random_set(&mut rng, n, width);
        let d = sparse_decompose(&e, k, Ratio::from_integer(2)).unwrap();
        let a = audit(&e, &d);
        prop_assert!(a.exact_ok());
        for lvl in &d.levels {
            for f in &lvl.families {
                prop_assert!(is_sparse(f));
            }
        }
    }
}

fn schrodinger() -> Symbol64 {
    Symbol64::schrodinger(1)
}

#[test]
fn surface_measure_refines() {
    let coarse = SurfacePatch::new(&schrodinger(), 16).unwrap();
    let fine = SurfacePatch::new(&schrodinger(), 256).unwrap();
    let a = coarse.fourier(&[0.0, 0.0]).unwrap();
    let b = fine.fourier(&[0.0, 0.0]).unwrap();
    assert!(a.re > 0.0 && a.im == 0.0);
    assert!((a - b).norm() <= 1e-8);
    assert!((a.re - coarse.measure()).abs() <= 1e-12);
}

#[test]
fn surface_transform_conjugate_symmetric() {
    let p = SurfacePatch::new(&Symbol64::schrodinger(2), 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let z: Vec<f64> = (0..3).map(|_| rng.gen_range(-30.0..30.0)).collect();
        let m: Vec<f64> = z.iter().map(|v| -v).collect();
        assert!((p.fourier(&m).unwrap() - p.fourier(&z).unwrap().conj()).norm() <= 1e-12);
    }
}

#[test]
fn surface_transform_decays_at_rate_one_half() {
    let p = SurfacePatch::new(&schrodinger(), 128).unwrap();
    let lambdas: Vec<f64> = (4..=8).map(|k| 2f64.powi(k)).collect();
    let slope = normal_decay_slope(&p, &[1.25], &lambdas).unwrap();
    assert!((slope + 0.5).abs() <= 0.1, "{slope}");
}

fn window_field(grid: Grid64, times: Vec<f64>, seed: u64) -> Spacetime64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, Complex64)> = (0..4)
        .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), Complex64::new(rng.gen(), rng.gen())))
        .collect();
    Spacetime64::from_fn(grid, times, |t, x| {
        let w = (-(t * t + x[0] * x[0]) / 18.0).exp();
        modes.iter().map(|&(a, b, c)| c * Complex64::new(0.0, a * t + b * x[0]).exp()).sum::<Complex64>() * w
    })
    .unwrap()
}

#[test]
fn restriction_adjointness() {
    let p = SurfacePatch::new(&schrodinger(), 8).unwrap();
    let grid = Grid64::new(1, 64, 32.0).unwrap();
    let times = field::uniform_times(-12.0, 12.0, 49);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for seed in 0..20 {
        let f = window_field(grid, times.clone(), seed);
        let g: Vec<Complex64> = (0..p.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let rf = restriction(&f, &p).unwrap();
        let lhs = surface_inner(&rf.values, &g, &p);
        let ext = extension(&g, &p, grid, times.clone()).unwrap();
        let rhs = spacetime_inner(&f, &ext);
        assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm().max(1.0), "{lhs} {rhs}");
    }
}

#[test]
fn extension_matches_apply_u() {
    let sym = schrodinger();
    let bump = Bump64::default();
    let p = SurfacePatch::new(&sym, 64).unwrap();
    let h = |xi: f64| (-((xi - 1.25) / 0.08).powi(2)).exp();
    let grid = Grid64::new(1, 2048, 512.0).unwrap();
    let dxi = grid.dxi();
    let f0 = Field64::from_fn(grid, |x| {
        (0..grid.points()).map(|k| Complex64::new(0.0, x[0] * grid.freq(k)).exp() * h(grid.freq(k))).sum::<Complex64>() * dxi
            / std::f64::consts::TAU
    });
    let times = vec![0.0, 0.75, 1.5, 2.25];
    let u = apply_u(&f0, &sym, &bump, &times).unwrap();
    let g: Vec<Complex64> =
        p.nodes().iter().zip(p.surface_factor()).map(|(xi, s)| Complex64::new(h(xi[0]) / s, 0.0)).collect();
    let e = extension(&g, &p, grid, times).unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in u.slices().iter().zip(e.slices()) {
        for i in 0..grid.len() {
            if grid.point(i)[0].abs() <= 40.0 {
                worst = worst.max((a[i] - b[i]).norm());
            }
        }
    }
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn plane_wave_peaks_at_nearest_surface_point() {
    let p = SurfacePatch::new(&schrodinger(), 16).unwrap();
    let (tau0, xi0) = (1.0, 1.5);
    let grid = Grid64::new(1, 512, 128.0).unwrap();
    let times = field::uniform_times(-40.0, 40.0, 321);
    let f = Spacetime64::from_fn(grid, times, |t, x| {
        Complex64::new(0.0, x[0] * xi0 + t * tau0).exp() * (-(t * t + x[0] * x[0]) / 128.0).exp()
    })
    .unwrap();
    let rf = restriction(&f, &p).unwrap();
    assert!(rf.warning().is_none());
    let best = (0..p.len()).max_by(|&a, &b| rf.values[a].norm().partial_cmp(&rf.values[b].norm()).unwrap()).unwrap();
    // Nearest point on τ = ξ²: 4ξ(ξ² − 1) + 2(ξ − 1.5) = 0.
    let (mut lo, mut hi) = (1.0, 1.5);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if 4.0 * mid * (mid * mid - 1.0) + 2.0 * (mid - xi0) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((p.nodes()[best][0] - lo).abs() <= 0.02, "{} {lo}", p.nodes()[best][0]);
}

#[test]
fn real_even_data_restricts_to_real_values() {
    let p = SurfacePatch::new(&schrodinger(), 4).unwrap();
    let grid = Grid64::new(1, 128, 64.0).unwrap();
    let times = field::uniform_times(-10.0, 10.0, 81);
    let f = Spacetime64::from_fn(grid, times, |t, x| Complex64::new((-(t * t) / 8.0 - x[0] * x[0] / 8.0).exp() * (1.0 + (t * x[0]).cos()), 0.0))
        .unwrap();
    let rf = restriction(&f, &p).unwrap();
    let scale = rf.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(rf.values.iter().all(|z| z.im.abs() <= 1e-12 * scale.max(1e-300)));
}

#[test]
fn leakage_is_reported() {
    let p = SurfacePatch::new(&schrodinger(), 2).unwrap();
    let grid = Grid64::new(1, 64, 16.0).unwrap();
    let f = Spacetime64::from_fn(grid, field::uniform_times(0.0, 1.0, 5), |_, _| Complex64::new(1.0, 0.0)).unwrap();
    let rf = restriction(&f, &p).unwrap();
    assert!(rf.leakage > 0.1);
    assert!(rf.warning().unwrap().contains("boundary-layer"));
}

mod decoupling {
    use kato_core::sparse::decoupling::*;
    use kato_core::sparse::SparseFamily;
    use kato_core::*;
    use num_rational::Ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_ball_within_constant() {
        let sym = Symbol64::schrodinger(1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let fam = random_sparse_family(&mut rng, 1, 8, Ratio::from_integer(2), 10).unwrap();
            let d = random_ball_data(&mut rng, &sym, 3);
            let r = decoupling_check(&fam, &[d], &sym, 2.0).unwrap();
            assert!(r.ratio <= SINGLE_BALL_CONSTANT && r.ratio > 0.1, "{}", r.ratio);
            assert!((r.ratio - r.single_ratios[0]).abs() <= 1e-9);
        }
    }

    #[test]
    fn p_one_within_fubini_bound() {
        let sym = Symbol64::schrodinger(1);
        let bound = fubini_constant(&sym, 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let fam = random_sparse_family(&mut rng, 3, 8, Ratio::from_integer(2), 1200).unwrap();
        let d: Vec<_> = (0..3).map(|_| random_ball_data(&mut rng, &sym, 2)).collect();
        let r = decoupling_check(&fam, &d, &sym, 1.0).unwrap();
        assert!(r.ratio <= bound, "{} {bound}", r.ratio);
    }

    #[test]
    fn sparse_configurations_stay_near_single_ball() {
        let sym = Symbol64::schrodinger(1);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..3 {
            let fam = random_sparse_family(&mut rng, 4, 8, Ratio::from_integer(2), 1600).unwrap();
            let d: Vec<_> = (0..4).map(|_| random_ball_data(&mut rng, &sym, 3)).collect();
            let r = decoupling_check(&fam, &d, &sym, 2.0).unwrap();
            assert!(r.ratio <= 2.0 * SINGLE_BALL_CONSTANT, "{}", r.ratio);
            assert!(r.single_ratios.iter().all(|&s| s <= SINGLE_BALL_CONSTANT));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let sym = Symbol64::schrodinger(1);
        let d = BallData { terms: vec![(Complex64::new(1.0, 0.0), [1.0, 1.0])] };
        let close = SparseFamily {
            centers: vec![vec![0, 0], vec![1023, 0]],
            radius: 16u32.into(),
            gamma: Ratio::from_integer(2),
        };
        assert!(matches!(decoupling_check(&close, &[d.clone(), d.clone()], &sym, 2.0), Err(Error::Precondition(_))));
        let one = SparseFamily { centers: vec![vec![0, 0]], radius: 8u32.into(), gamma: Ratio::from_integer(2) };
        assert!(decoupling_check(&one, &[d.clone()], &sym, 2.5).is_err());
        assert!(matches!(decoupling_check(&one, &[d], &Symbol64::schrodinger(2), 2.0), Err(Error::Unsupported(_))));
    }
}
