mod common;

use common::random_connected_graph;
use graphblock::analysis::{extract_front, fit_butterfly_velocity, fit_entanglement_velocity, OtocField};
use graphblock::engine::{run_ensemble_with_jobs, run_otoc_realization, site_distance};
use graphblock::{Boundary, EnsembleConfig, EntropyUnit, GraphSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn height_function_is_lc_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let n = rng.random_range(2..=7);
        let g = random_connected_graph(&mut rng, n);
        let h = g.height_function().unwrap();
        let mut current = g;
        for _ in 0..10 {
            current = current.local_complement(rng.random_range(1..=n)).unwrap();
            assert_eq!(current.height_function().unwrap(), h);
        }
    }
}

#[test]
fn strict_light_cone_holds() {
    let mut layers_checked = 0;
    for (block, seed) in [(GraphSpec::star(5, 1).unwrap(), 1), (GraphSpec::ring(5).unwrap(), 2)] {
        let mut cfg = EnsembleConfig::new(block, 120);
        cfg.master_seed = seed;
        for index in 0..50 {
            let rows = run_otoc_realization(&cfg, 100, index).unwrap();
            for (t, row) in rows.iter().enumerate() {
                for (x, &c) in row.iter().enumerate() {
                    if c == 1 {
                        assert!(site_distance(x, cfg.otoc_probe.site, 120, Boundary::Periodic) <= 4 * t);
                    }
                }
            }
            layers_checked += rows.len() - 1;
        }
    }
    assert!(layers_checked >= 10_000);
}

#[test]
fn ensemble_output_independent_of_jobs() {
    let mut cfg = EnsembleConfig::new(GraphSpec::ring(5).unwrap(), 60);
    cfg.layers = Some(60);
    cfg.realizations = 24;
    cfg.master_seed = 99;
    let runs: Vec<_> = [1, 4, 8].iter().map(|&j| run_ensemble_with_jobs(&cfg, j).unwrap()).collect();
    for r in &runs[1..] {
        assert_eq!(r.entropy_csv(), runs[0].entropy_csv());
        assert_eq!(r.otoc_csv(), runs[0].otoc_csv());
    }
}

#[test]
fn translation_symmetry_of_entropy() {
    let mut cfg = EnsembleConfig::new(GraphSpec::star(4, 1).unwrap(), 40);
    cfg.layers = Some(12);
    cfg.realizations = 400;
    let base = run_ensemble_with_jobs(&cfg, 1).unwrap();
    cfg.entropy_region = graphblock::Region::new(13, 20);
    let shifted = run_ensemble_with_jobs(&cfg, 1).unwrap();
    let (a, b) = (base.entropy_mean(), shifted.entropy_mean());
    let (va, vb) = (base.entropy_variance(), shifted.entropy_variance());
    for t in 1..=12 {
        let se = ((va[t] + vb[t]) / 400.0).sqrt();
        assert!((a[t] - b[t]).abs() <= 5.0 * se + 1e-9, "t={t}: {} vs {}", a[t], b[t]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthetic_fits_round_trip(v_e in 0.2f64..1.0, v_b in 0.3f64..2.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cap = 100.0;
        let len = (cap / v_e * 1.6) as usize + 50;
        let series: Vec<f64> =
            (0..len).map(|t| (v_e * t as f64).min(cap) + rng.random_range(-0.5..=0.5)).collect();
        let fit = fit_entanglement_velocity(&series, EntropyUnit::Bits, &Default::default()).unwrap();
        prop_assert!((fit.velocity - v_e).abs() <= 0.02 * v_e);

        let n = 200;
        let layers = (0.45 * n as f64 / v_b) as usize + 5;
        let rows = (0..=layers)
            .map(|t| {
                (0..n)
                    .map(|x| {
                        let inside = (x as f64 - 100.0).abs() <= v_b * t as f64;
                        (f64::from(u8::from(inside)) + rng.random_range(-0.05..=0.05)).clamp(0.0, 1.0)
                    })
                    .collect()
            })
            .collect();
        let field = OtocField::new(n, rows).unwrap();
        let front = extract_front(&field, 100, Boundary::Periodic, 0.2).unwrap();
        let fit = fit_butterfly_velocity(&front, n, &Default::default()).unwrap();
        prop_assert!((fit.velocity - v_b).abs() <= 0.02 * v_b);
    }
}
