mod common;

use common::{random_circuit, random_connected_graph, random_pauli};
use graphblock::engine::{evolve_operator, layer_gates, realization_rng, sample_layer};
use graphblock::oracle::{dense_otoc_row, heisenberg_matrix, pauli_matrix, verify_realization, DenseState};
use graphblock::{EnsembleConfig, EntropyUnit, GraphSpec, Letter, Region, StabilizerTableau};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn tableau_entropy_matches_dense_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.random_range(2..=10);
        let len = rng.random_range(1..=40);
        let gates = random_circuit(&mut rng, n, len);
        let mut tableau = StabilizerTableau::new_zero_state(n).unwrap();
        tableau.apply_gates(&gates).unwrap();
        let mut dense = DenseState::new_zero_state(n).unwrap();
        dense.apply_gates(&gates).unwrap();
        for start in 0..n {
            for len in 1..n {
                let region = Region::new(start, len);
                let sites: Vec<usize> =
                    if 2 * len <= n { region.sites(n).collect() } else { region.complement(n).sites(n).collect() };
                let exact = tableau.entropy_contiguous(region, EntropyUnit::Bits).unwrap();
                let reference = dense.entropy(&sites, EntropyUnit::Bits).unwrap();
                assert!((exact - reference).abs() < 1e-9, "{gates:?} region {region:?}: {exact} vs {reference}");
            }
        }
    }
}

#[test]
fn binary_otoc_matches_dense_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..50 {
        let n = rng.random_range(2..=8);
        let gates = random_circuit(&mut rng, n, 20);
        let w0 = if case % 2 == 0 {
            let letter = [Letter::X, Letter::Y, Letter::Z][rng.random_range(0..3)];
            graphblock::PauliString::single(n, rng.random_range(0..n), letter).unwrap()
        } else {
            random_pauli(&mut rng, n)
        };
        let mut w = w0.clone();
        w.conjugate_circuit(&gates).unwrap();
        for probe in [Letter::X, Letter::Y, Letter::Z] {
            let dense = dense_otoc_row(&w0, &gates, probe).unwrap();
            for (x, &d) in dense.iter().enumerate() {
                assert!(d.abs() < 1e-9 || (d - 1.0).abs() < 1e-9, "dense OTOC {d} is not binary");
                assert_eq!(f64::from(w.otoc_indicator(x, probe)), d.round(), "case {case} site {x}");
            }
        }
    }
}

#[test]
fn block_conjugation_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let width = rng.random_range(2..=4);
        let block = random_connected_graph(&mut rng, width);
        let mut cfg = EnsembleConfig::new(block, 8);
        cfg.alpha = 1.0;
        let first = sample_layer(&cfg, &mut rng).unwrap();
        let second = sample_layer(&cfg, &mut rng).unwrap();
        let mut forward = layer_gates(&cfg, &first).unwrap();
        forward.extend(layer_gates(&cfg, &second).unwrap());

        let w0 = random_pauli(&mut rng, 8);
        // U = L2 L1, so U† W U conjugates by L2 first
        let mut w = w0.clone();
        evolve_operator(&cfg, &mut w, &second).unwrap();
        evolve_operator(&cfg, &mut w, &first).unwrap();
        let dense = heisenberg_matrix(&w0, &forward).unwrap();
        assert!((pauli_matrix(&w).unwrap() - dense).norm() < 1e-9);
    }
}

#[test]
fn ring_block_realization_matches_dense() {
    let mut cfg = EnsembleConfig::new(GraphSpec::ring(5).unwrap(), 10);
    cfg.alpha = 1.0;
    cfg.master_seed = 2024;
    for index in 0..3 {
        verify_realization(&cfg, 20, index).unwrap();
    }
}

#[test]
fn small_chain_otoc_field_matches_dense() {
    let mut cfg = EnsembleConfig::new(GraphSpec::star(4, 1).unwrap(), 8);
    cfg.master_seed = 7;
    for index in 0..3 {
        let check = verify_realization(&cfg, 8, index).unwrap();
        assert_eq!(check.otoc_points, 9 * 8);
    }
    let mut rng = realization_rng(7, 0);
    assert_eq!(sample_layer(&cfg, &mut rng).unwrap().starts.len(), 1);
}
