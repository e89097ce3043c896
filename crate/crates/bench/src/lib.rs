//! Fixtures shared by the benchmarks.

use graphblock::engine::{evolve_state, realization_rng, sample_layer};
use graphblock::{EnsembleConfig, GraphSpec, StabilizerTableau};

/// Ring-5 ensemble on `n_sites` sites at the default sparsity.
pub fn ring_config(n_sites: usize) -> EnsembleConfig {
    let mut cfg = EnsembleConfig::new(GraphSpec::ring(5).expect("ring"), n_sites);
    cfg.master_seed = 1;
    cfg
}

/// State after `layers` layers of realization 0, so entropies are volume-law.
pub fn scrambled_state(cfg: &EnsembleConfig, layers: usize) -> StabilizerTableau {
    let mut rng = realization_rng(cfg.master_seed, 0);
    let mut state = StabilizerTableau::new_zero_state(cfg.chain_length).expect("state");
    for _ in 0..layers {
        let layer = sample_layer(cfg, &mut rng).expect("layer");
        evolve_state(cfg, &mut state, &layer).expect("evolve");
    }
    state
}
