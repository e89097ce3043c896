#![allow(dead_code)]

use graphblock::{Gate, GraphSpec, PauliString};
use rand::Rng;

pub fn random_circuit(rng: &mut impl Rng, n: usize, len: usize) -> Vec<Gate> {
    (0..len)
        .map(|_| {
            if n == 1 || rng.random_bool(0.4) {
                Gate::H(rng.random_range(0..n))
            } else {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                Gate::Cz(a, b)
            }
        })
        .collect()
}

pub fn random_graph(rng: &mut impl Rng, n: usize) -> GraphSpec {
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in u + 1..=n {
            if rng.random_bool(0.5) {
                edges.push((u, v));
            }
        }
    }
    GraphSpec::new(n, edges, "random").unwrap()
}

pub fn random_connected_graph(rng: &mut impl Rng, n: usize) -> GraphSpec {
    loop {
        let g = random_graph(rng, n);
        if g.is_connected() {
            return g;
        }
    }
}

pub fn random_pauli(rng: &mut impl Rng, n: usize) -> PauliString {
    loop {
        let s: String =
            std::iter::once('+').chain((0..n).map(|_| ['.', 'X', 'Y', 'Z'][rng.random_range(0..4)])).collect();
        let p = PauliString::parse(&s).unwrap();
        if p.weight() > 0 {
            return p;
        }
    }
}
