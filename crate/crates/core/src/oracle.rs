//! Dense state-vector reference for small registers.
//!
//! Basis index bit `q` is the computational value of qubit `q`. States are
//! limited to ten qubits and operators to eight so that exhaustive checks run
//! in well under a second each.

use crate::engine::{
    initial_operator, layer_gates, realization_rng, run_entropy_realization, run_otoc_realization, sample_layer,
    EnsembleConfig,
};
use crate::gate::{EntropyUnit, Gate};
use crate::pauli::{Letter, PauliString};
use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub const MAX_STATE_QUBITS: usize = 10;
pub const MAX_OPERATOR_QUBITS: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

fn check_size(n: usize, max: usize) -> Result<()> {
    if n == 0 {
        Err(Error::EmptyRegister)
    } else if n > max {
        Err(Error::Unsupported(format!("dense oracle limited to {max} qubits, got {n}")))
    } else {
        Ok(())
    }
}

fn check_gate(gate: Gate, n: usize) -> Result<()> {
    let sites = match gate {
        Gate::H(q) => vec![q],
        Gate::Cz(a, b) => vec![a, b],
    };
    for &q in &sites {
        if q >= n {
            return Err(Error::SiteOutOfRange { site: q, n });
        }
    }
    if let Gate::Cz(a, b) = gate {
        if a == b {
            return Err(Error::RepeatedSite(a));
        }
    }
    Ok(())
}

fn apply_to(amps: &mut [Complex64], gate: Gate) {
    match gate {
        Gate::H(q) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let bit = 1usize << q;
            for i in 0..amps.len() {
                if i & bit == 0 {
                    let (a, b) = (amps[i], amps[i | bit]);
                    amps[i] = (a + b) * s;
                    amps[i | bit] = (a - b) * s;
                }
            }
        }
        Gate::Cz(a, b) => {
            let mask = (1usize << a) | (1usize << b);
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp = -*amp;
                }
            }
        }
    }
}

impl DenseState {
    pub fn new_zero_state(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits, MAX_STATE_QUBITS)?;
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self { n: n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&mut self, gate: Gate) -> Result<()> {
        check_gate(gate, self.n)?;
        apply_to(&mut self.amplitudes, gate);
        Ok(())
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|&g| self.apply(g))
    }

    /// Von Neumann entropy of the reduced state on `region` (any proper,
    /// nonempty subset of sites).
    pub fn entropy(&self, region: &[usize], unit: EntropyUnit) -> Result<f64> {
        let n = self.n;
        let mut in_a = vec![false; n];
        for &q in region {
            if q >= n {
                return Err(Error::SiteOutOfRange { site: q, n });
            }
            if in_a[q] {
                return Err(Error::RepeatedSite(q));
            }
            in_a[q] = true;
        }
        if region.is_empty() || region.len() == n {
            return Err(Error::InvalidRegion { len: region.len(), n });
        }
        let a_sites: Vec<usize> = (0..n).filter(|&q| in_a[q]).collect();
        let b_sites: Vec<usize> = (0..n).filter(|&q| !in_a[q]).collect();
        let gather = |i: usize, sites: &[usize]| {
            sites.iter().enumerate().fold(0usize, |acc, (k, &q)| acc | (((i >> q) & 1) << k))
        };
        let mut m = DMatrix::<Complex64>::zeros(1 << a_sites.len(), 1 << b_sites.len());
        for (i, &amp) in self.amplitudes.iter().enumerate() {
            m[(gather(i, &a_sites), gather(i, &b_sites))] = amp;
        }
        let rho = &m * m.adjoint();
        let eigen = SymmetricEigen::new(rho);
        let bits: f64 = eigen.eigenvalues.iter().filter(|&&p| p > 1e-14).map(|&p| -p * p.log2()).sum();
        Ok(bits * unit.per_bit())
    }
}

/// Column action of a Pauli string: entry `j` is `(row, phase)` with
/// `P|j> = phase |row>`.
fn pauli_action(p: &PauliString) -> Vec<(usize, Complex64)> {
    let n = p.n_sites();
    let sign = if p.is_negative() { -ONE } else { ONE };
    (0..1usize << n)
        .map(|col| {
            let mut row = col;
            let mut phase = sign;
            for q in 0..n {
                let b = (col >> q) & 1;
                match p.letter(q) {
                    Letter::I => {}
                    Letter::X => row ^= 1 << q,
                    Letter::Z => {
                        if b == 1 {
                            phase = -phase;
                        }
                    }
                    Letter::Y => {
                        row ^= 1 << q;
                        // Y|0> = i|1>, Y|1> = -i|0>
                        phase *= if b == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) };
                    }
                }
            }
            (row, phase)
        })
        .collect()
}

/// Matrix of a Pauli string on `n <= 8` qubits, sign included.
pub fn pauli_matrix(p: &PauliString) -> Result<DMatrix<Complex64>> {
    let n = p.n_sites();
    check_size(n, MAX_OPERATOR_QUBITS)?;
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (col, (row, phase)) in pauli_action(p).into_iter().enumerate() {
        m[(row, col)] = phase;
    }
    Ok(m)
}

/// Unitary of a gate sequence given in application order.
pub fn circuit_unitary(n: usize, gates: &[Gate]) -> Result<DMatrix<Complex64>> {
    check_size(n, MAX_OPERATOR_QUBITS)?;
    gates.iter().try_for_each(|&g| check_gate(g, n))?;
    let dim = 1usize << n;
    let mut u = DMatrix::<Complex64>::zeros(dim, dim);
    let mut column = vec![ZERO; dim];
    for j in 0..dim {
        column.iter_mut().for_each(|a| *a = ZERO);
        column[j] = ONE;
        for &g in gates {
            apply_to(&mut column, g);
        }
        u.column_mut(j).iter_mut().zip(&column).for_each(|(dst, &src)| *dst = src);
    }
    Ok(u)
}

/// `W(t) = U† W0 U` for the circuit `U` given in application order.
pub fn heisenberg_matrix(w0: &PauliString, circuit: &[Gate]) -> Result<DMatrix<Complex64>> {
    let n = w0.n_sites();
    let u = circuit_unitary(n, circuit)?;
    let dim = 1usize << n;
    // rows of U permuted and phased by W0
    let mut w0u = DMatrix::<Complex64>::zeros(dim, dim);
    for (k, (row, phase)) in pauli_action(w0).into_iter().enumerate() {
        for j in 0..dim {
            w0u[(row, j)] = phase * u[(k, j)];
        }
    }
    Ok(u.adjoint() * w0u)
}

/// `C(x) = (1 - Tr[W V_x W V_x] / 2^N) / 2` for every site `x`, with
/// `W = U† W0 U` and `V_x` the probe letter on `x`.
pub fn dense_otoc_row(w0: &PauliString, circuit: &[Gate], probe: Letter) -> Result<Vec<f64>> {
    let n = w0.n_sites();
    let w = heisenberg_matrix(w0, circuit)?;
    let dim = 1usize << n;
    (0..n)
        .map(|x| {
            // (W V)_{ij} = W_{i,p(j)} phase_j
            let v = pauli_action(&PauliString::single(n, x, probe)?);
            let mut trace = ZERO;
            for (i, &(pi, fi)) in v.iter().enumerate() {
                for (j, &(pj, fj)) in v.iter().enumerate() {
                    trace += w[(i, pj)] * fj * w[(j, pi)] * fi;
                }
            }
            Ok(0.5 * (1.0 - trace.re / dim as f64))
        })
        .collect()
}

pub fn dense_otoc(w0: &PauliString, circuit: &[Gate], x: usize, probe: Letter) -> Result<f64> {
    if x >= w0.n_sites() {
        return Err(Error::SiteOutOfRange { site: x, n: w0.n_sites() });
    }
    Ok(dense_otoc_row(w0, circuit, probe)?[x])
}

/// What `verify_realization` compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCheck {
    pub layers: usize,
    pub entropy_points: usize,
    /// Zero when the chain is too long for dense operators.
    pub otoc_points: usize,
}

/// Replay realization `index` of `cfg` densely and compare every entropy
/// value and, for chains of at most eight sites, every OTOC value. Any
/// disagreement is an `Error::Invariant`.
pub fn verify_realization(cfg: &EnsembleConfig, layers: usize, index: u64) -> Result<OracleCheck> {
    cfg.validate()?;
    let n = cfg.chain_length;
    check_size(n, MAX_STATE_QUBITS)?;
    let mut rng = realization_rng(cfg.master_seed, index);
    let mut history = Vec::with_capacity(layers);
    for _ in 0..layers {
        let layer = sample_layer(cfg, &mut rng)?;
        history.push(layer_gates(cfg, &layer)?);
    }

    let series = run_entropy_realization(cfg, layers, index)?;
    let region: Vec<usize> = cfg.entropy_region.sites(n).collect();
    let complement: Vec<usize> = cfg.entropy_region.complement(n).sites(n).collect();
    let smaller = if region.len() <= complement.len() { &region } else { &complement };
    let mut state = DenseState::new_zero_state(n)?;
    for (t, &tableau_bits) in series.iter().enumerate() {
        if t > 0 {
            state.apply_gates(&history[t - 1])?;
        }
        let dense = state.entropy(smaller, EntropyUnit::Bits)?;
        if (dense - tableau_bits as f64).abs() > 1e-9 {
            return Err(Error::Invariant(format!(
                "entropy at layer {t}: tableau {tableau_bits} bits, dense {dense:.12} bits"
            )));
        }
    }

    let mut otoc_points = 0;
    if n <= MAX_OPERATOR_QUBITS {
        let rows = run_otoc_realization(cfg, layers, index)?;
        let w0 = initial_operator(cfg)?;
        for (t, row) in rows.iter().enumerate() {
            // W(t) = L_t† ... L_1† W L_1 ... L_t: layer t acts first
            let circuit: Vec<Gate> = history[..t].iter().rev().flatten().copied().collect();
            let dense = dense_otoc_row(&w0, &circuit, cfg.otoc_probe.probe)?;
            for (x, (&c, &d)) in row.iter().zip(&dense).enumerate() {
                if (f64::from(c) - d).abs() > 1e-9 {
                    return Err(Error::Invariant(format!(
                        "OTOC at layer {t}, site {}: tableau {c}, dense {d:.12}",
                        x + 1
                    )));
                }
            }
            otoc_points += row.len();
        }
    }
    Ok(OracleCheck { layers, entropy_points: series.len(), otoc_points })
}
