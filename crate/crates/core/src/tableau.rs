//! Pure stabilizer states as binary symplectic tableaux.
//!
//! The tableau is stored column-major: for each qubit `q` there is one packed
//! word vector over generators holding the X-components and one holding the
//! Z-components. Gates become a handful of word operations per affected column,
//! and the entropy of a region is the rank of that region's columns.

use crate::gate::{window_sites, Boundary, EntropyUnit, Gate};
use crate::gf2::{self, get_bit, words_for};
use crate::graph::GraphSpec;
use crate::pauli::PauliString;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A contiguous run of `len` sites starting at `start` (0-indexed). On a
/// ring the run may wrap past the last site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub start: usize,
    pub len: usize,
}

impl Region {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    /// The left half `[0, n/2)` of an `n`-site chain.
    pub fn half_chain(n: usize) -> Self {
        Self { start: 0, len: n / 2 }
    }

    pub fn sites(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.start;
        (0..self.len).map(move |k| (start + k) % n)
    }

    /// The sites not in this region, as a region of its own.
    pub fn complement(&self, n: usize) -> Region {
        Region { start: (self.start + self.len) % n, len: n - self.len }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.len == 0 || self.len >= n || self.start >= n {
            Err(Error::InvalidRegion { len: self.len, n })
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    // column q occupies [q * words, (q + 1) * words)
    x: Vec<u64>,
    z: Vec<u64>,
    // bit i set means generator i carries sign -1
    signs: Vec<u64>,
}

impl StabilizerTableau {
    /// `|0...0>`: generator `i` is `+Z_i`.
    pub fn new_zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::EmptyRegister);
        }
        let words = words_for(n_qubits);
        let mut z = vec![0u64; n_qubits * words];
        for q in 0..n_qubits {
            gf2::set_bit(&mut z[q * words..(q + 1) * words], q, true);
        }
        Ok(Self { n: n_qubits, words, x: vec![0; n_qubits * words], z, signs: vec![0; words] })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    fn check_site(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange { site: q, n: self.n })
        }
    }

    #[inline]
    fn col(&self, q: usize) -> std::ops::Range<usize> {
        q * self.words..(q + 1) * self.words
    }

    pub fn x_bit(&self, generator: usize, q: usize) -> bool {
        get_bit(&self.x[self.col(q)], generator)
    }

    pub fn z_bit(&self, generator: usize, q: usize) -> bool {
        get_bit(&self.z[self.col(q)], generator)
    }

    /// True when generator `i` carries the phase -1.
    pub fn sign_negative(&self, generator: usize) -> bool {
        get_bit(&self.signs, generator)
    }

    /// Generator `i` as a signed Pauli string.
    pub fn generator(&self, i: usize) -> PauliString {
        let mut p = PauliString::identity(self.n).expect("n >= 1");
        for q in 0..self.n {
            p.set_letter(q, self.x_bit(i, q), self.z_bit(i, q));
        }
        p.set_negative(self.sign_negative(i));
        p
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_site(q)?;
        let w = self.words;
        let (xs, zs) = (&mut self.x[q * w..(q + 1) * w], &mut self.z[q * w..(q + 1) * w]);
        for k in 0..w {
            self.signs[k] ^= xs[k] & zs[k];
            std::mem::swap(&mut xs[k], &mut zs[k]);
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Err(Error::RepeatedSite(a));
        }
        let w = self.words;
        for k in 0..w {
            let (xa, xb) = (self.x[a * w + k], self.x[b * w + k]);
            let (za, zb) = (self.z[a * w + k], self.z[b * w + k]);
            self.signs[k] ^= xa & xb & (za ^ zb);
            self.z[a * w + k] = za ^ xb;
            self.z[b * w + k] = zb ^ xa;
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::H(q) => self.apply_h(q),
            Gate::Cz(a, b) => self.apply_cz(a, b),
        }
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|&g| self.apply_gate(g))
    }

    /// Apply the block's preparation unitary with vertex `k` on site
    /// `start + k - 1` (wrapped when periodic).
    pub fn apply_block(&mut self, block: &GraphSpec, start: usize, boundary: Boundary) -> Result<()> {
        let sites = window_sites(start, block.n_vertices(), self.n, boundary)?;
        for gate in block.preparation_circuit() {
            self.apply_gate(gate.map_sites(|k| sites[k]))?;
        }
        Ok(())
    }

    /// F2 rank of the `N x 2N` generator matrix.
    pub fn rank(&self) -> usize {
        gf2::rank_of_vectors(self.n, self.x.chunks_exact(self.words).chain(self.z.chunks_exact(self.words)))
    }

    /// True when every pair of generators has vanishing symplectic product.
    pub fn generators_commute(&self) -> bool {
        let w = self.words;
        // row i of the product matrix, indexed over generators j
        let mut product = vec![0u64; self.n * w];
        for q in 0..self.n {
            let (xq, zq) = (&self.x[self.col(q)], &self.z[self.col(q)]);
            for i in 0..self.n {
                let row = &mut product[i * w..(i + 1) * w];
                if get_bit(xq, i) {
                    row.iter_mut().zip(zq).for_each(|(r, z)| *r ^= z);
                }
                if get_bit(zq, i) {
                    row.iter_mut().zip(xq).for_each(|(r, x)| *r ^= x);
                }
            }
        }
        product.iter().all(|&v| v == 0)
    }

    /// Both structural invariants: full rank and pairwise commutation.
    pub fn is_valid(&self) -> bool {
        self.rank() == self.n && self.generators_commute()
    }

    /// Entanglement entropy of a contiguous region, in bits. Equals the rank
    /// of the generator matrix restricted to the region minus its size.
    pub fn entropy_bits(&self, region: Region) -> Result<usize> {
        region.validate(self.n)?;
        let cols = region.sites(self.n).flat_map(|q| [&self.x[self.col(q)], &self.z[self.col(q)]]);
        Ok(gf2::rank_of_vectors(self.n, cols) - region.len)
    }

    pub fn entropy_contiguous(&self, region: Region, unit: EntropyUnit) -> Result<f64> {
        Ok(self.entropy_bits(region)? as f64 * unit.per_bit())
    }
}
