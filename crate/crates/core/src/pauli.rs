//! Signed Pauli strings and their Heisenberg evolution under H and CZ.

use crate::gate::{window_sites, Boundary, Gate};
use crate::gf2::{flip_bit, get_bit, set_bit, words_for};
use crate::graph::GraphSpec;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    /// Single-site Paulis anticommute iff they are distinct and neither is I.
    pub fn anticommutes(self, other: Letter) -> bool {
        let (a, b) = (self.bits(), other.bits());
        (a.0 & b.1) ^ (a.1 & b.0)
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => '.',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

impl std::str::FromStr for Letter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "I" | "." => Ok(Letter::I),
            "X" => Ok(Letter::X),
            "Y" => Ok(Letter::Y),
            "Z" => Ok(Letter::Z),
            other => Err(format!("unknown Pauli letter '{other}'")),
        }
    }
}

/// An `n`-site Pauli operator `±P` with packed X and Z components.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    negative: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        let w = words_for(n);
        Ok(Self { n, x: vec![0; w], z: vec![0; w], negative: false })
    }

    pub fn single(n: usize, site: usize, letter: Letter) -> Result<Self> {
        let mut p = Self::identity(n)?;
        p.check_site(site)?;
        let (x, z) = letter.bits();
        p.set_letter(site, x, z);
        Ok(p)
    }

    /// Parse strings like `+XZ.Y` or `-ZZ` (`.` or `I` for identity).
    pub fn parse(s: &str) -> Result<Self> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let mut p = Self::identity(body.chars().count())?;
        for (q, c) in body.chars().enumerate() {
            let letter: Letter = c.to_string().parse().map_err(|e: String| Error::Parse { line: 1, reason: e })?;
            let (x, z) = letter.bits();
            p.set_letter(q, x, z);
        }
        p.negative = negative;
        Ok(p)
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub(crate) fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    pub(crate) fn set_letter(&mut self, q: usize, x: bool, z: bool) {
        set_bit(&mut self.x, q, x);
        set_bit(&mut self.z, q, z);
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(get_bit(&self.x, q), get_bit(&self.z, q))
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.n).map(|q| self.letter(q))
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    /// Sites carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.letter(q) != Letter::I).collect()
    }

    fn check_site(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange { site: q, n: self.n })
        }
    }

    pub fn conjugate_h(&mut self, q: usize) -> Result<()> {
        self.check_site(q)?;
        let (x, z) = (get_bit(&self.x, q), get_bit(&self.z, q));
        self.negative ^= x & z;
        set_bit(&mut self.x, q, z);
        set_bit(&mut self.z, q, x);
        Ok(())
    }

    pub fn conjugate_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Err(Error::RepeatedSite(a));
        }
        let (xa, xb) = (get_bit(&self.x, a), get_bit(&self.x, b));
        let (za, zb) = (get_bit(&self.z, a), get_bit(&self.z, b));
        self.negative ^= xa & xb & (za ^ zb);
        if xb {
            flip_bit(&mut self.z, a);
        }
        if xa {
            flip_bit(&mut self.z, b);
        }
        Ok(())
    }

    /// `P -> G† P G`. Both gates are self-inverse.
    pub fn conjugate_gate(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::H(q) => self.conjugate_h(q),
            Gate::Cz(a, b) => self.conjugate_cz(a, b),
        }
    }

    /// `P -> U† P U` for the gate sequence `U = g_k ... g_1` given in
    /// application order; conjugation runs through the list backwards.
    pub fn conjugate_circuit(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().rev().try_for_each(|&g| self.conjugate_gate(g))
    }

    /// Heisenberg update by one block's preparation unitary on its window.
    pub fn conjugate_block(&mut self, block: &GraphSpec, start: usize, boundary: Boundary) -> Result<()> {
        let sites = window_sites(start, block.n_vertices(), self.n, boundary)?;
        for gate in block.preparation_circuit().into_iter().rev() {
            self.conjugate_gate(gate.map_sites(|k| sites[k]))?;
        }
        Ok(())
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let parity: u32 = self
            .x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((x1, z1), (x2, z2))| ((x1 & z2) ^ (z1 & x2)).count_ones())
            .sum();
        parity.is_multiple_of(2)
    }

    /// Binary OTOC against a single-site probe: 1 iff this string
    /// anticommutes with `probe` on site `x`.
    pub fn otoc_indicator(&self, x: usize, probe: Letter) -> u8 {
        u8::from(self.letter(x).anticommutes(probe))
    }

    /// The indicator row for every site, against a `Y` probe when
    /// `probe` is `Letter::Y`; packed one bit per site.
    /// Packed support: bit `q` set when site `q` carries a non-identity letter.
    pub(crate) fn support_mask(&self) -> impl Iterator<Item = u64> + '_ {
        self.x.iter().zip(&self.z).map(|(x, z)| x | z)
    }

    pub(crate) fn anticommutation_mask(&self, probe: Letter) -> impl Iterator<Item = u64> + '_ {
        let (px, pz) = probe.bits();
        let px = if px { u64::MAX } else { 0 };
        let pz = if pz { u64::MAX } else { 0 };
        self.x.iter().zip(&self.z).map(move |(x, z)| (x & pz) ^ (z & px))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        PauliString::parse(s).unwrap()
    }

    #[test]
    fn hadamard_conjugation() {
        let mut x = p("X");
        x.conjugate_h(0).unwrap();
        assert_eq!(x, p("Z"));
        let mut id = p("...");
        id.conjugate_h(1).unwrap();
        assert_eq!(id, p("..."));
        let mut y = p("Y");
        y.conjugate_h(0).unwrap();
        assert_eq!(y, p("-Y"));
        assert!(y.conjugate_h(1).is_err());
    }

    #[test]
    fn cz_conjugation() {
        let mut x1 = p("X.");
        x1.conjugate_cz(0, 1).unwrap();
        assert_eq!(x1, p("XZ"));
        let mut zz = p("ZZ");
        zz.conjugate_cz(0, 1).unwrap();
        assert_eq!(zz, p("ZZ"));
        // XX -> +YY: (X Z)(Z X) = (-iY)(iY)
        let mut xx = p("XX");
        xx.conjugate_cz(0, 1).unwrap();
        assert_eq!(xx, p("+YY"));
        assert!(xx.conjugate_cz(1, 1).is_err());
    }

    #[test]
    fn block_conjugation_locality() {
        let star = GraphSpec::star(4, 1).unwrap();
        let mut id = PauliString::identity(10).unwrap();
        id.conjugate_block(&star, 3, Boundary::Periodic).unwrap();
        assert_eq!(id.weight(), 0);

        let mut outside = PauliString::single(10, 0, Letter::X).unwrap();
        let before = outside.clone();
        outside.conjugate_block(&star, 3, Boundary::Periodic).unwrap();
        assert_eq!(outside, before);

        // X on the center vertex: CZs give X Z Z Z, then H everywhere: Z X X X
        let mut center = PauliString::single(4, 0, Letter::X).unwrap();
        center.conjugate_block(&star, 0, Boundary::Open).unwrap();
        assert_eq!(center, p("ZXXX"));
        assert_eq!(center.support(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn otoc_indicator_values() {
        let x = PauliString::single(5, 2, Letter::X).unwrap();
        assert_eq!(x.otoc_indicator(2, Letter::Y), 1);
        assert_eq!(x.otoc_indicator(1, Letter::Y), 0);
        let id = PauliString::identity(5).unwrap();
        assert!((0..5).all(|q| id.otoc_indicator(q, Letter::Y) == 0));
        let y = PauliString::single(5, 2, Letter::Y).unwrap();
        assert_eq!(y.otoc_indicator(2, Letter::Y), 0);
        let z = PauliString::single(5, 2, Letter::Z).unwrap();
        assert_eq!(z.otoc_indicator(2, Letter::Y), 1);
        let mask: Vec<u64> = z.anticommutation_mask(Letter::Y).collect();
        assert_eq!(mask, vec![1 << 2]);
    }

    #[test]
    fn commutation() {
        assert!(p("XX").commutes_with(&p("ZZ")));
        assert!(!p("X.").commutes_with(&p("Z.")));
        assert!(p("XYZ").commutes_with(&p("XYZ")));
    }

    #[test]
    fn letter_anticommutation_table() {
        use Letter::*;
        for a in [I, X, Y, Z] {
            for b in [I, X, Y, Z] {
                assert_eq!(a.anticommutes(b), a != I && b != I && a != b, "{a:?} {b:?}");
            }
        }
    }
}
