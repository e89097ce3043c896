//! Graph specifications for circuit blocks and their block-level descriptors.
//!
//! Vertices are labeled `1..=n` in the public API, matching the ordering a
//! block inherits from the chain: vertex `k` is placed on the `k`-th site of
//! its window. Internally adjacency is kept as one bitmask per vertex.

use crate::gate::{Boundary, Gate};
use crate::gf2;
use crate::tableau::{Region, StabilizerTableau};
use crate::{Error, Result};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const MAX_VERTICES: usize = 16;

/// A labeled simple graph defining a block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphSpec {
    n: usize,
    adj: Vec<u32>,
    name: String,
}

impl GraphSpec {
    /// Build a graph from 1-indexed edges. Rejects self-loops, duplicate
    /// edges (in either orientation) and out-of-range vertices.
    pub fn new<I>(n: usize, edges: I, name: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if !(2..=MAX_VERTICES).contains(&n) {
            return Err(Error::InvalidGraph(format!("vertex count {n} outside 2..={MAX_VERTICES}")));
        }
        let mut adj = vec![0u32; n];
        for (u, v) in edges {
            for w in [u, v] {
                if w == 0 || w > n {
                    return Err(Error::InvalidVertex { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            let (a, b) = (u - 1, v - 1);
            if adj[a] >> b & 1 == 1 {
                return Err(Error::InvalidGraph(format!("duplicate edge {u}-{v}")));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        Ok(Self { n, adj, name: name.into() })
    }

    pub(crate) fn from_adjacency(adj: Vec<u32>, name: impl Into<String>) -> Self {
        Self { n: adj.len(), adj, name: name.into() }
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [], format!("empty-{n}"))
    }

    /// Star with the given (1-indexed) center.
    pub fn star(n: usize, center: usize) -> Result<Self> {
        let edges = (1..=n).filter(|&v| v != center).map(|v| (center.min(v), center.max(v)));
        Self::new(n, edges, format!("star-{n}"))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|v| (v, v + 1)), format!("path-{n}"))
    }

    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph("a ring needs at least 3 vertices".into()));
        }
        Self::new(n, (1..n).map(|v| (v, v + 1)).chain([(1, n)]), format!("ring-{n}"))
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v)));
        Self::new(n, edges, format!("complete-{n}"))
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub(crate) fn adjacency(&self) -> &[u32] {
        &self.adj
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u >= 1 && v >= 1 && u <= self.n && v <= self.n && self.adj[u - 1] >> (v - 1) & 1 == 1
    }

    /// Sorted list of 1-indexed edges `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u] >> v & 1 == 1 {
                    out.push((u + 1, v + 1));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    /// 1-indexed neighbors of 1-indexed vertex `v`.
    pub fn neighbors(&self, v: usize) -> Result<Vec<usize>> {
        self.check_vertex(v)?;
        Ok((0..self.n).filter(|&w| self.adj[v - 1] >> w & 1 == 1).map(|w| w + 1).collect())
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.n {
            Err(Error::InvalidVertex { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn is_connected(&self) -> bool {
        let full = (1u32 << self.n) - 1;
        let mut seen = 1u32;
        let mut frontier = 1u32;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.adj[v] & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen == full
    }

    /// Toggle every edge between pairs of neighbors of vertex `v` (1-indexed).
    pub fn local_complement(&self, v: usize) -> Result<GraphSpec> {
        self.check_vertex(v)?;
        let mut adj = self.adj.clone();
        local_complement_in_place(&mut adj, v - 1);
        Ok(Self { n: self.n, adj, name: self.name.clone() })
    }

    /// Relabel vertices: old vertex `k` (1-indexed) becomes `perm[k-1]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<GraphSpec> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (1..=self.n).collect::<Vec<_>>() {
            return Err(Error::InvalidGraph(format!("{perm:?} is not a permutation of 1..={}", self.n)));
        }
        let edges = self.edges().into_iter().map(|(u, v)| (perm[u - 1], perm[v - 1]));
        GraphSpec::new(self.n, edges, self.name.clone())
    }

    /// H on every vertex, then one CZ per edge in sorted edge order. Gate
    /// sites are 0-indexed positions inside the block.
    pub fn preparation_circuit(&self) -> Vec<Gate> {
        (0..self.n).map(Gate::H).chain(self.edges().into_iter().map(|(u, v)| Gate::Cz(u - 1, v - 1))).collect()
    }

    /// GF(2) rank of the adjacency block between vertices `{1..x}` and `{x+1..n}`.
    pub fn cut_rank(&self, x: usize) -> usize {
        cut_rank_of(&self.adj, x)
    }

    /// GF(2) rank of the adjacency block between an arbitrary vertex subset
    /// (bitmask over 0-indexed vertices) and its complement.
    pub fn subset_cut_rank(&self, subset: u32) -> usize {
        let outside = !subset & ((1u32 << self.n) - 1);
        let rows: Vec<[u64; 1]> =
            (0..self.n).filter(|&v| subset >> v & 1 == 1).map(|v| [u64::from(self.adj[v] & outside)]).collect();
        gf2::rank_of_vectors(self.n, rows.iter().map(|r| &r[..]))
    }

    /// Entropy (bits) of the graph state across every contiguous internal cut,
    /// obtained by preparing the state on a tableau.
    pub fn height_function(&self) -> Result<Vec<usize>> {
        let mut state = StabilizerTableau::new_zero_state(self.n)?;
        state.apply_block(self, 0, Boundary::Open)?;
        (1..self.n).map(|x| state.entropy_bits(Region::new(0, x))).collect()
    }

    pub fn height_by_cut_rank(&self) -> Vec<usize> {
        (1..self.n).map(|x| self.cut_rank(x)).collect()
    }

    pub fn average_height(&self) -> Result<Ratio<usize>> {
        let h = self.height_function()?;
        Ok(Ratio::new(h.iter().sum(), self.n - 1))
    }

    /// Edges crossing each cut `{1..a} | {a+1..n}` for `a = 1..n-1`.
    pub fn cut_edge_counts(&self) -> Vec<usize> {
        (1..self.n)
            .map(|a| {
                let left = (1u32 << a) - 1;
                (0..a).map(|u| (self.adj[u] & !left).count_ones() as usize).sum()
            })
            .collect()
    }

    /// Ordered connectivity: sum over internal cuts of crossing edges.
    pub fn connectivity_wp(&self) -> usize {
        let by_cuts: usize = self.cut_edge_counts().iter().sum();
        debug_assert_eq!(by_cuts, self.wp_by_spans());
        by_cuts
    }

    /// Sum of `v - u` over edges; equal to [`GraphSpec::connectivity_wp`].
    pub fn wp_by_spans(&self) -> usize {
        self.edges().iter().map(|(u, v)| v - u).sum()
    }

    pub fn descriptors(&self) -> Result<BlockDescriptors> {
        let height = self.height_function()?;
        let n = self.n;
        let gamma = Ratio::new(height.iter().sum(), n - 1);
        let is_ame_candidate = height.iter().enumerate().all(|(i, &h)| h == (i + 1).min(n - i - 1));
        Ok(BlockDescriptors {
            height,
            gamma,
            wp: self.connectivity_wp(),
            is_ame_candidate,
            connected: self.is_connected(),
        })
    }

    /// Exhaustive check that every subset of at most `n/2` vertices is
    /// maximally entangled with the rest.
    pub fn is_ame(&self) -> bool {
        let n = self.n;
        (1u32..(1 << n))
            .filter(|s| (s.count_ones() as usize) <= n / 2)
            .all(|s| self.subset_cut_rank(s) == s.count_ones() as usize)
    }

    /// Format edges as `u-v` pairs separated by commas.
    pub fn edge_list_string(&self) -> String {
        self.edges().iter().map(|(u, v)| format!("{u}-{v}")).collect::<Vec<_>>().join(",")
    }

    /// Parse the output of [`GraphSpec::edge_list_string`].
    pub fn parse_edge_list(n: usize, s: &str, name: impl Into<String>) -> Result<Self> {
        let mut edges = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (u, v) = tok
                .split_once('-')
                .ok_or_else(|| Error::InvalidGraph(format!("edge '{tok}' is not of the form u-v")))?;
            let parse =
                |t: &str| t.trim().parse::<usize>().map_err(|_| Error::InvalidGraph(format!("bad vertex '{t}'")));
            edges.push((parse(u)?, parse(v)?));
        }
        GraphSpec::new(n, edges, name)
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={}: {})", self.name, self.n, self.edge_list_string())
    }
}

pub(crate) fn local_complement_in_place(adj: &mut [u32], v: usize) {
    let nb = adj[v];
    let mut rest = nb;
    while rest != 0 {
        let a = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        adj[a] ^= nb & !(1 << a);
    }
}

pub(crate) fn cut_rank_of(adj: &[u32], x: usize) -> usize {
    let mut rows: Vec<u32> = adj[..x].iter().map(|a| a >> x).collect();
    let mut rank = 0;
    for i in 0..rows.len() {
        let r = rows[i];
        if r == 0 {
            continue;
        }
        rank += 1;
        let low = r & r.wrapping_neg();
        for row in rows[i + 1..].iter_mut() {
            if *row & low != 0 {
                *row ^= r;
            }
        }
    }
    rank
}

/// Structural descriptors of a block graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDescriptors {
    /// Entropy in bits across cuts after vertex `1..n-1`.
    pub height: Vec<usize>,
    /// Mean of `height`, exact.
    pub gamma: Ratio<usize>,
    pub wp: usize,
    /// Heights saturate `min(x, n - x)` on every contiguous cut.
    pub is_ame_candidate: bool,
    pub connected: bool,
}

/// Render a ratio as `p/q`, or `p` when integral.
pub fn format_ratio(r: &Ratio<usize>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_ratio(s: &str) -> Option<Ratio<usize>> {
    match s.split_once('/') {
        Some((p, q)) => {
            let q: usize = q.trim().parse().ok()?;
            if q == 0 {
                return None;
            }
            Some(Ratio::new(p.trim().parse().ok()?, q))
        }
        None => Some(Ratio::from_integer(s.trim().parse().ok()?)),
    }
}
