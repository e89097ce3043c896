//! Local complementation orbits and classification of graphs into
//! local-Clifford equivalence classes.

use crate::graph::{cut_rank_of, local_complement_in_place, GraphSpec};
use crate::{Error, Result};
use std::collections::{HashSet, VecDeque};

/// Largest vertex count for orbit enumeration.
pub const MAX_ORBIT_VERTICES: usize = 12;
/// Largest vertex count for permutation canonical forms.
pub const MAX_CANONICAL_VERTICES: usize = 8;
/// Largest vertex count for exhaustive class enumeration.
pub const MAX_ENUMERATION_VERTICES: usize = 7;

fn adjacency_key(adj: &[u32]) -> u128 {
    let n = adj.len();
    let mut key = 0u128;
    let mut bit = 0;
    for (u, row) in adj.iter().enumerate() {
        for v in u + 1..n {
            if row >> v & 1 == 1 {
                key |= 1 << bit;
            }
            bit += 1;
        }
    }
    key
}

/// Breadth-first closure of `g` under local complementation at every vertex.
/// The result is the labeled orbit, starting with `g` itself.
pub fn lc_orbit(g: &GraphSpec, max_size: usize) -> Result<Vec<GraphSpec>> {
    let n = g.n_vertices();
    if n > MAX_ORBIT_VERTICES {
        return Err(Error::Unsupported(format!("orbit enumeration limited to n <= {MAX_ORBIT_VERTICES}")));
    }
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let mut orbit = Vec::new();
    seen.insert(adjacency_key(g.adjacency()));
    queue.push_back(g.adjacency().to_vec());
    while let Some(adj) = queue.pop_front() {
        if orbit.len() == max_size {
            return Err(Error::OrbitOverflow(max_size));
        }
        for v in 0..n {
            let mut next = adj.clone();
            local_complement_in_place(&mut next, v);
            if seen.insert(adjacency_key(&next)) {
                queue.push_back(next);
            }
        }
        orbit.push(GraphSpec::from_adjacency(adj, g.name()));
    }
    Ok(orbit)
}

/// Minimal edge-bitstring over all vertex relabelings.
pub fn canonical_form(g: &GraphSpec) -> Result<u128> {
    let n = g.n_vertices();
    if n > MAX_CANONICAL_VERTICES {
        return Err(Error::Unsupported(format!("canonical forms limited to n <= {MAX_CANONICAL_VERTICES}")));
    }
    let adj = g.adjacency();
    let mut best = u128::MAX;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut relabeled = vec![0u32; n];
    let mut visit = |perm: &[usize]| {
        for (u, slot) in relabeled.iter_mut().enumerate() {
            *slot = 0;
            let _ = u;
        }
        for u in 0..n {
            let mut row = adj[u];
            while row != 0 {
                let v = row.trailing_zeros() as usize;
                row &= row - 1;
                relabeled[perm[u]] |= 1 << perm[v];
            }
        }
        best = best.min(adjacency_key(&relabeled));
    };
    // Heap's algorithm
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

fn orbit_limit(n: usize) -> usize {
    // Orbits of labeled graphs are bounded by the number of labeled graphs.
    1usize << (n * (n - 1) / 2).min(24)
}

/// Whether `g2` lies in the labeled LC orbit of `g1`.
pub fn lc_equivalent_labeled(g1: &GraphSpec, g2: &GraphSpec) -> Result<bool> {
    if g1.n_vertices() != g2.n_vertices() {
        return Err(Error::VertexCountMismatch(g1.n_vertices(), g2.n_vertices()));
    }
    let target = adjacency_key(g2.adjacency());
    let orbit = lc_orbit(g1, orbit_limit(g1.n_vertices()))?;
    Ok(orbit.iter().any(|g| adjacency_key(g.adjacency()) == target))
}

/// Whether `g2` is LC-equivalent to `g1` up to a relabeling of vertices.
pub fn lc_equivalent(g1: &GraphSpec, g2: &GraphSpec) -> Result<bool> {
    if g1.n_vertices() != g2.n_vertices() {
        return Err(Error::VertexCountMismatch(g1.n_vertices(), g2.n_vertices()));
    }
    let target = canonical_form(g2)?;
    for g in lc_orbit(g1, orbit_limit(g1.n_vertices()))? {
        if canonical_form(&g)? == target {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Edge-code layout for exhaustive enumeration: bit `k` is pair `pairs[k]`.
struct PairCodec {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairCodec {
    fn new(n: usize) -> Self {
        let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self { n, pairs }
    }

    fn decode(&self, code: u32, adj: &mut [u32]) {
        adj.iter_mut().for_each(|a| *a = 0);
        for (k, &(u, v)) in self.pairs.iter().enumerate() {
            if code >> k & 1 == 1 {
                adj[u] |= 1 << v;
                adj[v] |= 1 << u;
            }
        }
    }

    fn encode(&self, adj: &[u32]) -> u32 {
        self.pairs.iter().enumerate().filter(|(_, &(u, v))| adj[u] >> v & 1 == 1).fold(0, |acc, (k, _)| acc | 1 << k)
    }

    fn graph(&self, code: u32) -> GraphSpec {
        let mut adj = vec![0u32; self.n];
        self.decode(code, &mut adj);
        GraphSpec::from_adjacency(adj, "")
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        parent[hi as usize] = lo;
    }
}

/// One unlabeled LC class of connected graphs: every labeled member.
#[derive(Clone, Debug)]
pub struct LcClass {
    pub n: usize,
    members: Vec<u32>,
    codec_pairs: Vec<(usize, usize)>,
}

impl LcClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = GraphSpec> + '_ {
        let codec = PairCodec { n: self.n, pairs: self.codec_pairs.clone() };
        self.members.iter().map(move |&c| codec.graph(c))
    }

    /// Member with fewest edges, ties broken by the lexicographically
    /// smallest sorted edge list.
    pub fn simplest_member(&self) -> GraphSpec {
        pick_simplest(self.members())
    }
}

pub(crate) fn pick_simplest(graphs: impl Iterator<Item = GraphSpec>) -> GraphSpec {
    graphs
        .min_by(|a, b| a.edge_count().cmp(&b.edge_count()).then_with(|| a.edges().cmp(&b.edges())))
        .expect("nonempty class")
}

/// Exhaustive grouping of every connected labeled graph on `n` vertices
/// into unlabeled LC classes, via union-find over local complementations and
/// adjacent transpositions. Classes are ordered by their smallest member code.
pub fn enumerate_lc_classes(n: usize) -> Result<Vec<LcClass>> {
    if !(2..=MAX_ENUMERATION_VERTICES).contains(&n) {
        return Err(Error::Unsupported(format!("class enumeration supports 2 <= n <= {MAX_ENUMERATION_VERTICES}")));
    }
    let codec = PairCodec::new(n);
    let total = 1u32 << codec.pairs.len();
    let mut parent: Vec<u32> = (0..total).collect();
    let mut adj = vec![0u32; n];
    let mut scratch = vec![0u32; n];
    for code in 0..total {
        codec.decode(code, &mut adj);
        for v in 0..n {
            scratch.copy_from_slice(&adj);
            local_complement_in_place(&mut scratch, v);
            union(&mut parent, code, codec.encode(&scratch));
        }
        for i in 0..n - 1 {
            swap_vertices(&adj, i, i + 1, &mut scratch);
            union(&mut parent, code, codec.encode(&scratch));
        }
    }
    let mut by_root: std::collections::BTreeMap<u32, Vec<u32>> = Default::default();
    for code in 0..total {
        codec.decode(code, &mut adj);
        if is_connected_adj(&adj) {
            let root = find(&mut parent, code);
            by_root.entry(root).or_default().push(code);
        }
    }
    Ok(by_root.into_values().map(|members| LcClass { n, members, codec_pairs: codec.pairs.clone() }).collect())
}

fn swap_vertices(adj: &[u32], a: usize, b: usize, out: &mut [u32]) {
    let swap_bits = |row: u32| {
        let (ba, bb) = (row >> a & 1, row >> b & 1);
        let cleared = row & !(1 << a) & !(1 << b);
        cleared | ba << b | bb << a
    };
    for (v, slot) in out.iter_mut().enumerate() {
        let src = if v == a {
            b
        } else if v == b {
            a
        } else {
            v
        };
        *slot = swap_bits(adj[src]);
    }
}

fn is_connected_adj(adj: &[u32]) -> bool {
    let full = (1u32 << adj.len()) - 1;
    let (mut seen, mut frontier) = (1u32, 1u32);
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = adj[v] & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen == full
}

/// `(sum of heights, wp)` for a labeled member, from cut ranks and spans.
pub(crate) fn fingerprint_of(adj: &[u32]) -> (usize, usize) {
    let n = adj.len();
    let heights: usize = (1..n).map(|x| cut_rank_of(adj, x)).sum();
    let mut wp = 0;
    for (u, a) in adj.iter().enumerate() {
        let mut row = a >> (u + 1);
        while row != 0 {
            let d = row.trailing_zeros() as usize + 1;
            row &= row - 1;
            wp += d;
        }
    }
    (heights, wp)
}

impl LcClass {
    /// Distinct `(sum of heights, wp)` pairs realized by labeled members.
    pub fn fingerprints(&self) -> std::collections::BTreeSet<(usize, usize)> {
        let codec = PairCodec { n: self.n, pairs: self.codec_pairs.clone() };
        let mut adj = vec![0u32; self.n];
        self.members
            .iter()
            .map(|&c| {
                codec.decode(c, &mut adj);
                fingerprint_of(&adj)
            })
            .collect()
    }

    /// Labeled members whose fingerprint equals `(height_sum, wp)`.
    pub fn members_with(&self, height_sum: usize, wp: usize) -> Vec<GraphSpec> {
        let codec = PairCodec { n: self.n, pairs: self.codec_pairs.clone() };
        let mut adj = vec![0u32; self.n];
        self.members
            .iter()
            .filter(|&&c| {
                codec.decode(c, &mut adj);
                fingerprint_of(&adj) == (height_sum, wp)
            })
            .map(|&c| codec.graph(c))
            .collect()
    }

    pub fn contains(&self, g: &GraphSpec) -> bool {
        if g.n_vertices() != self.n {
            return false;
        }
        let codec = PairCodec { n: self.n, pairs: self.codec_pairs.clone() };
        self.members.binary_search(&codec.encode(g.adjacency())).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_orbit() {
        let g = GraphSpec::new(2, [(1, 2)], "bell").unwrap();
        assert_eq!(lc_orbit(&g, 10).unwrap().len(), 1);
    }

    #[test]
    fn triangle_orbit() {
        let tri = GraphSpec::ring(3).unwrap();
        let orbit = lc_orbit(&tri, 100).unwrap();
        let mut edge_sets: Vec<_> = orbit.iter().map(|g| g.edges()).collect();
        edge_sets.sort();
        // three labeled paths plus the triangle
        assert_eq!(
            edge_sets,
            vec![vec![(1, 2), (1, 3)], vec![(1, 2), (1, 3), (2, 3)], vec![(1, 2), (2, 3)], vec![(1, 3), (2, 3)],]
        );
    }

    #[test]
    fn orbit_overflow_is_reported() {
        let g = GraphSpec::ring(5).unwrap();
        assert!(matches!(lc_orbit(&g, 2), Err(Error::OrbitOverflow(2))));
    }

    #[test]
    fn ring5_and_star5_are_distinct_classes() {
        let ring = GraphSpec::ring(5).unwrap();
        let star = GraphSpec::star(5, 1).unwrap();
        let orbit = lc_orbit(&ring, 1 << 12).unwrap();
        assert!(!orbit.iter().any(|g| g.edges() == star.edges()));
        assert!(!lc_equivalent(&ring, &star).unwrap());
        assert!(!lc_equivalent(&GraphSpec::path(5).unwrap(), &star).unwrap());
    }

    #[test]
    fn equivalence_notions() {
        let g = GraphSpec::path(5).unwrap();
        let lc = g.local_complement(3).unwrap();
        assert!(lc_equivalent_labeled(&g, &lc).unwrap());
        assert!(lc_equivalent(&g, &lc).unwrap());
        let relabeled = g.relabel(&[3, 1, 5, 2, 4]).unwrap();
        assert!(lc_equivalent(&g, &relabeled).unwrap());
        assert!(!lc_equivalent_labeled(&g, &relabeled).unwrap());
        let star4 = GraphSpec::star(4, 1).unwrap();
        assert!(matches!(lc_equivalent(&g, &star4), Err(Error::VertexCountMismatch(5, 4))));
    }

    #[test]
    fn canonical_form_is_permutation_invariant() {
        let g = GraphSpec::new(6, [(1, 2), (2, 3), (3, 4), (1, 5), (5, 6), (2, 6)], "g").unwrap();
        let c = canonical_form(&g).unwrap();
        for perm in [[2, 1, 3, 4, 5, 6], [6, 5, 4, 3, 2, 1], [3, 6, 1, 5, 2, 4]] {
            assert_eq!(canonical_form(&g.relabel(&perm).unwrap()).unwrap(), c);
        }
        assert_ne!(canonical_form(&GraphSpec::path(6).unwrap()).unwrap(), c);
    }

    #[test]
    fn small_class_counts() {
        assert_eq!(enumerate_lc_classes(2).unwrap().len(), 1);
        assert_eq!(enumerate_lc_classes(3).unwrap().len(), 1);
        assert_eq!(enumerate_lc_classes(4).unwrap().len(), 2);
        assert_eq!(enumerate_lc_classes(5).unwrap().len(), 4);
        assert!(enumerate_lc_classes(8).is_err());
    }

    #[test]
    fn class_members_agree_with_orbit_closure() {
        let classes = enumerate_lc_classes(5).unwrap();
        let ring = GraphSpec::ring(5).unwrap();
        let home = classes.iter().position(|c| c.contains(&ring)).unwrap();
        for g in lc_orbit(&ring, 1 << 12).unwrap() {
            assert!(classes[home].contains(&g));
        }
        let star = GraphSpec::star(5, 1).unwrap();
        assert!(!classes[home].contains(&star));
    }
}
