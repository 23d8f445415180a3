//! Loop-aware finite multigraphs.
//!
//! A [`Multigraph`] stores each unordered vertex pair `{u, v}` (with `u <= v`,
//! loops allowed) once, together with its multiplicity. Degrees follow the
//! half-edge convention: a loop contributes 2 to the degree of its vertex.
//!
//! Generators that emit tens of thousands of edges per replicate produce an
//! [`EdgeList`] instead, which keeps the raw endpoint pairs without merging.
//! Both implement [`EdgeSource`], which is all the samplers need.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub mult: u32,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// Read access to a (multi)set of edges over `0..vertex_count()`.
pub trait EdgeSource {
    fn vertex_count(&self) -> usize;

    /// Calls `f(u, v, mult)` once per stored entry. Entries for the same pair
    /// may repeat; consumers must add multiplicities.
    fn for_each_edge<F: FnMut(u32, u32, u32)>(&self, f: F);

    /// Number of non-loop edges counted with multiplicity, `e(G)`.
    fn non_loop_edges(&self) -> u64;
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Multigraph {
    n: usize,
    edges: Vec<Edge>,
}

impl Multigraph {
    pub fn empty(n: usize) -> Self {
        Multigraph {
            n,
            edges: Vec::new(),
        }
    }

    /// Builds a multigraph from `(u, v, mult)` triples. Pairs may appear in
    /// either orientation and more than once; multiplicities are summed and
    /// zero-multiplicity triples are ignored.
    pub fn from_edges<I>(n: usize, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, u32)>,
    {
        let mut edges = Vec::new();
        for (u, v, m) in triples {
            if u as usize >= n || v as usize >= n {
                return invalid(format!("edge {{{u}, {v}}} out of range for {n} vertices"));
            }
            if m == 0 {
                continue;
            }
            let (u, v) = if u <= v { (u, v) } else { (v, u) };
            edges.push(Edge { u, v, mult: m });
        }
        Ok(Self::from_unsorted(n, edges))
    }

    /// Builds a multigraph in which every listed pair contributes one edge.
    pub fn from_pairs(n: usize, pairs: &[(u32, u32)]) -> Result<Self> {
        Self::from_edges(n, pairs.iter().map(|&(u, v)| (u, v, 1)))
    }

    fn from_unsorted(n: usize, mut edges: Vec<Edge>) -> Self {
        edges.sort_unstable_by_key(|e| (e.u, e.v));
        let mut merged: Vec<Edge> = Vec::with_capacity(edges.len());
        for e in edges {
            match merged.last_mut() {
                Some(last) if last.u == e.u && last.v == e.v => last.mult += e.mult,
                _ => merged.push(e),
            }
        }
        Multigraph { n, edges: merged }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    /// Stored entries, sorted by `(u, v)` with `u <= v`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn multiplicity(&self, u: u32, v: u32) -> u32 {
        let key = if u <= v { (u, v) } else { (v, u) };
        self.edges
            .binary_search_by_key(&key, |e| (e.u, e.v))
            .map(|i| self.edges[i].mult)
            .unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.n];
        for e in &self.edges {
            deg[e.u as usize] += e.mult as u64;
            deg[e.v as usize] += e.mult as u64;
        }
        deg
    }

    /// `e(G)`: non-loop edges counted with multiplicity.
    pub fn non_loop_edge_count(&self) -> u64 {
        self.edges
            .iter()
            .filter(|e| !e.is_loop())
            .map(|e| e.mult as u64)
            .sum()
    }

    pub fn loop_count(&self) -> u64 {
        self.edges
            .iter()
            .filter(|e| e.is_loop())
            .map(|e| e.mult as u64)
            .sum()
    }

    /// Sum of all degrees, `2 e(G) + 2 * (loop multiplicity)`.
    pub fn total_half_edges(&self) -> u64 {
        self.edges.iter().map(|e| 2 * e.mult as u64).sum()
    }

    /// Removes degree-0 vertices, keeping the relative order of survivors.
    pub fn drop_isolated(&self) -> Multigraph {
        let mut used = vec![false; self.n];
        for e in &self.edges {
            used[e.u as usize] = true;
            used[e.v as usize] = true;
        }
        let mut relabel = vec![u32::MAX; self.n];
        let mut next = 0u32;
        for (v, &keep) in used.iter().enumerate() {
            if keep {
                relabel[v] = next;
                next += 1;
            }
        }
        // relabeling is monotone, so the sort order is preserved
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                u: relabel[e.u as usize],
                v: relabel[e.v as usize],
                mult: e.mult,
            })
            .collect();
        Multigraph {
            n: next as usize,
            edges,
        }
    }

    /// Every stored multiplicity set to one.
    pub fn erase(&self) -> Multigraph {
        Multigraph {
            n: self.n,
            edges: self.edges.iter().map(|e| Edge { mult: 1, ..*e }).collect(),
        }
    }

    pub fn is_simple(&self) -> bool {
        self.edges.iter().all(|e| e.mult == 1 && !e.is_loop())
    }

    /// Applies a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn permute(&self, perm: &[u32]) -> Result<Multigraph> {
        if perm.len() != self.n {
            return invalid("permutation length does not match vertex count");
        }
        Multigraph::from_edges(
            self.n,
            self.edges
                .iter()
                .map(|e| (perm[e.u as usize], perm[e.v as usize], e.mult)),
        )
    }

    /// Disjoint union; vertices of `other` are shifted past those of `self`.
    pub fn disjoint_union(&self, other: &Multigraph) -> Multigraph {
        let off = self.n as u32;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| Edge {
            u: e.u + off,
            v: e.v + off,
            mult: e.mult,
        }));
        Multigraph {
            n: self.n + other.n,
            edges,
        }
    }

    pub fn to_json_value(&self) -> MultigraphJson {
        MultigraphJson {
            n: self.n,
            edges: self.edges.iter().map(|e| [e.u, e.v, e.mult]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("multigraph serializes")
    }

    pub fn from_json(s: &str) -> Result<Multigraph> {
        let raw: MultigraphJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

impl EdgeSource for Multigraph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    fn for_each_edge<F: FnMut(u32, u32, u32)>(&self, mut f: F) {
        for e in &self.edges {
            f(e.u, e.v, e.mult);
        }
    }

    fn non_loop_edges(&self) -> u64 {
        self.non_loop_edge_count()
    }
}

/// Wire form: `{"n": int, "edges": [[u, v, mult], ...]}` with `u <= v`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MultigraphJson {
    pub n: usize,
    pub edges: Vec<[u32; 3]>,
}

impl TryFrom<MultigraphJson> for Multigraph {
    type Error = crate::Error;

    fn try_from(raw: MultigraphJson) -> Result<Multigraph> {
        if raw.edges.iter().any(|e| e[2] == 0) {
            return invalid("edge multiplicities must be at least 1");
        }
        Multigraph::from_edges(raw.n, raw.edges.iter().map(|e| (e[0], e[1], e[2])))
    }
}

/// Unmerged list of endpoint pairs, one per edge. Cheap to build from a
/// half-edge matching; convert with [`EdgeList::to_multigraph`] when the
/// merged form is needed.
#[derive(Clone, Debug, Default)]
pub struct EdgeList {
    n: usize,
    pairs: Vec<(u32, u32)>,
    non_loop: u64,
}

impl EdgeList {
    pub fn with_capacity(n: usize, cap: usize) -> Self {
        EdgeList {
            n,
            pairs: Vec::with_capacity(cap),
            non_loop: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, u: u32, v: u32) {
        debug_assert!((u as usize) < self.n && (v as usize) < self.n);
        if u != v {
            self.non_loop += 1;
        }
        self.pairs.push((u, v));
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn to_multigraph(&self) -> Multigraph {
        let edges = self
            .pairs
            .iter()
            .map(|&(u, v)| {
                let (u, v) = if u <= v { (u, v) } else { (v, u) };
                Edge { u, v, mult: 1 }
            })
            .collect();
        Multigraph::from_unsorted(self.n, edges)
    }
}

impl EdgeSource for EdgeList {
    fn vertex_count(&self) -> usize {
        self.n
    }

    fn for_each_edge<F: FnMut(u32, u32, u32)>(&self, mut f: F) {
        for &(u, v) in &self.pairs {
            f(u, v, 1);
        }
    }

    fn non_loop_edges(&self) -> u64 {
        self.non_loop
    }
}

/// Compressed adjacency lists (each non-loop edge appears in both rows,
/// loops once in their own row).
#[derive(Clone, Debug)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<(u32, u32)>,
}

impl Adjacency {
    pub fn build<G: EdgeSource>(g: &G) -> Self {
        let n = g.vertex_count();
        let mut counts = vec![0usize; n + 1];
        g.for_each_edge(|u, v, _| {
            counts[u as usize + 1] += 1;
            if u != v {
                counts[v as usize + 1] += 1;
            }
        });
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut targets = vec![(0u32, 0u32); counts[n]];
        g.for_each_edge(|u, v, m| {
            targets[fill[u as usize]] = (v, m);
            fill[u as usize] += 1;
            if u != v {
                targets[fill[v as usize]] = (u, m);
                fill[v as usize] += 1;
            }
        });
        Adjacency {
            offsets: counts,
            targets,
        }
    }

    /// `(neighbor, multiplicity)` entries of `v`; a loop lists `v` itself.
    pub fn neighbors(&self, v: u32) -> &[(u32, u32)] {
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn n_vertices(&self) -> usize {
        self.offsets.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, e: &[(u32, u32, u32)]) -> Multigraph {
        Multigraph::from_edges(n, e.iter().copied()).unwrap()
    }

    #[test]
    fn non_loop_edge_count_examples() {
        assert_eq!(Multigraph::empty(0).non_loop_edge_count(), 0);
        assert_eq!(g(2, &[(0, 1, 3), (0, 0, 2)]).non_loop_edge_count(), 3);
        assert_eq!(
            g(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]).non_loop_edge_count(),
            3
        );
    }

    #[test]
    fn half_edges_follow_loop_convention() {
        assert_eq!(g(1, &[(0, 0, 1)]).total_half_edges(), 2);
        assert_eq!(g(2, &[(0, 1, 1)]).total_half_edges(), 2);
        // degrees (3, 2, 1): loop at 0, edges {0,1}, {1,2}... realized as below
        let h = g(3, &[(0, 0, 1), (0, 1, 1), (1, 2, 1)]);
        assert_eq!(h.degrees(), vec![3, 2, 1]);
        assert_eq!(h.total_half_edges(), 6);
    }

    #[test]
    fn merging_and_orientation() {
        let h = g(3, &[(1, 0, 1), (0, 1, 2), (2, 2, 1), (2, 2, 0)]);
        assert_eq!(h.edges().len(), 2);
        assert_eq!(h.multiplicity(0, 1), 3);
        assert_eq!(h.multiplicity(1, 0), 3);
        assert_eq!(h.multiplicity(2, 2), 1);
        assert_eq!(h.multiplicity(0, 2), 0);
        assert!(Multigraph::from_edges(2, [(0, 2, 1)]).is_err());
    }

    #[test]
    fn drop_isolated_examples() {
        let h = g(5, &[(1, 3, 1)]).drop_isolated();
        assert_eq!(h.n_vertices(), 2);
        assert_eq!(
            h.edges(),
            &[Edge {
                u: 0,
                v: 1,
                mult: 1
            }]
        );

        let tri = g(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        assert_eq!(tri.drop_isolated(), tri);

        let iso = Multigraph::empty(4).drop_isolated();
        assert_eq!(iso.n_vertices(), 0);
        assert!(iso.is_empty());
    }

    #[test]
    fn drop_isolated_keeps_survivor_order() {
        let h = g(6, &[(5, 5, 2), (1, 3, 1), (3, 5, 4)]).drop_isolated();
        // survivors 1, 3, 5 become 0, 1, 2
        assert_eq!(h.multiplicity(0, 1), 1);
        assert_eq!(h.multiplicity(1, 2), 4);
        assert_eq!(h.multiplicity(2, 2), 2);
    }

    #[test]
    fn erase_collapses() {
        let h = g(2, &[(0, 1, 5), (0, 0, 3)]).erase();
        assert_eq!(h.multiplicity(0, 1), 1);
        assert_eq!(h.multiplicity(0, 0), 1);
    }

    #[test]
    fn json_wire_format() {
        let h = g(3, &[(2, 0, 2), (1, 1, 1)]);
        assert_eq!(h.to_json(), r#"{"n":3,"edges":[[0,2,2],[1,1,1]]}"#);
        assert_eq!(Multigraph::from_json(&h.to_json()).unwrap(), h);
        assert!(Multigraph::from_json(r#"{"n":2,"edges":[[0,1,0]]}"#).is_err());
        assert!(Multigraph::from_json(r#"{"n":2,"edges":[[0,7,1]]}"#).is_err());
    }

    #[test]
    fn edge_list_matches_multigraph() {
        let mut el = EdgeList::with_capacity(3, 4);
        el.push(0, 1);
        el.push(1, 0);
        el.push(2, 2);
        assert_eq!(el.non_loop_edges(), 2);
        let m = el.to_multigraph();
        assert_eq!(m.multiplicity(0, 1), 2);
        assert_eq!(m.loop_count(), 1);
    }

    #[test]
    fn adjacency_rows() {
        let h = g(3, &[(0, 1, 2), (1, 1, 1)]);
        let adj = Adjacency::build(&h);
        assert_eq!(adj.neighbors(0), &[(1, 2)]);
        let mut row1 = adj.neighbors(1).to_vec();
        row1.sort();
        assert_eq!(row1, vec![(0, 2), (1, 1)]);
        assert!(adj.neighbors(2).is_empty());
    }
}
