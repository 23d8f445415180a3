//! Canonical keys for small multigraphs.
//!
//! The graph is split into connected components. Each component is encoded
//! as the lexicographically smallest lower-triangular multiplicity matrix
//! over all vertex orders that respect an isomorphism-invariant colour
//! refinement. Interchangeable vertices (twins) are only tried once per
//! position, which keeps stars and cliques cheap. The graph key is the
//! sorted concatenation of its component codes.

use std::fmt;

use crate::error::{Error, Result};
use crate::multigraph::Multigraph;

pub const DEFAULT_VERTEX_LIMIT: usize = 9;

const OVERSIZE_TAG: u8 = 0xFF;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    /// Reserved class for graphs above the canonicalization limit.
    pub fn oversize() -> Self {
        CanonicalKey(vec![OVERSIZE_TAG])
    }

    pub fn is_oversize(&self) -> bool {
        self.0.first() == Some(&OVERSIZE_TAG)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Parse(format!("bad key {s:?}: {e}")))?;
        let key = CanonicalKey(bytes);
        if !key.is_oversize() {
            key.decode()?;
        }
        Ok(key)
    }

    /// The canonical representative of the class, or `None` for OVERSIZE.
    pub fn to_graph(&self) -> Option<Multigraph> {
        if self.is_oversize() {
            return None;
        }
        Some(self.decode().expect("keys are produced by canonical_key"))
    }

    fn decode(&self) -> Result<Multigraph> {
        let bad = || Error::Parse("truncated canonical key".into());
        let mut bytes = self.0.iter().copied();
        let mut triples = Vec::new();
        let mut base = 0u32;
        while let Some(k) = bytes.next() {
            let k = k as u32;
            for i in 0..k {
                for j in 0..=i {
                    let m = read_varint(&mut bytes).ok_or_else(bad)?;
                    if m > 0 {
                        triples.push((base + j, base + i, m));
                    }
                }
            }
            base += k;
        }
        Multigraph::from_edges(base as usize, triples)
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", self.to_hex())
    }
}

fn write_varint(out: &mut Vec<u8>, mut x: u32) {
    loop {
        let b = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

fn read_varint(bytes: &mut impl Iterator<Item = u8>) -> Option<u32> {
    let mut x = 0u32;
    let mut shift = 0;
    loop {
        let b = bytes.next()?;
        x |= ((b & 0x7f) as u32) << shift;
        if b & 0x80 == 0 {
            return Some(x);
        }
        shift += 7;
        if shift > 28 {
            return None;
        }
    }
}

pub fn canonical_key(g: &Multigraph) -> Result<CanonicalKey> {
    canonical_key_with_limit(g, DEFAULT_VERTEX_LIMIT)
}

pub fn canonical_key_with_limit(g: &Multigraph, limit: usize) -> Result<CanonicalKey> {
    let n = g.n_vertices();
    if n > limit || n > 254 {
        return Err(Error::TooLargeForCanonicalization {
            vertices: n,
            limit: limit.min(254),
        });
    }
    let mut mat = vec![0u32; n * n];
    for e in g.edges() {
        let (u, v) = (e.u as usize, e.v as usize);
        mat[u * n + v] = e.mult;
        mat[v * n + u] = e.mult;
    }
    let mut codes: Vec<Vec<u32>> = components(n, &mat)
        .into_iter()
        .map(|comp| component_code(n, &mat, &comp))
        .collect();
    codes.sort_unstable();
    let mut out = Vec::new();
    for code in codes {
        out.push(code[0] as u8);
        for &m in &code[1..] {
            write_varint(&mut out, m);
        }
    }
    Ok(CanonicalKey(out))
}

/// Key, or the OVERSIZE key when the graph is above `limit`.
pub fn key_or_oversize(g: &Multigraph, limit: usize) -> CanonicalKey {
    canonical_key_with_limit(g, limit).unwrap_or_else(|_| CanonicalKey::oversize())
}

fn components(n: usize, mat: &[u32]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            for v in 0..n {
                if !seen[v] && mat[u * n + v] > 0 {
                    seen[v] = true;
                    comp.push(v);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// `[k, rows...]` where row `i` lists multiplicities to positions `0..=i`.
fn component_code(n: usize, mat: &[u32], comp: &[usize]) -> Vec<u32> {
    let k = comp.len();
    let m = |a: usize, b: usize| mat[comp[a] * n + comp[b]];

    // colour refinement on local indices
    let mut colour: Vec<usize> = vec![0; k];
    let mut n_colours = 0;
    let mut sigs: Vec<Vec<u32>> = vec![Vec::new(); k];
    loop {
        for (a, sig) in sigs.iter_mut().enumerate() {
            let mut nb: Vec<(u32, u32)> = (0..k)
                .filter(|&b| b != a && m(a, b) > 0)
                .map(|b| (colour[b] as u32, m(a, b)))
                .collect();
            nb.sort_unstable();
            sig.clear();
            sig.push(colour[a] as u32);
            sig.push(m(a, a));
            for (c, mu) in nb {
                sig.push(c);
                sig.push(mu);
            }
        }
        let mut distinct: Vec<&Vec<u32>> = sigs.iter().collect();
        distinct.sort_unstable();
        distinct.dedup();
        let next: Vec<usize> = sigs
            .iter()
            .map(|s| distinct.binary_search(&s).unwrap())
            .collect();
        let stable = distinct.len() == n_colours;
        n_colours = distinct.len();
        colour = next;
        if stable {
            break;
        }
    }

    // positions grouped by colour rank
    let mut slots: Vec<usize> = (0..k).map(|a| colour[a]).collect();
    slots.sort_unstable();

    // twin classes: swapping two twins is an automorphism
    let mut twin = vec![usize::MAX; k];
    for a in 0..k {
        if twin[a] != usize::MAX {
            continue;
        }
        twin[a] = a;
        for b in a + 1..k {
            if twin[b] == usize::MAX
                && colour[a] == colour[b]
                && m(a, a) == m(b, b)
                && (0..k).all(|w| w == a || w == b || m(a, w) == m(b, w))
            {
                twin[b] = a;
            }
        }
    }

    let mut search = Search {
        k,
        mat: (0..k * k).map(|i| m(i / k, i % k)).collect(),
        colour,
        slots,
        twin,
        order: Vec::with_capacity(k),
        used: vec![false; k],
        best: Vec::new(),
        cur: Vec::new(),
    };
    search.dfs(false);
    let mut code = Vec::with_capacity(1 + search.best.len());
    code.push(k as u32);
    code.extend(search.best);
    code
}

struct Search {
    k: usize,
    mat: Vec<u32>,
    colour: Vec<usize>,
    slots: Vec<usize>,
    twin: Vec<usize>,
    order: Vec<usize>,
    used: Vec<bool>,
    best: Vec<u32>,
    cur: Vec<u32>,
}

impl Search {
    /// `below`: current prefix is already strictly smaller than `best`.
    /// Returns true when `best` was replaced.
    fn dfs(&mut self, below: bool) -> bool {
        let i = self.order.len();
        if i == self.k {
            if below || self.best.is_empty() {
                self.best = self.cur.clone();
                return true;
            }
            return false;
        }
        let mut below = below;
        let mut updated = false;
        let row_start = i * (i + 1) / 2;
        for v in 0..self.k {
            if self.used[v] || self.colour[v] != self.slots[i] {
                continue;
            }
            // only the first unused member of a twin class
            if (0..v).any(|w| !self.used[w] && self.twin[w] == self.twin[v]) {
                continue;
            }
            let mark = self.cur.len();
            for &p in &self.order {
                self.cur.push(self.mat[v * self.k + p]);
            }
            self.cur.push(self.mat[v * self.k + v]);
            let mut child_below = below || self.best.is_empty();
            if !child_below {
                match self.cur[row_start..].cmp(&self.best[row_start..row_start + i + 1]) {
                    std::cmp::Ordering::Greater => {
                        self.cur.truncate(mark);
                        continue;
                    }
                    std::cmp::Ordering::Less => child_below = true,
                    std::cmp::Ordering::Equal => {}
                }
            }
            self.used[v] = true;
            self.order.push(v);
            if self.dfs(child_below) {
                updated = true;
                // the new best extends the current prefix
                below = false;
            }
            self.order.pop();
            self.used[v] = false;
            self.cur.truncate(mark);
        }
        updated
    }
}
