//! Random multigraph models: configuration model, preferential attachment,
//! generalized random graph and bipartite configuration model.
//!
//! Each model has an `*_edges` form returning an unmerged [`EdgeList`] for
//! hot loops, and a form returning a merged [`Multigraph`].

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::dist::{bernoulli, uniform};
use crate::error::{invalid, Error, Result};
use crate::multigraph::{EdgeList, Multigraph};
use crate::rng::Rng;

/// GRG instances with more vertices than this use geometric skipping.
pub const GRG_PAIRWISE_MAX_N: usize = 512;

/// Checks a degree sequence (all positive, even sum) and returns `ℓ_n`.
pub fn half_edge_total(d: &[u32]) -> Result<u64> {
    if let Some(i) = d.iter().position(|&x| x == 0) {
        return invalid(format!("degree of vertex {i} is zero"));
    }
    let l: u64 = d.iter().map(|&x| x as u64).sum();
    if l % 2 == 1 {
        return Err(Error::OddHalfEdgeSum(l));
    }
    Ok(l)
}

fn stubs(d: &[u32], l: u64) -> Vec<u32> {
    let mut s = Vec::with_capacity(l as usize);
    for (v, &k) in d.iter().enumerate() {
        s.extend(std::iter::repeat_n(v as u32, k as usize));
    }
    s
}

/// Uniform perfect matching of the half-edges: shuffle and pair neighbours.
pub fn configuration_model_edges(d: &[u32], rng: &mut Rng) -> Result<EdgeList> {
    let l = half_edge_total(d)?;
    let mut s = stubs(d, l);
    s.shuffle(rng);
    let mut out = EdgeList::with_capacity(d.len(), s.len() / 2);
    for pair in s.chunks_exact(2) {
        out.push(pair[0], pair[1]);
    }
    Ok(out)
}

pub fn configuration_model(d: &[u32], rng: &mut Rng) -> Result<Multigraph> {
    Ok(configuration_model_edges(d, rng)?.to_multigraph())
}

pub fn erase(g: &Multigraph) -> Multigraph {
    g.erase()
}

fn check_weights(w: &[f64], name: &str, allow_zero: bool) -> Result<f64> {
    for (i, &x) in w.iter().enumerate() {
        let ok = x.is_finite() && if allow_zero { x >= 0.0 } else { x > 0.0 };
        if !ok {
            return invalid(format!("{name} weight {i} is {x}"));
        }
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return invalid(format!("{name} weights sum to zero"));
    }
    Ok(total)
}

/// Preferential attachment with simultaneous endpoint draws.
///
/// At step `l` each endpoint is vertex `i` with probability
/// `(d_i(l) + δ_i) / (ℓ_δ + 2l)`; both are drawn before degrees update, and a
/// loop adds 2 to the degree of its vertex.
pub fn preferential_attachment_edges(delta: &[f64], m: u64, rng: &mut Rng) -> Result<EdgeList> {
    let l_delta = check_weights(delta, "δ", true)?;
    let alias = WeightedAliasIndex::new(delta.to_vec())
        .map_err(|e| Error::InvalidArgument(format!("δ weights: {e}")))?;
    // every vertex endpoint ever drawn, so d_i(l) is its multiplicity here
    let mut ends: Vec<u32> = Vec::with_capacity(2 * m as usize);
    let mut out = EdgeList::with_capacity(delta.len(), m as usize);
    let draw = |ends: &Vec<u32>, rng: &mut Rng| -> u32 {
        let total = l_delta + ends.len() as f64;
        if uniform(rng, total) < l_delta || ends.is_empty() {
            alias.sample(rng) as u32
        } else {
            ends[rng.random_range(0..ends.len())]
        }
    };
    for _ in 0..m {
        let u = draw(&ends, rng);
        let v = draw(&ends, rng);
        ends.push(u);
        ends.push(v);
        out.push(u, v);
    }
    Ok(out)
}

pub fn preferential_attachment(delta: &[f64], m: u64, rng: &mut Rng) -> Result<Multigraph> {
    Ok(preferential_attachment_edges(delta, m, rng)?.to_multigraph())
}

/// `p_ij = w_i w_j / (L_n + w_i w_j)`.
#[inline]
pub fn grg_edge_probability(wi: f64, wj: f64, l: f64) -> f64 {
    let x = wi * wj;
    x / (l + x)
}

pub fn generalized_random_graph_edges(w: &[f64], rng: &mut Rng) -> Result<EdgeList> {
    if w.len() <= GRG_PAIRWISE_MAX_N {
        grg_pairwise(w, rng)
    } else {
        grg_skipping(w, rng)
    }
}

pub fn generalized_random_graph(w: &[f64], rng: &mut Rng) -> Result<Multigraph> {
    Ok(generalized_random_graph_edges(w, rng)?.to_multigraph())
}

/// One Bernoulli draw per pair `i < j`.
pub fn grg_pairwise(w: &[f64], rng: &mut Rng) -> Result<EdgeList> {
    if w.is_empty() {
        return Ok(EdgeList::default());
    }
    let l = check_weights(w, "GRG", false)?;
    let mut out = EdgeList::with_capacity(w.len(), 0);
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if bernoulli(rng, grg_edge_probability(w[i], w[j], l)) {
                out.push(i as u32, j as u32);
            }
        }
    }
    Ok(out)
}

/// Geometric skipping over weights sorted in decreasing order: for fixed
/// `i` the probabilities `p_ij` are nonincreasing along the sorted order, so
/// candidates are proposed at the current rate and thinned by the ratio.
pub fn grg_skipping(w: &[f64], rng: &mut Rng) -> Result<EdgeList> {
    if w.is_empty() {
        return Ok(EdgeList::default());
    }
    let l = check_weights(w, "GRG", false)?;
    let n = w.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| w[b as usize].total_cmp(&w[a as usize]).then(a.cmp(&b)));
    let ws: Vec<f64> = order.iter().map(|&v| w[v as usize]).collect();
    let mut out = EdgeList::with_capacity(n, 0);
    for i in 0..n.saturating_sub(1) {
        let mut j = i + 1;
        let mut p = grg_edge_probability(ws[i], ws[j], l);
        while j < n {
            if p <= 0.0 {
                break;
            }
            if p < 1.0 {
                let r: f64 = 1.0 - rng.random::<f64>();
                let skip = (r.ln() / (-p).ln_1p()).floor();
                if skip >= (n - j) as f64 {
                    break;
                }
                j += skip as usize;
            }
            let q = grg_edge_probability(ws[i], ws[j], l);
            if rng.random::<f64>() * p < q {
                let (a, b) = (order[i], order[j]);
                out.push(a.min(b), a.max(b));
            }
            p = q;
            j += 1;
        }
    }
    Ok(out)
}

/// A bipartite multigraph: vertices `0..side1` form side 1, the rest side 2.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteMultigraph {
    pub graph: Multigraph,
    pub side1: usize,
}

impl BipartiteMultigraph {
    pub fn within_side_edges(&self) -> u64 {
        let s = self.side1 as u32;
        self.graph
            .edges()
            .iter()
            .filter(|e| (e.u < s) == (e.v < s))
            .map(|e| e.mult as u64)
            .sum()
    }
}

/// Returns `ℓ_n / 2` after checking the sides balance.
pub fn bipartite_half_total(side1: &[u32], side2: &[u32]) -> Result<u64> {
    for (name, d) in [("side 1", side1), ("side 2", side2)] {
        if let Some(i) = d.iter().position(|&x| x == 0) {
            return invalid(format!("{name} degree of vertex {i} is zero"));
        }
    }
    let s1: u64 = side1.iter().map(|&x| x as u64).sum();
    let s2: u64 = side2.iter().map(|&x| x as u64).sum();
    if s1 != s2 {
        return Err(Error::UnbalancedSides {
            side1: s1,
            side2: s2,
        });
    }
    Ok(s1)
}

/// Side-1 half-edges in order, each paired with a uniformly shuffled side-2
/// half-edge. Vertex `n1 + j` is side-2 vertex `j`.
pub fn bipartite_configuration_model_edges(
    side1: &[u32],
    side2: &[u32],
    rng: &mut Rng,
) -> Result<EdgeList> {
    let half = bipartite_half_total(side1, side2)?;
    let n1 = side1.len() as u32;
    let a = stubs(side1, half);
    let mut b = stubs(side2, half);
    b.shuffle(rng);
    let mut out = EdgeList::with_capacity(side1.len() + side2.len(), half as usize);
    for (&u, &v) in a.iter().zip(&b) {
        out.push(u, n1 + v);
    }
    Ok(out)
}

pub fn bipartite_configuration_model(
    side1: &[u32],
    side2: &[u32],
    rng: &mut Rng,
) -> Result<BipartiteMultigraph> {
    let el = bipartite_configuration_model_edges(side1, side2, rng)?;
    Ok(BipartiteMultigraph {
        graph: el.to_multigraph(),
        side1: side1.len(),
    })
}
