//! p-sampling, random labeling and extraction of graphs from labeled point
//! configurations.

use std::io::{BufRead, Write};

use crate::dist::{bernoulli_subset, uniform};
use crate::error::{invalid, Error, Result};
use crate::multigraph::{EdgeSource, Multigraph};
use crate::rng::Rng;

const LABEL_REDRAWS: usize = 16;

/// Induced multigraph on a Bernoulli(`p`) vertex subset, isolated vertices
/// removed. Survivors keep their relative order.
pub fn p_sample<G: EdgeSource>(g: &G, p: f64, rng: &mut Rng) -> Result<Multigraph> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("sampling probability {p} outside [0, 1]"));
    }
    let n = g.vertex_count();
    let kept = bernoulli_subset(rng, n, p);
    Ok(induced(g, &kept))
}

/// Induced multigraph on the sorted vertex list `kept`, isolated removed.
pub fn induced<G: EdgeSource>(g: &G, kept: &[usize]) -> Multigraph {
    if kept.is_empty() {
        return Multigraph::empty(0);
    }
    let n = g.vertex_count();
    let mut local = vec![u32::MAX; n];
    for (i, &v) in kept.iter().enumerate() {
        local[v] = i as u32;
    }
    let mut triples = Vec::new();
    g.for_each_edge(|u, v, m| {
        let (a, b) = (local[u as usize], local[v as usize]);
        if a != u32::MAX && b != u32::MAX {
            triples.push((a, b, m));
        }
    });
    Multigraph::from_edges(kept.len(), triples)
        .expect("local indices are in range")
        .drop_isolated()
}

/// `t / sqrt(2 e(G))`, checked to be a probability.
pub fn canonical_rate<G: EdgeSource>(g: &G, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return invalid(format!("t = {t} must be a nonnegative real"));
    }
    let e = g.non_loop_edges();
    if e == 0 {
        return Err(Error::NoEdges);
    }
    let rate = t / (2.0 * e as f64).sqrt();
    if rate > 1.0 {
        return Err(Error::RateExceedsOne { rate, t, edges: e });
    }
    Ok(rate)
}

pub fn canonical_sample<G: EdgeSource>(g: &G, t: f64, rng: &mut Rng) -> Result<Multigraph> {
    let p = canonical_rate(g, t)?;
    p_sample(g, p, rng)
}

/// Half-open interval `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
}

fn in_union(set: &[Interval], x: f64) -> bool {
    set.iter().any(|i| i.contains(x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledPoint {
    pub x: f64,
    pub y: f64,
    pub mult: u32,
}

/// Symmetric integer-valued point measure on `[0, window)²`, one stored
/// point per unordered pair of labels (`x <= y`).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AdjacencyMeasure {
    pub window: f64,
    pub points: Vec<LabeledPoint>,
}

impl AdjacencyMeasure {
    pub fn new(window: f64) -> Self {
        AdjacencyMeasure {
            window,
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, x: f64, y: f64, mult: u32) {
        if mult == 0 {
            return;
        }
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        self.points.push(LabeledPoint { x, y, mult });
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `ξ(A × B)` with the symmetric counting rule.
    pub fn count(&self, a: &[Interval], b: &[Interval]) -> u64 {
        let mut total = 0u64;
        for p in &self.points {
            let m = p.mult as u64;
            if p.x == p.y {
                if in_union(a, p.x) && in_union(b, p.x) {
                    total += m;
                }
            } else {
                if in_union(a, p.x) && in_union(b, p.y) {
                    total += m;
                }
                if in_union(a, p.y) && in_union(b, p.x) {
                    total += m;
                }
            }
        }
        total
    }

    /// Restricts to `[0, t)²` and reads off the unlabeled multigraph: every
    /// distinct label becomes a vertex.
    pub fn extract_graph(&self, t: f64) -> Multigraph {
        let kept: Vec<&LabeledPoint> = self.points.iter().filter(|p| p.y < t).collect();
        let mut labels: Vec<f64> = kept.iter().flat_map(|p| [p.x, p.y]).collect();
        labels.sort_by(f64::total_cmp);
        labels.dedup();
        let idx = |x: f64| labels.binary_search_by(|l| l.total_cmp(&x)).unwrap() as u32;
        Multigraph::from_edges(
            labels.len(),
            kept.iter().map(|p| (idx(p.x), idx(p.y), p.mult)),
        )
        .expect("label indices are in range")
    }

    /// Line `window,<s>` then `x,y,mult` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
        out.write_record(["window", &self.window.to_string()])?;
        out.write_record(["x", "y", "mult"])?;
        for p in &self.points {
            out.write_record([p.x.to_string(), p.y.to_string(), p.mult.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<AdjacencyMeasure> {
        let mut rd = csv::ReaderBuilder::new()
            .flexible(true)
            .has_headers(false)
            .from_reader(r);
        let mut records = rd.records();
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
        };
        let first = records
            .next()
            .ok_or_else(|| Error::Parse("empty file".into()))??;
        if first.get(0) != Some("window") || first.len() != 2 {
            return Err(Error::Parse("expected `window,<size>` line".into()));
        }
        let mut xi = AdjacencyMeasure::new(parse(&first[1])?);
        let header = records
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))??;
        if header.iter().collect::<Vec<_>>() != ["x", "y", "mult"] {
            return Err(Error::Parse("expected `x,y,mult` header".into()));
        }
        for rec in records {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!("row with {} fields", rec.len())));
            }
            let mult = rec[2]
                .trim()
                .parse::<u32>()
                .map_err(|e| Error::Parse(format!("{:?}: {e}", &rec[2])))?;
            xi.push(parse(&rec[0])?, parse(&rec[1])?, mult);
        }
        Ok(xi)
    }
}

/// Distinct labels uniform on `[0, s)`; redraws on an exact collision.
pub fn distinct_labels(n: usize, s: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    for _ in 0..LABEL_REDRAWS {
        let labels: Vec<f64> = (0..n).map(|_| uniform(rng, s)).collect();
        let mut sorted = labels.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[0] != w[1]) {
            return Ok(labels);
        }
    }
    Err(Error::CollisionRetry(LABEL_REDRAWS))
}

/// Independent uniform `[0, s)` labels per vertex; one point per stored
/// edge entry (diagonal for loops).
pub fn label<G: EdgeSource>(g: &G, s: f64, rng: &mut Rng) -> Result<AdjacencyMeasure> {
    if !(s > 0.0) || !s.is_finite() {
        return invalid(format!("window {s} must be positive"));
    }
    let labels = distinct_labels(g.vertex_count(), s, rng)?;
    let mut xi = AdjacencyMeasure::new(s);
    g.for_each_edge(|u, v, m| xi.push(labels[u as usize], labels[v as usize], m));
    Ok(xi)
}

/// Labeling at the canonical window `sqrt(2 e(G))`.
pub fn label_canonical<G: EdgeSource>(g: &G, rng: &mut Rng) -> Result<AdjacencyMeasure> {
    let e = g.non_loop_edges();
    if e == 0 {
        return Err(Error::NoEdges);
    }
    label(g, (2.0 * e as f64).sqrt(), rng)
}
