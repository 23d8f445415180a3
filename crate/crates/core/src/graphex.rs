//! Multigraphexes `(W, S, I)`: parametric families, validation, sampling of
//! the graphex process and rescaling.
//!
//! Rank-one variants store a discrete measure `ρ`; their latent weight at
//! feature `x` is `ρ̄⁻¹(√c x)` where `c` collects the variant's own constant
//! and any rescaling.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dist::{bernoulli, poisson, uniform};
use crate::error::{invalid, Error, Result};
use crate::generators::{bipartite_half_total, half_edge_total};
use crate::measures::{empirical_degree_measure, DiscreteMeasure, MeasureJson};
use crate::multigraph::Multigraph;
use crate::rng::Rng;
use crate::sampling::{distinct_labels, AdjacencyMeasure};

pub const DEFAULT_HUB_THRESHOLD: f64 = 0.1;
pub const DEFAULT_TRUNCATION_BUDGET: f64 = 1e-3;
const MAX_PMF_MULTIPLICITY: u32 = 100_000;

fn ln_factorial(k: u32) -> f64 {
    if k < 256 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        let n = k as f64;
        n * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI * n).ln() + 1.0 / (12.0 * n)
            - 1.0 / (360.0 * n * n * n)
    }
}

/// `p(k; λ) = e^{-λ} λ^k / k!`, evaluated in log space.
pub fn poisson_pmf(k: u32, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * lambda.ln() - lambda - ln_factorial(k)).exp()
}

/// Edge law between two latent vertices of a rank-one graphex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    /// Poisson(`uv`) multi-edges, Poisson(`u²/2`) loops.
    Poisson,
    /// One edge with probability `1 - e^{-uv}`, loops `1 - e^{-u²/2}`.
    Erased,
    /// One edge with probability `uv / (1 + uv)`, no loops.
    Grg,
}

impl Link {
    /// `1 - W(·,·,0)` off the diagonal.
    fn edge_prob(self, uv: f64) -> f64 {
        match self {
            Link::Poisson | Link::Erased => -(-uv).exp_m1(),
            Link::Grg => uv / (1.0 + uv),
        }
    }

    /// `1 - W(x,x,0)`.
    fn loop_prob(self, u: f64) -> f64 {
        match self {
            Link::Poisson | Link::Erased => -(-u * u / 2.0).exp_m1(),
            Link::Grg => 0.0,
        }
    }

    fn pmf(self, k: u32, uv: f64) -> f64 {
        match self {
            Link::Poisson => poisson_pmf(k, uv),
            Link::Erased | Link::Grg => {
                let p = self.edge_prob(uv);
                match k {
                    0 => 1.0 - p,
                    1 => p,
                    _ => 0.0,
                }
            }
        }
    }

    fn loop_pmf(self, k: u32, u: f64) -> f64 {
        match self {
            Link::Poisson => poisson_pmf(k, u * u / 2.0),
            _ => {
                let p = self.loop_prob(u);
                match k {
                    0 => 1.0 - p,
                    1 => p,
                    _ => 0.0,
                }
            }
        }
    }

    fn draw_edges(self, rng: &mut Rng, uv: f64) -> u32 {
        match self {
            Link::Poisson => poisson(rng, uv) as u32,
            _ => bernoulli(rng, self.edge_prob(uv)) as u32,
        }
    }

    fn draw_loops(self, rng: &mut Rng, u: f64) -> u32 {
        match self {
            Link::Poisson => poisson(rng, u * u / 2.0) as u32,
            Link::Erased => bernoulli(rng, self.loop_prob(u)) as u32,
            Link::Grg => 0,
        }
    }
}

pub type KernelFn = Arc<dyn Fn(f64, f64, u32) -> f64 + Send + Sync>;
pub type StarFn = Arc<dyn Fn(f64, u32) -> f64 + Send + Sync>;

/// Closure-defined multigraphex sampled on features in `[0, feature_cutoff)`.
///
/// `tail_bound` bounds the edge, loop and star mass carried by features
/// beyond the cutoff, `∫_{x > cutoff} (μ_W(x) + 1 - W(x,x,0) + min(ΣS(x,·), 1)) dx`.
/// Without it, validation cannot certify the integrability conditions and
/// sampling refuses to truncate.
#[derive(Clone)]
pub struct Generic {
    pub w: KernelFn,
    pub s: StarFn,
    pub star_max_mult: u32,
    pub dust: Vec<f64>,
    pub feature_cutoff: f64,
    pub tail_bound: Option<f64>,
    pub budget: f64,
    spec: Option<KernelSpec>,
}

impl Generic {
    pub fn new(w: KernelFn, feature_cutoff: f64, tail_bound: Option<f64>) -> Self {
        Generic {
            w,
            s: Arc::new(|_, _| 0.0),
            star_max_mult: 0,
            dust: Vec::new(),
            feature_cutoff,
            tail_bound,
            budget: DEFAULT_TRUNCATION_BUDGET,
            spec: None,
        }
    }

    pub fn with_star(mut self, s: StarFn, max_mult: u32) -> Self {
        self.s = s;
        self.star_max_mult = max_mult;
        self
    }

    pub fn with_dust(mut self, dust: Vec<f64>) -> Self {
        self.dust = dust;
        self
    }

    pub fn from_spec(spec: &KernelSpec, feature_cutoff: f64, dust: Vec<f64>) -> Result<Self> {
        let (w, tail): (KernelFn, Option<f64>) = match *spec {
            KernelSpec::Constant { p, support } => {
                if !(0.0..=1.0).contains(&p) {
                    return invalid(format!("constant kernel probability {p} outside [0, 1]"));
                }
                let lim = support.unwrap_or(f64::INFINITY);
                let w: KernelFn = Arc::new(move |x, y, k| {
                    let q = if x < lim && y < lim { p } else { 0.0 };
                    match k {
                        0 => 1.0 - q,
                        1 => q,
                        _ => 0.0,
                    }
                });
                let tail = match support {
                    Some(s) if feature_cutoff >= s => Some(0.0),
                    Some(s) => Some(p * s * (s - feature_cutoff) + p * (s - feature_cutoff)),
                    None if p == 0.0 => Some(0.0),
                    None => None,
                };
                (w, tail)
            }
            KernelSpec::Exponential { rate, decay } => {
                if !(0.0..=1.0).contains(&rate) || !(decay > 0.0) {
                    return invalid("exponential kernel needs rate in [0, 1] and decay > 0");
                }
                let w: KernelFn = Arc::new(move |x, y, k| {
                    let q = rate * (-decay * (x + y)).exp();
                    match k {
                        0 => 1.0 - q,
                        1 => q,
                        _ => 0.0,
                    }
                });
                let c = feature_cutoff;
                let tail = rate * (-decay * c).exp() / (decay * decay)
                    + rate * (-2.0 * decay * c).exp() / (2.0 * decay);
                (w, Some(tail))
            }
        };
        if dust.iter().any(|&i| !(i >= 0.0 && i.is_finite())) {
            return invalid("dust rates must be nonnegative");
        }
        let mut g = Generic::new(w, feature_cutoff, tail).with_dust(dust);
        g.spec = Some(spec.clone());
        Ok(g)
    }
}

/// JSON-expressible kernels for the generic variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    /// `W(x,y,1) = p` on `[0, support)²` (everywhere when `support` is absent).
    Constant { p: f64, support: Option<f64> },
    /// `W(x,y,1) = rate · e^{-decay (x + y)}`.
    Exponential { rate: f64, decay: f64 },
}

#[derive(Clone)]
pub enum Kind {
    RankOne {
        rho: DiscreteMeasure,
        a: f64,
    },
    ErasedRankOne {
        rho: DiscreteMeasure,
        a: f64,
        c: f64,
    },
    GrgKernel {
        rho: DiscreteMeasure,
        a: f64,
        c: f64,
    },
    Bipartite {
        rho1: DiscreteMeasure,
        rho2: DiscreteMeasure,
        a1: f64,
        a2: f64,
    },
    PureDust {
        i: f64,
    },
    Generic(Generic),
}

/// A multigraphex together with a rescaling factor: evaluations use
/// `W(√s x, √s y, k)`, `S(√s x, k)/√s` and `I(k)/s`.
#[derive(Clone)]
pub struct Multigraphex {
    kind: Kind,
    scale: f64,
}

impl fmt::Debug for Multigraphex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.variant_name();
        match &self.kind {
            Kind::Generic(g) => write!(
                f,
                "{name}(cutoff {}, scale {})",
                g.feature_cutoff, self.scale
            ),
            _ => write!(f, "{name}(scale {})", self.scale),
        }
    }
}

/// A point of the feature space; `side` is only used by the bipartite
/// variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feature {
    pub x: f64,
    pub side: u8,
}

impl Feature {
    pub fn new(x: f64) -> Self {
        Feature { x, side: 0 }
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return invalid(format!("{name} = {v} must be finite and nonnegative"));
    }
    Ok(())
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return invalid(format!("{name} = {v} must be finite and positive"));
    }
    Ok(())
}

impl Multigraphex {
    fn with_kind(kind: Kind) -> Self {
        Multigraphex { kind, scale: 1.0 }
    }

    pub fn rank_one(rho: DiscreteMeasure, a: f64) -> Result<Self> {
        check_nonneg("a", a)?;
        Ok(Self::with_kind(Kind::RankOne { rho, a }))
    }

    pub fn erased_rank_one(rho: DiscreteMeasure, a: f64, c: f64) -> Result<Self> {
        check_nonneg("a", a)?;
        check_pos("c", c)?;
        Ok(Self::with_kind(Kind::ErasedRankOne { rho, a, c }))
    }

    pub fn grg_kernel(rho: DiscreteMeasure, a: f64, c: f64) -> Result<Self> {
        check_nonneg("a", a)?;
        check_pos("C", c)?;
        Ok(Self::with_kind(Kind::GrgKernel { rho, a, c }))
    }

    pub fn bipartite(
        rho1: DiscreteMeasure,
        rho2: DiscreteMeasure,
        a1: f64,
        a2: f64,
    ) -> Result<Self> {
        check_nonneg("a1", a1)?;
        check_nonneg("a2", a2)?;
        Ok(Self::with_kind(Kind::Bipartite { rho1, rho2, a1, a2 }))
    }

    pub fn pure_dust(i: f64) -> Result<Self> {
        check_nonneg("I", i)?;
        Ok(Self::with_kind(Kind::PureDust { i }))
    }

    pub fn generic(g: Generic) -> Result<Self> {
        check_pos("feature_cutoff", g.feature_cutoff)?;
        if let Some(b) = g.tail_bound {
            check_nonneg("tail_bound", b)?;
        }
        Ok(Self::with_kind(Kind::Generic(g)))
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn variant_name(&self) -> &'static str {
        match self.kind {
            Kind::RankOne { .. } => "rank_one",
            Kind::ErasedRankOne { .. } => "erased_rank_one",
            Kind::GrgKernel { .. } => "grg_kernel",
            Kind::Bipartite { .. } => "bipartite",
            Kind::PureDust { .. } => "pure_dust",
            Kind::Generic(_) => "generic",
        }
    }

    /// `(W(√c·, √c·), S(√c·)/√c, I/c)`.
    pub fn rescale(&self, c: f64) -> Result<Self> {
        check_pos("c", c)?;
        Ok(match self.kind {
            Kind::PureDust { i } => Self::with_kind(Kind::PureDust { i: i / c }),
            _ => Multigraphex {
                kind: self.kind.clone(),
                scale: self.scale * c,
            },
        })
    }

    fn rank_one_parts(&self) -> Option<(Link, &DiscreteMeasure, f64, f64)> {
        let s = self.scale;
        match &self.kind {
            Kind::RankOne { rho, a } => Some((Link::Poisson, rho, *a, s)),
            Kind::ErasedRankOne { rho, a, c } => Some((Link::Erased, rho, *a, c * s)),
            Kind::GrgKernel { rho, a, c } => Some((Link::Grg, rho, *a, c * s)),
            _ => None,
        }
    }

    /// `W(x, y, k)`.
    pub fn w(&self, x: Feature, y: Feature, k: u32) -> f64 {
        let rs = self.scale.sqrt();
        if let Some((link, rho, _, c)) = self.rank_one_parts() {
            let rc = c.sqrt();
            let u = rho.tail_inverse(rc * x.x);
            if x.x == y.x {
                return link.loop_pmf(k, u);
            }
            let v = rho.tail_inverse(rc * y.x);
            return link.pmf(k, u * v);
        }
        match &self.kind {
            Kind::Bipartite { rho1, rho2, .. } => {
                if x.side == y.side {
                    return poisson_pmf(k, 0.0);
                }
                let (p, q) = if x.side == 0 { (x, y) } else { (y, x) };
                let u = rho1.tail_inverse(rs * p.x);
                let v = rho2.tail_inverse(rs * q.x);
                poisson_pmf(k, u * v)
            }
            Kind::PureDust { .. } => poisson_pmf(k, 0.0),
            Kind::Generic(g) => (g.w)(rs * x.x, rs * y.x, k),
            _ => unreachable!(),
        }
    }

    /// `S(x, k)` for `k >= 1`.
    pub fn s(&self, x: Feature, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let rs = self.scale.sqrt();
        if let Some((_, rho, a, c)) = self.rank_one_parts() {
            let rc = c.sqrt();
            return if k == 1 {
                a * rho.tail_inverse(rc * x.x) / rc
            } else {
                0.0
            };
        }
        match &self.kind {
            Kind::Bipartite { rho1, rho2, a1, a2 } => {
                if k != 1 {
                    0.0
                } else if x.side == 0 {
                    a2 * rho1.tail_inverse(rs * x.x) / rs
                } else {
                    a1 * rho2.tail_inverse(rs * x.x) / rs
                }
            }
            Kind::PureDust { .. } => 0.0,
            Kind::Generic(g) => (g.s)(rs * x.x, k) / rs,
            _ => unreachable!(),
        }
    }

    /// `I(k)` for `k >= 1`.
    pub fn dust(&self, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if let Some((_, _, a, c)) = self.rank_one_parts() {
            return if k == 1 { a * a / (2.0 * c) } else { 0.0 };
        }
        match &self.kind {
            Kind::Bipartite { a1, a2, .. } if k == 1 => a1 * a2 / self.scale,
            Kind::PureDust { i } if k == 1 => *i,
            Kind::Generic(g) => g.dust.get(k as usize - 1).copied().unwrap_or(0.0) / self.scale,
            _ => 0.0,
        }
    }

    /// Draws the latent structure of `GP_t`.
    pub fn draw_latent(&self, t: f64, rng: &mut Rng) -> Result<LatentDraw> {
        check_nonneg("t", t)?;
        let mut d = LatentDraw::default();
        if t == 0.0 {
            return Ok(d);
        }
        if let Some((link, rho, a, c)) = self.rank_one_parts() {
            let rc = c.sqrt();
            let weights = feature_weights(rho, t, rc, rng);
            d.side = vec![0; weights.len()];
            for i in 0..weights.len() {
                let loops = link.draw_loops(rng, weights[i]);
                d.push_edge(i, i, loops);
                for j in i + 1..weights.len() {
                    let m = link.draw_edges(rng, weights[i] * weights[j]);
                    d.push_edge(i, j, m);
                }
            }
            for (i, &w) in weights.iter().enumerate() {
                for _ in 0..poisson(rng, t * a * w / rc) {
                    d.stars.push((i as u32, 1));
                }
            }
            for _ in 0..poisson(rng, t * t * a * a / (2.0 * c)) {
                d.dust.push(1);
            }
            return Ok(d);
        }
        match &self.kind {
            Kind::Bipartite { rho1, rho2, a1, a2 } => {
                let rs = self.scale.sqrt();
                let w1 = feature_weights(rho1, t, rs, rng);
                let w2 = feature_weights(rho2, t, rs, rng);
                let n1 = w1.len();
                d.side = [vec![0; n1], vec![1; w2.len()]].concat();
                for (i, &u) in w1.iter().enumerate() {
                    for (j, &v) in w2.iter().enumerate() {
                        let m = poisson(rng, u * v) as u32;
                        d.push_edge(i, n1 + j, m);
                    }
                }
                for (i, &u) in w1.iter().enumerate() {
                    for _ in 0..poisson(rng, t * a2 * u / rs) {
                        d.stars.push((i as u32, 1));
                    }
                }
                for (j, &v) in w2.iter().enumerate() {
                    for _ in 0..poisson(rng, t * a1 * v / rs) {
                        d.stars.push(((n1 + j) as u32, 1));
                    }
                }
                for _ in 0..poisson(rng, t * t * a1 * a2 / self.scale) {
                    d.dust.push(1);
                }
            }
            Kind::PureDust { i } => {
                for _ in 0..poisson(rng, t * t * i) {
                    d.dust.push(1);
                }
            }
            Kind::Generic(g) => self.draw_generic(g, t, rng, &mut d)?,
            _ => unreachable!(),
        }
        Ok(d)
    }

    fn draw_generic(&self, g: &Generic, t: f64, rng: &mut Rng, d: &mut LatentDraw) -> Result<()> {
        let s = self.scale;
        let missed = match g.tail_bound {
            Some(b) => t * t * b / s,
            None => f64::INFINITY,
        };
        if missed > g.budget {
            return Err(Error::TruncationBudgetExceeded {
                missed,
                budget: g.budget,
            });
        }
        let cutoff = g.feature_cutoff / s.sqrt();
        let n = poisson(rng, t * cutoff) as usize;
        let feats: Vec<f64> = (0..n).map(|_| uniform(rng, cutoff)).collect();
        d.side = vec![0; n];
        let draw_mult = |rng: &mut Rng, x: f64, y: f64| -> Result<u32> {
            let u: f64 = uniform(rng, 1.0);
            let mut cum = 0.0;
            for k in 0..=MAX_PMF_MULTIPLICITY {
                cum += self.w(Feature::new(x), Feature::new(y), k);
                if u < cum {
                    return Ok(k);
                }
            }
            invalid(format!("kernel pmf at ({x}, {y}) does not sum to one"))
        };
        for i in 0..n {
            let m = draw_mult(rng, feats[i], feats[i])?;
            d.push_edge(i, i, m);
            for j in i + 1..n {
                let m = draw_mult(rng, feats[i], feats[j])?;
                d.push_edge(i, j, m);
            }
        }
        for (i, &x) in feats.iter().enumerate() {
            for k in 1..=g.star_max_mult {
                for _ in 0..poisson(rng, t * self.s(Feature::new(x), k)) {
                    d.stars.push((i as u32, k));
                }
            }
        }
        for k in 1..=g.dust.len() as u32 {
            for _ in 0..poisson(rng, t * t * self.dust(k)) {
                d.dust.push(k);
            }
        }
        Ok(())
    }

    /// A draw of `GP_t`: the unlabeled multigraph, isolated vertices removed.
    pub fn sample_gp(&self, t: f64, rng: &mut Rng) -> Result<Multigraph> {
        Ok(self.draw_latent(t, rng)?.to_graph())
    }

    /// The same draw as [`sample_gp`](Self::sample_gp) with uniform `[0, t)`
    /// labels on every surviving vertex.
    pub fn sample_adjacency(&self, t: f64, rng: &mut Rng) -> Result<AdjacencyMeasure> {
        let d = self.draw_latent(t, rng)?;
        d.to_adjacency(t, rng)
    }

    pub fn to_spec(&self) -> Result<GraphexSpec> {
        let scale = if self.scale == 1.0 {
            None
        } else {
            Some(self.scale)
        };
        let m = |r: &DiscreteMeasure| r.to_json_value(None);
        let variant = match &self.kind {
            Kind::RankOne { rho, a } => VariantSpec::RankOne { rho: m(rho), a: *a },
            Kind::ErasedRankOne { rho, a, c } => VariantSpec::ErasedRankOne {
                rho: m(rho),
                a: *a,
                c: *c,
            },
            Kind::GrgKernel { rho, a, c } => VariantSpec::GrgKernel {
                rho: m(rho),
                a: *a,
                c: *c,
            },
            Kind::Bipartite { rho1, rho2, a1, a2 } => VariantSpec::Bipartite {
                rho1: m(rho1),
                rho2: m(rho2),
                a1: *a1,
                a2: *a2,
            },
            Kind::PureDust { i } => VariantSpec::PureDust { i: *i },
            Kind::Generic(g) => match &g.spec {
                Some(k) => VariantSpec::Generic {
                    kernel: k.clone(),
                    feature_cutoff: g.feature_cutoff,
                    dust: g.dust.clone(),
                },
                None => return invalid("closure-defined graphexes have no JSON form"),
            },
        };
        Ok(GraphexSpec { variant, scale })
    }

    pub fn from_spec(spec: &GraphexSpec) -> Result<Self> {
        let g = match &spec.variant {
            VariantSpec::RankOne { rho, a } => Self::rank_one(rho.to_measure()?, *a)?,
            VariantSpec::ErasedRankOne { rho, a, c } => {
                Self::erased_rank_one(rho.to_measure()?, *a, *c)?
            }
            VariantSpec::GrgKernel { rho, a, c } => Self::grg_kernel(rho.to_measure()?, *a, *c)?,
            VariantSpec::Bipartite { rho1, rho2, a1, a2 } => {
                Self::bipartite(rho1.to_measure()?, rho2.to_measure()?, *a1, *a2)?
            }
            VariantSpec::PureDust { i } => Self::pure_dust(*i)?,
            VariantSpec::Generic {
                kernel,
                feature_cutoff,
                dust,
            } => Self::generic(Generic::from_spec(kernel, *feature_cutoff, dust.clone())?)?,
        };
        match spec.scale {
            Some(s) => g.rescale(s),
            None => Ok(g),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_spec(&serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_spec()?)?)
    }
}

/// Latent vertices with weights `ρ̄⁻¹(√c x)` for a rate-`t` Poisson process
/// of features on `[0, ρ(ℝ₊)/√c)`, outside of which the weight is 0.
fn feature_weights(rho: &DiscreteMeasure, t: f64, rc: f64, rng: &mut Rng) -> Vec<f64> {
    let span = rho.total_mass() / rc;
    let n = poisson(rng, t * span);
    (0..n)
        .map(|_| rho.tail_inverse(rc * uniform(rng, span)))
        .filter(|&w| w > 0.0)
        .collect()
}

/// Latent vertices and their edges; star leaves and dust edges are
/// materialized as fresh vertices when rendered.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LatentDraw {
    pub side: Vec<u8>,
    /// `(i, j, mult)` with `i <= j` over latent indices.
    pub edges: Vec<(u32, u32, u32)>,
    /// `(latent vertex, multiplicity)`, one fresh leaf each.
    pub stars: Vec<(u32, u32)>,
    /// Multiplicities of isolated edges.
    pub dust: Vec<u32>,
}

impl LatentDraw {
    fn push_edge(&mut self, i: usize, j: usize, m: u32) {
        if m > 0 {
            self.edges.push((i as u32, j as u32, m));
        }
    }

    fn n_vertices(&self) -> usize {
        self.side.len() + self.stars.len() + 2 * self.dust.len()
    }

    fn triples(&self) -> Vec<(u32, u32, u32)> {
        let mut out = self.edges.clone();
        let mut next = self.side.len() as u32;
        for &(v, m) in &self.stars {
            out.push((v, next, m));
            next += 1;
        }
        for &m in &self.dust {
            out.push((next, next + 1, m));
            next += 2;
        }
        out
    }

    pub fn to_graph(&self) -> Multigraph {
        Multigraph::from_edges(self.n_vertices(), self.triples())
            .expect("indices in range")
            .drop_isolated()
    }

    pub fn to_adjacency(&self, t: f64, rng: &mut Rng) -> Result<AdjacencyMeasure> {
        let mut xi = AdjacencyMeasure::new(t);
        if t == 0.0 {
            return Ok(xi);
        }
        let labels = distinct_labels(self.n_vertices(), t, rng)?;
        for (u, v, m) in self.triples() {
            xi.push(labels[u as usize], labels[v as usize], m);
        }
        Ok(xi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphexSpec {
    #[serde(flatten)]
    pub variant: VariantSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VariantSpec {
    RankOne {
        rho: MeasureJson,
        a: f64,
    },
    ErasedRankOne {
        rho: MeasureJson,
        a: f64,
        c: f64,
    },
    GrgKernel {
        rho: MeasureJson,
        a: f64,
        c: f64,
    },
    Bipartite {
        rho1: MeasureJson,
        rho2: MeasureJson,
        a1: f64,
        a2: f64,
    },
    PureDust {
        i: f64,
    },
    Generic {
        kernel: KernelSpec,
        feature_cutoff: f64,
        #[serde(default)]
        dust: Vec<f64>,
    },
}

// ---------------------------------------------------------------------------
// validation

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub holds: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub variant: String,
    pub passed: bool,
    pub conditions: Vec<ConditionCheck>,
    /// `(x, μ_W(x))` pairs; for atomic variants one point per constant piece.
    pub mu_profile: Vec<(f64, f64)>,
}

impl ValidationReport {
    fn new(variant: &str, conditions: Vec<ConditionCheck>, mu_profile: Vec<(f64, f64)>) -> Self {
        ValidationReport {
            variant: variant.into(),
            passed: conditions.iter().all(|c| c.holds),
            conditions,
            mu_profile,
        }
    }

    pub fn failures(&self) -> Vec<&ConditionCheck> {
        self.conditions.iter().filter(|c| !c.holds).collect()
    }

    pub fn into_result(self) -> Result<ValidationReport> {
        if self.passed {
            return Ok(self);
        }
        let f = self.failures();
        Err(Error::ValidationFailure {
            condition: f
                .iter()
                .map(|c| c.condition.as_str())
                .collect::<Vec<_>>()
                .join(", "),
            detail: f
                .iter()
                .map(|c| c.detail.as_str())
                .collect::<Vec<_>>()
                .join("; "),
        })
    }
}

fn check(condition: &str, value: f64, detail: impl Into<String>) -> ConditionCheck {
    ConditionCheck {
        condition: condition.into(),
        holds: value.is_finite(),
        value,
        detail: detail.into(),
    }
}

/// Constant pieces `(lo, hi, weight)` of `x ↦ ρ̄⁻¹(√c x)`.
fn segments(rho: &DiscreteMeasure, rc: f64) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    let mut hi = rho.total_mass();
    for &(x, m) in rho.atoms() {
        // smallest atom occupies the top of the feature range
        out.push(((hi - m).max(0.0) / rc, hi / rc, x));
        hi -= m;
    }
    out
}

impl Multigraphex {
    /// Checks the integrability conditions (a)-(c) and star integrability.
    /// Atomic variants are checked in closed form; the generic variant uses
    /// a midpoint rule with `resolution` points on `[0, cutoff)`.
    pub fn validation_report(&self, resolution: usize) -> ValidationReport {
        let name = self.variant_name();
        if let Some((link, rho, a, c)) = self.rank_one_parts() {
            let rc = c.sqrt();
            let seg = segments(rho, rc);
            let mu: Vec<f64> = seg
                .iter()
                .map(|&(_, _, u)| {
                    seg.iter()
                        .map(|&(lo, hi, v)| (hi - lo) * link.edge_prob(u * v))
                        .sum()
                })
                .collect();
            return self.atomic_report(
                name,
                &[(&seg, &mu, &seg, link, a)],
                seg.iter()
                    .map(|&(lo, hi, u)| (hi - lo) * link.loop_prob(u))
                    .sum(),
            );
        }
        match &self.kind {
            Kind::Bipartite { rho1, rho2, a1, a2 } => {
                let rs = self.scale.sqrt();
                let s1 = segments(rho1, rs);
                let s2 = segments(rho2, rs);
                let mu_of = |mine: &[(f64, f64, f64)], other: &[(f64, f64, f64)]| -> Vec<f64> {
                    mine.iter()
                        .map(|&(_, _, u)| {
                            other
                                .iter()
                                .map(|&(lo, hi, v)| (hi - lo) * Link::Poisson.edge_prob(u * v))
                                .sum()
                        })
                        .collect()
                };
                let mu1 = mu_of(&s1, &s2);
                let mu2 = mu_of(&s2, &s1);
                self.atomic_report(
                    name,
                    &[
                        (&s1, &mu1, &s2, Link::Poisson, *a2),
                        (&s2, &mu2, &s1, Link::Poisson, *a1),
                    ],
                    0.0,
                )
            }
            Kind::PureDust { i } => ValidationReport::new(
                name,
                vec![
                    check("(a)", 0.0, "μ_W ≡ 0"),
                    check("(b)", 0.0, "W has no edges"),
                    check("(c)", 0.0, "no loops"),
                    check("star", 0.0, "S ≡ 0"),
                    check("dust", *i, "I is a finite constant"),
                ],
                vec![(0.0, 0.0)],
            ),
            Kind::Generic(g) => self.generic_report(g, resolution.max(1)),
            _ => unreachable!(),
        }
    }

    /// `parts`: for each feature type, its segments, μ_W per segment, the
    /// segments of the types it connects to, the link and the star constant.
    #[allow(clippy::type_complexity)]
    fn atomic_report(
        &self,
        name: &str,
        parts: &[(
            &Vec<(f64, f64, f64)>,
            &Vec<f64>,
            &Vec<(f64, f64, f64)>,
            Link,
            f64,
        )],
        diag: f64,
    ) -> ValidationReport {
        let mut profile = Vec::new();
        let mut big = 0.0;
        let mut max_mu: f64 = 0.0;
        let mut b_int = 0.0;
        let mut star = 0.0;
        // the second entry of a two-type graphex starts after the first's range
        let mut offset = 0.0;
        for &(seg, mu, other, link, a) in parts {
            for (k, &(lo, hi, u)) in seg.iter().enumerate() {
                profile.push((offset + 0.5 * (lo + hi), mu[k]));
                max_mu = max_mu.max(mu[k]);
                if mu[k] > 1.0 {
                    big += hi - lo;
                }
                star += (hi - lo) * (a * u * self.star_factor()).min(1.0);
            }
            // (b): pairs of features that both have μ_W <= 1
            let other_mu: Vec<f64> = other
                .iter()
                .map(|&(_, _, v)| {
                    // μ_W of the partner type at weight v
                    seg.iter()
                        .map(|&(lo, hi, u)| (hi - lo) * link.edge_prob(u * v))
                        .sum()
                })
                .collect();
            for (k, &(lo, hi, u)) in seg.iter().enumerate() {
                if mu[k] > 1.0 {
                    continue;
                }
                for (l, &(lo2, hi2, v)) in other.iter().enumerate() {
                    if other_mu[l] <= 1.0 {
                        b_int += (hi - lo) * (hi2 - lo2) * link.edge_prob(u * v);
                    }
                }
            }
            offset += seg.last().map_or(0.0, |s| s.1);
        }
        if profile.is_empty() {
            profile.push((0.0, 0.0));
        }
        ValidationReport::new(
            name,
            vec![
                check(
                    "(a)",
                    if max_mu.is_finite() {
                        big
                    } else {
                        f64::INFINITY
                    },
                    format!("sup μ_W = {max_mu:.6}, Λ(μ_W > 1) = {big:.6}"),
                ),
                check(
                    "(b)",
                    b_int,
                    format!("∫∫ (1 - W(x,y,0)) over μ_W <= 1 = {b_int:.6}"),
                ),
                check("(c)", diag, format!("∫ (1 - W(x,x,0)) dx = {diag:.6}")),
                check("star", star, format!("∫ min(S, 1) = {star:.6}")),
            ],
            profile,
        )
    }

    /// Converts `a · weight` into the star rate `S(x)`.
    fn star_factor(&self) -> f64 {
        match self.rank_one_parts() {
            Some((_, _, _, c)) => 1.0 / c.sqrt(),
            None => 1.0 / self.scale.sqrt(),
        }
    }

    fn generic_report(&self, g: &Generic, resolution: usize) -> ValidationReport {
        let cutoff = g.feature_cutoff / self.scale.sqrt();
        let h = cutoff / resolution as f64;
        let xs: Vec<f64> = (0..resolution).map(|i| (i as f64 + 0.5) * h).collect();
        let f = |x: f64| Feature::new(x);
        let mut sym_err: f64 = 0.0;
        let mut norm_err: f64 = 0.0;
        let mut mu = vec![0.0; resolution];
        for (i, &x) in xs.iter().enumerate() {
            for &y in &xs {
                let w0 = self.w(f(x), f(y), 0);
                mu[i] += h * (1.0 - w0);
                sym_err = sym_err.max((w0 - self.w(f(y), f(x), 0)).abs());
            }
            let total: f64 = (0..=64).map(|k| self.w(f(x), f(x), k)).sum();
            norm_err = norm_err.max((total - 1.0).abs());
        }
        let tail = g.tail_bound.map(|b| b / self.scale);
        let with_tail = |v: f64| tail.map_or(f64::INFINITY, |t| v + t);
        let uncertified = "no tail bound beyond the feature cutoff";
        let describe = |v: f64, what: &str| {
            if tail.is_some() {
                format!("{what} <= {v:.6}")
            } else {
                format!("{what} on [0, cutoff) = {v:.6}; {uncertified}")
            }
        };
        let big: f64 = mu.iter().filter(|&&m| m > 1.0).count() as f64 * h;
        let mut b_int = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in xs.iter().enumerate() {
                if mu[i] <= 1.0 && mu[j] <= 1.0 {
                    b_int += h * h * (1.0 - self.w(f(x), f(y), 0));
                }
            }
        }
        let diag: f64 = xs.iter().map(|&x| h * (1.0 - self.w(f(x), f(x), 0))).sum();
        let star: f64 = xs
            .iter()
            .map(|&x| {
                h * (1..=g.star_max_mult)
                    .map(|k| self.s(f(x), k))
                    .sum::<f64>()
                    .min(1.0)
            })
            .sum();
        let max_mu = mu.iter().copied().fold(0.0, f64::max);
        let mut conditions = vec![
            ConditionCheck {
                condition: "kernel".into(),
                holds: sym_err < 1e-9 && norm_err < 1e-6,
                value: sym_err.max(norm_err),
                detail: format!("symmetry error {sym_err:.2e}, normalization error {norm_err:.2e}"),
            },
            check(
                "(a)",
                with_tail(if max_mu.is_finite() {
                    big
                } else {
                    f64::INFINITY
                }),
                describe(big, &format!("sup μ_W = {max_mu:.6}, Λ(μ_W > 1)")),
            ),
            check(
                "(b)",
                with_tail(b_int + with_tail(0.0)),
                describe(b_int, "∫∫ (1 - W) over μ_W <= 1"),
            ),
            check(
                "(c)",
                with_tail(diag),
                describe(diag, "∫ (1 - W(x,x,0)) dx"),
            ),
            check("star", with_tail(star), describe(star, "∫ min(ΣS, 1)")),
        ];
        let dust: f64 = g.dust.iter().sum();
        conditions.push(check("dust", dust, format!("Σ I(k) = {dust:.6}")));
        ValidationReport::new("generic", conditions, xs.into_iter().zip(mu).collect())
    }

    /// Validation report, or `ValidationFailure` naming the failing
    /// conditions.
    pub fn validate(&self, resolution: usize) -> Result<ValidationReport> {
        self.validation_report(resolution).into_result()
    }
}

// ---------------------------------------------------------------------------
// finite-n limits

/// Splits `ρ_n` at `tau`: atoms above form `ρ`, the first moment below is `a`.
pub fn hub_split(rho_n: &DiscreteMeasure, tau: f64) -> (DiscreteMeasure, f64) {
    (rho_n.restrict_above(tau), rho_n.low_mass_estimate(tau))
}

/// `RankOne{ρ_n above τ, a = ∫_{[0,τ]} x dρ_n}`.
pub fn limit_of_cm(d: &[u32], tau: f64) -> Result<Multigraphex> {
    let (rho, a) = hub_split(&empirical_degree_measure(d)?, tau);
    Multigraphex::rank_one(rho, a)
}

/// `ErasedRankOne` with `c = ∫∫ (1 - e^{-xy}) dρ_n dρ_n`.
pub fn limit_of_ecm(d: &[u32], tau: f64) -> Result<Multigraphex> {
    let rho_n = empirical_degree_measure(d)?;
    let c = double_integral(&rho_n, |x, y| -(-x * y).exp_m1());
    let (rho, a) = hub_split(&rho_n, tau);
    Multigraphex::erased_rank_one(rho, a, c)
}

/// Expected degrees `d̄_i = 2m δ_i / ℓ_δ`, scaled by `√(2m)`.
pub fn pa_expected_degree_measure(delta: &[f64], m: u64) -> Result<DiscreteMeasure> {
    if m == 0 {
        return invalid("m must be at least 1");
    }
    let l: f64 = delta.iter().sum();
    if !(l > 0.0) || delta.iter().any(|&x| !(x >= 0.0)) {
        return invalid("δ must be nonnegative with positive sum");
    }
    let two_m = 2.0 * m as f64;
    let dbar: Vec<f64> = delta.iter().map(|&x| two_m * x / l).collect();
    DiscreteMeasure::scaled_counts(&dbar, two_m.sqrt())
}

pub fn limit_of_pa(delta: &[f64], m: u64, tau: f64) -> Result<Multigraphex> {
    let (rho, a) = hub_split(&pa_expected_degree_measure(delta, m)?, tau);
    Multigraphex::rank_one(rho, a)
}

/// `m / ℓ_δ²`; the limit is intended for `m = o(ℓ_δ²)`.
pub fn pa_regime_ratio(delta: &[f64], m: u64) -> f64 {
    let l: f64 = delta.iter().sum();
    m as f64 / (l * l)
}

/// `ρ_{n,w} = (1/√L) Σ δ_{w_i/√L}`.
pub fn weight_measure(w: &[f64]) -> Result<DiscreteMeasure> {
    let l: f64 = w.iter().sum();
    if !(l > 0.0) || w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return invalid("weights must be positive and finite");
    }
    DiscreteMeasure::scaled_counts(w, l.sqrt())
}

/// `c = ∫∫ xy/(1+xy) dρ_{n,w} dρ_{n,w}`.
pub fn grg_scale(w: &[f64]) -> Result<f64> {
    Ok(double_integral(&weight_measure(w)?, |x, y| {
        x * y / (1.0 + x * y)
    }))
}

pub fn limit_of_grg(w: &[f64], tau: f64) -> Result<Multigraphex> {
    let rho_n = weight_measure(w)?;
    let c = double_integral(&rho_n, |x, y| x * y / (1.0 + x * y));
    let (rho, a) = hub_split(&rho_n, tau);
    Multigraphex::grg_kernel(rho, a, c)
}

/// Per-side measures for the bipartite model. A side-1 half-edge meets a
/// given side-2 half-edge with probability `2/ℓ`, so locations are
/// `d/√(ℓ/2)` with masses `1/√ℓ`, and the low parts scale by `√2` to match.
pub fn bipartite_side_measures(
    side1: &[u32],
    side2: &[u32],
) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let half = bipartite_half_total(side1, side2)? as f64;
    let l = 2.0 * half;
    let f = |d: &[u32]| -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(d.iter().map(|&x| (x as f64 / half.sqrt(), 1.0 / l.sqrt())))
    };
    Ok((f(side1)?, f(side2)?))
}

pub fn limit_of_bcm(side1: &[u32], side2: &[u32], tau: f64) -> Result<Multigraphex> {
    let (r1, r2) = bipartite_side_measures(side1, side2)?;
    let (h1, a1) = hub_split(&r1, tau);
    let (h2, a2) = hub_split(&r2, tau);
    // low parts: ∫_{[0,τ]} x dρ uses the √2-scaled locations already
    Multigraphex::bipartite(h1, h2, a1, a2)
}

/// `∫∫ f(x, y) ρ(dx) ρ(dy)` over atom pairs, diagonal included.
pub fn double_integral(rho: &DiscreteMeasure, f: impl Fn(f64, f64) -> f64) -> f64 {
    let atoms = rho.atoms();
    let mut s = 0.0;
    for &(x, m) in atoms {
        for &(y, n) in atoms {
            s += m * n * f(x, y);
        }
    }
    s
}

/// Degree sequence check shared with the CLI.
pub fn check_degrees(d: &[u32]) -> Result<u64> {
    half_edge_total(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::tv_value;
    use crate::census::Census;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn m(atoms: &[(f64, f64)]) -> DiscreteMeasure {
        DiscreteMeasure::new(atoms.iter().copied()).unwrap()
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(poisson_pmf(0, 0.0), 1.0);
        assert!((poisson_pmf(0, 1.0) - 0.367879).abs() < 1e-6);
        assert!((poisson_pmf(2, 2.0) - 0.270671).abs() < 1e-6);
        // log-space evaluation stays finite for large arguments
        let s: f64 = (0..2000).map(|k| poisson_pmf(k, 900.0)).sum();
        assert!((s - 1.0).abs() < 1e-9);
        assert!((ln_factorial(300) - (1..=300).map(|i| (i as f64).ln()).sum::<f64>()).abs() < 1e-8);
    }

    #[test]
    fn rank_one_pmf_partial_sums_increase_to_one() {
        let g = Multigraphex::rank_one(m(&[(1.5, 1.0), (0.5, 2.0)]), 0.3).unwrap();
        for (x, y) in [(0.1, 0.2), (0.4, 2.5), (0.7, 0.7)] {
            let mut cum = 0.0;
            for k in 0..40 {
                let p = g.w(Feature::new(x), Feature::new(y), k);
                assert!(p >= 0.0);
                cum += p;
            }
            assert!((cum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_evaluations() {
        let rho = m(&[(2.0, 1.0), (1.0, 1.0)]);
        let g = Multigraphex::rank_one(rho, 0.5).unwrap();
        // feature 0.5 maps to weight 2, 1.5 to weight 1
        let (x, y) = (Feature::new(0.5), Feature::new(1.5));
        assert!((g.w(x, y, 1) - poisson_pmf(1, 2.0)).abs() < 1e-15);
        assert!((g.w(x, x, 2) - poisson_pmf(2, 2.0)).abs() < 1e-15);
        assert!((g.s(x, 1) - 1.0).abs() < 1e-15);
        assert!((g.dust(1) - 0.125).abs() < 1e-15);
        assert_eq!(g.w(Feature::new(2.5), y, 0), 1.0);
    }

    #[test]
    fn rescale_rules() {
        let g = Multigraphex::rank_one(m(&[(2.0, 1.0), (1.0, 1.0)]), 0.5).unwrap();
        let id = g.rescale(1.0).unwrap();
        let back = g.rescale(3.0).unwrap().rescale(1.0 / 3.0).unwrap();
        for x in [0.1, 0.6, 1.2, 1.9, 2.4] {
            for y in [0.3, 1.1, 2.2] {
                for k in 0..4 {
                    let (fx, fy) = (Feature::new(x), Feature::new(y));
                    assert_eq!(id.w(fx, fy, k), g.w(fx, fy, k));
                    assert!((back.w(fx, fy, k) - g.w(fx, fy, k)).abs() < 1e-12);
                }
                assert!((back.s(Feature::new(x), 1) - g.s(Feature::new(x), 1)).abs() < 1e-12);
            }
        }
        let four = g.rescale(4.0).unwrap();
        assert_eq!(
            four.w(Feature::new(0.25), Feature::new(0.75), 1),
            g.w(Feature::new(0.5), Feature::new(1.5), 1)
        );
        assert!((four.s(Feature::new(0.25), 1) - g.s(Feature::new(0.5), 1) / 2.0).abs() < 1e-15);
        assert!((four.dust(1) - g.dust(1) / 4.0).abs() < 1e-15);
        let d = Multigraphex::pure_dust(1.0).unwrap().rescale(4.0).unwrap();
        assert!(matches!(d.kind(), Kind::PureDust { i } if *i == 0.25));
        assert_eq!(d.scale(), 1.0);
    }

    #[test]
    fn grg_and_erased_evaluations() {
        let rho = m(&[(1.0, 2.0)]);
        let g = Multigraphex::grg_kernel(rho.clone(), 0.2, 4.0).unwrap();
        // √C x = 2 x; features below 1 map to weight 1
        let (x, y) = (Feature::new(0.2), Feature::new(0.4));
        assert!((g.w(x, y, 1) - 0.5).abs() < 1e-15);
        assert_eq!(g.w(x, x, 1), 0.0);
        assert!((g.s(x, 1) - 0.1).abs() < 1e-15);
        assert!((g.dust(1) - 0.04 / 8.0).abs() < 1e-15);
        let e = Multigraphex::erased_rank_one(rho, 0.0, 1.0).unwrap();
        assert!((e.w(x, y, 1) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((e.w(x, x, 1) - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert_eq!(e.w(x, y, 2), 0.0);
    }

    #[test]
    fn bipartite_evaluations() {
        let g = Multigraphex::bipartite(m(&[(1.0, 1.0)]), m(&[(2.0, 1.0)]), 0.5, 0.25).unwrap();
        let x0 = Feature { x: 0.5, side: 0 };
        let y0 = Feature { x: 0.7, side: 0 };
        let y1 = Feature { x: 0.5, side: 1 };
        assert_eq!(g.w(x0, y0, 0), 1.0);
        assert!((g.w(x0, y1, 1) - poisson_pmf(1, 2.0)).abs() < 1e-15);
        assert!((g.s(x0, 1) - 0.25).abs() < 1e-15);
        assert!((g.s(y1, 1) - 1.0).abs() < 1e-15);
        assert!((g.dust(1) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn validate_examples() {
        let r1 = Multigraphex::rank_one(m(&[(1.0, 0.5), (0.3, 2.0)]), 0.4).unwrap();
        let rep = r1.validate(50).unwrap();
        assert_eq!(rep.conditions.len(), 4);
        // μ_W <= weight · ∫ x dρ
        let m1 = 0.5 + 0.6;
        assert!(rep.mu_profile.iter().all(|&(_, mu)| mu <= m1 + 1e-12));
        let d = Multigraphex::pure_dust(0.5).unwrap().validate(10).unwrap();
        assert!(d.mu_profile.iter().all(|p| p.1 == 0.0));

        let ones = Generic::from_spec(
            &KernelSpec::Constant {
                p: 1.0,
                support: None,
            },
            5.0,
            vec![],
        )
        .unwrap();
        let rep = Multigraphex::generic(ones).unwrap().validation_report(40);
        assert!(!rep.passed);
        let failed: Vec<&str> = rep
            .failures()
            .iter()
            .map(|c| c.condition.as_str())
            .collect();
        assert!(failed.contains(&"(a)") && failed.contains(&"(b)") && failed.contains(&"(c)"));
        assert!(matches!(
            Multigraphex::from_json(r#"{"type":"generic","kernel":{"constant":{"p":1.0,"support":null}},"feature_cutoff":5.0}"#)
                .unwrap()
                .validate(10),
            Err(Error::ValidationFailure { .. })
        ));

        let boxed = Generic::from_spec(
            &KernelSpec::Constant {
                p: 0.5,
                support: Some(2.0),
            },
            2.0,
            vec![0.1],
        )
        .unwrap();
        let rep = Multigraphex::generic(boxed).unwrap().validate(200).unwrap();
        // μ_W = p · support = 1 on [0, 2)
        assert!(rep
            .mu_profile
            .iter()
            .all(|&(_, mu)| (mu - 1.0).abs() < 1e-9));
    }

    #[test]
    fn rank_one_validation_values() {
        // single atom at w=1 with mass 1, scale 1: μ_W = 1 - e^{-1} on [0,1)
        let g = Multigraphex::rank_one(m(&[(1.0, 1.0)]), 0.0).unwrap();
        let rep = g.validation_report(1);
        assert_eq!(rep.mu_profile.len(), 1);
        assert!((rep.mu_profile[0].1 - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        let c = rep
            .conditions
            .iter()
            .find(|c| c.condition == "(c)")
            .unwrap();
        assert!((c.value - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        let b = rep
            .conditions
            .iter()
            .find(|c| c.condition == "(b)")
            .unwrap();
        assert!((b.value - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn sample_gp_examples() {
        let g = Multigraphex::rank_one(m(&[(1.0, 1.0)]), 0.0).unwrap();
        assert_eq!(
            g.sample_gp(0.0, &mut stream(0, "gp", 0))
                .unwrap()
                .n_vertices(),
            0
        );
        assert!(g
            .sample_adjacency(0.0, &mut stream(0, "gp", 0))
            .unwrap()
            .is_empty());

        // latent count ~ Poisson(1); given 2 latent vertices, edges ~ Poisson(1)
        let reps = 40_000;
        let (mut n_sum, mut two, mut edges_given_two) = (0.0, 0u64, 0u64);
        let mut zero_edges_given_two = 0u64;
        for r in 0..reps {
            let d = g.draw_latent(1.0, &mut stream(1, "gp1", r)).unwrap();
            n_sum += d.side.len() as f64;
            if d.side.len() == 2 {
                two += 1;
                let between: u32 = d.edges.iter().filter(|e| e.0 != e.1).map(|e| e.2).sum();
                edges_given_two += between as u64;
                zero_edges_given_two += (between == 0) as u64;
            }
        }
        assert!((n_sum / reps as f64 - 1.0).abs() < 3.0 * (1.0 / reps as f64).sqrt());
        let mean = edges_given_two as f64 / two as f64;
        assert!((mean - 1.0).abs() < 3.0 * (1.0 / two as f64).sqrt());
        let p0 = zero_edges_given_two as f64 / two as f64;
        let e1 = (-1.0f64).exp();
        assert!((p0 - e1).abs() < 3.0 * (e1 * (1.0 - e1) / two as f64).sqrt());
    }

    #[test]
    fn pure_dust_is_isolated_edges() {
        let g = Multigraphex::pure_dust(0.5).unwrap();
        let reps = 20_000;
        let t = 1.4;
        let mut total = 0.0;
        for r in 0..reps {
            let h = g.sample_gp(t, &mut stream(2, "dust", r)).unwrap();
            assert_eq!(h.n_vertices() as u64, 2 * h.non_loop_edge_count());
            assert!(h.degrees().iter().all(|&d| d == 1));
            total += h.non_loop_edge_count() as f64;
        }
        let lam = t * t * 0.5;
        assert!((total / reps as f64 - lam).abs() < 3.0 * (lam / reps as f64).sqrt());
    }

    #[test]
    fn rank_one_adjacency_counts_are_poisson() {
        // fixed weights: one atom w=1, mass 3; over [0,1) the labeled
        // measure restricted to A×B is Poisson(μ(A)μ(B)) given the weights
        let g = Multigraphex::rank_one(m(&[(0.8, 3.0)]), 0.0).unwrap();
        let a = [crate::sampling::Interval::new(0.0, 0.5)];
        let b = [crate::sampling::Interval::new(0.5, 1.0)];
        let reps = 30_000;
        let mut resid = 0.0;
        let mut resid_sq = 0.0;
        let mut diag_resid = 0.0;
        for r in 0..reps {
            let mut rng = stream(3, "adj", r);
            let d = g.draw_latent(1.0, &mut rng).unwrap();
            let xi = d.to_adjacency(1.0, &mut rng).unwrap();
            // reconstruct μ(A), μ(B) from the latent labels
            let labels: Vec<f64> = {
                let mut rng2 = stream(3, "adj", r);
                let d2 = g.draw_latent(1.0, &mut rng2).unwrap();
                assert_eq!(d2, d);
                crate::sampling::distinct_labels(d.side.len(), 1.0, &mut rng2).unwrap()
            };
            let mu_a = labels.iter().filter(|&&l| l < 0.5).count() as f64 * 0.8;
            let mu_b = labels.iter().filter(|&&l| l >= 0.5).count() as f64 * 0.8;
            let n_ab = xi.count(&a, &b) as f64;
            resid += n_ab - mu_a * mu_b;
            resid_sq += (n_ab - mu_a * mu_b).powi(2) - mu_a * mu_b;
            // A×A counted once per stored off-diagonal orientation pair
            let in_a: f64 = xi
                .points
                .iter()
                .filter(|p| p.y < 0.5)
                .map(|p| p.mult as f64)
                .sum();
            diag_resid += in_a - mu_a * mu_a / 2.0;
        }
        let n = reps as f64;
        assert!((resid / n).abs() < 0.05, "mean residual {}", resid / n);
        assert!(
            (resid_sq / n).abs() < 0.15,
            "variance residual {}",
            resid_sq / n
        );
        assert!(
            (diag_resid / n).abs() < 0.05,
            "diag residual {}",
            diag_resid / n
        );
    }

    #[test]
    fn adjacency_extract_matches_gp() {
        let g = Multigraphex::rank_one(m(&[(1.0, 0.5)]), 0.5).unwrap();
        let reps = 40_000;
        let mut a = Census::new();
        let mut b = Census::new();
        let mut null = Census::new();
        for r in 0..reps {
            a.add(&g.sample_gp(1.0, &mut stream(4, "gpA", r)).unwrap());
            b.add(
                &g.sample_adjacency(1.0, &mut stream(4, "gpB", r))
                    .unwrap()
                    .extract_graph(1.0),
            );
            null.add(&g.sample_gp(1.0, &mut stream(4, "gpC", r)).unwrap());
        }
        let (tv, tv_null) = (tv_value(&a, &b), tv_value(&a, &null));
        assert!(tv < 1.25 * tv_null + 0.01, "tv {tv}, null {tv_null}");
        // same stream: identical graphs
        for r in 0..200 {
            let h1 = g.sample_gp(1.3, &mut stream(5, "same", r)).unwrap();
            let h2 = g
                .sample_adjacency(1.3, &mut stream(5, "same", r))
                .unwrap()
                .extract_graph(1.3);
            assert_eq!(
                crate::canon::canonical_key(&h1).unwrap(),
                crate::canon::canonical_key(&h2).unwrap()
            );
        }
    }

    #[test]
    fn bipartite_samples_have_no_within_type_edges() {
        let g = Multigraphex::bipartite(m(&[(1.2, 1.0)]), m(&[(0.7, 2.0)]), 0.3, 0.6).unwrap();
        for r in 0..500 {
            let d = g.draw_latent(2.0, &mut stream(6, "bip", r)).unwrap();
            assert!(d
                .edges
                .iter()
                .all(|&(i, j, _)| d.side[i as usize] != d.side[j as usize]));
        }
    }

    #[test]
    fn generic_sampling_and_truncation() {
        let spec = KernelSpec::Constant {
            p: 0.5,
            support: Some(1.0),
        };
        let g = Multigraphex::generic(Generic::from_spec(&spec, 1.0, vec![0.2]).unwrap()).unwrap();
        let reps = 20_000;
        let mut edges = 0.0;
        for r in 0..reps {
            edges += g
                .sample_gp(2.0, &mut stream(7, "gen", r))
                .unwrap()
                .non_loop_edge_count() as f64;
        }
        // E = t²/2 · p · support² (pairs) + t² I
        let expect = 4.0 * 0.5 * 0.5 + 4.0 * 0.2;
        assert!(
            (edges / reps as f64 - expect).abs() < 0.05,
            "{}",
            edges / reps as f64
        );

        let spec = KernelSpec::Exponential {
            rate: 0.9,
            decay: 1.0,
        };
        let short = Multigraphex::generic(Generic::from_spec(&spec, 1.0, vec![]).unwrap()).unwrap();
        assert!(matches!(
            short.sample_gp(1.0, &mut stream(8, "gen", 0)),
            Err(Error::TruncationBudgetExceeded { .. })
        ));
        let long = Multigraphex::generic(Generic::from_spec(&spec, 12.0, vec![]).unwrap()).unwrap();
        assert!(long.sample_gp(1.0, &mut stream(8, "gen", 0)).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let g = Multigraphex::rank_one(m(&[(1.0, 0.5)]), 0.5)
            .unwrap()
            .rescale(2.0)
            .unwrap();
        let back = Multigraphex::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back.scale(), 2.0);
        assert_eq!(back.to_spec().unwrap(), g.to_spec().unwrap());
        let s = r#"{"type":"pure_dust","i":0.5}"#;
        assert_eq!(Multigraphex::from_json(s).unwrap().dust(1), 0.5);
        let s =
            r#"{"type":"bipartite","rho1":{"atoms":[[1,1]]},"rho2":{"atoms":[]},"a1":0,"a2":1}"#;
        assert_eq!(
            Multigraphex::from_json(s).unwrap().variant_name(),
            "bipartite"
        );
        assert!(
            Multigraphex::from_json(r#"{"type":"rank_one","rho":{"atoms":[]},"a":-1}"#).is_err()
        );
        let closure = Multigraphex::generic(Generic::new(
            Arc::new(|_, _, k| (k == 0) as u8 as f64),
            1.0,
            Some(0.0),
        ))
        .unwrap();
        assert!(closure.to_spec().is_err());
    }

    #[test]
    fn limit_of_cm_examples() {
        let ones = limit_of_cm(&vec![1; 400], DEFAULT_HUB_THRESHOLD).unwrap();
        match ones.kind() {
            Kind::RankOne { rho, a } => {
                assert!(rho.is_empty());
                assert!((a - 1.0).abs() < 1e-12);
            }
            _ => panic!(),
        }
        assert!((ones.dust(1) - 0.5).abs() < 1e-12);
        let eq = limit_of_cm(&[4, 4, 4, 4], DEFAULT_HUB_THRESHOLD).unwrap();
        match eq.kind() {
            Kind::RankOne { rho, a } => {
                assert_eq!(rho.atoms(), &[(1.0, 1.0)]);
                assert_eq!(*a, 0.0);
            }
            _ => panic!(),
        }
        let mut fstar = vec![100u32; 50];
        fstar.extend(vec![1u32; 5000]);
        match limit_of_cm(&fstar, DEFAULT_HUB_THRESHOLD).unwrap().kind() {
            Kind::RankOne { rho, a } => {
                assert_eq!(rho.atoms().len(), 1);
                assert!(
                    (rho.atoms()[0].0 - 1.0).abs() < 1e-12
                        && (rho.atoms()[0].1 - 0.5).abs() < 1e-12
                );
                assert!((a - 0.5).abs() < 1e-12);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn limit_of_pa_examples() {
        let delta: Vec<f64> = [4.0, 4.0, 4.0, 4.0].to_vec();
        let same =
            |x: &Multigraphex, y: &Multigraphex| x.to_spec().unwrap() == y.to_spec().unwrap();
        assert!(same(
            &limit_of_pa(&delta, 8, 0.1).unwrap(),
            &limit_of_cm(&[4, 4, 4, 4], 0.1).unwrap()
        ));
        let double: Vec<f64> = delta.iter().map(|x| 2.0 * x).collect();
        assert!(same(
            &limit_of_pa(&delta, 30, 0.1).unwrap(),
            &limit_of_pa(&double, 30, 0.1).unwrap()
        ));
        match limit_of_pa(&vec![1.0; 1000], 500, 0.1).unwrap().kind() {
            Kind::RankOne { rho, a } => assert!(rho.is_empty() && (a - 1.0).abs() < 1e-12),
            _ => panic!(),
        }
    }

    #[test]
    fn grg_limit_scale() {
        let w = vec![2.0; 10];
        // ρ: atom 2/√20 mass 10/√20; c = ∫∫ xy/(1+xy) = 100/20 · 0.2/1.2
        let c = grg_scale(&w).unwrap();
        assert!((c - 5.0 * (0.2 / 1.2)).abs() < 1e-12);
    }

    #[test]
    fn bcm_limit_rates() {
        let (r1, _) = bipartite_side_measures(&[2, 2], &[1, 1, 1, 1]).unwrap();
        // half = 4, ℓ = 8: locations 2/2 = 1, masses 1/√8
        assert_eq!(r1.atoms().len(), 1);
        assert!((r1.atoms()[0].0 - 1.0).abs() < 1e-12);
        assert!((r1.atoms()[0].1 - 2.0 / 8f64.sqrt()).abs() < 1e-12);
        assert!(bipartite_side_measures(&[2], &[1]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn rescale_inverse_is_identity(
            atoms in prop::collection::vec((1u32..30, 1u32..10), 1..5),
            a in 0.0f64..2.0,
            c in 0.1f64..10.0,
            x in 0.0f64..3.0,
            y in 0.0f64..3.0,
        ) {
            let rho = DiscreteMeasure::new(atoms.iter().map(|&(p, q)| (p as f64 / 10.0, q as f64 / 5.0))).unwrap();
            let g = Multigraphex::rank_one(rho, a).unwrap();
            let back = g.rescale(c).unwrap().rescale(1.0 / c).unwrap();
            let (fx, fy) = (Feature::new(x), Feature::new(y));
            for k in 0..3 {
                prop_assert!((back.w(fx, fy, k) - g.w(fx, fy, k)).abs() < 1e-9);
            }
            prop_assert!((back.s(fx, 1) - g.s(fx, 1)).abs() < 1e-9);
            prop_assert!((back.dust(1) - g.dust(1)).abs() < 1e-12);
        }
    }
}
