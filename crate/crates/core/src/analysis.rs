//! Monte Carlo statistics: census TV distances, Poisson block tests,
//! edge-count formulas and the GRG empty-window probability.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::census::Census;
use crate::dist::{bernoulli_subset, binomial, poisson};
use crate::error::{invalid, Result};
use crate::families::Instance;
use crate::generators::{
    bipartite_half_total, configuration_model, half_edge_total, preferential_attachment,
    preferential_attachment_edges,
};
use crate::graphex::{double_integral, grg_scale, poisson_pmf, Multigraphex};
use crate::measures::{empirical_degree_measure, DiscreteMeasure};
use crate::multigraph::Multigraph;
use crate::rng::{fold_replicates, replicates, stream, Rng};
use crate::sampling::{canonical_sample, label_canonical, Interval};

pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Mean of i.i.d. replicate values with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
    /// 1.96 standard errors.
    pub half_width: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Summary {
        let n = xs.len();
        if n == 0 {
            return Summary {
                mean: f64::NAN,
                sd: f64::NAN,
                n,
                half_width: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let sd = var.sqrt();
        Summary {
            mean,
            sd,
            n,
            half_width: 1.96 * sd / (n as f64).sqrt(),
        }
    }

    pub fn std_error(&self) -> f64 {
        self.sd / (self.n as f64).sqrt()
    }
}

// ---------------------------------------------------------------------------
// total variation

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TvEstimate {
    pub value: f64,
    pub n1: u64,
    pub n2: u64,
    /// Half-width of the 95% bootstrap percentile interval.
    pub half_width: f64,
}

/// `½ Σ |f₁ − f₂|` over the union of observed classes.
pub fn tv_value(c1: &Census, c2: &Census) -> f64 {
    if c1.total() == 0 || c2.total() == 0 {
        return if c1.total() == c2.total() { 0.0 } else { 1.0 };
    }
    let mut s = 0.0;
    for (k, _) in c1.iter() {
        s += (c1.frequency(k) - c2.frequency(k)).abs();
    }
    for (k, _) in c2.iter() {
        if c1.count(k) == 0 {
            s += c2.frequency(k);
        }
    }
    0.5 * s
}

/// Multinomial resample of a census' counts, by sequential binomials.
fn resample(counts: &[u64], rng: &mut Rng) -> Vec<u64> {
    let total: u64 = counts.iter().sum();
    let mut left = total;
    let mut mass_left = total;
    counts
        .iter()
        .map(|&c| {
            if left == 0 || mass_left == 0 {
                return 0;
            }
            let k = binomial(rng, left, c as f64 / mass_left as f64);
            left -= k;
            mass_left -= c;
            k
        })
        .collect()
}

/// Plug-in TV with a bootstrap interval from [`BOOTSTRAP_RESAMPLES`]
/// multinomial resamples of each census.
pub fn tv_between(c1: &Census, c2: &Census, seed: u64) -> Result<TvEstimate> {
    if c1.total() == 0 || c2.total() == 0 {
        return invalid("both censuses need at least one observation");
    }
    let value = tv_value(c1, c2);
    let mut keys: Vec<_> = c1.iter().map(|(k, _)| k.clone()).collect();
    keys.extend(
        c2.iter()
            .filter(|(k, _)| c1.count(k) == 0)
            .map(|(k, _)| k.clone()),
    );
    let a: Vec<u64> = keys.iter().map(|k| c1.count(k)).collect();
    let b: Vec<u64> = keys.iter().map(|k| c2.count(k)).collect();
    let (na, nb) = (c1.total() as f64, c2.total() as f64);
    let mut boot = replicates(seed, "tv-bootstrap", BOOTSTRAP_RESAMPLES, |rng, _| {
        let ra = resample(&a, rng);
        let rb = resample(&b, rng);
        0.5 * ra
            .iter()
            .zip(&rb)
            .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
            .sum::<f64>()
    });
    boot.sort_by(f64::total_cmp);
    let q = |p: f64| boot[((p * (boot.len() - 1) as f64).round() as usize).min(boot.len() - 1)];
    Ok(TvEstimate {
        value,
        n1: c1.total(),
        n2: c2.total(),
        half_width: 0.5 * (q(0.975) - q(0.025)),
    })
}

/// Census of `reps` graphs produced by `f`, one independent stream each.
pub fn census_replicates<F>(
    seed: u64,
    experiment: &str,
    reps: usize,
    vertex_limit: usize,
    f: F,
) -> Result<Census>
where
    F: Fn(&mut Rng) -> Result<Multigraph> + Sync,
{
    fold_replicates(
        seed,
        experiment,
        reps,
        || Ok(Census::with_limit(vertex_limit)),
        |acc: &mut Result<Census>, rng, _| {
            if let Ok(c) = acc {
                match f(rng) {
                    Ok(g) => c.add(&g),
                    Err(e) => *acc = Err(e),
                }
            }
        },
        |a, b| match (a, b) {
            (Ok(a), Ok(b)) => Ok(a.merge(b)),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
    )
}

// ---------------------------------------------------------------------------
// Poisson block tests

/// Pairwise disjoint index sets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockSpec {
    blocks: Vec<Vec<usize>>,
}

impl BlockSpec {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for b in &blocks {
            for &i in b {
                if !seen.insert(i) {
                    return invalid(format!("index {i} appears in two blocks"));
                }
            }
        }
        Ok(BlockSpec { blocks })
    }

    /// `count` consecutive indices per block starting at each `start`.
    pub fn ranges(starts: &[usize], count: usize) -> Result<Self> {
        Self::new(starts.iter().map(|&s| (s..s + count).collect()).collect())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    fn membership(&self, n: usize) -> Result<Vec<u32>> {
        let mut m = vec![u32::MAX; n];
        for (j, b) in self.blocks.iter().enumerate() {
            for &i in b {
                if i >= n {
                    return invalid(format!("block index {i} out of range 0..{n}"));
                }
                m[i] = j as u32;
            }
        }
        Ok(m)
    }

    /// Block pairs `(i, j)`, `i <= j`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let k = self.blocks.len();
        (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect()
    }
}

/// Empirical joint law of block-pair edge counts against an independent
/// Poisson product.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockCounts {
    pub pairs: Vec<(usize, usize)>,
    pub rates: Vec<f64>,
    #[serde(serialize_with = "joint_as_list")]
    pub joint: BTreeMap<Vec<u64>, u64>,
    pub reps: u64,
    pub warnings: Vec<String>,
}

fn joint_as_list<S: serde::Serializer>(
    j: &BTreeMap<Vec<u64>, u64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(j.len()))?;
    for (k, v) in j {
        seq.serialize_element(&(k, v))?;
    }
    seq.end()
}

impl BlockCounts {
    fn new(
        blocks: &BlockSpec,
        rates: Vec<f64>,
        per_rep: Vec<Vec<u64>>,
        warnings: Vec<String>,
    ) -> Self {
        let mut joint = BTreeMap::new();
        let reps = per_rep.len() as u64;
        for c in per_rep {
            *joint.entry(c).or_insert(0) += 1;
        }
        BlockCounts {
            pairs: blocks.pairs(),
            rates,
            joint,
            reps,
            warnings,
        }
    }

    pub fn means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.rates.len()];
        for (k, &c) in &self.joint {
            for (i, &x) in k.iter().enumerate() {
                m[i] += x as f64 * c as f64;
            }
        }
        m.iter().map(|x| x / self.reps as f64).collect()
    }

    pub fn reference_pmf(&self, counts: &[u64]) -> f64 {
        counts
            .iter()
            .zip(&self.rates)
            .map(|(&k, &r)| poisson_pmf(k as u32, r))
            .product()
    }

    /// `½ (Σ_obs |f̂ − p| + (1 − Σ_obs p))`, exact in the reference.
    pub fn tv_to_reference(&self) -> f64 {
        let mut s = 0.0;
        let mut covered = 0.0;
        for (k, &c) in &self.joint {
            let p = self.reference_pmf(k);
            covered += p;
            s += (c as f64 / self.reps as f64 - p).abs();
        }
        0.5 * (s + (1.0 - covered).max(0.0))
    }
}

fn pair_index(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows 0..i hold k, k-1, ..., k-i+1 pairs
    i * k - i * (i.saturating_sub(1)) / 2 + (j - i)
}

fn regime_warnings(sizes: &[usize], scale: f64, what: &str) -> Vec<String> {
    sizes
        .iter()
        .enumerate()
        .filter(|(_, &s)| s as f64 > 3.0 * scale)
        .map(|(j, &s)| format!("block {j}: {what} {s} exceeds 3·{scale:.1}"))
        .collect()
}

/// Edge counts between half-edge blocks of `CM_n(d)`; reference rates
/// `s_i s_j / ℓ_n` off the diagonal and `s_i² / 2ℓ_n` on it.
pub fn cm_block_edge_counts(
    d: &[u32],
    blocks: &BlockSpec,
    reps: usize,
    seed: u64,
) -> Result<BlockCounts> {
    let l = half_edge_total(d)? as usize;
    let member = blocks.membership(l)?;
    let k = blocks.blocks.len();
    let s = blocks.sizes();
    let rates = blocks
        .pairs()
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (s[i] as f64, s[j] as f64);
            if i == j {
                a * a / (2.0 * l as f64)
            } else {
                a * b / l as f64
            }
        })
        .collect();
    let n_pairs = k * (k + 1) / 2;
    let per_rep = replicates(seed, "cm-blocks", reps, |rng, _| {
        let mut h: Vec<u32> = (0..l as u32).collect();
        h.shuffle(rng);
        let mut c = vec![0u64; n_pairs];
        for p in h.chunks_exact(2) {
            let (a, b) = (member[p[0] as usize], member[p[1] as usize]);
            if a != u32::MAX && b != u32::MAX {
                c[pair_index(k, a as usize, b as usize)] += 1;
            }
        }
        c
    });
    let w = regime_warnings(&s, (l as f64).sqrt(), "size");
    Ok(BlockCounts::new(blocks, rates, per_rep, w))
}

/// Edge counts between vertex blocks of `PA_n(δ, m)`; reference rates
/// `2m S_i S_j / ℓ_δ²` and `m S_i² / ℓ_δ²` with `S_i = Σ_{v ∈ V_i} δ_v`.
pub fn pa_block_edge_counts(
    delta: &[f64],
    m: u64,
    blocks: &BlockSpec,
    reps: usize,
    seed: u64,
) -> Result<BlockCounts> {
    let n = delta.len();
    let member = blocks.membership(n)?;
    let k = blocks.blocks.len();
    let l: f64 = delta.iter().sum();
    let s: Vec<f64> = blocks
        .blocks
        .iter()
        .map(|b| b.iter().map(|&v| delta[v]).sum())
        .collect();
    let mf = m as f64;
    let rates = blocks
        .pairs()
        .iter()
        .map(|&(i, j)| {
            if i == j {
                mf * s[i] * s[i] / (l * l)
            } else {
                2.0 * mf * s[i] * s[j] / (l * l)
            }
        })
        .collect();
    let n_pairs = k * (k + 1) / 2;
    let per_rep: Result<Vec<Vec<u64>>> = replicates(seed, "pa-blocks", reps, |rng, _| {
        let el = preferential_attachment_edges(delta, m, rng)?;
        let mut c = vec![0u64; n_pairs];
        for &(u, v) in el.pairs() {
            let (a, b) = (member[u as usize], member[v as usize]);
            if a != u32::MAX && b != u32::MAX {
                c[pair_index(k, a as usize, b as usize)] += 1;
            }
        }
        Ok(c)
    })
    .into_iter()
    .collect();
    let mut w = Vec::new();
    let scale = l / (2.0 * mf).sqrt();
    for (j, &sj) in s.iter().enumerate() {
        if sj > 3.0 * scale {
            w.push(format!(
                "block {j}: S = {sj} exceeds 3·ℓ_δ/√(2m) = {:.1}",
                3.0 * scale
            ));
        }
    }
    if mf > 0.01 * l * l {
        w.push(format!("m = {m} is not small against ℓ_δ² = {:.0}", l * l));
    }
    Ok(BlockCounts::new(blocks, rates, per_rep?, w))
}

/// Edge counts between half-edge blocks of the bipartite configuration
/// model. Side-1 half-edges are `0..h`, side-2 half-edges `h..2h`. A given
/// side-1 half-edge meets a given side-2 half-edge with probability `1/h`,
/// so rates are `(|S_i1||S_j2| + |S_i2||S_j1|)/h` and `|S_i1||S_i2|/h`.
pub fn bcm_block_edge_counts(
    side1: &[u32],
    side2: &[u32],
    blocks: &BlockSpec,
    reps: usize,
    seed: u64,
) -> Result<BlockCounts> {
    let h = bipartite_half_total(side1, side2)? as usize;
    let member = blocks.membership(2 * h)?;
    let k = blocks.blocks.len();
    let split: Vec<(f64, f64)> = blocks
        .blocks
        .iter()
        .map(|b| {
            let s1 = b.iter().filter(|&&i| i < h).count() as f64;
            (s1, b.len() as f64 - s1)
        })
        .collect();
    let hf = h as f64;
    let rates = blocks
        .pairs()
        .iter()
        .map(|&(i, j)| {
            if i == j {
                split[i].0 * split[i].1 / hf
            } else {
                (split[i].0 * split[j].1 + split[i].1 * split[j].0) / hf
            }
        })
        .collect();
    let n_pairs = k * (k + 1) / 2;
    let per_rep = replicates(seed, "bcm-blocks", reps, |rng, _| {
        let mut perm: Vec<u32> = (0..h as u32).collect();
        perm.shuffle(rng);
        let mut c = vec![0u64; n_pairs];
        for (a, &b) in perm.iter().enumerate() {
            let (x, y) = (member[a], member[h + b as usize]);
            if x != u32::MAX && y != u32::MAX {
                c[pair_index(k, x as usize, y as usize)] += 1;
            }
        }
        c
    });
    let w = regime_warnings(&blocks.sizes(), (2.0 * hf).sqrt(), "size");
    Ok(BlockCounts::new(blocks, rates, per_rep, w))
}

// ---------------------------------------------------------------------------
// edge counts

/// `e(CM_n(d)) / ℓ_n` over `reps` draws.
pub fn cm_edge_fraction(d: &[u32], reps: usize, seed: u64) -> Result<Summary> {
    let l = half_edge_total(d)? as f64;
    let xs: Result<Vec<f64>> = replicates(seed, "cm-edge-fraction", reps, |rng, _| {
        Ok(configuration_model(d, rng)?.non_loop_edge_count() as f64 / l)
    })
    .into_iter()
    .collect();
    Ok(Summary::of(&xs?))
}

/// `e(erase(CM_n(d)))` over `reps` draws.
pub fn ecm_edge_counts(d: &[u32], reps: usize, seed: u64) -> Result<Summary> {
    let xs: Result<Vec<f64>> = replicates(seed, "ecm-edges", reps, |rng, _| {
        Ok(configuration_model(d, rng)?.erase().non_loop_edge_count() as f64)
    })
    .into_iter()
    .collect();
    Ok(Summary::of(&xs?))
}

/// `ℓ_n/2 · ∫∫ (1 − e^{−xy}) ρ_n(dx) ρ_n(dy)`, diagonal included.
pub fn ecm_expected_edges(d: &[u32]) -> Result<f64> {
    let l = half_edge_total(d)? as f64;
    let rho = empirical_degree_measure(d)?;
    Ok(0.5 * l * double_integral(&rho, |x, y| -(-x * y).exp_m1()))
}

fn grouped(w: &[f64]) -> Vec<(f64, f64)> {
    let mut s: Vec<f64> = w.to_vec();
    s.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for x in s {
        match out.last_mut() {
            Some((y, c)) if *y == x => *c += 1.0,
            _ => out.push((x, 1.0)),
        }
    }
    out
}

/// Exact `Σ_{i<j} w_i w_j / (L_n + w_i w_j)`.
pub fn grg_expected_edges(w: &[f64]) -> f64 {
    let l: f64 = w.iter().sum();
    let g = grouped(w);
    let p = |a: f64, b: f64| a * b / (l + a * b);
    let mut s = 0.0;
    for (i, &(a, na)) in g.iter().enumerate() {
        s += na * (na - 1.0) / 2.0 * p(a, a);
        for &(b, nb) in &g[i + 1..] {
            s += na * nb * p(a, b);
        }
    }
    s
}

/// `L_n/2 · ∫∫ xy/(1+xy) ρ_{n,w}(dx) ρ_{n,w}(dy)`.
pub fn grg_integral_form(w: &[f64]) -> Result<f64> {
    let l: f64 = w.iter().sum();
    Ok(0.5 * l * grg_scale(w)?)
}

/// `Σ_i w_i² / (L_n + w_i²)`, which bounds the integral form minus the
/// exact sum.
pub fn grg_diagonal_correction(w: &[f64]) -> f64 {
    let l: f64 = w.iter().sum();
    w.iter().map(|&x| x * x / (l + x * x)).sum()
}

/// `e(PA_n(δ, m)) / m` over `reps` draws.
pub fn pa_nonloop_fraction(delta: &[f64], m: u64, reps: usize, seed: u64) -> Result<Summary> {
    if m == 0 {
        return invalid("m must be at least 1");
    }
    let xs: Result<Vec<f64>> = replicates(seed, "pa-nonloop", reps, |rng, _| {
        Ok(preferential_attachment(delta, m, rng)?.non_loop_edge_count() as f64 / m as f64)
    })
    .into_iter()
    .collect();
    Ok(Summary::of(&xs?))
}

// ---------------------------------------------------------------------------
// GRG empty window

/// Monte Carlo value of `P(no edge in [0,t]²)` for the GRG kernel graphex
/// with measure `ρ` and drift `a`: the average over weight draws (Poisson
/// counts with means `t·m_j` for atoms at or above `eps_cut`) of
/// `e^{−a²t²/2} Π_{u<v} 1/(1+w_u w_v) e^{−a t Σ w_u}`.
pub fn grg_zero_point_oracle(
    rho: &DiscreteMeasure,
    a: f64,
    t: f64,
    eps_cut: f64,
    reps: usize,
    seed: u64,
) -> Result<Summary> {
    if !(t >= 0.0) || !(a >= 0.0) || reps == 0 {
        return invalid("oracle needs t >= 0, a >= 0 and reps >= 1");
    }
    let atoms: Vec<(f64, f64)> = rho
        .atoms()
        .iter()
        .copied()
        .filter(|&(x, _)| x >= eps_cut)
        .collect();
    let xs = replicates(seed, "grg-zero-point", reps, |rng, _| {
        let counts: Vec<(f64, f64)> = atoms
            .iter()
            .map(|&(x, m)| (x, poisson(rng, t * m) as f64))
            .filter(|&(_, n)| n > 0.0)
            .collect();
        let mut log_f = -a * a * t * t / 2.0;
        for (i, &(x, n)) in counts.iter().enumerate() {
            log_f -= a * t * x * n;
            log_f -= n * (n - 1.0) / 2.0 * (x * x).ln_1p();
            for &(y, n2) in &counts[i + 1..] {
                log_f -= n * n2 * (x * y).ln_1p();
            }
        }
        log_f.exp()
    });
    Ok(Summary::of(&xs))
}

// ---------------------------------------------------------------------------
// characteristic functions

/// Empirical `E[e^{iθX}]` with the standard error of the complex mean.
pub fn empirical_char_function(xs: &[f64], theta: f64) -> (Complex64, f64) {
    let n = xs.len() as f64;
    let vals: Vec<Complex64> = xs
        .iter()
        .map(|&x| Complex64::new(0.0, theta * x).exp())
        .collect();
    let mean = vals.iter().sum::<Complex64>() / n;
    let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Draws of `Y_n(1) = (1/√ℓ) Σ d_i 1{U_i <= 1}` with `U_i` uniform on
/// `[0, √ℓ]`, so each vertex is included with probability `1/√ℓ`.
pub fn degree_sum_draws(d: &[u32], reps: usize, seed: u64) -> Result<Vec<f64>> {
    let l = half_edge_total(d)? as f64;
    let s = l.sqrt();
    Ok(replicates(seed, "degree-sum", reps, |rng, _| {
        bernoulli_subset(rng, d.len(), 1.0 / s)
            .into_iter()
            .map(|i| d[i] as f64)
            .sum::<f64>()
            / s
    }))
}

// ---------------------------------------------------------------------------
// convergence

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub tv: TvEstimate,
    #[serde(skip)]
    pub model: Census,
    #[serde(skip)]
    pub graphex: Census,
}

/// Census of `canonical_sample(G, t)` over fresh model draws against the
/// census of `GP_t(graphex)`.
pub fn convergence_experiment(
    model: &Instance,
    graphex: &Multigraphex,
    t: f64,
    reps: usize,
    seed: u64,
    vertex_limit: usize,
) -> Result<ConvergenceReport> {
    let tag = format!("converge-{}", model.name());
    let a = census_replicates(seed, &format!("{tag}/model"), reps, vertex_limit, |rng| {
        if t == 0.0 {
            return Ok(Multigraph::empty(0));
        }
        let g = model.draw(rng)?;
        canonical_sample(&g, t, rng)
    })?;
    let b = census_replicates(seed, &format!("{tag}/graphex"), reps, vertex_limit, |rng| {
        graphex.sample_gp(t, rng)
    })?;
    let tv = tv_between(&a, &b, seed)?;
    Ok(ConvergenceReport {
        tv,
        model: a,
        graphex: b,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub pooled: f64,
    pub max_gap: f64,
    pub per_graph: Vec<f64>,
}

/// For each of `reps_outer` model draws, the label-only estimate of
/// `P(ξ_n(A × B) = l)` from `reps_inner` canonical labelings; reports the
/// largest deviation from the pooled estimate.
pub fn quenched_annealed_gap(
    model: &Instance,
    a: &[Interval],
    b: &[Interval],
    l: u64,
    reps_outer: usize,
    reps_inner: usize,
    seed: u64,
) -> Result<GapReport> {
    if reps_outer == 0 || reps_inner == 0 {
        return invalid("replicate counts must be positive");
    }
    let per_graph: Result<Vec<f64>> = replicates(seed, "qa-gap/outer", reps_outer, |rng, r| {
        let g = model.draw(rng)?;
        let mut hits = 0u64;
        for i in 0..reps_inner {
            let mut inner = stream(seed ^ (r as u64).rotate_left(32), "qa-gap/inner", i as u64);
            if label_canonical(&g, &mut inner)?.count(a, b) == l {
                hits += 1;
            }
        }
        Ok(hits as f64 / reps_inner as f64)
    })
    .into_iter()
    .collect();
    let per_graph = per_graph?;
    let pooled = per_graph.iter().sum::<f64>() / per_graph.len() as f64;
    let max_gap = per_graph
        .iter()
        .map(|p| (p - pooled).abs())
        .fold(0.0, f64::max);
    Ok(GapReport {
        pooled,
        max_gap,
        per_graph,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::canonical_key;
    use crate::generators::generalized_random_graph;
    use crate::graphex::Kind;
    use proptest::prelude::*;

    fn census(graphs: &[(Multigraph, u64)]) -> Census {
        let mut c = Census::new();
        for (g, k) in graphs {
            c.add_key(canonical_key(g).unwrap(), *k);
        }
        c
    }

    fn edge() -> Multigraph {
        Multigraph::from_pairs(2, &[(0, 1)]).unwrap()
    }

    fn path() -> Multigraph {
        Multigraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn empty() -> Multigraph {
        Multigraph::empty(0)
    }

    #[test]
    fn tv_examples() {
        let a = census(&[(edge(), 1), (path(), 1)]);
        let b = census(&[(edge(), 2)]);
        assert!((tv_value(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(tv_value(&a, &a), 0.0);
        let c = census(&[(empty(), 3)]);
        assert_eq!(tv_value(&b, &c), 1.0);
        let est = tv_between(&a, &b, 1).unwrap();
        assert_eq!(est.value, 0.5);
        assert!(est.half_width > 0.0);
        assert!(tv_between(&a, &Census::new(), 1).is_err());
    }

    #[test]
    fn pair_indexing() {
        let k = 3;
        let expect = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        for (n, &(i, j)) in expect.iter().enumerate() {
            assert_eq!(pair_index(k, i, j), n);
            assert_eq!(pair_index(k, j, i), n);
        }
    }

    #[test]
    fn block_spec_rejects_overlap() {
        assert!(BlockSpec::new(vec![vec![0, 1], vec![1, 2]]).is_err());
        let b = BlockSpec::ranges(&[0, 5], 5).unwrap();
        assert_eq!(b.sizes(), vec![5, 5]);
    }

    #[test]
    fn cm_block_examples() {
        let d = vec![1u32; 400];
        let empty = BlockSpec::new(vec![vec![]]).unwrap();
        let r = cm_block_edge_counts(&d, &empty, 50, 1).unwrap();
        assert_eq!(r.means(), vec![0.0]);
        assert_eq!(r.tv_to_reference(), 0.0);
        // s = √ℓ per block
        let d = vec![1u32; 10_000];
        let b = BlockSpec::ranges(&[0, 100], 100).unwrap();
        let r = cm_block_edge_counts(&d, &b, 20_000, 2).unwrap();
        let m = r.means();
        assert!((m[1] - 1.0).abs() < 3.0 * (1.0 / 20_000f64).sqrt());
        // exact diagonal mean C(100,2)/(ℓ−1) sits just below the rate s²/2ℓ
        assert_eq!(r.rates[0], 0.5);
        assert!((m[0] - 4950.0 / 9999.0).abs() < 3.0 * (0.5 / 20_000f64).sqrt());
        assert!(r.tv_to_reference() < 0.05);
    }

    #[test]
    fn cm_block_rates_improve_with_n() {
        // fixed s/√ℓ = 1; exact mean s²/(ℓ−1)·... drifts toward the rate
        let mut errs = Vec::new();
        for l in [100u32, 400, 1600] {
            let s = (l as f64).sqrt() as usize;
            let d = vec![1u32; l as usize];
            let b = BlockSpec::ranges(&[0, s], s).unwrap();
            let r = cm_block_edge_counts(&d, &b, 4000, l as u64).unwrap();
            let err: f64 = r
                .means()
                .iter()
                .zip(&r.rates)
                .map(|(m, x)| (m - x).abs())
                .sum();
            errs.push((err, r.tv_to_reference()));
        }
        assert!(errs[2].1 < errs[0].1 + 0.02, "{errs:?}");
    }

    #[test]
    fn bcm_block_examples() {
        let side = vec![1u32; 100];
        // two blocks inside side 1 never meet
        let b = BlockSpec::ranges(&[0, 10], 10).unwrap();
        let r = bcm_block_edge_counts(&side, &side, &b, 100, 3).unwrap();
        assert!(r.rates.iter().all(|&x| x == 0.0));
        assert!(r.means().iter().all(|&x| x == 0.0));
        // diagonal block: 10 side-1 and 10 side-2 half-edges, rate 100/100
        let b = BlockSpec::new(vec![(0..10).chain(100..110).collect()]).unwrap();
        let r = bcm_block_edge_counts(&side, &side, &b, 20_000, 4).unwrap();
        assert_eq!(r.rates, vec![1.0]);
        assert!((r.means()[0] - 1.0).abs() < 3.0 * (1.0 / 20_000f64).sqrt());
    }

    #[test]
    fn pa_block_examples() {
        let delta = vec![1.0; 50];
        let b = BlockSpec::new(vec![vec![]]).unwrap();
        let r = pa_block_edge_counts(&delta, 10, &b, 20, 5).unwrap();
        assert_eq!(r.means(), vec![0.0]);
        let all = BlockSpec::new(vec![(0..50).collect()]).unwrap();
        let r = pa_block_edge_counts(&delta, 10, &all, 20, 5).unwrap();
        assert_eq!(r.means(), vec![10.0]);
        assert!((r.rates[0] - 10.0).abs() < 1e-12);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn edge_fraction_examples() {
        let s = cm_edge_fraction(&[1, 1], 20, 6).unwrap();
        assert_eq!((s.mean, s.sd), (0.5, 0.0));
        let s = cm_edge_fraction(&[2], 20, 6).unwrap();
        assert_eq!((s.mean, s.sd), (0.0, 0.0));
        let s = pa_nonloop_fraction(&[1.0], 5, 10, 6).unwrap();
        assert_eq!(s.mean, 0.0);
        let s = pa_nonloop_fraction(&[1.0, 1.0], 1, 40_000, 7).unwrap();
        assert!((s.mean - 0.5).abs() < 3.0 * 0.5 / 200.0);
        let s = pa_nonloop_fraction(&vec![1.0; 2000], 1000, 20, 8).unwrap();
        assert!(s.mean >= 0.99);
    }

    #[test]
    fn ecm_prediction_examples() {
        // atoms at 1/√2, mass 1/√2 each: ℓ/2 · 4 · ½ (1 − e^{−1/2})
        let p = ecm_expected_edges(&[1, 1]).unwrap();
        assert!((p - 2.0 * (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        // small degrees: 1 − e^{−xy} ≈ xy, prediction → ℓ/2
        let d = vec![1u32; 100_000];
        let p = ecm_expected_edges(&d).unwrap();
        assert!((p / 50_000.0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn grg_expected_examples() {
        assert!((grg_expected_edges(&[1.0, 1.0]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(grg_expected_edges(&[3.0]), 0.0);
        let w: Vec<f64> = (1..60).map(|i| (i % 7 + 1) as f64).collect();
        // brute force
        let l: f64 = w.iter().sum();
        let mut brute = 0.0;
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                brute += w[i] * w[j] / (l + w[i] * w[j]);
            }
        }
        assert!((grg_expected_edges(&w) - brute).abs() < 1e-9);
        let gap = grg_integral_form(&w).unwrap() - brute;
        assert!(gap >= 0.0 && gap <= grg_diagonal_correction(&w) + 1e-9);
        let reps = 4000;
        let e: Vec<f64> = (0..reps)
            .map(|r| {
                generalized_random_graph(&w, &mut stream(9, "grg-e", r))
                    .unwrap()
                    .non_loop_edge_count() as f64
            })
            .collect();
        let s = Summary::of(&e);
        assert!((s.mean - brute).abs() < 3.0 * s.std_error());
    }

    #[test]
    fn zero_point_oracle_examples() {
        let none = DiscreteMeasure::empty();
        assert_eq!(
            grg_zero_point_oracle(&none, 0.0, 1.3, 0.0, 10, 1)
                .unwrap()
                .mean,
            1.0
        );
        let s = grg_zero_point_oracle(&none, 0.7, 1.3, 0.0, 10, 1).unwrap();
        assert!((s.mean - (-0.49f64 * 1.69 / 2.0).exp()).abs() < 1e-12);
        // ρ = λ δ_1: Σ_N Poisson(tλ) · 2^{−N(N−1)/2}
        let (lam, t) = (1.5, 1.2);
        let rho = DiscreteMeasure::new([(1.0, lam)]).unwrap();
        let mut exact = 0.0;
        let mut pn = (-t * lam).exp();
        for n in 0..60 {
            if n > 0 {
                pn *= t * lam / n as f64;
            }
            exact += pn * 2f64.powf(-(n * (n - 1)) as f64 / 2.0);
        }
        let s = grg_zero_point_oracle(&rho, 0.0, t, 0.0, 40_000, 2).unwrap();
        assert!((s.mean - exact).abs() < 3.0 * s.std_error());
        // the oracle is P(GP_t(GrgKernel) is empty)
        let g = Multigraphex::grg_kernel(rho.clone(), 0.3, 1.0).unwrap();
        let reps = 40_000;
        let empty = (0..reps)
            .filter(|&r| {
                g.sample_gp(t, &mut stream(10, "grg-empty", r))
                    .unwrap()
                    .is_empty()
            })
            .count() as f64
            / reps as f64;
        let o = grg_zero_point_oracle(&rho, 0.3, t, 0.0, reps as usize, 3).unwrap();
        let se = (empty * (1.0 - empty) / reps as f64).sqrt() + o.std_error();
        assert!((empty - o.mean).abs() < 3.0 * se);
    }

    #[test]
    fn zero_point_monotone_in_atoms() {
        let base = DiscreteMeasure::new([(1.0, 1.0)]).unwrap();
        let more = DiscreteMeasure::new([(1.0, 1.0), (0.5, 1.0)]).unwrap();
        let p0 = grg_zero_point_oracle(&base, 0.2, 1.0, 0.0, 20_000, 4).unwrap();
        let p1 = grg_zero_point_oracle(&more, 0.2, 1.0, 0.0, 20_000, 4).unwrap();
        assert!(p1.mean <= p0.mean + 3.0 * (p0.std_error() + p1.std_error()));
        // dropping atoms below a cut changes the value by at most the
        // probability that any of them is present
        let cut = grg_zero_point_oracle(&more, 0.2, 1.0, 0.75, 20_000, 4).unwrap();
        assert!((cut.mean - p1.mean).abs() <= 1.0 - (-1.0f64).exp() + 0.02);
    }

    #[test]
    fn degree_sum_cf_matches() {
        let mut d = vec![10u32; 20];
        d.extend(vec![1u32; 200]);
        let l = 400.0;
        let rho = empirical_degree_measure(&d).unwrap();
        let ys = degree_sum_draws(&d, 20_000, 11).unwrap();
        let slack: f64 = d.iter().map(|&x| (x as f64).powi(2)).sum::<f64>() / (l * l);
        for theta in [-1.0, 0.5, 2.0] {
            let (emp, se) = empirical_char_function(&ys, theta);
            let target = crate::measures::crm_char_function(&rho, 0.0, 1.0, theta);
            assert!((emp - target).norm() < 3.0 * se + slack, "θ={theta}");
        }
    }

    #[test]
    fn convergence_degenerate_cases() {
        let model = Instance::Cm(vec![1, 1]);
        let g = Multigraphex::pure_dust(0.5).unwrap();
        let r = convergence_experiment(&model, &g, 0.0, 50, 1, 9).unwrap();
        assert_eq!(r.tv.value, 0.0);
        let r = convergence_experiment(&Instance::Cm(vec![4]), &g, 1.0, 5, 1, 9);
        assert!(r.is_err());
    }

    #[test]
    fn null_experiment_is_calibrated() {
        let model = Instance::Cm(vec![1; 400]);
        let a = census_replicates(1, "null-a", 20_000, 9, |rng| {
            canonical_sample(&model.draw(rng)?, 1.0, rng)
        })
        .unwrap();
        let b = census_replicates(1, "null-b", 20_000, 9, |rng| {
            canonical_sample(&model.draw(rng)?, 1.0, rng)
        })
        .unwrap();
        let est = tv_between(&a, &b, 2).unwrap();
        assert!(est.value <= 2.0 * est.half_width + 0.005, "{est:?}");
        match model.limit(0.1).unwrap().kind() {
            Kind::RankOne { rho, .. } => assert!(rho.is_empty()),
            _ => panic!(),
        }
    }

    #[test]
    fn quenched_gap_examples() {
        let m = Instance::Cm(vec![1, 1]);
        let all = [Interval::new(0.0, 10.0)];
        let r = quenched_annealed_gap(&m, &all, &all, 2, 5, 200, 3).unwrap();
        // one edge, both labels in [0, √2): ξ(A×A) = 2 every time
        assert_eq!(r.pooled, 1.0);
        assert_eq!(r.max_gap, 0.0);
        let r = quenched_annealed_gap(&m, &all, &all, 7, 5, 50, 3).unwrap();
        assert_eq!((r.pooled, r.max_gap), (0.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tv_is_a_metric(
            xs in prop::collection::vec((0u8..4, 1u64..20), 1..4),
            ys in prop::collection::vec((0u8..4, 1u64..20), 1..4),
            zs in prop::collection::vec((0u8..4, 1u64..20), 1..4),
        ) {
            let shapes = [edge(), path(), empty(), edge().disjoint_union(&edge())];
            let mk = |v: &[(u8, u64)]| {
                let g: Vec<(Multigraph, u64)> = v.iter().map(|&(i, k)| (shapes[i as usize].clone(), k)).collect();
                census(&g)
            };
            let (a, b, c) = (mk(&xs), mk(&ys), mk(&zs));
            let ab = tv_value(&a, &b);
            prop_assert!((ab - tv_value(&b, &a)).abs() < 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
            prop_assert!(tv_value(&a, &c) <= ab + tv_value(&b, &c) + 1e-12);
        }

        #[test]
        fn resample_preserves_total(counts in prop::collection::vec(0u64..50, 1..8), seed in 0u64..100) {
            let r = resample(&counts, &mut stream(seed, "resample", 0));
            prop_assert_eq!(r.iter().sum::<u64>(), counts.iter().sum::<u64>());
            for (x, c) in r.iter().zip(&counts) {
                if *c == 0 { prop_assert_eq!(*x, 0); }
            }
        }
    }
}
