//! The acceptance suite: sixteen Monte Carlo checks at desk scale, shared by
//! the `acceptance` test target and `graphex suite`.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    bcm_block_edge_counts, census_replicates, cm_block_edge_counts, cm_edge_fraction,
    degree_sum_draws, ecm_expected_edges, empirical_char_function, grg_diagonal_correction,
    grg_expected_edges, grg_integral_form, grg_zero_point_oracle, pa_block_edge_counts,
    pa_nonloop_fraction, tv_between, BlockSpec, Summary,
};
use crate::canon::DEFAULT_VERTEX_LIMIT;
use crate::error::Result;
use crate::families::f_star;
use crate::generators::{
    bipartite_configuration_model, configuration_model, generalized_random_graph,
    preferential_attachment,
};
use crate::graphex::{hub_split, limit_of_cm, weight_measure, Multigraphex, DEFAULT_HUB_THRESHOLD};
use crate::measures::{
    crm_char_function, empirical_degree_measure, sample_crm, tail_regularity_deficit,
};
use crate::multigraph::Multigraph;
use crate::rng::{replicates, stream};
use crate::sampling::{canonical_sample, label};

#[derive(Clone, Copy, Debug)]
pub struct CriterionInfo {
    pub id: u32,
    pub name: &'static str,
    pub group: &'static str,
    pub budget_secs: f64,
}

pub const CRITERIA: [CriterionInfo; 16] = [
    CriterionInfo {
        id: 1,
        name: "cm edge fraction",
        group: "cm",
        budget_secs: 10.0,
    },
    CriterionInfo {
        id: 2,
        name: "ecm expected edges",
        group: "cm",
        budget_secs: 10.0,
    },
    CriterionInfo {
        id: 3,
        name: "cm poisson blocks",
        group: "cm",
        budget_secs: 30.0,
    },
    CriterionInfo {
        id: 4,
        name: "pure dust convergence",
        group: "cm",
        budget_secs: 60.0,
    },
    CriterionInfo {
        id: 5,
        name: "rank-one convergence",
        group: "cm",
        budget_secs: 180.0,
    },
    CriterionInfo {
        id: 6,
        name: "pa vs cm limit",
        group: "pa",
        budget_secs: 180.0,
    },
    CriterionInfo {
        id: 7,
        name: "pa non-loop fraction",
        group: "pa",
        budget_secs: 30.0,
    },
    CriterionInfo {
        id: 8,
        name: "pa poisson blocks",
        group: "pa",
        budget_secs: 60.0,
    },
    CriterionInfo {
        id: 9,
        name: "grg empty window",
        group: "grg",
        budget_secs: 120.0,
    },
    CriterionInfo {
        id: 10,
        name: "grg expected edges",
        group: "grg",
        budget_secs: 10.0,
    },
    CriterionInfo {
        id: 11,
        name: "bcm poisson blocks",
        group: "bcm",
        budget_secs: 60.0,
    },
    CriterionInfo {
        id: 12,
        name: "bcm pure stars",
        group: "bcm",
        budget_secs: 60.0,
    },
    CriterionInfo {
        id: 13,
        name: "degree-sum characteristic function",
        group: "cm",
        budget_secs: 30.0,
    },
    CriterionInfo {
        id: 14,
        name: "rescaling law",
        group: "graphex",
        budget_secs: 120.0,
    },
    CriterionInfo {
        id: 15,
        name: "sampling/labeling equivalence",
        group: "sampling",
        budget_secs: 30.0,
    },
    CriterionInfo {
        id: 16,
        name: "tail regularity",
        group: "cm",
        budget_secs: 5.0,
    },
];

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Multiplies every replicate count; values below 1 trade precision for
    /// speed.
    pub reps_scale: f64,
    /// Restrict to one group (`cm`, `pa`, `grg`, `bcm`, `graphex`, `sampling`).
    pub only: Option<String>,
    /// Also require each criterion to finish within its time budget.
    pub enforce_runtime: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 20_240_501,
            reps_scale: 1.0,
            only: None,
            enforce_runtime: true,
        }
    }
}

impl SuiteConfig {
    fn reps(&self, n: usize) -> usize {
        ((n as f64 * self.reps_scale).round() as usize).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub group: String,
    pub passed: bool,
    pub statistic_passed: bool,
    pub runtime_secs: f64,
    pub budget_secs: f64,
    pub detail: String,
    pub values: Value,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {:<36} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.runtime_secs,
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub reps_scale: f64,
    pub passed: bool,
    pub total_runtime_secs: f64,
    pub criteria: Vec<CriterionResult>,
}

struct Outcome {
    ok: bool,
    detail: String,
    values: Value,
}

fn outcome(ok: bool, detail: String, values: Value) -> Result<Outcome> {
    Ok(Outcome { ok, detail, values })
}

/// Runs one criterion; errors inside the check count as failures.
pub fn run_criterion(id: u32, cfg: &SuiteConfig) -> CriterionResult {
    let info = CRITERIA
        .iter()
        .find(|c| c.id == id)
        .expect("known criterion id");
    let start = Instant::now();
    let out = match id {
        1 => c1(cfg),
        2 => c2(cfg),
        3 => c3(cfg),
        4 => c4(cfg),
        5 => c5(cfg),
        6 => c6(cfg),
        7 => c7(cfg),
        8 => c8(cfg),
        9 => c9(cfg),
        10 => c10(cfg),
        11 => c11(cfg),
        12 => c12(cfg),
        13 => c13(cfg),
        14 => c14(cfg),
        15 => c15(cfg),
        16 => c16(cfg),
        _ => unreachable!(),
    };
    let runtime = start.elapsed().as_secs_f64();
    let out = out.unwrap_or_else(|e| Outcome {
        ok: false,
        detail: format!("error: {e}"),
        values: Value::Null,
    });
    let in_time = !cfg.enforce_runtime || runtime < info.budget_secs;
    let detail = if in_time {
        out.detail
    } else {
        format!("{} (over the {}s budget)", out.detail, info.budget_secs)
    };
    CriterionResult {
        id,
        name: info.name.into(),
        group: info.group.into(),
        passed: out.ok && in_time,
        statistic_passed: out.ok,
        runtime_secs: runtime,
        budget_secs: info.budget_secs,
        detail,
        values: out.values,
    }
}

/// Runs every selected criterion in order, calling `progress` after each.
pub fn run_suite(cfg: &SuiteConfig, mut progress: impl FnMut(&CriterionResult)) -> SuiteReport {
    let start = Instant::now();
    let mut criteria = Vec::new();
    for info in CRITERIA.iter() {
        if cfg.only.as_deref().is_some_and(|g| g != info.group) {
            continue;
        }
        let r = run_criterion(info.id, cfg);
        progress(&r);
        criteria.push(r);
    }
    SuiteReport {
        seed: cfg.seed,
        reps_scale: cfg.reps_scale,
        passed: criteria.iter().all(|c| c.passed),
        total_runtime_secs: start.elapsed().as_secs_f64(),
        criteria,
    }
}

fn f_star_weights() -> Vec<f64> {
    f_star().iter().map(|&d| d as f64).collect()
}

/// Every component is a simple star: no loops or multi-edges, and each edge
/// has an endpoint of degree one.
pub fn is_star_forest(g: &Multigraph) -> bool {
    let deg = g.degrees();
    g.edges()
        .iter()
        .all(|e| !e.is_loop() && e.mult == 1 && (deg[e.u as usize] == 1 || deg[e.v as usize] == 1))
}

fn c1(cfg: &SuiteConfig) -> Result<Outcome> {
    let s = cm_edge_fraction(&f_star(), cfg.reps(500), cfg.seed)?;
    outcome(
        (0.4965..=0.5).contains(&s.mean),
        format!("mean e/ℓ = {:.5} in [0.4965, 0.5]", s.mean),
        json!({ "mean": s.mean, "sd": s.sd, "reps": s.n }),
    )
}

fn c2(cfg: &SuiteConfig) -> Result<Outcome> {
    let d = f_star();
    let pred = ecm_expected_edges(&d)?;
    let draws = replicates(cfg.seed, "c2-draws", cfg.reps(500), |rng, _| {
        configuration_model(&d, rng).map(|g| g.erase().non_loop_edge_count() as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let s = Summary::of(&draws);
    // bootstrap standard error of the mean
    let boot: Vec<f64> = replicates(cfg.seed, "c2-bootstrap", 200, |rng, _| {
        use rand::Rng as _;
        (0..draws.len())
            .map(|_| draws[rng.random_range(0..draws.len())])
            .sum::<f64>()
            / draws.len() as f64
    });
    let sigma = Summary::of(&boot).sd;
    let gap = (s.mean - pred).abs();
    let tol = 3.0 * sigma + 100.0;
    outcome(
        gap <= tol,
        format!("|{:.1} − {:.1}| = {:.1} <= {:.1}", s.mean, pred, gap, tol),
        json!({ "empirical": s.mean, "prediction": pred, "bootstrap_sigma": sigma }),
    )
}

fn c3(cfg: &SuiteConfig) -> Result<Outcome> {
    let blocks = BlockSpec::ranges(&[0, 100], 100)?;
    let r = cm_block_edge_counts(&f_star(), &blocks, cfg.reps(10_000), cfg.seed)?;
    let tv = r.tv_to_reference();
    outcome(
        tv <= 0.05,
        format!("TV to Poisson(1/2, 1, 1/2) = {tv:.4} <= 0.05"),
        json!({ "tv": tv, "rates": r.rates, "means": r.means() }),
    )
}

fn tv_outcome(
    a: &crate::census::Census,
    b: &crate::census::Census,
    seed: u64,
    limit: f64,
) -> Result<Outcome> {
    let tv = tv_between(a, b, seed)?;
    outcome(
        tv.value <= limit,
        format!("TV = {:.4} ± {:.4} <= {limit}", tv.value, tv.half_width),
        serde_json::to_value(tv)?,
    )
}

fn model_vs_graphex(
    cfg: &SuiteConfig,
    tag: &str,
    reps: usize,
    model: impl Fn(&mut crate::rng::Rng) -> Result<Multigraph> + Sync,
    graphex: &Multigraphex,
    t: f64,
    limit: f64,
) -> Result<Outcome> {
    let a = census_replicates(
        cfg.seed,
        &format!("{tag}/model"),
        reps,
        DEFAULT_VERTEX_LIMIT,
        |rng| {
            let g = model(rng)?;
            canonical_sample(&g, t, rng)
        },
    )?;
    let b = census_replicates(
        cfg.seed,
        &format!("{tag}/graphex"),
        reps,
        DEFAULT_VERTEX_LIMIT,
        |rng| graphex.sample_gp(t, rng),
    )?;
    tv_outcome(&a, &b, cfg.seed, limit)
}

fn c4(cfg: &SuiteConfig) -> Result<Outcome> {
    let d = vec![1u32; 5000];
    let g = Multigraphex::pure_dust(0.5)?;
    model_vs_graphex(
        cfg,
        "c4",
        cfg.reps(100_000),
        |rng| configuration_model(&d, rng),
        &g,
        1.0,
        0.05,
    )
}

fn c5(cfg: &SuiteConfig) -> Result<Outcome> {
    let d = f_star();
    let g = limit_of_cm(&d, DEFAULT_HUB_THRESHOLD)?;
    model_vs_graphex(
        cfg,
        "c5",
        cfg.reps(100_000),
        |rng| configuration_model(&d, rng),
        &g,
        1.0,
        0.08,
    )
}

fn c6(cfg: &SuiteConfig) -> Result<Outcome> {
    let delta = f_star_weights();
    let g = limit_of_cm(&f_star(), DEFAULT_HUB_THRESHOLD)?;
    model_vs_graphex(
        cfg,
        "c6",
        cfg.reps(50_000),
        |rng| preferential_attachment(&delta, 5000, rng),
        &g,
        1.0,
        0.10,
    )
}

fn c7(cfg: &SuiteConfig) -> Result<Outcome> {
    let s = pa_nonloop_fraction(&f_star_weights(), 5000, cfg.reps(200), cfg.seed)?;
    outcome(
        s.mean >= 0.99,
        format!("mean e/m = {:.5} >= 0.99", s.mean),
        json!({ "mean": s.mean, "sd": s.sd, "reps": s.n }),
    )
}

fn c8(cfg: &SuiteConfig) -> Result<Outcome> {
    // hubs 0 and 1 have δ = 100 = ℓ_δ/√(2m) each
    let blocks = BlockSpec::new(vec![vec![0], vec![1]])?;
    let r = pa_block_edge_counts(&f_star_weights(), 5000, &blocks, cfg.reps(10_000), cfg.seed)?;
    let tv = r.tv_to_reference();
    outcome(
        tv <= 0.05,
        format!("TV to Poisson product = {tv:.4} <= 0.05"),
        json!({ "tv": tv, "rates": r.rates, "means": r.means(), "warnings": r.warnings }),
    )
}

fn c9(cfg: &SuiteConfig) -> Result<Outcome> {
    let w = f_star_weights();
    let t = 1.0;
    let l: f64 = w.iter().sum();
    let c = 2.0 * grg_expected_edges(&w) / l;
    let reps = cfg.reps(100_000);
    let hits = replicates(cfg.seed, "c9/grg", reps, |rng, _| -> Result<bool> {
        let g = generalized_random_graph(&w, rng)?;
        Ok(canonical_sample(&g, t, rng)?.is_empty())
    })
    .into_iter()
    .collect::<Result<Vec<bool>>>()?;
    let p_emp = hits.iter().filter(|&&h| h).count() as f64 / reps as f64;
    let rho = weight_measure(&w)?;
    let oracle = grg_zero_point_oracle(&rho, 0.0, t / c.sqrt(), 0.0, reps, cfg.seed)?;
    let gap = (p_emp - oracle.mean).abs();
    outcome(
        gap <= 0.02,
        format!(
            "|{:.4} − {:.4}| = {:.4} <= 0.02 (c = {:.4})",
            p_emp, oracle.mean, gap, c
        ),
        json!({ "empirical": p_emp, "oracle": oracle.mean, "oracle_se": oracle.std_error(), "c": c }),
    )
}

fn c10(cfg: &SuiteConfig) -> Result<Outcome> {
    let w = f_star_weights();
    let exact = grg_expected_edges(&w);
    let integral = grg_integral_form(&w)?;
    let bound = grg_diagonal_correction(&w);
    let reps = cfg.reps(500);
    let e = replicates(cfg.seed, "c10", reps, |rng, _| {
        generalized_random_graph(&w, rng).map(|g| g.non_loop_edge_count() as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let s = Summary::of(&e);
    let forms_ok = (integral - exact).abs() <= bound;
    let mc_ok = (s.mean - exact).abs() <= 3.0 * s.std_error();
    outcome(
        forms_ok && mc_ok,
        format!(
            "|integral − exact| = {:.2} <= {:.2}; |{:.1} − {:.1}| <= 3σ = {:.1}",
            (integral - exact).abs(),
            bound,
            s.mean,
            exact,
            3.0 * s.std_error()
        ),
        json!({ "exact": exact, "integral": integral, "bound": bound, "empirical": s.mean, "se": s.std_error() }),
    )
}

fn bcm_family() -> Vec<u32> {
    let mut d = vec![100u32; 25];
    d.extend(std::iter::repeat_n(1u32, 2500));
    d
}

fn c11(cfg: &SuiteConfig) -> Result<Outcome> {
    let side = bcm_family();
    let h = 5000;
    // each block: 50 side-1 and 50 side-2 half-edges
    let blocks = BlockSpec::new(vec![
        (0..50).chain(h..h + 50).collect(),
        (50..100).chain(h + 50..h + 100).collect(),
    ])?;
    let r = bcm_block_edge_counts(&side, &side, &blocks, cfg.reps(10_000), cfg.seed)?;
    let tv = r.tv_to_reference();
    outcome(
        tv <= 0.05,
        format!("TV to Poisson(1/2, 1, 1/2) = {tv:.4} <= 0.05"),
        json!({ "tv": tv, "rates": r.rates, "means": r.means() }),
    )
}

fn c12(cfg: &SuiteConfig) -> Result<Outcome> {
    let hubs = vec![100u32; 50];
    let leaves = vec![1u32; 5000];
    let reps = cfg.reps(10_000);
    let c = census_replicates(cfg.seed, "c12", reps, DEFAULT_VERTEX_LIMIT, |rng| {
        let g = bipartite_configuration_model(&hubs, &leaves, rng)?.graph;
        canonical_sample(&g, 1.0, rng)
    })?;
    let mut bad = 0u64;
    for (k, n) in c.iter() {
        // oversize samples cannot be inspected and count against the check
        if k.to_graph().is_none_or(|g| !is_star_forest(&g)) {
            bad += n;
        }
    }
    let f = bad as f64 / c.total() as f64;
    outcome(
        f <= 0.01,
        format!("non-star frequency = {f:.4} <= 0.01"),
        json!({ "non_star_frequency": f, "classes": c.n_classes() }),
    )
}

fn c13(cfg: &SuiteConfig) -> Result<Outcome> {
    let d = f_star();
    let l = 10_000.0;
    let rho_n = empirical_degree_measure(&d)?;
    let slack: f64 = d.iter().map(|&x| (x as f64).powi(2)).sum::<f64>() / (l * l);
    let reps = cfg.reps(10_000);
    let ys = degree_sum_draws(&d, reps, cfg.seed)?;
    let (rho, a) = hub_split(&rho_n, DEFAULT_HUB_THRESHOLD);
    let crm: Vec<f64> = replicates(cfg.seed, "c13/crm", reps, |rng, _| {
        sample_crm(&rho, a, 1.0, rng).map(|s| s.mass(0.0, 1.0))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for theta in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
        let (e1, s1) = empirical_char_function(&ys, theta);
        let t1 = crm_char_function(&rho_n, 0.0, 1.0, theta);
        let (e2, s2) = empirical_char_function(&crm, theta);
        let t2 = crm_char_function(&rho, a, 1.0, theta);
        let r1 = (e1 - t1).norm() / (3.0 * s1 + slack);
        let r2 = (e2 - t2).norm() / (3.0 * s2 + slack);
        ok &= r1 <= 1.0 && r2 <= 1.0;
        worst = worst.max(r1).max(r2);
        rows.push(
            json!({ "theta": theta, "degree_sum_gap": (e1 - t1).norm(), "crm_gap": (e2 - t2).norm(),
            "degree_sum_tol": 3.0 * s1 + slack, "crm_tol": 3.0 * s2 + slack }),
        );
    }
    outcome(
        ok,
        format!("worst gap / (3σ + Σd²/ℓ²) = {worst:.3} <= 1"),
        json!({ "slack": slack, "thetas": rows }),
    )
}

fn c14(cfg: &SuiteConfig) -> Result<Outcome> {
    let g = limit_of_cm(&f_star(), DEFAULT_HUB_THRESHOLD)?;
    let g4 = g.rescale(4.0)?;
    let reps = cfg.reps(100_000);
    let a = census_replicates(
        cfg.seed,
        "c14/rescaled",
        reps,
        DEFAULT_VERTEX_LIMIT,
        |rng| g4.sample_gp(1.0, rng),
    )?;
    let b = census_replicates(cfg.seed, "c14/half", reps, DEFAULT_VERTEX_LIMIT, |rng| {
        g.sample_gp(0.5, rng)
    })?;
    tv_outcome(&a, &b, cfg.seed, 0.03)
}

/// A fixed 50-vertex multigraph with loops and multi-edges.
pub fn fixed_test_graph() -> Multigraph {
    let d: Vec<u32> = (0..50).map(|i| 1 + (i % 7) as u32).collect();
    let mut d = d;
    if d.iter().sum::<u32>() % 2 == 1 {
        d[0] += 1;
    }
    configuration_model(&d, &mut stream(0, "fixed-50", 0)).expect("valid degrees")
}

fn c15(cfg: &SuiteConfig) -> Result<Outcome> {
    let g = fixed_test_graph();
    let s = (2.0 * g.non_loop_edge_count() as f64).sqrt();
    let reps = cfg.reps(100_000);
    let a = census_replicates(cfg.seed, "c15/label", reps, DEFAULT_VERTEX_LIMIT, |rng| {
        Ok(label(&g, s, rng)?.extract_graph(1.0))
    })?;
    let b = census_replicates(cfg.seed, "c15/sample", reps, DEFAULT_VERTEX_LIMIT, |rng| {
        canonical_sample(&g, 1.0, rng)
    })?;
    tv_outcome(&a, &b, cfg.seed, 0.02)
}

fn c16(cfg: &SuiteConfig) -> Result<Outcome> {
    let g = configuration_model(&f_star(), &mut stream(cfg.seed, "c16/fstar", 0))?;
    let deficit = tail_regularity_deficit(&g, 0.05)?;
    let hubs = configuration_model(&[100u32; 100], &mut stream(cfg.seed, "c16/hubs", 0))?;
    let deficit_hubs = tail_regularity_deficit(&hubs, 0.05)?;
    let half = deficit / 2.0;
    let ok = (half - 0.5).abs() <= 0.02 && deficit_hubs.abs() <= 0.02;
    outcome(
        ok,
        format!("F★ deficit {deficit:.4} (half-edge fraction {half:.4} ≈ 0.5), all-hub deficit {deficit_hubs:.4} ≈ 0"),
        json!({ "deficit": deficit, "half_edge_fraction": half, "all_hub_deficit": deficit_hubs }),
    )
}
