#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use graphex::analysis::{
    bcm_block_edge_counts, census_replicates, cm_block_edge_counts, convergence_experiment,
    pa_block_edge_counts, BlockSpec,
};
use graphex::canon::DEFAULT_VERTEX_LIMIT;
use graphex::census::Census;
use graphex::families::{parse_degrees, parse_sequence, Instance, Model, SeqSpec};
use graphex::graphex::{Multigraphex, DEFAULT_HUB_THRESHOLD};
use graphex::measures::{levy_path_from_sequence, sample_crm, DiscreteMeasure};
use graphex::multigraph::Multigraph;
use graphex::rng::{replicates, stream};
use graphex::sampling::{canonical_sample, label, p_sample};
use graphex::suite::{run_suite, SuiteConfig};
use graphex::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "graphex",
    version,
    about = "Random multigraph models and their graphex limits"
)]
struct Cli {
    /// Master seed; every replicate draws from a stream keyed by it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file or directory (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Draw graphs from a model.
    Gen(GenArgs),
    /// Subsample a stored graph, or draw from a graphex process.
    Sample(SampleArgs),
    /// Census of canonical samples of a model or of a graphex process.
    Census(CensusArgs),
    /// Compare a model's canonical samples with a graphex process.
    Converge(ConvergeArgs),
    /// Check the integrability conditions of a graphex.
    Validate(ValidateArgs),
    /// Run the acceptance suite.
    Suite(SuiteArgs),
    /// Poisson block test for cm, pa or bcm.
    Blocks(BlocksArgs),
    /// Lévy path of a degree sequence or a completely random measure.
    Levy(LevyArgs),
}

#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// Experiment config (JSON) holding a `model` object.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["cm", "ecm", "pa", "grg", "bcm"])]
    model: Option<String>,
    /// Degree sequence file (cm, ecm).
    #[arg(long)]
    degrees: Option<PathBuf>,
    /// Attachment offsets, one per vertex (pa).
    #[arg(long)]
    delta: Option<PathBuf>,
    /// Total number of edges drawn (pa).
    #[arg(long)]
    m: Option<u64>,
    /// Vertex weights (grg).
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Degrees of the first side (bcm).
    #[arg(long)]
    side1: Option<PathBuf>,
    /// Degrees of the second side (bcm).
    #[arg(long)]
    side2: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    reps: usize,
}

#[derive(Args)]
struct SampleArgs {
    /// Multigraph JSON to subsample.
    #[arg(long, conflicts_with = "graphex")]
    graph: Option<PathBuf>,
    /// Graphex spec JSON to draw GP_t from.
    #[arg(long)]
    graphex: Option<PathBuf>,
    /// Canonical window: keep vertices w.p. t/√(2e(G)), or GP_t.
    #[arg(long)]
    t: Option<f64>,
    /// Explicit p-sampling probability.
    #[arg(long, conflicts_with = "t")]
    p: Option<f64>,
    /// Emit the labeled point configuration (CSV) instead of a graph.
    #[arg(long)]
    adjacency: bool,
    #[arg(long, default_value_t = 1)]
    reps: usize,
}

#[derive(Args)]
struct CensusArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Graphex spec JSON; replaces the model.
    #[arg(long)]
    graphex: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_VERTEX_LIMIT)]
    vertex_limit: usize,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Graphex spec JSON, or `auto` for the model's limit.
    #[arg(long)]
    graphex: Option<String>,
    /// Sampling window (default 1).
    #[arg(long)]
    t: Option<f64>,
    /// Replicates per side (default 10000).
    #[arg(long)]
    reps: Option<usize>,
    /// Pass when the TV estimate is at most this (default 0.05).
    #[arg(long)]
    threshold: Option<f64>,
    /// Hub threshold for the limit, relative to √ℓ (default 0.1).
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, conflicts_with = "degrees")]
    graphex: Option<PathBuf>,
    /// Validate the configuration-model limit of this degree sequence.
    #[arg(long)]
    degrees: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_HUB_THRESHOLD)]
    tau: f64,
    /// Grid points for closure-defined kernels.
    #[arg(long, default_value_t = 400)]
    resolution: usize,
}

#[derive(Args)]
struct SuiteArgs {
    /// Multiplies every replicate count.
    #[arg(long, default_value_t = 1.0)]
    reps_scale: f64,
    /// Run one group only: cm, pa, grg, bcm, graphex, sampling.
    #[arg(long)]
    only: Option<String>,
    /// Do not fail criteria that exceed their time budget.
    #[arg(long)]
    ignore_runtime: bool,
}

#[derive(Args)]
struct BlocksArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// JSON list of index lists. Indices are half-edges for cm and bcm,
    /// vertices for pa.
    #[arg(long)]
    blocks: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
}

#[derive(Args)]
struct LevyArgs {
    /// Degree sequence: path of (1/√ℓ) Σ d_i 1{U_i <= t}.
    #[arg(long, conflicts_with = "measure")]
    degrees: Option<PathBuf>,
    /// Measure JSON or CSV for a CRM path (drift from `a` or --drift).
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long)]
    drift: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
}

/// Outcome of a command: a statistical failure exits with 1.
enum Status {
    Pass,
    Fail,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn seq(path: &Path) -> Result<SeqSpec, Error> {
    Ok(SeqSpec::List(parse_sequence(&read(path)?)?))
}

/// Experiment config file; every field is optional and flags override it.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    model: Option<Model>,
    graphex: Option<Value>,
    t: Option<f64>,
    reps: Option<usize>,
    threshold: Option<f64>,
    tau: Option<f64>,
}

fn load_config(args: &ModelArgs) -> Result<ExperimentConfig, Error> {
    match &args.config {
        Some(p) => Ok(serde_json::from_str(&read(p)?)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn resolve_model(args: &ModelArgs, cfg: &ExperimentConfig) -> Result<Model, Error> {
    let need = |p: &Option<PathBuf>, flag: &str| -> Result<SeqSpec, Error> {
        match p {
            Some(p) => seq(p),
            None => Err(config_error(format!("--{flag} is required for this model"))),
        }
    };
    let Some(kind) = &args.model else {
        return cfg
            .model
            .clone()
            .ok_or_else(|| config_error("give --model or a config with a model"));
    };
    Ok(match kind.as_str() {
        "cm" => Model::Cm {
            degrees: need(&args.degrees, "degrees")?,
        },
        "ecm" => Model::Ecm {
            degrees: need(&args.degrees, "degrees")?,
        },
        "pa" => Model::Pa {
            delta: need(&args.delta, "delta")?,
            m: args
                .m
                .ok_or_else(|| config_error("--m is required for pa"))?,
        },
        "grg" => Model::Grg {
            weights: need(&args.weights, "weights")?,
        },
        "bcm" => Model::Bcm {
            side1: need(&args.side1, "side1")?,
            side2: need(&args.side2, "side2")?,
        },
        _ => unreachable!(),
    })
}

fn load_graphex(path: &Path) -> Result<Multigraphex, Error> {
    Multigraphex::from_json(&read(path)?)
}

fn config_hash(seed: u64, parameters: &Value) -> String {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(parameters.to_string().as_bytes());
    hex::encode(h.finalize())
}

fn report(experiment: &str, seed: u64, parameters: Value, body: Value) -> Value {
    let mut r = json!({
        "experiment": experiment,
        "version": VERSION,
        "seed": seed,
        "config_hash": config_hash(seed, &parameters),
        "parameters": parameters,
    });
    if let (Value::Object(r), Value::Object(b)) = (&mut r, body) {
        r.extend(b);
    }
    r
}

struct Output {
    out: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> Result<(), Error> {
        match &self.out {
            Some(p) => fs::write(p, text)?,
            None => {
                let mut s = std::io::stdout().lock();
                s.write_all(text.as_bytes())?;
                if !text.ends_with('\n') {
                    s.write_all(b"\n")?;
                }
            }
        }
        Ok(())
    }

    fn json(&self, v: &Value) -> Result<(), Error> {
        self.emit(&serde_json::to_string_pretty(v)?)
    }

    fn dir(&self) -> Result<&Path, Error> {
        let p = self
            .out
            .as_deref()
            .ok_or_else(|| config_error("--out DIR is required for multi-file output"))?;
        fs::create_dir_all(p)?;
        Ok(p)
    }
}

fn census_csv(c: &Census) -> Result<String, Error> {
    let mut buf = Vec::new();
    c.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

fn summary_row(r: usize, g: &Multigraph) -> String {
    let max_deg = g.degrees().into_iter().max().unwrap_or(0);
    format!(
        "{r},{},{},{},{}\n",
        g.n_vertices(),
        g.non_loop_edge_count(),
        g.loop_count(),
        max_deg
    )
}

const SUMMARY_HEADER: &str = "replicate,vertices,edges,loops,max_degree\n";

fn cmd_gen(a: &GenArgs, seed: u64, fmt: Format, out: &Output) -> Result<Status, Error> {
    let cfg = load_config(&a.model)?;
    let inst = resolve_model(&a.model, &cfg)?.instance()?;
    if a.reps == 0 {
        return Err(config_error("--reps must be at least 1"));
    }
    let graphs = replicates(seed, &format!("gen-{}", inst.name()), a.reps, |rng, _| {
        inst.draw(rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let mut summary = String::from(SUMMARY_HEADER);
    for (r, g) in graphs.iter().enumerate() {
        summary.push_str(&summary_row(r, g));
    }
    if fmt == Format::Csv {
        out.emit(&summary)?;
    } else if a.reps == 1 {
        out.emit(&graphs[0].to_json())?;
    } else {
        let dir = out.dir()?;
        for (r, g) in graphs.iter().enumerate() {
            fs::write(dir.join(format!("graph_{r:05}.json")), g.to_json())?;
        }
        fs::write(dir.join("summary.csv"), summary)?;
    }
    Ok(Status::Pass)
}

type Draw = dyn Fn(&mut graphex::rng::Rng) -> graphex::Result<Multigraph> + Sync;

fn cmd_sample(a: &SampleArgs, seed: u64, fmt: Format, out: &Output) -> Result<Status, Error> {
    let draw: Box<Draw> = match (&a.graph, &a.graphex) {
        (Some(p), _) => {
            let g = Multigraph::from_json(&read(p)?)?;
            if a.adjacency {
                let t = a.t.ok_or_else(|| config_error("--adjacency needs --t"))?;
                let s = (2.0 * g.non_loop_edge_count() as f64).sqrt();
                let xi = label(&g, s, &mut stream(seed, "sample-label", 0))?;
                let mut restricted = graphex::sampling::AdjacencyMeasure::new(t);
                for p in xi.points.iter().filter(|p| p.y < t) {
                    restricted.push(p.x, p.y, p.mult);
                }
                return emit_adjacency(&restricted, out);
            }
            match (a.t, a.p) {
                (Some(t), None) => Box::new(move |rng| canonical_sample(&g, t, rng)),
                (None, Some(p)) => Box::new(move |rng| p_sample(&g, p, rng)),
                _ => return Err(config_error("give exactly one of --t and --p")),
            }
        }
        (None, Some(p)) => {
            let gx = load_graphex(p)?;
            let t = a.t.ok_or_else(|| config_error("--graphex needs --t"))?;
            if a.adjacency {
                let xi = gx.sample_adjacency(t, &mut stream(seed, "sample-gp", 0))?;
                return emit_adjacency(&xi, out);
            }
            Box::new(move |rng| gx.sample_gp(t, rng))
        }
        (None, None) => return Err(config_error("give --graph or --graphex")),
    };
    if a.reps == 1 && fmt == Format::Json {
        let g = draw(&mut stream(seed, "sample", 0))?;
        return out.emit(&g.to_json()).map(|_| Status::Pass);
    }
    let c = census_replicates(seed, "sample", a.reps, DEFAULT_VERTEX_LIMIT, |rng| {
        draw(rng)
    })?;
    emit_census(&c, fmt, out)?;
    Ok(Status::Pass)
}

fn emit_adjacency(xi: &graphex::sampling::AdjacencyMeasure, out: &Output) -> Result<Status, Error> {
    let mut buf = Vec::new();
    xi.write_csv(&mut buf)?;
    out.emit(&String::from_utf8(buf).expect("csv is utf-8"))?;
    Ok(Status::Pass)
}

fn emit_census(c: &Census, fmt: Format, out: &Output) -> Result<(), Error> {
    match fmt {
        Format::Json => out.emit(&c.to_json()),
        Format::Csv => out.emit(&census_csv(c)?),
    }
}

fn cmd_census(a: &CensusArgs, seed: u64, fmt: Format, out: &Output) -> Result<Status, Error> {
    let t = a.t;
    let c = if let Some(p) = &a.graphex {
        let gx = load_graphex(p)?;
        census_replicates(seed, "census-graphex", a.reps, a.vertex_limit, |rng| {
            gx.sample_gp(t, rng)
        })?
    } else {
        let cfg = load_config(&a.model)?;
        let inst = resolve_model(&a.model, &cfg)?.instance()?;
        census_replicates(
            seed,
            &format!("census-{}", inst.name()),
            a.reps,
            a.vertex_limit,
            |rng| {
                let g = inst.draw(rng)?;
                canonical_sample(&g, t, rng)
            },
        )?
    };
    emit_census(&c, fmt, out)?;
    Ok(Status::Pass)
}

fn cmd_converge(a: &ConvergeArgs, seed: u64, out: &Output) -> Result<Status, Error> {
    let cfg = load_config(&a.model)?;
    let model = resolve_model(&a.model, &cfg)?;
    let inst = model.instance()?;
    let t = a.t.or(cfg.t).unwrap_or(1.0);
    let reps = a.reps.or(cfg.reps).unwrap_or(10_000);
    let threshold = a.threshold.or(cfg.threshold).unwrap_or(0.05);
    let tau = a.tau.or(cfg.tau).unwrap_or(DEFAULT_HUB_THRESHOLD);
    if reps == 0 {
        return Err(config_error("reps must be at least 1"));
    }
    let graphex_value = match (&a.graphex, &cfg.graphex) {
        (Some(s), _) if s != "auto" => serde_json::from_str(&read(Path::new(s))?)?,
        (Some(_), _) | (None, None) => Value::String("auto".into()),
        (None, Some(v)) => v.clone(),
    };
    let gx = match &graphex_value {
        Value::String(s) if s == "auto" => inst.limit(tau)?,
        v => Multigraphex::from_spec(&serde_json::from_value(v.clone())?)?,
    };
    let r = convergence_experiment(&inst, &gx, t, reps, seed, DEFAULT_VERTEX_LIMIT).map_err(
        |e| match e {
            Error::RateExceedsOne { .. } => config_error(format!("{e}")),
            e => e,
        },
    )?;
    let pass = r.tv.value <= threshold;
    let parameters = json!({
        "model": model,
        "graphex": gx.to_spec().map(|s| serde_json::to_value(s).unwrap_or(Value::Null)).unwrap_or(graphex_value),
        "t": t, "reps": reps, "threshold": threshold, "tau": tau,
    });
    let body = json!({
        "statistic": r.tv.value,
        "ci": [(r.tv.value - r.tv.half_width).max(0.0), r.tv.value + r.tv.half_width],
        "reference": threshold,
        "pass": pass,
        "classes": { "model": r.model.n_classes(), "graphex": r.graphex.n_classes() },
    });
    let rep = report("converge", seed, parameters, body);
    match &out.out {
        Some(_) => {
            let dir = out.dir()?;
            fs::write(dir.join("report.json"), serde_json::to_string_pretty(&rep)?)?;
            fs::write(dir.join("census_model.csv"), census_csv(&r.model)?)?;
            fs::write(dir.join("census_graphex.csv"), census_csv(&r.graphex)?)?;
        }
        None => out.json(&rep)?,
    }
    Ok(if pass { Status::Pass } else { Status::Fail })
}

fn cmd_validate(a: &ValidateArgs, seed: u64, out: &Output) -> Result<Status, Error> {
    let (gx, source) = match (&a.graphex, &a.degrees) {
        (Some(p), _) => (load_graphex(p)?, json!({ "graphex": p })),
        (None, Some(p)) => (
            graphex::graphex::limit_of_cm(&parse_degrees(&read(p)?)?, a.tau)?,
            json!({ "degrees": p, "tau": a.tau }),
        ),
        (None, None) => return Err(config_error("give --graphex or --degrees")),
    };
    let rep = gx.validation_report(a.resolution);
    let pass = rep.passed;
    let body = json!({ "pass": pass, "report": rep });
    out.json(&report("validate", seed, source, body))?;
    if !pass {
        let failed: Vec<&str> = rep
            .failures()
            .iter()
            .map(|c| c.condition.as_str())
            .collect();
        eprintln!("validation failed: {}", failed.join(", "));
    }
    Ok(if pass { Status::Pass } else { Status::Fail })
}

fn cmd_suite(a: &SuiteArgs, seed: u64, fmt: Format, out: &Output) -> Result<Status, Error> {
    if !(a.reps_scale > 0.0) {
        return Err(config_error("--reps-scale must be positive"));
    }
    if let Some(g) = &a.only {
        if !["cm", "pa", "grg", "bcm", "graphex", "sampling"].contains(&g.as_str()) {
            return Err(config_error(format!("unknown group {g:?}")));
        }
    }
    let cfg = SuiteConfig {
        seed,
        reps_scale: a.reps_scale,
        only: a.only.clone(),
        enforce_runtime: !a.ignore_runtime,
    };
    let r = run_suite(&cfg, |c| eprintln!("{}", c.line()));
    match fmt {
        Format::Json => {
            let params = json!({ "reps_scale": a.reps_scale, "only": a.only, "enforce_runtime": cfg.enforce_runtime });
            out.json(&report("suite", seed, params, serde_json::to_value(&r)?))?
        }
        Format::Csv => {
            let mut s = String::from("criterion,name,group,pass,runtime_secs,budget_secs\n");
            for c in &r.criteria {
                s.push_str(&format!(
                    "{},{},{},{},{:.3},{}\n",
                    c.id, c.name, c.group, c.passed, c.runtime_secs, c.budget_secs
                ));
            }
            out.emit(&s)?
        }
    }
    Ok(if r.passed { Status::Pass } else { Status::Fail })
}

fn cmd_blocks(a: &BlocksArgs, seed: u64, out: &Output) -> Result<Status, Error> {
    let cfg = load_config(&a.model)?;
    let model = resolve_model(&a.model, &cfg)?;
    let blocks = BlockSpec::new(serde_json::from_str(&read(&a.blocks)?)?)?;
    let r = match model.instance()? {
        Instance::Cm(d) => cm_block_edge_counts(&d, &blocks, a.reps, seed)?,
        Instance::Pa(delta, m) => pa_block_edge_counts(&delta, m, &blocks, a.reps, seed)?,
        Instance::Bcm(s1, s2) => bcm_block_edge_counts(&s1, &s2, &blocks, a.reps, seed)?,
        other => return Err(config_error(format!("no block test for {}", other.name()))),
    };
    let body = json!({
        "statistic": r.tv_to_reference(),
        "means": r.means(),
        "reference": r.rates,
        "counts": r,
    });
    let params = json!({ "model": model, "blocks": blocks.blocks(), "reps": a.reps });
    out.json(&report("blocks", seed, params, body))?;
    Ok(Status::Pass)
}

fn cmd_levy(a: &LevyArgs, seed: u64, out: &Output) -> Result<Status, Error> {
    let mut rng = stream(seed, "levy", 0);
    let path = match (&a.degrees, &a.measure) {
        (Some(p), _) => levy_path_from_sequence(&parse_degrees(&read(p)?)?, &mut rng)?,
        (None, Some(p)) => {
            let text = read(p)?;
            let (rho, a_file) = if text.trim_start().starts_with('{') {
                DiscreteMeasure::from_json(&text)?
            } else {
                (DiscreteMeasure::read_csv(text.as_bytes())?, None)
            };
            let drift = a.drift.or(a_file).unwrap_or(0.0);
            sample_crm(&rho, drift, a.horizon, &mut rng)?.to_path()
        }
        (None, None) => return Err(config_error("give --degrees or --measure")),
    };
    let mut s = String::from("t,value\n");
    for (t, y) in path.samples(a.points.max(2)) {
        s.push_str(&format!("{t},{y}\n"));
    }
    out.emit(&s)?;
    Ok(Status::Pass)
}

fn run(cli: Cli) -> Result<Status, Error> {
    let seed = cli.seed.ok_or_else(|| config_error("--seed is required"))?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| config_error(format!("thread pool: {e}")))?;
    }
    let out = Output {
        out: cli.out.clone(),
    };
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, seed, cli.format, &out),
        Command::Sample(a) => cmd_sample(a, seed, cli.format, &out),
        Command::Census(a) => cmd_census(a, seed, cli.format, &out),
        Command::Converge(a) => cmd_converge(a, seed, &out),
        Command::Validate(a) => cmd_validate(a, seed, &out),
        Command::Suite(a) => cmd_suite(a, seed, cli.format, &out),
        Command::Blocks(a) => cmd_blocks(a, seed, &out),
        Command::Levy(a) => cmd_levy(a, seed, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
