//! Command-line driver: layout single graphs, generate benchmark graphs,
//! run the multi-seed benchmark harness, emit comparison curves, and verify
//! convergence rates.

pub mod harness;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sorlayout_core::convergence::{self, default_step};
use sorlayout_core::engine::{IterationTrace, LayoutConfig, LayoutProblem, RelaxStrategy};
use sorlayout_core::io::SvgOptions;
use sorlayout_core::{self as core, Graph, SolverBackend};

use harness::{BenchSpec, DatasetSpec};

#[derive(Debug, Parser)]
#[command(name = "sorlayout", version, about = "Stress-majorization graph layout with over-relaxation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lay out one graph and write the placement (TSV), optional SVG, and trace.
    Layout(LayoutArgs),
    /// Run the (dataset x strategy x seed) benchmark grid and report ratios.
    Bench(BenchArgs),
    /// Emit stress-vs-iteration / stress-vs-time curves for plotting.
    Compare(CompareArgs),
    /// Write a generated benchmark graph as an edge list.
    Gen(GenArgs),
    /// Estimate and cross-check the convergence rate on a small graph.
    Rate(RateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyKind {
    None,
    Fixed,
    Enum,
    Prob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Auto,
    Direct,
    Cg,
}

impl From<SolverKind> for SolverBackend {
    fn from(kind: SolverKind) -> Self {
        match kind {
            SolverKind::Auto => SolverBackend::Auto,
            SolverKind::Direct => SolverBackend::Direct,
            SolverKind::Cg => SolverBackend::ConjugateGradient,
        }
    }
}

/// Flags shared by every command that runs layouts.
#[derive(Debug, Args)]
pub struct ConfigFlags {
    /// Relax-factor strategy.
    #[arg(long, value_enum, default_value = "fixed")]
    pub strategy: StrategyKind,
    /// Relax factor for the fixed strategy.
    #[arg(long, default_value_t = 1.5)]
    pub omega: f64,
    /// Candidate set for the enumerating strategy, comma-separated.
    #[arg(long)]
    pub candidates: Option<String>,
    /// Prior for the probabilistic strategy as omega:probability pairs,
    /// comma-separated.
    #[arg(long)]
    pub dist: Option<String>,
    /// Terminate when the relative stress decrease falls below this.
    #[arg(long, default_value_t = 1e-6)]
    pub rel_err: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Weights are ideal distances raised to this exponent.
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub weight_exp: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SolverKind,
}

impl ConfigFlags {
    pub fn strategy(&self) -> Result<RelaxStrategy> {
        let strategy = match self.strategy {
            StrategyKind::None => RelaxStrategy::NonSor,
            StrategyKind::Fixed => RelaxStrategy::Fixed(self.omega),
            StrategyKind::Enum => match &self.candidates {
                Some(list) => RelaxStrategy::Enumerating(parse_float_list(list)?),
                None => RelaxStrategy::enumerating_default(),
            },
            StrategyKind::Prob => match &self.dist {
                Some(list) => RelaxStrategy::Probabilistic(parse_distribution(list)?),
                None => RelaxStrategy::probabilistic_default(),
            },
        };
        strategy.validate()?;
        Ok(strategy)
    }

    pub fn layout_config(&self) -> Result<LayoutConfig> {
        let cfg = LayoutConfig {
            dimension: self.dim,
            rel_err: self.rel_err,
            max_iter: self.max_iter,
            seed: self.seed,
            strategy: self.strategy()?,
            weight_exponent: self.weight_exp,
            solver: self.solver.into(),
            record_placements: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    /// Input graph: an edge-list file, or `band:N` / `grid:N`.
    pub input: String,
    /// Placement TSV output path.
    #[arg(long, default_value = "placement.tsv")]
    pub out: PathBuf,
    /// Optional SVG rendering (2-D layouts only).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Optional per-iteration trace (JSON).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Datasets: edge-list paths or `band:N` / `grid:N`, each with an
    /// optional `@rel_err` suffix overriding --rel-err.
    #[arg(long = "dataset", required = true)]
    pub datasets: Vec<String>,
    /// Comma-separated strategies: `none`, `fixed:R`, `enum`, `prob`.
    #[arg(long, default_value = "none,fixed:0.5,fixed:1.0,fixed:1.5,prob,enum")]
    pub strategies: String,
    /// Number of seeds (runs 1..=N).
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    /// JSON report path.
    #[arg(long, default_value = "bench.json")]
    pub out: PathBuf,
    /// Optional plain-text table path (always echoed to stdout).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Worker threads for the cell pool (0 = one per CPU).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub config: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long = "dataset", required = true)]
    pub datasets: Vec<String>,
    #[arg(long, default_value = "none,fixed:1.5,prob,enum")]
    pub strategies: String,
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    /// Explicit target-stress grid, comma-separated (defaults to a geometric
    /// grid derived from the runs).
    #[arg(long)]
    pub targets: Option<String>,
    /// Curve CSV path.
    #[arg(long, default_value = "compare_curves.csv")]
    pub curves_out: PathBuf,
    /// Iterations-to-target CSV path.
    #[arg(long, default_value = "compare_targets.csv")]
    pub targets_out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub config: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Graph family.
    #[arg(value_parser = ["band", "grid"])]
    pub family: String,
    /// Vertex count.
    pub size: usize,
    /// Output path (default `<family>-<size>.edges`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Input graph (at most 100 vertices): edge-list path or `band:N` / `grid:N`.
    pub input: String,
    /// Report JSON path (also printed to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigFlags,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Layout(args) => cmd_layout(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Rate(args) => cmd_rate(args),
    }
}

/// `band:N`, `grid:N`, or an edge-list path; returns (name, graph).
pub fn load_graph(input: &str) -> Result<(String, Graph)> {
    if let Some(size) = input.strip_prefix("band:") {
        let n: usize = size.parse().context("invalid band size")?;
        return Ok((format!("band-{}", n), core::generate_band(n)?));
    }
    if let Some(size) = input.strip_prefix("grid:") {
        let n: usize = size.parse().context("invalid grid size")?;
        return Ok((format!("grid-{}", n), core::generate_grid(n)?));
    }
    let path = Path::new(input);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read graph file `{}`", input))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| input.to_string());
    Ok((name, core::parse_edge_list(&text)?))
}

fn parse_dataset_spec(spec: &str, default_rel_err: f64) -> Result<DatasetSpec> {
    let (input, rel_err) = match spec.rsplit_once('@') {
        Some((input, err)) => (
            input,
            err.parse::<f64>()
                .with_context(|| format!("invalid rel_err suffix in `{}`", spec))?,
        ),
        None => (spec, default_rel_err),
    };
    let (name, graph) = load_graph(input)?;
    Ok(DatasetSpec {
        name,
        graph,
        rel_err,
    })
}

pub fn parse_strategies(list: &str) -> Result<Vec<RelaxStrategy>> {
    let mut strategies = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let strategy = if item == "none" {
            RelaxStrategy::NonSor
        } else if item == "enum" {
            RelaxStrategy::enumerating_default()
        } else if item == "prob" {
            RelaxStrategy::probabilistic_default()
        } else if let Some(omega) = item.strip_prefix("fixed:") {
            RelaxStrategy::Fixed(omega.parse().with_context(|| format!("bad factor in `{}`", item))?)
        } else {
            bail!("unknown strategy `{}` (expected none, fixed:R, enum, prob)", item);
        };
        strategy.validate()?;
        strategies.push(strategy);
    }
    if strategies.is_empty() {
        bail!("no strategies given");
    }
    Ok(strategies)
}

fn parse_float_list(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("invalid number `{}`", s)))
        .collect()
}

fn parse_distribution(list: &str) -> Result<Vec<(f64, f64)>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (omega, p) = pair
                .split_once(':')
                .with_context(|| format!("expected omega:probability, found `{}`", pair))?;
            Ok((omega.trim().parse()?, p.trim().parse()?))
        })
        .collect()
}

fn build_pool(jobs: usize) -> Result<Option<rayon::ThreadPool>> {
    if jobs == 0 {
        return Ok(None);
    }
    Ok(Some(
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?,
    ))
}

#[derive(Serialize)]
struct TraceJson<'a> {
    dataset: &'a str,
    vertices: usize,
    strategy: String,
    seed: u64,
    rel_err: f64,
    iterations: usize,
    termination: &'a str,
    initial_stress: f64,
    final_stress: f64,
    records: Vec<TraceRecordJson>,
}

#[derive(Serialize)]
struct TraceRecordJson {
    iteration: usize,
    stress: f64,
    omega: f64,
    accepted: bool,
    wall_seconds: f64,
}

fn trace_json(name: &str, cfg: &LayoutConfig, trace: &IterationTrace) -> String {
    let value = TraceJson {
        dataset: name,
        vertices: trace.final_placement.n(),
        strategy: cfg.strategy.label(),
        seed: cfg.seed,
        rel_err: cfg.rel_err,
        iterations: trace.iterations(),
        termination: trace.reason.name(),
        initial_stress: trace.initial_stress,
        final_stress: trace.final_stress(),
        records: trace
            .records
            .iter()
            .enumerate()
            .map(|(k, r)| TraceRecordJson {
                iteration: k + 1,
                stress: r.stress,
                omega: r.omega,
                accepted: r.accepted,
                wall_seconds: r.wall_seconds,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&value).expect("trace serializes")
}

fn cmd_layout(args: LayoutArgs) -> Result<()> {
    let (name, graph) = load_graph(&args.input)?;
    let cfg = args.config.layout_config()?;
    let trace = core::run_layout(&graph, &cfg)?;
    std::fs::write(&args.out, core::write_placement_tsv(&trace.final_placement))
        .with_context(|| format!("cannot write `{}`", args.out.display()))?;
    if let Some(svg_path) = &args.svg {
        let svg = core::write_svg(&trace.final_placement, &graph, &SvgOptions::default())?;
        std::fs::write(svg_path, svg)
            .with_context(|| format!("cannot write `{}`", svg_path.display()))?;
    }
    if let Some(trace_path) = &args.trace {
        std::fs::write(trace_path, trace_json(&name, &cfg, &trace))
            .with_context(|| format!("cannot write `{}`", trace_path.display()))?;
    }
    println!(
        "{}: {} vertices, {} iterations, final stress {:.6e} ({})",
        name,
        graph.n(),
        trace.iterations(),
        trace.final_stress(),
        trace.reason.name()
    );
    Ok(())
}

fn bench_spec(
    datasets: &[String],
    strategies: &str,
    seeds: u64,
    config: &ConfigFlags,
) -> Result<BenchSpec> {
    Ok(BenchSpec {
        datasets: datasets
            .iter()
            .map(|d| parse_dataset_spec(d, config.rel_err))
            .collect::<Result<_>>()?,
        strategies: parse_strategies(strategies)?,
        seeds: BenchSpec::seed_range(seeds),
        dimension: config.dim,
        weight_exponent: config.weight_exp,
        solver: config.solver.into(),
        max_iter: config.max_iter,
    })
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let spec = bench_spec(&args.datasets, &args.strategies, args.seeds, &args.config)?;
    let report = match build_pool(args.jobs)? {
        Some(pool) => pool.install(|| harness::run_bench(&spec)),
        None => harness::run_bench(&spec),
    };
    std::fs::write(&args.out, report.to_json())
        .with_context(|| format!("cannot write `{}`", args.out.display()))?;
    let table = report.to_text_table();
    if let Some(path) = &args.table {
        std::fs::write(path, &table)
            .with_context(|| format!("cannot write `{}`", path.display()))?;
    }
    print!("{}", table);
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let spec = bench_spec(&args.datasets, &args.strategies, args.seeds, &args.config)?;
    let targets = match &args.targets {
        Some(list) => Some(parse_float_list(list)?),
        None => None,
    };
    let data = match build_pool(args.jobs)? {
        Some(pool) => pool.install(|| harness::run_compare(&spec, targets.as_deref())),
        None => harness::run_compare(&spec, targets.as_deref()),
    }?;
    std::fs::write(&args.curves_out, &data.curves_csv)
        .with_context(|| format!("cannot write `{}`", args.curves_out.display()))?;
    std::fs::write(&args.targets_out, &data.targets_csv)
        .with_context(|| format!("cannot write `{}`", args.targets_out.display()))?;
    println!(
        "wrote {} and {}",
        args.curves_out.display(),
        args.targets_out.display()
    );
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let graph = match args.family.as_str() {
        "band" => core::generate_band(args.size)?,
        "grid" => core::generate_grid(args.size)?,
        other => bail!("unknown family `{}`", other),
    };
    let path = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}-{}.edges", args.family, args.size)));
    std::fs::write(&path, core::write_edge_list(&graph))
        .with_context(|| format!("cannot write `{}`", path.display()))?;
    println!(
        "wrote {} ({} vertices, {} edges)",
        path.display(),
        graph.n(),
        graph.edges().len()
    );
    Ok(())
}

/// Rate verification is meaningful (and cheap) only at small sizes.
const RATE_MAX_VERTICES: usize = 100;

#[derive(Serialize)]
struct RateJson {
    dataset: String,
    vertices: usize,
    dimension: usize,
    seed: u64,
    rel_err: f64,
    iterations: usize,
    final_stress: f64,
    estimated_radius: f64,
    observed_rate: Option<f64>,
    fit_quality: Option<f64>,
    iterations_used: usize,
    note: Option<String>,
}

fn cmd_rate(args: RateArgs) -> Result<()> {
    let (name, graph) = load_graph(&args.input)?;
    if graph.n() > RATE_MAX_VERTICES {
        bail!(
            "rate analysis is limited to {} vertices (got {})",
            RATE_MAX_VERTICES,
            graph.n()
        );
    }
    let mut cfg = args.config.layout_config()?;
    // the rate estimate needs a tightly converged plain run
    cfg.strategy = RelaxStrategy::NonSor;
    cfg.rel_err = cfg.rel_err.min(1e-10);
    cfg.record_placements = true;

    let problem = LayoutProblem::new(graph.clone(), cfg.weight_exponent)?;
    let trace = problem.run(&cfg)?;

    // polish the fixed point well past the traced run
    let mut x_star = trace.final_placement.clone();
    for _ in 0..500 {
        let next = problem.step(&x_star, SolverBackend::Direct, 1e-14)?;
        let moved = convergence::aligned_distance(&next, &x_star);
        x_star = next;
        if moved < 1e-15 * (1.0 + x_star.norm()) {
            break;
        }
    }

    let estimated_radius =
        convergence::estimate_spectral_radius_of(&problem, &cfg, &x_star, default_step(&x_star))?;

    let (observed_rate, fit_quality, iterations_used, note) =
        match convergence::observed_rate(&trace, &x_star) {
            Ok(fit) => (
                Some(fit.rate),
                Some(fit.fit_quality),
                fit.iterations_used,
                None,
            ),
            Err(core::Error::InsufficientTail { usable, needed }) => (
                None,
                None,
                usable,
                Some(format!(
                    "no fittable tail: {} usable points (need {}); the run converged in finitely many steps",
                    usable, needed
                )),
            ),
            Err(e) => return Err(e.into()),
        };

    let out = RateJson {
        dataset: name,
        vertices: graph.n(),
        dimension: cfg.dimension,
        seed: cfg.seed,
        rel_err: cfg.rel_err,
        iterations: trace.iterations(),
        final_stress: trace.final_stress(),
        estimated_radius,
        observed_rate,
        fit_quality,
        iterations_used,
        note,
    };
    let json = serde_json::to_string_pretty(&out)?;
    if let Some(path) = &args.out {
        std::fs::write(path, &json).with_context(|| format!("cannot write `{}`", path.display()))?;
    }
    println!("{}", json);
    Ok(())
}
